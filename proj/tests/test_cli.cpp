#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "z2q/classical.hpp"
#include "z2q/cli.hpp"

using namespace z2q;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "z2q");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("z2q_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// Data rows of a CSV, comments and the column header stripped.
std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit with the usage code") {
  CHECK(run({}).code == cli::kUsageError);
  CHECK(run({"bogus"}).code == cli::kUsageError);
  CHECK(run({"exact"}).code == cli::kUsageError);
  CHECK(run({"exact", "--dims", "2,2"}).code == cli::kUsageError);
  CHECK(run({"exact", "--dims", "2,x", "--beta", "0.1"}).code == cli::kUsageError);
  CHECK(run({"exact", "--dims", "2,2", "--beta", "-1"}).code == cli::kUsageError);
  CHECK(run({"exact", "--dims", "2", "--beta", "0.1"}).code == cli::kUsageError);
  CHECK(run({"exact", "--dims", "2,2", "--boundary", "periodic", "--beta", "0.1"}).code ==
        cli::kUsageError);
  CHECK(run({"exact", "--preset", "hypercube", "--dims", "2,2", "--beta", "0.1"}).code ==
        cli::kUsageError);
  CHECK(run({"adiabatic", "--dims", "2,2", "--beta", "0.1"}).code == cli::kUsageError);
  CHECK(run({"adiabatic", "--dims", "2,2", "--beta", "0.1", "--T", "5", "--start", "warm"}).code ==
        cli::kUsageError);
  CHECK(run({"adiabatic", "--dims", "2,2", "--beta", "0.1", "--T", "5", "--dt", "0"}).code ==
        cli::kUsageError);
  CHECK(run({"sample", "--dims", "2,2", "--beta", "0.1", "--T", "5", "--shots", "3"}).code ==
        cli::kUsageError);
  CHECK(run({"mcmc", "--dims", "2,2", "--beta-grid", "0.1,0.2"}).code == cli::kUsageError);
  CHECK(run({"analyze"}).code == cli::kUsageError);
  CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("exact rows") {
  const auto zero = run({"exact", "--preset", "hypercube", "--beta-grid", "0.0"});
  REQUIRE(zero.code == cli::kOk);
  auto r = rows(zero.out);
  REQUIRE(r.size() == 1);
  CHECK(r[0][0] == "0");
  CHECK(std::abs(std::stod(r[0][1])) < 1e-15);

  const auto hyper = run({"exact", "--preset", "hypercube", "--beta", "0.7"});
  r = rows(hyper.out);
  CHECK(std::abs(std::stod(r[0][1]) - 0.753) <= 0.001);

  const auto sq = run({"exact", "--dims", "2,2", "--beta-grid", "0.7,0.1"});
  r = rows(sq.out);
  REQUIRE(r.size() == 2);
  CHECK(r[0][0] == "0.1");  // sorted
  CHECK(std::stod(r[1][1]) == doctest::Approx(std::tanh(0.7)).epsilon(1e-14));
  CHECK(sq.out.find("# z2q ") == 0);
  CHECK(sq.out.find("# dims=2,2") != std::string::npos);
}

TEST_CASE("exact output is reproducible bit for bit") {
  const auto a = run({"exact", "--dims", "3,3,2", "--beta-grid", "0.3,0.9"});
  const auto b = run({"exact", "--dims", "3,3,2", "--beta-grid", "0.3,0.9"});
  CHECK(a.code == cli::kOk);
  CHECK(a.out == b.out);
}

TEST_CASE("cap violations have their own exit code") {
  setenv("Z2Q_MAX_FREE_LINKS", "10", 1);
  const auto r = run({"exact", "--preset", "hypercube", "--beta", "0.7"});
  unsetenv("Z2Q_MAX_FREE_LINKS");
  CHECK(r.code == cli::kCapExceeded);
  CHECK(r.err.find("Z2Q_MAX_FREE_LINKS") != std::string::npos);
}

TEST_CASE("run file mirrors flags") {
  TempDir dir;
  {
    std::ofstream f(dir / "run.ini");
    f << "dims=2,2\nbeta=0.7\n";
  }
  const auto r = run({"exact", "--run-file", dir / "run.ini"});
  REQUIRE(r.code == cli::kOk);
  CHECK(std::stod(rows(r.out)[0][1]) == doctest::Approx(std::tanh(0.7)));
}

TEST_CASE("adiabatic at beta 0 stays at zero plaquette") {
  const auto r = run({"adiabatic", "--dims", "2,2,2", "--beta", "0", "--T-grid", "1,3.3", "--dt",
                      "0.2"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("beta,T,dt,steps,start,P,norm") != std::string::npos);
  const auto rs = rows(r.out);
  REQUIRE(rs.size() == 2);
  for (const auto& row : rs) {
    CHECK(std::abs(std::stod(row[5])) < 1e-9);
    CHECK(row[4] == "hot");
    CHECK(std::abs(std::stod(row[6]) - 1.0) < 1e-12);
  }
  CHECK(rs[1][3] == "17");  // 3.3 / 0.2 rounds up to 17 steps
}

TEST_CASE("adiabatic writes CSV to --out") {
  TempDir dir;
  const auto r = run({"adiabatic", "--dims", "3,3", "--beta-grid", "0.2,0.5", "--T", "4",
                      "--start", "cold", "--out", dir / "a.csv"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.empty());
  const auto rs = rows(slurp(dir / "a.csv"));
  REQUIRE(rs.size() == 2);
  CHECK(rs[0][4] == "cold");
}

TEST_CASE("sample then analyze reproduces the in-memory estimate") {
  TempDir dir;
  const std::vector<std::string> args = {"sample", "--dims", "3,3", "--beta", "0.7", "--T", "20",
                                         "--shots", "500", "--seed", "42"};
  auto a = args;
  a.insert(a.end(), {"--out", dir / "s1.cfg"});
  const auto s1 = run(a);
  REQUIRE(s1.code == cli::kOk);
  auto b = args;
  b.insert(b.end(), {"--out", dir / "s2.cfg"});
  REQUIRE(run(b).code == cli::kOk);
  CHECK(slurp(dir / "s1.cfg") == slurp(dir / "s2.cfg"));

  const auto in_memory = rows(s1.out);
  REQUIRE(in_memory.size() == 1);
  const auto analyzed = run({"analyze", dir / "s1.cfg"});
  REQUIRE(analyzed.code == cli::kOk);
  const auto ar = rows(analyzed.out);
  REQUIRE(ar.size() == 1);
  CHECK(ar[0] == in_memory[0]);
  CHECK(ar[0][5] == "plain");

  const auto all = run({"analyze", dir / "s1.cfg", "--observable",
                        "plaquette,plaquettes,action_density", "--method", "jackknife"});
  REQUIRE(all.code == cli::kOk);
  const auto allr = rows(all.out);
  CHECK(allr.size() == 1 + 4 + 1);
  CHECK(allr[1][1] == "plaquette[0]");
  CHECK(allr.back()[1] == "action_density");
  CHECK(allr.back()[5] == "jackknife");
}

TEST_CASE("single shot writes one configuration line") {
  TempDir dir;
  const auto r = run({"sample", "--dims", "2,2", "--beta", "0.7", "--T", "1", "--shots", "1",
                      "--out", dir / "one.cfg"});
  REQUIRE(r.code == cli::kOk);
  const Ensemble e = load(dir / "one.cfg");
  CHECK(e.configs.size() == 1);
  const std::string text = slurp(dir / "one.cfg");
  CHECK(text.substr(text.find("\n+") + 1).find('\n') == text.size() - text.find("\n+") - 2);
}

TEST_CASE("mcmc writes an ensemble analyzed with binning") {
  TempDir dir;
  const auto r = run({"mcmc", "--dims", "3,3", "--beta", "0.7", "--n-configs", "2000",
                      "--stride", "2", "--n-therm", "20", "--seed", "5", "--out", dir / "m.cfg"});
  REQUIRE(r.code == cli::kOk);
  const auto rs = rows(r.out);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0][5] == "binned");
  CHECK(std::abs(std::stod(rs[0][2]) - std::tanh(0.7)) < 3 * std::stod(rs[0][3]));
  const auto a = run({"analyze", dir / "m.cfg"});
  CHECK(rows(a.out)[0] == rs[0]);
}

TEST_CASE("analyze surfaces file errors with the I/O code") {
  TempDir dir;
  CHECK(run({"analyze", dir / "nope.cfg"}).code == cli::kIoError);
  {
    std::ofstream f(dir / "bad.cfg");
    f << "format_version=1\ndims=2,2\n";
  }
  const auto r = run({"analyze", dir / "bad.cfg"});
  CHECK(r.code == cli::kIoError);
  CHECK(r.err.find("header") != std::string::npos);
}
