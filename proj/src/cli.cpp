#include "z2q/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <mutex>
#include <thread>

#include "z2q/classical.hpp"
#include "z2q/errors.hpp"

namespace z2q::cli {

namespace {

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + num(xs[i]);
  return s;
}

std::string join(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Exact: return "exact";
    case Command::Mcmc: return "mcmc";
    case Command::Adiabatic: return "adiabatic";
    case Command::Sample: return "sample";
    case Command::Analyze: return "analyze";
  }
  return "?";
}

std::string start_name(StartKind k) { return k == StartKind::Hot ? "hot" : "cold"; }

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. Results
// are indexed, so output order never depends on scheduling.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, Fn fn) {
  std::vector<T> out(n);
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct Flags {
  std::vector<std::string> dims;
  std::string boundary = "open";
  std::string preset;
  std::optional<double> beta;
  std::vector<double> beta_grid;
  std::optional<double> time;
  std::vector<double> time_grid;
  double dt = 0.2;
  std::string start = "hot";
  std::size_t shots = 0;
  std::uint64_t seed = 1;
  std::size_t n_configs = 1000;
  std::size_t n_therm = 100;
  std::size_t stride = 10;
  std::vector<std::string> observables;
  std::string method = "auto";
  std::string out;
  std::string ensemble;
};

struct App {
  CLI::App app{"Quantum sampling of Z2 lattice gauge configurations", "z2q"};
  Flags f;
  CLI::App* sub_exact = nullptr;
  CLI::App* sub_mcmc = nullptr;
  CLI::App* sub_adiabatic = nullptr;
  CLI::App* sub_sample = nullptr;
  CLI::App* sub_analyze = nullptr;

  App() {
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--run-file", "", "key=value file mirroring the command-line flags");

    auto* dims = app.add_option("--dims", f.dims, "sites per direction, e.g. 2,2,2,2")->delimiter(',');
    app.add_option("--boundary", f.boundary, "open or periodic")
        ->check(CLI::IsMember({"open", "periodic"}));
    app.add_option("--preset", f.preset, "hypercube: dims 2,2,2,2 with open boundary")
        ->check(CLI::IsMember({"hypercube"}))
        ->excludes(dims);
    app.add_option("--beta", f.beta, "inverse coupling");
    app.add_option("--beta-grid", f.beta_grid, "comma-separated beta values")->delimiter(',');
    app.add_option("--T", f.time, "total adiabatic time");
    app.add_option("--T-grid", f.time_grid, "comma-separated adiabatic times")->delimiter(',');
    app.add_option("--dt", f.dt, "Trotter step")->capture_default_str();
    app.add_option("--start", f.start, "hot or cold")->check(CLI::IsMember({"hot", "cold"}));
    app.add_option("--shots", f.shots, "measurement shots");
    app.add_option("--seed", f.seed, "random seed");
    app.add_option("--n-configs", f.n_configs, "stored MCMC configurations");
    app.add_option("--n-therm", f.n_therm, "MCMC thermalization sweeps");
    app.add_option("--stride", f.stride, "MCMC sweeps between stored configurations");
    app.add_option("--observable", f.observables, "plaquette, plaquettes, action_density")
        ->delimiter(',')
        ->check(CLI::IsMember({"plaquette", "plaquettes", "action_density"}));
    app.add_option("--method", f.method, "auto, plain, jackknife or binned")
        ->check(CLI::IsMember({"auto", "plain", "jackknife", "binned"}));
    app.add_option("--out", f.out, "output path");

    sub_exact = app.add_subcommand("exact", "brute-force plaquette expectation over a beta grid");
    sub_mcmc = app.add_subcommand("mcmc", "classical Glauber-dynamics baseline ensemble");
    sub_adiabatic = app.add_subcommand("adiabatic", "Trotterized adiabatic ground-state runs");
    sub_sample = app.add_subcommand("sample", "adiabatic run followed by measurement shots");
    sub_analyze = app.add_subcommand("analyze", "re-analyze a stored ensemble");
    sub_analyze->add_option("ensemble", f.ensemble, "ensemble file")->required();
  }

  RunSpec spec() const {
    RunSpec s;
    if (sub_exact->parsed()) s.command = Command::Exact;
    if (sub_mcmc->parsed()) s.command = Command::Mcmc;
    if (sub_adiabatic->parsed()) s.command = Command::Adiabatic;
    if (sub_sample->parsed()) s.command = Command::Sample;
    if (sub_analyze->parsed()) s.command = Command::Analyze;

    if (f.preset == "hypercube") {
      s.dims = {2, 2, 2, 2};
      s.boundary = Boundary::Open;
    } else {
      for (const auto& item : f.dims) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || ptr != item.data() + item.size()) {
          throw UsageError("bad --dims entry '" + item + "'");
        }
        s.dims.push_back(v);
      }
      s.boundary = parse_boundary(f.boundary);
    }
    if (f.beta) s.betas.push_back(*f.beta);
    s.betas.insert(s.betas.end(), f.beta_grid.begin(), f.beta_grid.end());
    if (f.time) s.times.push_back(*f.time);
    s.times.insert(s.times.end(), f.time_grid.begin(), f.time_grid.end());
    s.dt = f.dt;
    s.start = f.start == "cold" ? StartKind::Cold : StartKind::Hot;
    s.shots = f.shots;
    s.seed = f.seed;
    s.n_configs = f.n_configs;
    s.n_therm = f.n_therm;
    s.stride = f.stride;
    s.observables = f.observables;
    if (f.method != "auto") s.method = parse_method(f.method);
    s.out = f.out;
    s.ensemble_path = f.ensemble;
    return s;
  }
};

Lattice lattice_of(const RunSpec& spec) { return Lattice(spec.dims, spec.boundary); }

std::string estimate_header() { return "beta,observable,mean,error,n_samples,method\n"; }

std::string estimate_row(double beta, const std::string& name, const ObservableEstimate& e) {
  return num(beta) + "," + name + "," + num(e.mean) + "," + num(e.error) + "," +
         std::to_string(e.n_samples) + "," + to_string(e.method) + "\n";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EnsembleFormatError(EnsembleFormatError::Kind::Io, "cannot write " + path);
  out << text;
  if (!out) throw EnsembleFormatError(EnsembleFormatError::Kind::Io, "write failed for " + path);
}

}  // namespace

RunSpec parse(int argc, const char* const* argv) {
  App a;
  a.app.parse(argc, argv);
  return a.spec();
}

void validate(const RunSpec& spec) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw UsageError(msg);
  };
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };

  if (spec.command != Command::Analyze) {
    require(!spec.dims.empty(), "--dims or --preset is required");
    try {
      Lattice(spec.dims, spec.boundary);
    } catch (const std::exception& e) {
      throw UsageError(std::string("invalid lattice: ") + e.what());
    }
    require(!spec.betas.empty(), "--beta or --beta-grid is required");
    for (double b : spec.betas) require(finite_nonneg(b), "beta must be finite and >= 0");
  }
  switch (spec.command) {
    case Command::Exact:
      break;
    case Command::Mcmc:
      require(spec.betas.size() == 1, "mcmc takes a single --beta");
      require(spec.n_configs > 0, "--n-configs must be positive");
      require(spec.stride > 0, "--stride must be positive");
      break;
    case Command::Adiabatic:
    case Command::Sample:
      require(!spec.times.empty(), "--T or --T-grid is required");
      for (double t : spec.times) require(std::isfinite(t) && t > 0.0, "T must be positive");
      require(std::isfinite(spec.dt) && spec.dt > 0.0, "--dt must be positive");
      for (double t : spec.times) require(t / spec.dt <= 1e9, "T/dt exceeds 1e9 steps");
      if (spec.command == Command::Sample) {
        require(spec.betas.size() == 1 && spec.times.size() == 1,
                "sample takes a single --beta and --T");
        require(spec.shots > 0, "--shots must be positive");
        require(!spec.out.empty(), "sample requires --out for the ensemble file");
      }
      break;
    case Command::Analyze:
      require(!spec.ensemble_path.empty(), "analyze requires an ensemble file");
      break;
  }
}

std::string reproducibility_header(const RunSpec& spec) {
  std::string h = "# z2q " + std::string(kVersion) + "\n";
  h += "# command=" + command_name(spec.command) + "\n";
  if (spec.command == Command::Analyze) {
    h += "# ensemble=" + spec.ensemble_path + "\n";
  } else {
    h += "# dims=" + join(spec.dims) + "\n";
    h += "# boundary=" + to_string(spec.boundary) + "\n";
    h += "# beta-grid=" + join(spec.betas) + "\n";
  }
  if (spec.command == Command::Adiabatic || spec.command == Command::Sample) {
    h += "# T-grid=" + join(spec.times) + "\n";
    h += "# dt=" + num(spec.dt) + "\n";
    h += "# start=" + start_name(spec.start) + "\n";
  }
  if (spec.command == Command::Sample) h += "# shots=" + std::to_string(spec.shots) + "\n";
  if (spec.command == Command::Mcmc) {
    h += "# n-configs=" + std::to_string(spec.n_configs) + "\n";
    h += "# n-therm=" + std::to_string(spec.n_therm) + "\n";
    h += "# stride=" + std::to_string(spec.stride) + "\n";
  }
  if (spec.command == Command::Mcmc || spec.command == Command::Sample) {
    h += "# seed=" + std::to_string(spec.seed) + "\n";
  }
  if (spec.command == Command::Analyze) {
    std::vector<std::string> obs = spec.observables;
    if (obs.empty()) obs.push_back("plaquette");
    std::string s;
    for (const auto& o : obs) s += (s.empty() ? "" : ",") + o;
    h += "# observable=" + s + "\n";
    h += "# method=" + (spec.method ? to_string(*spec.method) : std::string("auto")) + "\n";
  }
  return h;
}

std::string run_exact(const RunSpec& spec) {
  const Lattice lattice = lattice_of(spec);
  const GaugeFixing gf = gauge_fix(lattice);
  std::vector<double> betas = spec.betas;
  std::sort(betas.begin(), betas.end());
  const auto obs = plaquette_observable(lattice);
  const auto values = parallel_map<double>(betas.size(), [&](std::size_t i) {
    return exact_expectation(lattice, gf, betas[i], obs);
  });
  std::string csv = reproducibility_header(spec) + "beta,P_exact\n";
  for (std::size_t i = 0; i < betas.size(); ++i) csv += num(betas[i]) + "," + num(values[i]) + "\n";
  return csv;
}

std::string run_mcmc(const RunSpec& spec, std::ostream& log) {
  const Lattice lattice = lattice_of(spec);
  const GaugeFixing gf = gauge_fix(lattice);
  const double beta = spec.betas.front();
  McmcParams params{spec.n_therm, spec.n_configs, spec.stride};
  const Ensemble ens = mcmc_run(lattice, gf, beta, params, spec.seed);
  if (!spec.out.empty()) {
    save(ens, spec.out);
    log << "wrote " << ens.configs.size() << " configurations to " << spec.out << "\n";
  }
  const auto est = estimate(ens, plaquette_observable(lattice),
                            spec.method.value_or(default_method(Sampler::Mcmc)));
  return reproducibility_header(spec) + estimate_header() + estimate_row(beta, "plaquette", est);
}

std::string run_adiabatic(const RunSpec& spec) {
  const Lattice lattice = lattice_of(spec);
  const GaugeFixing gf = gauge_fix(lattice);
  std::vector<std::pair<double, double>> grid;
  for (double b : spec.betas) {
    for (double t : spec.times) grid.emplace_back(b, t);
  }
  std::sort(grid.begin(), grid.end());

  struct Row {
    double dt = 0.0;
    std::size_t steps = 0;
    double p = 0.0;
    double norm = 0.0;
  };
  // Schedules are built up front so parameter errors surface before any run.
  std::vector<Schedule> schedules;
  for (auto [b, t] : grid) schedules.emplace_back(spec.start, b, t, spec.dt);
  const auto rows = parallel_map<Row>(grid.size(), [&](std::size_t i) {
    const StateVector state = adiabatic_evolve(lattice, gf, schedules[i]);
    return Row{schedules[i].dt(), schedules[i].steps(), expectation_plaquette(state, lattice, gf),
               state.norm()};
  });

  std::string csv = reproducibility_header(spec) + "beta,T,dt,steps,start,P,norm\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv += num(grid[i].first) + "," + num(grid[i].second) + "," + num(rows[i].dt) + "," +
           std::to_string(rows[i].steps) + "," + start_name(spec.start) + "," + num(rows[i].p) +
           "," + num(rows[i].norm) + "\n";
  }
  return csv;
}

std::string run_sample(const RunSpec& spec, std::ostream& log) {
  const Lattice lattice = lattice_of(spec);
  const GaugeFixing gf = gauge_fix(lattice);
  const double beta = spec.betas.front();
  const Schedule schedule(spec.start, beta, spec.times.front(), spec.dt);
  const StateVector state = adiabatic_evolve(lattice, gf, schedule);
  Ensemble ens = sample_configs(state, lattice, gf, spec.shots, spec.seed);
  ens.meta.beta = beta;
  ens.meta.params["T"] = num(schedule.total_time());
  ens.meta.params["dt"] = num(schedule.dt());
  ens.meta.params["steps"] = std::to_string(schedule.steps());
  ens.meta.params["start"] = start_name(spec.start);
  save(ens, spec.out);
  log << "wrote " << ens.configs.size() << " configurations to " << spec.out << "\n";

  std::string csv = reproducibility_header(spec) + estimate_header();
  if (ens.configs.size() >= 2) {
    const auto est = estimate(ens, plaquette_observable(lattice),
                              spec.method.value_or(default_method(Sampler::Quantum)));
    csv += estimate_row(beta, "plaquette", est);
  }
  return csv;
}

std::string run_analyze(const RunSpec& spec) {
  const Ensemble ens = load(spec.ensemble_path);
  const Lattice lattice(ens.meta.dims, ens.meta.boundary);
  const ErrorMethod method = spec.method.value_or(default_method(ens.meta.sampler));
  std::vector<std::string> names = spec.observables;
  if (names.empty()) names.push_back("plaquette");

  std::string csv = reproducibility_header(spec) + estimate_header();
  const double beta = ens.meta.beta;
  for (const auto& name : names) {
    if (name == "plaquette") {
      csv += estimate_row(beta, name, estimate(ens, plaquette_observable(lattice), method));
    } else if (name == "plaquettes") {
      for (std::size_t p = 0; p < lattice.num_plaquettes(); ++p) {
        csv += estimate_row(beta, "plaquette[" + std::to_string(p) + "]",
                            estimate(ens, single_plaquette_observable(lattice, p), method));
      }
    } else if (name == "action_density") {
      csv += estimate_row(beta, name,
                          estimate(ens, action_density_observable(lattice, beta), method));
    } else {
      throw UsageError("unknown observable " + name);
    }
  }
  return csv;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  App a;
  RunSpec spec;
  try {
    a.app.parse(argc, argv);
    spec = a.spec();
    validate(spec);
  } catch (const CLI::ParseError& e) {
    const int code = a.app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    std::string csv;
    bool csv_to_file = false;
    switch (spec.command) {
      case Command::Exact: csv = run_exact(spec); csv_to_file = true; break;
      case Command::Mcmc: csv = run_mcmc(spec, err); break;
      case Command::Adiabatic: csv = run_adiabatic(spec); csv_to_file = true; break;
      case Command::Sample: csv = run_sample(spec, err); break;
      case Command::Analyze: csv = run_analyze(spec); csv_to_file = true; break;
    }
    if (csv_to_file && !spec.out.empty()) {
      write_file(spec.out, csv);
    } else {
      out << csv;
    }
    return kOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const CapExceeded& e) {
    err << "size cap exceeded: " << e.what() << " (raise Z2Q_MAX_FREE_LINKS)\n";
    return kCapExceeded;
  } catch (const EnsembleFormatError& e) {
    err << "ensemble error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const NonConvergence& e) {
    err << "did not converge: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace z2q::cli
