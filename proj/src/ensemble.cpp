#include "z2q/ensemble.hpp"

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "z2q/lattice.hpp"

namespace z2q {

namespace {

using Kind = EnsembleFormatError::Kind;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string join_dims(const std::vector<int>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(dims[i]);
  }
  return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw EnsembleFormatError(Kind::MalformedHeader, "bad value for " + key + ": '" + text + "'");
  }
  return value;
}

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) dims.push_back(parse_number<int>("dims", item));
  return dims;
}

std::uint32_t crc_of(std::string_view body) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large bodies in pieces.
  constexpr std::size_t kPiece = 1u << 30;
  for (std::size_t off = 0; off < body.size(); off += kPiece) {
    const std::size_t len = std::min(kPiece, body.size() - off);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(body.data() + off), static_cast<uInt>(len));
  }
  return static_cast<std::uint32_t>(crc);
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::vector<LinkIndex> fixed_links_for(const std::vector<int>& dims, Boundary boundary) {
  const Lattice lattice(dims, boundary);
  const auto gf = gauge_fix(lattice);
  return {gf.fixed().begin(), gf.fixed().end()};
}

}  // namespace

std::string to_string(Sampler s) { return s == Sampler::Quantum ? "quantum" : "mcmc"; }
std::string to_string(Boundary b) { return b == Boundary::Open ? "open" : "periodic"; }
std::string to_string(ErrorMethod m) {
  switch (m) {
    case ErrorMethod::Plain: return "plain";
    case ErrorMethod::Jackknife: return "jackknife";
    case ErrorMethod::Binned: return "binned";
  }
  return "?";
}

Sampler parse_sampler(const std::string& s) {
  if (s == "quantum") return Sampler::Quantum;
  if (s == "mcmc") return Sampler::Mcmc;
  throw std::invalid_argument("unknown sampler '" + s + "'");
}

Boundary parse_boundary(const std::string& s) {
  if (s == "open") return Boundary::Open;
  if (s == "periodic") return Boundary::Periodic;
  throw std::invalid_argument("unknown boundary '" + s + "'");
}

ErrorMethod parse_method(const std::string& s) {
  if (s == "plain") return ErrorMethod::Plain;
  if (s == "jackknife") return ErrorMethod::Jackknife;
  if (s == "binned") return ErrorMethod::Binned;
  throw std::invalid_argument("unknown error method '" + s + "'");
}

void validate(const Ensemble& ensemble) {
  const Lattice lattice(ensemble.meta.dims, ensemble.meta.boundary);
  std::vector<LinkIndex> fixed;
  if (ensemble.meta.gauge_fixed) fixed = fixed_links_for(ensemble.meta.dims, ensemble.meta.boundary);
  for (std::size_t i = 0; i < ensemble.configs.size(); ++i) {
    const auto& c = ensemble.configs[i];
    if (c.size() != lattice.num_links()) {
      throw std::invalid_argument("config " + std::to_string(i) + " has wrong length");
    }
    for (LinkIndex n : fixed) {
      if (c[n] != 1) {
        throw std::invalid_argument("config " + std::to_string(i) + " violates gauge fixing");
      }
    }
  }
}

std::string serialize(const Ensemble& ensemble) {
  validate(ensemble);
  std::string body;
  const std::size_t n_links = ensemble.configs.empty() ? 0 : ensemble.configs.front().size();
  body.reserve(ensemble.configs.size() * (3 * n_links + 1));
  for (const auto& c : ensemble.configs) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) body += ' ';
      body += c[i] > 0 ? "+1" : "-1";
    }
    body += '\n';
  }

  std::string out;
  auto line = [&](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
  line("format_version", std::to_string(kEnsembleFormatVersion));
  line("dims", join_dims(ensemble.meta.dims));
  line("boundary", to_string(ensemble.meta.boundary));
  line("beta", format_double(ensemble.meta.beta));
  line("sampler", to_string(ensemble.meta.sampler));
  line("seed", std::to_string(ensemble.meta.seed));
  line("gauge_fixed", ensemble.meta.gauge_fixed ? "1" : "0");
  for (const auto& [k, v] : ensemble.meta.params) {
    if (k.empty() || k.find_first_of("=\n") != std::string::npos ||
        v.find('\n') != std::string::npos) {
      throw std::invalid_argument("param '" + k + "' cannot be stored in a header line");
    }
    line("param." + k, v);
  }
  line("n_configs", std::to_string(ensemble.configs.size()));
  line("checksum", hex32(crc_of(body)));
  out += body;
  return out;
}

Ensemble deserialize(const std::string& text) {
  std::map<std::string, std::string> header;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    const char c = text[pos];
    if (c == '+' || c == '-') break;
    const std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) {
      throw EnsembleFormatError(Kind::MalformedHeader, "unterminated header line");
    }
    const std::string ln = text.substr(pos, eol - pos);
    const std::size_t eq = ln.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw EnsembleFormatError(Kind::MalformedHeader, "bad header line '" + ln + "'");
    }
    const std::string key = ln.substr(0, eq);
    if (first && key != "format_version") {
      throw EnsembleFormatError(Kind::MalformedHeader, "file must start with format_version");
    }
    first = false;
    if (!header.emplace(key, ln.substr(eq + 1)).second) {
      throw EnsembleFormatError(Kind::MalformedHeader, "duplicate header key " + key);
    }
    pos = eol + 1;
  }
  if (first) throw EnsembleFormatError(Kind::MalformedHeader, "empty ensemble file");

  auto need = [&](const std::string& key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) {
      throw EnsembleFormatError(Kind::MalformedHeader, "missing header key " + key);
    }
    return it->second;
  };
  if (parse_number<int>("format_version", need("format_version")) != kEnsembleFormatVersion) {
    throw EnsembleFormatError(Kind::MalformedHeader, "unsupported format_version");
  }

  Ensemble e;
  std::size_t expected = 0;
  std::string checksum;
  try {
    e.meta.dims = parse_dims(need("dims"));
    e.meta.boundary = parse_boundary(need("boundary"));
    e.meta.beta = parse_number<double>("beta", need("beta"));
    e.meta.sampler = parse_sampler(need("sampler"));
    e.meta.seed = parse_number<std::uint64_t>("seed", need("seed"));
    expected = parse_number<std::size_t>("n_configs", need("n_configs"));
    checksum = need("checksum");
    if (auto it = header.find("gauge_fixed"); it != header.end()) {
      if (it->second != "0" && it->second != "1") {
        throw EnsembleFormatError(Kind::MalformedHeader, "gauge_fixed must be 0 or 1");
      }
      e.meta.gauge_fixed = it->second == "1";
    }
  } catch (const EnsembleFormatError&) {
    throw;
  } catch (const std::invalid_argument& err) {
    throw EnsembleFormatError(Kind::MalformedHeader, err.what());
  }
  static const std::set<std::string> known = {"format_version", "dims",     "boundary",
                                              "beta",           "sampler",  "seed",
                                              "gauge_fixed",    "n_configs", "checksum"};
  for (const auto& [k, v] : header) {
    if (k.rfind("param.", 0) == 0) {
      e.meta.params[k.substr(6)] = v;
    } else if (!known.contains(k)) {
      throw EnsembleFormatError(Kind::MalformedHeader, "unknown header key " + k);
    }
  }

  std::size_t n_links = 0;
  try {
    n_links = Lattice(e.meta.dims, e.meta.boundary).num_links();
  } catch (const std::exception& err) {
    throw EnsembleFormatError(Kind::MalformedHeader, std::string("bad lattice: ") + err.what());
  }

  const std::string_view body(text.data() + pos, text.size() - pos);
  std::size_t bpos = 0;
  std::vector<std::int8_t> values;
  while (bpos < body.size()) {
    std::size_t eol = body.find('\n', bpos);
    const bool terminated = eol != std::string_view::npos;
    if (!terminated) eol = body.size();
    const std::string_view ln = body.substr(bpos, eol - bpos);
    values.clear();
    for (std::size_t i = 0; i < ln.size();) {
      if (i + 2 > ln.size() || (ln[i] != '+' && ln[i] != '-') || ln[i + 1] != '1') {
        // A cut inside a token is a short line, anything else is garbage.
        if (!terminated && i + 2 > ln.size()) break;
        throw EnsembleFormatError(Kind::MalformedBody,
                                  "bad token in config " + std::to_string(e.configs.size()));
      }
      values.push_back(ln[i] == '+' ? 1 : -1);
      i += 2;
      if (i < ln.size()) {
        if (ln[i] != ' ') {
          throw EnsembleFormatError(Kind::MalformedBody,
                                    "bad separator in config " + std::to_string(e.configs.size()));
        }
        ++i;
      }
    }
    if (values.size() != n_links) {
      throw EnsembleFormatError(Kind::LengthMismatch,
                                "config " + std::to_string(e.configs.size()) + " has " +
                                    std::to_string(values.size()) + " links, expected " +
                                    std::to_string(n_links));
    }
    e.configs.emplace_back(values);
    bpos = terminated ? eol + 1 : eol;
  }
  if (e.configs.size() != expected) {
    throw EnsembleFormatError(Kind::LengthMismatch, "header declares " + std::to_string(expected) +
                                                        " configs, found " +
                                                        std::to_string(e.configs.size()));
  }
  if (hex32(crc_of(body)) != checksum) {
    throw EnsembleFormatError(Kind::ChecksumMismatch, "body checksum mismatch");
  }
  try {
    validate(e);
  } catch (const std::invalid_argument& err) {
    throw EnsembleFormatError(Kind::MalformedBody, err.what());
  }
  return e;
}

void save(const Ensemble& ensemble, const std::filesystem::path& path) {
  const std::string text = serialize(ensemble);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw EnsembleFormatError(Kind::Io, "cannot open " + tmp.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw EnsembleFormatError(Kind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw EnsembleFormatError(Kind::Io, "cannot rename into " + path.string());
  }
}

Ensemble load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EnsembleFormatError(Kind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw EnsembleFormatError(Kind::Io, "read failed for " + path.string());
  return deserialize(ss.str());
}

ErrorMethod default_method(Sampler sampler) {
  return sampler == Sampler::Quantum ? ErrorMethod::Plain : ErrorMethod::Binned;
}

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double plain_error(std::span<const double> x) {
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const auto n = static_cast<double>(x.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

double jackknife_error(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  std::vector<double> loo(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) loo[i] = (total - x[i]) / (n - 1.0);
  const double m = mean_of(loo);
  double ss = 0.0;
  for (double v : loo) ss += (v - m) * (v - m);
  return std::sqrt((n - 1.0) / n * ss);
}

std::vector<double> bin_means(std::span<const double> x, std::size_t width) {
  std::vector<double> out(x.size() / width);
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b] = mean_of(x.subspan(b * width, width));
  }
  return out;
}

// Double the bin width until the error changes by < 10% or fewer than 8
// bins would remain.
double binned_error(std::span<const double> x) {
  constexpr std::size_t kMinBins = 8;
  std::size_t width = 1;
  double err = plain_error(x);
  while (x.size() / (2 * width) >= kMinBins) {
    width *= 2;
    const double next = plain_error(bin_means(x, width));
    const bool plateau = err == 0.0 ? next == 0.0 : std::abs(next - err) < 0.1 * err;
    err = next;
    if (plateau) break;
  }
  return err;
}

}  // namespace

ObservableEstimate estimate(std::span<const double> samples, ErrorMethod method) {
  if (samples.size() < 2) throw std::invalid_argument("estimate needs at least 2 samples");
  ObservableEstimate est;
  est.mean = mean_of(samples);
  est.n_samples = samples.size();
  est.method = method;
  switch (method) {
    case ErrorMethod::Plain: est.error = plain_error(samples); break;
    case ErrorMethod::Jackknife: est.error = jackknife_error(samples); break;
    case ErrorMethod::Binned: est.error = binned_error(samples); break;
  }
  return est;
}

ObservableEstimate estimate(const Ensemble& ensemble, const Observable& observable,
                            ErrorMethod method) {
  std::vector<double> values;
  values.reserve(ensemble.configs.size());
  for (const auto& c : ensemble.configs) values.push_back(observable(c));
  return estimate(values, method);
}

ObservableEstimate estimate(const Ensemble& ensemble, const Observable& observable) {
  return estimate(ensemble, observable, default_method(ensemble.meta.sampler));
}

Ensemble concatenate(Ensemble a, const Ensemble& b) {
  const auto& x = a.meta;
  const auto& y = b.meta;
  if (x.dims != y.dims || x.boundary != y.boundary || x.beta != y.beta ||
      x.sampler != y.sampler || x.gauge_fixed != y.gauge_fixed) {
    throw std::invalid_argument("cannot concatenate ensembles with different metadata");
  }
  a.configs.insert(a.configs.end(), b.configs.begin(), b.configs.end());
  return a;
}

}  // namespace z2q
