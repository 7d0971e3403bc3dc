#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "z2q/config.hpp"
#include "z2q/lattice.hpp"

namespace z2q {

enum class Sampler { Quantum, Mcmc };

struct EnsembleMeta {
  std::vector<int> dims;
  Boundary boundary = Boundary::Open;
  double beta = 0.0;
  Sampler sampler = Sampler::Quantum;
  std::uint64_t seed = 0;
  /// Fixed links of the gauge fixing used to generate the ensemble, if any.
  bool gauge_fixed = false;
  /// Free-form creation parameters (schedule, shots, stride, ...).
  std::map<std::string, std::string> params;

  friend bool operator==(const EnsembleMeta&, const EnsembleMeta&) = default;
};

/// Stored gauge configurations with provenance.
struct Ensemble {
  EnsembleMeta meta;
  std::vector<SpinConfig> configs;

  friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

/// Structural checks: config lengths match meta.dims, fixed links are +1 when
/// gauge-fixed. Throws std::invalid_argument.
void validate(const Ensemble& ensemble);

class EnsembleFormatError : public std::runtime_error {
 public:
  enum class Kind { Io, MalformedHeader, MalformedBody, LengthMismatch, ChecksumMismatch };
  EnsembleFormatError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline constexpr int kEnsembleFormatVersion = 1;

/// Text format: `key=value` header lines (format_version first), then one
/// line per config of space-separated `+1`/`-1` in link order. The header
/// carries the CRC32 of the body. Written atomically via temp file + rename.
void save(const Ensemble& ensemble, const std::filesystem::path& path);
Ensemble load(const std::filesystem::path& path);

std::string serialize(const Ensemble& ensemble);
Ensemble deserialize(const std::string& text);

using Observable = std::function<double(const SpinConfig&)>;

enum class ErrorMethod { Plain, Jackknife, Binned };

struct ObservableEstimate {
  double mean = 0.0;
  double error = 0.0;
  std::size_t n_samples = 0;
  ErrorMethod method = ErrorMethod::Plain;
};

/// Plain for quantum shots (independent), Binned for Markov chains.
ErrorMethod default_method(Sampler sampler);

ObservableEstimate estimate(std::span<const double> samples, ErrorMethod method);
ObservableEstimate estimate(const Ensemble& ensemble, const Observable& observable,
                            ErrorMethod method);
ObservableEstimate estimate(const Ensemble& ensemble, const Observable& observable);

/// Appends `b` to `a`; metadata must agree apart from seed and params.
Ensemble concatenate(Ensemble a, const Ensemble& b);

std::string to_string(Sampler s);
std::string to_string(Boundary b);
std::string to_string(ErrorMethod m);
Sampler parse_sampler(const std::string& s);
Boundary parse_boundary(const std::string& s);
ErrorMethod parse_method(const std::string& s);

}  // namespace z2q
