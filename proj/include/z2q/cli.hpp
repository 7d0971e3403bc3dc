#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "z2q/ensemble.hpp"
#include "z2q/lattice.hpp"
#include "z2q/quantum.hpp"

namespace z2q::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kUsageError = 2,
  kCapExceeded = 3,
  kIoError = 4,
  kNonConvergence = 5,
};

enum class Command { Exact, Mcmc, Adiabatic, Sample, Analyze };

/// Bad or inconsistent command-line input, detected before any computation.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run needs, validated up front.
struct RunSpec {
  Command command = Command::Exact;
  std::vector<int> dims;
  Boundary boundary = Boundary::Open;
  std::vector<double> betas;
  std::vector<double> times;
  double dt = 0.2;
  StartKind start = StartKind::Hot;
  std::size_t shots = 0;
  std::uint64_t seed = 1;
  std::size_t n_configs = 1000;
  std::size_t n_therm = 100;
  std::size_t stride = 10;
  std::vector<std::string> observables;
  std::optional<ErrorMethod> method;  // empty: sampler default
  std::string out;
  std::string ensemble_path;
};

/// Parses argv (argv[0] is the program name). Throws UsageError, or
/// CLI::ParseError subclasses for help/version requests.
RunSpec parse(int argc, const char* const* argv);

/// Checks cross-field consistency for spec.command. Throws UsageError.
void validate(const RunSpec& spec);

/// Comment lines recording every parameter of the run.
std::string reproducibility_header(const RunSpec& spec);

std::string run_exact(const RunSpec& spec);
std::string run_mcmc(const RunSpec& spec, std::ostream& log);
std::string run_adiabatic(const RunSpec& spec);
std::string run_sample(const RunSpec& spec, std::ostream& log);
std::string run_analyze(const RunSpec& spec);

/// Full driver: parse, validate, run, write CSV to --out or `out`. Returns
/// one of ExitCode.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace z2q::cli
