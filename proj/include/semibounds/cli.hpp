#pragma once

// Command-line front end. Kept as a library so tests can drive it in-process.
//
// Exit codes:
//   0  success
//   1  verification failure (a gap or violation beyond 1e-9)
//   2  invalid arguments, reported before any computation
//   3  domain error: infeasible spec, degenerate strike, oracle infeasible
//   4  output file could not be written

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semibounds/kernels.hpp"

namespace semibounds::cli {

enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kBadArguments = 2,
  kDomainError = 3,
  kIoError = 4,
};

enum class Command { Bounds, Extremal, Verify, Sweep };
enum class Format { Json, Csv };

struct CliConfig {
  Command command = Command::Bounds;
  double mean = 0.0;
  double std_dev = 0.0;
  std::optional<double> strike;
  std::optional<double> strike_min;
  std::optional<double> strike_max;
  std::size_t steps = 0;
  std::optional<double> tail_prob;
  std::size_t grid_points = 200;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  bool exclude_extremal = false;
  kernels::Kernel kernel = kernels::Kernel::Auto;
  std::optional<std::string> output_path;
  std::optional<Format> format;  // per-command default when absent
};

/// Exact CSV header written by `sweep`.
inline constexpr const char* kSweepHeader = "c,scarf_min,lo_max,branch,p_opt,dlp_upper_at_pstar";

/// `%.12g` rendering used for every emitted number.
std::string format_number(double v);

/// The value a reader recovers from format_number(v).
double round_to_emitted(double v);

/// Parses argv (without the program name) and runs the command.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs an already-parsed configuration.
int run(const CliConfig& config, std::ostream& out, std::ostream& err);

}  // namespace semibounds::cli
