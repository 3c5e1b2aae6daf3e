#pragma once

// Brute-force ground truth for the closed forms in bounds.hpp.
//
// The moment problem restricted to a finite grid is a linear program in the
// point masses. Its vertices have at most as many support points as there are
// equality constraints (3 without a tail constraint, 4 with one), so the
// optimum is found by enumerating every support subset of that size or
// smaller, solving the square system, and keeping the best nonnegative
// solution. No LP library is involved.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "semibounds/bounds.hpp"
#include "semibounds/kernels.hpp"

namespace semibounds {

class DiscreteDistribution {
 public:
  /// Throws OutOfRange unless sizes match and are nonzero, support is strictly
  /// increasing and finite, probs are nonnegative and sum to 1 within 1e-12.
  DiscreteDistribution(std::vector<double> support, std::vector<double> probs);
  explicit DiscreteDistribution(const TwoPointDistribution& d);

  std::span<const double> support() const noexcept { return support_; }
  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return support_.size(); }

  double mean() const noexcept;
  double second_moment() const noexcept;
  /// Central second moment, computed around mean().
  double variance() const noexcept;
  double prob_at_most(double c) const noexcept;
  double prob_above(double c) const noexcept;
  /// Number of points carrying probability above `threshold`.
  std::size_t effective_size(double threshold) const noexcept;

  friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

 private:
  std::vector<double> support_;
  std::vector<double> probs_;
};

double winsorized_expectation(const DiscreteDistribution& dist, Strike c) noexcept;
double expected_call(const DiscreteDistribution& dist, Strike c) noexcept;

class OracleProblem {
 public:
  /// Throws OutOfRange if the grid has fewer than 3 points, is not strictly
  /// increasing, has a point below lower_bound, or if tail_target is outside
  /// [0, 1].
  OracleProblem(MomentSpec spec, Strike strike, std::vector<double> grid,
                std::optional<double> lower_bound = std::nullopt,
                std::optional<double> tail_target = std::nullopt);

  const MomentSpec& spec() const noexcept { return spec_; }
  Strike strike() const noexcept { return strike_; }
  std::span<const double> grid() const noexcept { return grid_; }
  std::optional<double> lower_bound() const noexcept { return lower_bound_; }
  /// Target for P(X <= strike), summed over grid points <= strike.
  std::optional<double> tail_target() const noexcept { return tail_target_; }

 private:
  MomentSpec spec_;
  Strike strike_;
  std::vector<double> grid_;
  std::optional<double> lower_bound_;
  std::optional<double> tail_target_;
};

struct EnumerationStats {
  std::size_t candidates = 0;
  std::size_t ill_conditioned = 0;
};

struct OracleSolution {
  double value;  // winsorized_expectation(argmin, strike)
  DiscreteDistribution argmin;
  EnumerationStats stats;
};

/// Minimum of E(X ^ c) over grid-supported X meeting the problem's
/// constraints. Throws IllConditioned when nothing is feasible and every
/// full-size candidate system (one point per constraint) was skipped as
/// ill-conditioned; Infeasible when nothing is feasible otherwise.
OracleSolution oracle_min(const OracleProblem& problem,
                          kernels::Kernel kernel = kernels::Kernel::Auto);

/// A vertex of the feasible polytope chosen by minimising a random linear
/// objective drawn from `seed`. Throws Infeasible or IllConditioned, and
/// OutOfRange for a malformed grid.
DiscreteDistribution random_feasible(const MomentSpec& spec, std::span<const double> grid,
                                     std::optional<double> lower_bound, std::uint64_t seed,
                                     kernels::Kernel kernel = kernels::Kernel::Auto);

/// Uniform grid of n points on [max(lower_bound, m - 10 sigma), m + 10 sigma]
/// merged with `extra`. Grid points within 1e-9 (relative) of an extra point
/// are dropped so the extra point is kept exactly.
std::vector<double> make_grid(const MomentSpec& spec, std::optional<double> lower_bound,
                              std::size_t n, std::span<const double> extra = {});

/// Independent per-trial seed derived from a base seed.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) noexcept;

struct VerificationReport {
  double closed_form;
  double oracle_value;
  DiscreteDistribution oracle_distribution;
  double gap;  // oracle_value - closed_form
  std::size_t random_trials;
  double worst_violation;  // most negative slack seen; >= -1e-9 when passing

  bool passed(double tolerance = 1e-9) const noexcept;
};

struct ScarfVerifyOptions {
  std::size_t grid_points = 200;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  /// Add the closed-form extremal support to the grid.
  bool include_extremal = true;
  kernels::Kernel kernel = kernels::Kernel::Auto;
};

/// Checks scarf_min against oracle_min on a grid over [0, m + 10 sigma] and
/// against random feasible distributions. Requires mean > 0 and c > 0.
VerificationReport verify_scarf(const MomentSpec& spec, Strike c,
                                const ScarfVerifyOptions& options = {});

struct DlpVerifyOptions {
  std::size_t p0_grid = 20;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t sample_grid_points = 60;
  kernels::Kernel kernel = kernels::Kernel::Auto;
};

/// Sharpness of dlp_bounds.upper on interior p0 values (gap is the largest
/// discrepancy found) and validity of both bounds on random distributions.
VerificationReport verify_dlp(const MomentSpec& spec, Strike c,
                              const DlpVerifyOptions& options = {});

}  // namespace semibounds
