#pragma once

// Closed-form semi-parametric bounds on E(X ^ c) and E(X - c)+ for random
// variables with known mean and standard deviation.
//
// Two scales are used throughout. Raw quantities (MomentSpec, Strike,
// ScarfSolution, DlpBounds) carry the caller's price units. Standardized
// quantities (mean 0, variance 1) are plain doubles and every function taking
// them says so in its name or parameter name; StandardizedProblem is the only
// bridge between the two.

#include <optional>
#include <string_view>

#include "semibounds/errors.hpp"

namespace semibounds {

class MomentSpec {
 public:
  /// Throws InvalidSpec unless both values are finite and std_dev > 0.
  MomentSpec(double mean, double std_dev);

  double mean() const noexcept { return mean_; }
  double std_dev() const noexcept { return std_dev_; }
  double variance() const noexcept { return std_dev_ * std_dev_; }
  /// E X^2 = m^2 + sigma^2.
  double second_moment() const noexcept { return mean_ * mean_ + variance(); }

 private:
  double mean_;
  double std_dev_;
};

/// Threshold c in raw price units.
class Strike {
 public:
  /// Throws OutOfRange if value is not finite.
  explicit Strike(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

struct StandardizedProblem {
  double strike_std;       // (c - m) / sigma
  double lower_bound_std;  // -m / sigma, the image of the support bound 0
};

/// Random variable taking `low` with probability p_low and `high` otherwise.
class TwoPointDistribution {
 public:
  /// Throws OutOfRange unless low < high and 0 < p_low < 1 (all finite).
  TwoPointDistribution(double low, double high, double p_low);

  double low() const noexcept { return low_; }
  double high() const noexcept { return high_; }
  double p_low() const noexcept { return p_low_; }
  double p_high() const noexcept { return 1.0 - p_low_; }

  double mean() const noexcept;
  double variance() const noexcept;
  double winsorized(double strike) const noexcept;
  double call(double strike) const noexcept;
  /// Affine image a + b*X, b > 0.
  TwoPointDistribution affine(double shift, double scale) const;

 private:
  double low_;
  double high_;
  double p_low_;
};

/// Set of p in [0, 1] described by two endpoints and their closedness.
struct FeasibleInterval {
  double lower;
  double upper;
  bool lower_closed;
  bool upper_closed;

  bool contains(double p) const noexcept;
};

struct DlpBounds {
  double lower;
  double upper;
  double tail_prob;  // p0 = P(X > c)
};

/// Bounds on P(X <= c) for standardized X.
struct TailBounds {
  double lower;
  double upper;
};

enum class Branch { LowStrike, HighStrike, Degenerate };

std::string_view to_string(Branch b) noexcept;

struct StandardizedInf {
  double value;
  std::optional<double> p_opt;
  Branch branch;
};

struct ScarfSolution {
  Branch branch;
  std::optional<double> p_opt;
  double min_winsorized;
  double max_call;
  std::optional<TwoPointDistribution> extremal;  // raw scale
};

StandardizedProblem standardize(Strike c, const MomentSpec& spec) noexcept;

/// Unique two-point member of the unit sphere (mean 0, variance 1) with
/// P(X = low) = p. Throws OutOfRange unless 0 < p < 1.
TwoPointDistribution two_point_from_p(double p);

/// Values of P(X <= c) attainable by some mean-0 variance-1 X.
///
/// For c = 0 this returns [0, 1) as written in the source display even though
/// p = 0 is not attained by any standardized variable; callers that need
/// attainability should use the open interval.
FeasibleInterval feasible_p_interval(double c_std) noexcept;

/// L_c(p) = -sqrt(p - p^2) + c (1 - p). Throws OutOfRange unless 0 < p < 1.
double l_value(double p, double c_std);

/// Minimiser of l_value(., c): 1/2 + c / (2 sqrt(1 + c^2)).
double p_star(double c_std) noexcept;

/// 1 / (1 + mu^2), the tail parameter of the two-point variable with low
/// point -mu. Throws OutOfRange if mean_std <= 0.
double p_m(double mean_std);

/// Sharp bounds on E(X - c)+ over X with the given moments and P(X > c) = p0.
/// Throws OutOfRange unless 0 <= p0 <= 1.
DlpBounds dlp_bounds(const MomentSpec& spec, Strike c, double p0);

/// Raw-scale two-point variable with P(X > c) = p0 attaining dlp upper.
/// Requires 1 - p0 to lie in the open interior of feasible_p_interval for the
/// standardized strike; throws OutOfRange otherwise.
TwoPointDistribution dlp_extremal(const MomentSpec& spec, Strike c, double p0);

TailBounds one_sided_tail_bounds(double c_std) noexcept;

/// 2 / (1 + c^2), an upper bound on P(|X| > c); may exceed 1 for c < 1.
/// Throws OutOfRange if c_std <= 0.
double two_sided_tail_bound(double c_std);

/// inf E(X ^ c) over standardized X >= -mean_std. Throws OutOfRange if
/// mean_std <= 0. Returns branch Degenerate with value c_std if
/// c_std <= -mean_std.
StandardizedInf standardized_scarf_inf(double mean_std, double c_std);

/// Minimum of E(X ^ c) over X >= 0 with the given moments, with the two-point
/// minimiser. Throws InvalidSpec if mean <= 0.
ScarfSolution scarf_min(const MomentSpec& spec, Strike c);

/// Maximum of E(X - c)+ over X >= 0 with the given moments. Throws as
/// scarf_min, and OutOfRange if c <= 0.
double lo_max(const MomentSpec& spec, Strike c);

/// -(sigma + |m| + |c|); valid without any support constraint.
double winsorized_floor(const MomentSpec& spec, Strike c) noexcept;

/// (m^2 + sigma^2) / (2m), the strike separating the two branches.
/// Throws InvalidSpec if mean <= 0.
double threshold_strike(const MomentSpec& spec);

/// Division-free branch test: 2 m c <= m^2 + sigma^2.
bool is_low_strike(const MomentSpec& spec, Strike c) noexcept;

}  // namespace semibounds
