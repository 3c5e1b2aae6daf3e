#include "semibounds/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace semibounds {

namespace {

bool open_unit(double p) { return p > 0.0 && p < 1.0; }

// sqrt(1 + c^2) without overflow for large |c|.
double bracket(double c) { return std::hypot(1.0, c); }

// P(X <= c) and its complement for the unconstrained minimiser. Each is
// computed from a cancellation-free form so that the smaller of the two keeps
// full relative precision.
struct TailPair {
  double p;
  double q;
};

TailPair star_pair(double c) {
  const double b = bracket(c);
  if (c >= 0.0) {
    const double q = 0.5 / (b * (b + c));
    return {1.0 - q, q};
  }
  const double p = 0.5 / (b * (b - c));
  return {p, 1.0 - p};
}

TailPair mean_pair(double mu) {
  const double d = 1.0 + mu * mu;
  return {1.0 / d, (mu * mu) / d};
}

double l_value_pq(double p, double q, double c) { return -std::sqrt(p * q) + c * q; }

}  // namespace

MomentSpec::MomentSpec(double mean, double std_dev) : mean_(mean), std_dev_(std_dev) {
  if (!std::isfinite(mean) || !std::isfinite(std_dev)) {
    throw InvalidSpec("mean and standard deviation must be finite");
  }
  if (!(std_dev > 0.0)) {
    throw InvalidSpec("standard deviation must be positive");
  }
}

Strike::Strike(double value) : value_(value) {
  if (!std::isfinite(value)) throw OutOfRange("strike must be finite");
}

TwoPointDistribution::TwoPointDistribution(double low, double high, double p_low)
    : low_(low), high_(high), p_low_(p_low) {
  if (!std::isfinite(low) || !std::isfinite(high) || !(low < high)) {
    throw OutOfRange("two-point distribution needs finite low < high");
  }
  if (!open_unit(p_low)) {
    throw OutOfRange("two-point probability must lie in (0, 1)");
  }
}

double TwoPointDistribution::mean() const noexcept { return p_low_ * low_ + p_high() * high_; }

double TwoPointDistribution::variance() const noexcept {
  const double mu = mean();
  const double dl = low_ - mu;
  const double dh = high_ - mu;
  return p_low_ * dl * dl + p_high() * dh * dh;
}

double TwoPointDistribution::winsorized(double strike) const noexcept {
  return p_low_ * std::min(low_, strike) + p_high() * std::min(high_, strike);
}

double TwoPointDistribution::call(double strike) const noexcept {
  return p_low_ * std::max(low_ - strike, 0.0) + p_high() * std::max(high_ - strike, 0.0);
}

TwoPointDistribution TwoPointDistribution::affine(double shift, double scale) const {
  if (!(scale > 0.0)) throw OutOfRange("affine scale must be positive");
  return {shift + scale * low_, shift + scale * high_, p_low_};
}

bool FeasibleInterval::contains(double p) const noexcept {
  const bool above = lower_closed ? p >= lower : p > lower;
  const bool below = upper_closed ? p <= upper : p < upper;
  return above && below;
}

std::string_view to_string(Branch b) noexcept {
  switch (b) {
    case Branch::LowStrike:
      return "LowStrike";
    case Branch::HighStrike:
      return "HighStrike";
    case Branch::Degenerate:
      return "Degenerate";
  }
  return "Unknown";
}

StandardizedProblem standardize(Strike c, const MomentSpec& spec) noexcept {
  return {(c.value() - spec.mean()) / spec.std_dev(), -spec.mean() / spec.std_dev()};
}

TwoPointDistribution two_point_from_p(double p) {
  if (!open_unit(p)) throw OutOfRange("p must lie in (0, 1)");
  const double q = 1.0 - p;
  return {-std::sqrt(q / p), std::sqrt(p / q), p};
}

FeasibleInterval feasible_p_interval(double c_std) noexcept {
  const double d = 1.0 + c_std * c_std;
  if (c_std >= 0.0) return {(c_std * c_std) / d, 1.0, true, false};
  return {0.0, 1.0 / d, false, true};
}

double l_value(double p, double c_std) {
  if (!open_unit(p)) throw OutOfRange("p must lie in (0, 1)");
  return l_value_pq(p, 1.0 - p, c_std);
}

double p_star(double c_std) noexcept { return star_pair(c_std).p; }

double p_m(double mean_std) {
  if (!(mean_std > 0.0)) {
    throw OutOfRange("standardized mean must be positive for a lower-bounded two-point variable");
  }
  return mean_pair(mean_std).p;
}

DlpBounds dlp_bounds(const MomentSpec& spec, Strike c, double p0) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw OutOfRange("tail probability must lie in [0, 1]");
  const double lower = (spec.mean() - c.value()) * p0;
  return {lower, lower + spec.std_dev() * std::sqrt(p0 - p0 * p0), p0};
}

TwoPointDistribution dlp_extremal(const MomentSpec& spec, Strike c, double p0) {
  const double p = 1.0 - p0;
  const auto interval = feasible_p_interval(standardize(c, spec).strike_std);
  if (!(p > interval.lower && p < interval.upper)) {
    throw OutOfRange("1 - p0 must lie inside the feasible interval for the strike");
  }
  return two_point_from_p(p).affine(spec.mean(), spec.std_dev());
}

TailBounds one_sided_tail_bounds(double c_std) noexcept {
  const auto interval = feasible_p_interval(c_std);
  return {interval.lower, interval.upper};
}

double two_sided_tail_bound(double c_std) {
  if (!(c_std > 0.0)) throw OutOfRange("two-sided tail bound needs c > 0");
  return 2.0 / (1.0 + c_std * c_std);
}

StandardizedInf standardized_scarf_inf(double mean_std, double c_std) {
  if (!(mean_std > 0.0) || !std::isfinite(mean_std)) {
    throw OutOfRange("standardized mean must be positive");
  }
  if (c_std <= -mean_std) return {c_std, std::nullopt, Branch::Degenerate};

  // c <= (1 - mu^2) / (2 mu), rearranged; equivalent to p_m >= p_star.
  const bool low = 2.0 * mean_std * c_std <= 1.0 - mean_std * mean_std;
  const TailPair opt = low ? mean_pair(mean_std) : star_pair(c_std);
  return {l_value_pq(opt.p, opt.q, c_std), opt.p, low ? Branch::LowStrike : Branch::HighStrike};
}

bool is_low_strike(const MomentSpec& spec, Strike c) noexcept {
  return 2.0 * spec.mean() * c.value() <= spec.second_moment();
}

double threshold_strike(const MomentSpec& spec) {
  if (!(spec.mean() > 0.0)) throw InvalidSpec("mean must be positive");
  return spec.second_moment() / (2.0 * spec.mean());
}

ScarfSolution scarf_min(const MomentSpec& spec, Strike c) {
  const double m = spec.mean();
  const double s = spec.std_dev();
  if (!(m > 0.0)) throw InvalidSpec("mean must be positive");
  const double k = c.value();
  if (k <= 0.0) return {Branch::Degenerate, std::nullopt, k, m - k, std::nullopt};

  const auto reduced = standardize(c, spec);
  const double value = m + s * standardized_scarf_inf(-reduced.lower_bound_std, reduced.strike_std).value;

  // Extremal in raw scale. Both forms equal m + s * X(p_opt) but keep the
  // lower support point >= 0 exactly.
  const double m2 = spec.second_moment();
  if (is_low_strike(spec, c)) {
    TwoPointDistribution y0(0.0, m2 / m, spec.variance() / m2);
    return {Branch::LowStrike, y0.p_low(), value, m - value, y0};
  }
  const double r = std::hypot(k - m, s);
  const double low = (2.0 * m * k - m2) / (k + r);
  TwoPointDistribution x0(low, k + r, star_pair((k - m) / s).p);
  return {Branch::HighStrike, x0.p_low(), value, m - value, x0};
}

double lo_max(const MomentSpec& spec, Strike c) {
  if (!(spec.mean() > 0.0)) throw InvalidSpec("mean must be positive");
  if (!(c.value() > 0.0)) throw OutOfRange("degenerate strike: c must be positive");
  return spec.mean() - scarf_min(spec, c).min_winsorized;
}

double winsorized_floor(const MomentSpec& spec, Strike c) noexcept {
  return -(spec.std_dev() + std::abs(spec.mean()) + std::abs(c.value()));
}

}  // namespace semibounds
