#include "semibounds/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "dense_solve.hpp"

namespace semibounds {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kResidualTolerance = 1e-12;

bool strictly_increasing(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(a < b); }) ==
         v.end();
}

void check_grid(std::span<const double> grid, std::optional<double> lower_bound) {
  if (grid.size() < 3) throw OutOfRange("grid needs at least 3 points");
  if (!std::all_of(grid.begin(), grid.end(), [](double x) { return std::isfinite(x); })) {
    throw OutOfRange("grid points must be finite");
  }
  if (!strictly_increasing(grid)) throw OutOfRange("grid must be strictly increasing");
  if (lower_bound && grid.front() < *lower_bound) {
    throw OutOfRange("grid has points below the support lower bound");
  }
}

// Equality-constrained LP over point masses on the grid:
//   rows: 1, x, x^2 [, 1{x <= c}]   rhs: 1, m1, m2 [, target]
// objective: sum p_i * coef_i.
struct VertexProblem {
  std::span<const double> grid;
  std::vector<double> coef;
  double m1;
  double m2;
  std::optional<double> strike;
  std::optional<double> tail_target;

  std::size_t rows() const { return tail_target ? 4 : 3; }

  double entry(std::size_t row, std::size_t point) const {
    const double x = grid[point];
    switch (row) {
      case 0:
        return 1.0;
      case 1:
        return x;
      case 2:
        return x * x;
      default:
        return x <= *strike ? 1.0 : 0.0;
    }
  }

  double rhs(std::size_t row) const {
    switch (row) {
      case 0:
        return 1.0;
      case 1:
        return m1;
      case 2:
        return m2;
      default:
        return *tail_target;
    }
  }
};

struct Vertex {
  bool found = false;
  double objective = 0.0;
  std::vector<std::size_t> support;
  std::vector<double> probs;
};

class VertexSearch {
 public:
  VertexSearch(const VertexProblem& problem, kernels::Kernel kernel)
      : problem_(problem), kernel_(kernels::resolve(kernel)) {}

  Vertex run() {
    const std::size_t k = problem_.rows();
    for (std::size_t s = 1; s <= k; ++s) {
      if (s == 3 && k == 3 && kernel_ != kernels::Kernel::Generic) {
        scan_fast();
      } else {
        scan_dense(s);
      }
    }
    if (!best_.found) {
      if (full_candidates_ > 0 && full_ill_ == full_candidates_) {
        throw IllConditioned("every candidate vertex system is ill-conditioned");
      }
      throw Infeasible("no grid-supported distribution meets the moment constraints");
    }
    return best_;
  }

  const EnumerationStats& stats() const noexcept { return stats_; }

 private:
  void offer(double objective, std::span<const std::size_t> support, std::span<const double> probs) {
    if (best_.found && !(objective < best_.objective)) return;
    best_.found = true;
    best_.objective = objective;
    best_.support.assign(support.begin(), support.end());
    best_.probs.assign(probs.begin(), probs.end());
  }

  // Lagrange fast path over all triples, lexicographic in (i, j, k).
  void scan_fast() {
    const auto grid = problem_.grid;
    const std::size_t n = grid.size();
    const kernels::TripleScan scan{grid, problem_.coef, problem_.m1, problem_.m2};
    const auto fn = kernels::scan_function(kernel_);
    // First index with x >= m1; triples entirely below the mean are infeasible.
    const auto upper_start = static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), problem_.m1) - grid.begin());

    for (std::size_t i = 0; i + 2 < n && grid[i] <= problem_.m1; ++i) {
      for (std::size_t j = i + 1; j + 1 < n; ++j) {
        const std::size_t k_begin = std::max(j + 1, grid[j] < problem_.m1 ? upper_start : j + 1);
        if (k_begin >= n) continue;
        const auto hit = fn(scan, i, j, k_begin);
        stats_.candidates += hit.evaluated;
        stats_.ill_conditioned += hit.skipped;
        full_candidates_ += hit.evaluated;
        full_ill_ += hit.skipped;
        if (!hit.found) continue;
        const auto p = kernels::solve_triple(grid, problem_.m1, problem_.m2, i, j, hit.k);
        const std::array<std::size_t, 3> idx{i, j, hit.k};
        const std::array<double, 3> probs{p.pi > 0.0 ? p.pi : 0.0, p.pj > 0.0 ? p.pj : 0.0,
                                          p.pk > 0.0 ? p.pk : 0.0};
        offer(hit.objective, idx, probs);
      }
    }
  }

  // Every subset of size s; leading s x s block solved, remaining rows checked.
  void scan_dense(std::size_t s) {
    const std::size_t n = problem_.grid.size();
    if (s > n) return;
    const std::size_t rows = problem_.rows();
    const bool full = s == rows;
    std::vector<std::size_t> idx(s);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::array<double, detail::kMaxOrder> probs{};

    while (true) {
      ++stats_.candidates;
      if (full) ++full_candidates_;
      detail::Matrix a{};
      detail::Vector b{};
      for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) a[r][c] = problem_.entry(r, idx[c]);
        b[r] = problem_.rhs(r);
      }
      const auto sol = detail::solve_small(a, b, s);
      if (sol.singular || !(sol.condition <= kernels::kMaxCondition)) {
        ++stats_.ill_conditioned;
        if (full) ++full_ill_;
      } else if (accept(sol.x, idx, rows, probs)) {
        double obj = 0.0;
        for (std::size_t c = 0; c < s; ++c) obj += probs[c] * problem_.coef[idx[c]];
        offer(obj, idx, std::span<const double>(probs.data(), s));
      }

      // Next combination in lexicographic order.
      std::size_t pos = s;
      while (pos > 0 && idx[pos - 1] == n - s + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t t = pos; t < s; ++t) idx[t] = idx[t - 1] + 1;
    }
  }

  bool accept(const detail::Vector& x, std::span<const std::size_t> idx, std::size_t rows,
              std::array<double, detail::kMaxOrder>& probs) const {
    const std::size_t s = idx.size();
    for (std::size_t c = 0; c < s; ++c) {
      if (!(x[c] >= -kernels::kNegTolerance)) return false;
      probs[c] = x[c] > 0.0 ? x[c] : 0.0;
    }
    for (std::size_t r = s; r < rows; ++r) {
      double lhs = 0.0;
      double mag = 0.0;
      for (std::size_t c = 0; c < s; ++c) {
        const double term = problem_.entry(r, idx[c]) * probs[c];
        lhs += term;
        mag += std::fabs(term);
      }
      const double target = problem_.rhs(r);
      const double scale = std::max({1.0, mag, std::fabs(target)});
      if (std::fabs(lhs - target) > kResidualTolerance * scale) return false;
    }
    return true;
  }

  const VertexProblem& problem_;
  kernels::Kernel kernel_;
  Vertex best_;
  EnumerationStats stats_;
  std::size_t full_candidates_ = 0;
  std::size_t full_ill_ = 0;
};

DiscreteDistribution to_distribution(std::span<const double> grid, const Vertex& v) {
  std::vector<double> support;
  std::vector<double> probs;
  for (std::size_t t = 0; t < v.support.size(); ++t) {
    if (v.probs[t] > 0.0) {
      support.push_back(grid[v.support[t]]);
      probs.push_back(v.probs[t]);
    }
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= total;
  return {std::move(support), std::move(probs)};
}

// Uniform draw in [-1, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit_symmetric(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  if (support_.empty() || support_.size() != probs_.size()) {
    throw OutOfRange("support and probabilities must be nonempty and of equal length");
  }
  if (!std::all_of(support_.begin(), support_.end(), [](double x) { return std::isfinite(x); }) ||
      !strictly_increasing(support_)) {
    throw OutOfRange("support must be finite and strictly increasing");
  }
  if (!std::all_of(probs_.begin(), probs_.end(), [](double p) { return p >= 0.0 && p <= 1.0; })) {
    throw OutOfRange("probabilities must lie in [0, 1]");
  }
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::fabs(total - 1.0) > kSumTolerance) throw OutOfRange("probabilities must sum to 1");
}

DiscreteDistribution::DiscreteDistribution(const TwoPointDistribution& d)
    : DiscreteDistribution({d.low(), d.high()}, {d.p_low(), d.p_high()}) {}

double DiscreteDistribution::mean() const noexcept {
  return std::transform_reduce(support_.begin(), support_.end(), probs_.begin(), 0.0);
}

double DiscreteDistribution::second_moment() const noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) acc += probs_[i] * support_[i] * support_[i];
  return acc;
}

double DiscreteDistribution::variance() const noexcept {
  const double mu = mean();
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double d = support_[i] - mu;
    acc += probs_[i] * d * d;
  }
  return acc;
}

double DiscreteDistribution::prob_at_most(double c) const noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < size() && support_[i] <= c; ++i) acc += probs_[i];
  return acc;
}

double DiscreteDistribution::prob_above(double c) const noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (support_[i] > c) acc += probs_[i];
  }
  return acc;
}

std::size_t DiscreteDistribution::effective_size(double threshold) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(probs_.begin(), probs_.end(), [&](double p) { return p > threshold; }));
}

double winsorized_expectation(const DiscreteDistribution& dist, Strike c) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    acc += dist.probs()[i] * std::min(dist.support()[i], c.value());
  }
  return acc;
}

double expected_call(const DiscreteDistribution& dist, Strike c) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    acc += dist.probs()[i] * std::max(dist.support()[i] - c.value(), 0.0);
  }
  return acc;
}

OracleProblem::OracleProblem(MomentSpec spec, Strike strike, std::vector<double> grid,
                             std::optional<double> lower_bound, std::optional<double> tail_target)
    : spec_(spec),
      strike_(strike),
      grid_(std::move(grid)),
      lower_bound_(lower_bound),
      tail_target_(tail_target) {
  check_grid(grid_, lower_bound_);
  if (tail_target_ && !(*tail_target_ >= 0.0 && *tail_target_ <= 1.0)) {
    throw OutOfRange("tail target must lie in [0, 1]");
  }
}

OracleSolution oracle_min(const OracleProblem& problem, kernels::Kernel kernel) {
  VertexProblem vp{problem.grid(), {}, problem.spec().mean(), problem.spec().second_moment(),
                   problem.strike().value(), problem.tail_target()};
  vp.coef.reserve(vp.grid.size());
  for (double x : vp.grid) vp.coef.push_back(std::min(x, problem.strike().value()));

  VertexSearch search(vp, kernel);
  const Vertex best = search.run();
  auto argmin = to_distribution(vp.grid, best);
  const double value = winsorized_expectation(argmin, problem.strike());
  return {value, std::move(argmin), search.stats()};
}

DiscreteDistribution random_feasible(const MomentSpec& spec, std::span<const double> grid,
                                     std::optional<double> lower_bound, std::uint64_t seed,
                                     kernels::Kernel kernel) {
  check_grid(grid, lower_bound);
  std::mt19937_64 rng(seed);
  VertexProblem vp{grid, {}, spec.mean(), spec.second_moment(), std::nullopt, std::nullopt};
  vp.coef.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vp.coef.push_back(unit_symmetric(rng));
  VertexSearch search(vp, kernel);
  return to_distribution(grid, search.run());
}

std::vector<double> make_grid(const MomentSpec& spec, std::optional<double> lower_bound,
                              std::size_t n, std::span<const double> extra) {
  if (n < 2) throw OutOfRange("grid needs at least 2 uniform points");
  double lo = spec.mean() - 10.0 * spec.std_dev();
  const double hi = spec.mean() + 10.0 * spec.std_dev();
  if (lower_bound) lo = std::max(lo, *lower_bound);
  if (!(lo < hi)) throw OutOfRange("support lower bound leaves an empty grid range");

  std::vector<double> grid;
  grid.reserve(n + extra.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    const bool near_extra = std::any_of(extra.begin(), extra.end(), [&](double e) {
      return std::fabs(x - e) <= 1e-9 * std::max(1.0, std::fabs(e));
    });
    if (!near_extra) grid.push_back(x);
  }
  grid.insert(grid.end(), extra.begin(), extra.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) noexcept {
  // splitmix64 finaliser over a Weyl sequence.
  std::uint64_t z = seed + (trial + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bool VerificationReport::passed(double tolerance) const noexcept {
  return std::fabs(gap) <= tolerance && worst_violation >= -tolerance;
}

VerificationReport verify_scarf(const MomentSpec& spec, Strike c, const ScarfVerifyOptions& options) {
  if (!(spec.mean() > 0.0)) throw InvalidSpec("mean must be positive");
  if (!(c.value() > 0.0)) throw OutOfRange("degenerate strike: c must be positive");

  const ScarfSolution closed = scarf_min(spec, c);
  std::vector<double> extra{c.value()};
  if (options.include_extremal && closed.extremal) {
    extra.push_back(closed.extremal->low());
    extra.push_back(closed.extremal->high());
  }
  std::sort(extra.begin(), extra.end());
  extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
  auto grid = make_grid(spec, 0.0, options.grid_points, extra);

  const OracleProblem problem(spec, c, grid, 0.0);
  auto solution = oracle_min(problem, options.kernel);

  const double gap = solution.value - closed.min_winsorized;
  double worst = gap;
  for (std::size_t t = 0; t < options.trials; ++t) {
    const auto d = random_feasible(spec, grid, 0.0, trial_seed(options.seed, t), options.kernel);
    worst = std::min(worst, winsorized_expectation(d, c) - closed.min_winsorized);
  }
  return {closed.min_winsorized, solution.value, std::move(solution.argmin), gap, options.trials,
          worst};
}

VerificationReport verify_dlp(const MomentSpec& spec, Strike c, const DlpVerifyOptions& options) {
  if (options.p0_grid == 0) throw OutOfRange("p0 grid needs at least one point");
  const auto interval = feasible_p_interval(standardize(c, spec).strike_std);

  // Sharpness on interior points of the feasible interval for P(X <= c).
  std::optional<VerificationReport> report;
  for (std::size_t k = 0; k < options.p0_grid; ++k) {
    const double frac = static_cast<double>(k + 1) / static_cast<double>(options.p0_grid + 1);
    const double p = interval.lower + (interval.upper - interval.lower) * frac;
    const double p0 = 1.0 - p;
    const auto two_point = dlp_extremal(spec, c, p0);
    const double upper = dlp_bounds(spec, c, p0).upper;
    const double attained = two_point.call(c.value());
    const double gap = attained - upper;
    if (!report || std::fabs(gap) > std::fabs(report->gap)) {
      report = VerificationReport{upper, attained, DiscreteDistribution(two_point), gap, 0, 0.0};
    }
  }

  // Validity on random feasible distributions.
  const auto grid = make_grid(spec, std::nullopt, std::max<std::size_t>(options.sample_grid_points, 3));
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < options.trials; ++t) {
    const auto d = random_feasible(spec, grid, std::nullopt, trial_seed(options.seed, t), options.kernel);
    const auto bounds = dlp_bounds(spec, c, d.prob_above(c.value()));
    const double value = expected_call(d, c);
    worst = std::min({worst, value - bounds.lower, bounds.upper - value});
  }
  report->random_trials = options.trials;
  report->worst_violation = options.trials == 0 ? 0.0 : worst;
  return *report;
}

}  // namespace semibounds
