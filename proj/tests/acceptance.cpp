// Acceptance suite. One PASS/FAIL line per criterion; nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "semibounds/bounds.hpp"
#include "semibounds/cli.hpp"
#include "semibounds/oracle.hpp"
#include "test_support.hpp"

using namespace semibounds;
using semibounds::testing::near_abs;
using semibounds::testing::near_rel;
using semibounds::testing::Rng;

namespace {

struct Outcome {
  bool ok = true;
  std::size_t checks = 0;
  std::string first_failure;
  double worst = 0.0;  // largest error or most negative slack, criterion-specific

  void expect(bool cond, const std::string& what) {
    ++checks;
    if (!cond && ok) first_failure = what;
    ok = ok && cond;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

// Positive mean, sd and strike spread over several orders of magnitude.
struct Draw {
  double m, s, c;
};
Draw draw_positive(Rng& rng) {
  const double m = log_uniform(rng, 0.01, 100.0);
  const double s = m * log_uniform(rng, 0.01, 20.0);
  const double c = m * log_uniform(rng, 0.01, 50.0);
  return {m, s, c};
}

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

Outcome duality() {
  Outcome o;
  Rng rng(1001);
  for (int t = 0; t < 1000; ++t) {
    const auto [m, s, c] = draw_positive(rng);
    const MomentSpec spec(m, s);
    const double sm = scarf_min(spec, Strike(c)).min_winsorized;
    const double lo = lo_max(spec, Strike(c));
    const double e = rel_err(lo, m - sm);
    o.worst = std::max(o.worst, e);
    o.expect(e <= 1e-12, fmt("m=%.6g s=%.6g c=%.6g", m, s, c));
    // Against the independent raw-scale formula for the call side as well.
    o.expect(near_rel(lo, testing::lo_formula(m, s, c), 1e-11), fmt("lo formula m=%.6g s=%.6g c=%.6g", m, s, c));
  }
  return o;
}

Outcome branch_continuity() {
  Outcome o;
  Rng rng(1002);
  for (int t = 0; t < 100; ++t) {
    const double m = log_uniform(rng, 0.01, 100.0);
    const double s = m * log_uniform(rng, 0.01, 20.0);
    const double c = (m * m + s * s) / (2.0 * m);
    const double low = testing::scarf_low_branch(m, s, c);
    const double high = testing::scarf_high_branch(m, s, c);
    o.worst = std::max(o.worst, rel_err(low, high));
    o.expect(near_rel(low, high, 1e-12), fmt("raw m=%.6g s=%.6g", m, s));
    const double lib = scarf_min(MomentSpec(m, s), Strike(c)).min_winsorized;
    o.expect(near_rel(lib, low, 1e-12) && near_rel(lib, high, 1e-12), fmt("library m=%.6g s=%.6g", m, s));

    const double mu = log_uniform(rng, 0.01, 100.0);
    const double cs = (1.0 - mu * mu) / (2.0 * mu);
    const double a = testing::std_low_branch(mu, cs);
    const double b = testing::std_high_branch(cs);
    o.worst = std::max(o.worst, rel_err(a, b));
    o.expect(near_rel(a, b, 1e-12), fmt("standardized mu=%.6g", mu));
    const double v = standardized_scarf_inf(mu, cs).value;
    o.expect(near_rel(v, a, 1e-12) && near_rel(v, b, 1e-12), fmt("standardized library mu=%.6g", mu));
  }
  return o;
}

Outcome attainment() {
  Outcome o;
  Rng rng(1003);
  for (int t = 0; t < 1000; ++t) {
    const auto [m, s, c] = draw_positive(rng);
    const auto sol = scarf_min(MomentSpec(m, s), Strike(c));
    if (!sol.extremal) {
      o.expect(false, fmt("no extremal m=%.6g s=%.6g c=%.6g", m, s, c));
      continue;
    }
    const DiscreteDistribution d(*sol.extremal);
    const double w = winsorized_expectation(d, Strike(c));
    const double e = rel_err(w, sol.min_winsorized);
    o.worst = std::max(o.worst, e);
    o.expect(e <= 1e-12, fmt("E(X^c) m=%.6g s=%.6g c=%.6g", m, s, c));
    o.expect(near_rel(d.mean(), m, 1e-12), fmt("mean m=%.6g s=%.6g c=%.6g", m, s, c));
    o.expect(near_rel(d.second_moment(), m * m + s * s, 1e-12), fmt("second moment m=%.6g s=%.6g c=%.6g", m, s, c));
    o.expect(d.support()[0] >= 0.0, fmt("support m=%.6g s=%.6g c=%.6g", m, s, c));
  }
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::vector<Draw> suite;
  // Low branch.
  for (const Draw d : {Draw{1, 1, 0.5}, Draw{0.5, 2, 0.1}, Draw{2, 1, 0.3}, Draw{1, 0.5, 0.4},
                       Draw{3, 3, 2.0}, Draw{0.2, 0.1, 0.12}, Draw{1, 3, 4.0}, Draw{5, 1, 1.0}}) {
    suite.push_back(d);
  }
  // High branch.
  for (const Draw d : {Draw{1, 1, 3}, Draw{1, 1, 2}, Draw{0.5, 2, 5}, Draw{2, 1, 4}, Draw{1, 0.5, 1.5},
                       Draw{3, 3, 10}, Draw{0.2, 0.1, 0.5}, Draw{5, 1, 8}}) {
    suite.push_back(d);
  }
  // On and around the threshold.
  for (const auto& [m, s] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{0.5, 0.5}, std::pair{1.0, 2.0},
                             std::pair{3.0, 1.0}}) {
    suite.push_back({m, s, (m * m + s * s) / (2.0 * m)});
  }
  suite.push_back({1.0, 1.0, 1.0 - 1e-6});
  suite.push_back({2.0, 1.0, 1.25 + 1e-6});
  suite.push_back({1.0, 0.1, 0.505});
  suite.push_back({4.0, 0.5, 2.03125 + 0.2});

  const auto start = std::chrono::steady_clock::now();
  int low = 0, high = 0;
  for (const auto& [m, s, c] : suite) {
    const auto r = verify_scarf(MomentSpec(m, s), Strike(c), {.grid_points = 200, .trials = 100, .seed = 7});
    (is_low_strike(MomentSpec(m, s), Strike(c)) ? low : high) += 1;
    o.worst = std::max(o.worst, std::fabs(r.gap));
    o.expect(std::fabs(r.gap) <= 1e-9, fmt("gap m=%.6g s=%.6g c=%.6g", m, s, c));
    o.expect(r.worst_violation >= -1e-9, fmt("violation m=%.6g s=%.6g c=%.6g", m, s, c));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.expect(suite.size() == 25, "suite size");
  o.expect(low > 0 && high > 0, "both branches covered");
  o.expect(secs <= 60.0, fmt("runtime %.1f s", secs));
  std::printf("    oracle suite: %zu cases (%d low, %d high), %.2f s\n", suite.size(), low, high, secs);
  return o;
}

Outcome dlp_sharpness() {
  Outcome o;
  const MomentSpec spec(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double c = -3.0 + 6.0 * i / 49.0;
    const auto pi = feasible_p_interval(c);
    for (int j = 0; j < 20; ++j) {
      // Interior of the feasible set for P(X <= c); P(X > c) = 1 - p.
      const double p = pi.lower + (pi.upper - pi.lower) * (j + 0.5) / 20.0;
      const double p0 = 1.0 - p;
      const double upper = dlp_bounds(spec, Strike(c), p0).upper;
      // Two-point member built here from the parametrization.
      const double x = -std::sqrt((1.0 - p) / p);
      const double y = std::sqrt(p / (1.0 - p));
      const double call = (1.0 - p) * std::max(y - c, 0.0) + p * std::max(x - c, 0.0);
      const double e = std::fabs(call - upper);
      o.worst = std::max(o.worst, e);
      o.expect(x <= c && c < y, fmt("bracket c=%.6g p=%.6g", c, p));
      o.expect(e <= 1e-12 * std::max(1.0, std::fabs(upper)), fmt("attained c=%.6g p0=%.6g", c, p0));
      const auto lib = dlp_extremal(spec, Strike(c), p0);
      o.expect(near_abs(lib.call(c), upper, 1e-12 * std::max(1.0, std::fabs(upper))),
               fmt("library extremal c=%.6g p0=%.6g", c, p0));
    }
  }
  return o;
}

// Random feasible distributions shared by the validity and tail criteria:
// oracle vertices (with and without a zero lower bound) and multi-point laws
// drawn directly, each paired with its own moments.
struct Sample {
  DiscreteDistribution dist;
  double m, s, c;
};

std::vector<Sample> build_samples() {
  std::vector<Sample> out;
  out.reserve(10000);
  Rng rng(1006);
  std::vector<std::pair<MomentSpec, std::vector<double>>> grids;
  for (int g = 0; g < 25; ++g) {
    const double m = rng.uniform(0.2, 5.0);
    const MomentSpec spec(m, m * rng.uniform(0.1, 2.0));
    grids.emplace_back(spec, make_grid(spec, 0.0, 40));
  }
  for (int g = 0; g < 25; ++g) {
    const MomentSpec spec(rng.uniform(-5.0, 5.0), rng.uniform(0.1, 5.0));
    grids.emplace_back(spec, make_grid(spec, std::nullopt, 40));
  }
  for (std::size_t g = 0; g < grids.size(); ++g) {
    const auto& [spec, grid] = grids[g];
    const std::optional<double> lb = g < 25 ? std::optional<double>(0.0) : std::nullopt;
    for (std::uint64_t t = 0; t < 100; ++t) {
      auto d = random_feasible(spec, grid, lb, trial_seed(g, t));
      const double c = rng.uniform(spec.mean() - 4.0 * spec.std_dev(), spec.mean() + 4.0 * spec.std_dev());
      out.push_back({std::move(d), spec.mean(), spec.std_dev(), c});
    }
  }
  while (out.size() < 10000) {
    const bool positive = out.size() % 2 == 0;
    const auto raw = testing::random_raw_distribution(rng, 2 + out.size() % 9, positive ? 0.0 : -10.0, 10.0);
    DiscreteDistribution d(raw.support, raw.probs);
    const double m = d.mean();
    const double s = std::sqrt(d.variance());
    const double c = rng.uniform(raw.support.front() - 1.0, raw.support.back() + 1.0);
    out.push_back({std::move(d), m, s, c});
  }
  return out;
}

Outcome dlp_validity(const std::vector<Sample>& samples) {
  Outcome o;
  for (const auto& [d, m, s, c] : samples) {
    // Summation can overshoot 1 by an ulp.
    const double p0 = std::min(d.prob_above(c), 1.0);
    const double call = expected_call(d, Strike(c));
    const double lower = (m - c) * p0;
    const double upper = lower + s * std::sqrt(p0 - p0 * p0);
    const double slack = std::min(call - lower, upper - call);
    o.worst = std::min(o.worst, slack);
    o.expect(slack >= -1e-9, fmt("m=%.6g s=%.6g c=%.6g", m, s, c));
    const auto lib = dlp_bounds(MomentSpec(m, s), Strike(c), p0);
    o.expect(call >= lib.lower - 1e-9 && call <= lib.upper + 1e-9, fmt("library m=%.6g s=%.6g c=%.6g", m, s, c));
  }
  o.expect(samples.size() == 10000, "sample count");
  return o;
}

Outcome tail_bounds(const std::vector<Sample>& samples) {
  Outcome o;
  for (const auto& [d, m, s, c] : samples) {
    // Standardize the law itself, then test P(Z <= k) and P(|Z| > k).
    const double k = (c - m) / s;
    double at_most = 0.0;
    double outside = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double z = (d.support()[i] - m) / s;
      if (z <= k) at_most += d.probs()[i];
      if (std::fabs(z) > std::fabs(k)) outside += d.probs()[i];
    }
    const auto b = one_sided_tail_bounds(k);
    // Independent statement of the one-sided bounds.
    const double lo = k > 0.0 ? k * k / (1.0 + k * k) : 0.0;
    const double hi = k < 0.0 ? 1.0 / (1.0 + k * k) : 1.0;
    o.expect(near_abs(b.lower, lo, 1e-15) && near_abs(b.upper, hi, 1e-15), fmt("bound values k=%.6g", k));
    const double slack1 = std::min(at_most - lo, hi - at_most);
    o.worst = std::min(o.worst, slack1);
    o.expect(slack1 >= -1e-9, fmt("one-sided k=%.6g", k));
    if (k != 0.0) {
      const double two = 2.0 / (1.0 + k * k);
      o.expect(near_rel(two_sided_tail_bound(std::fabs(k)), two, 1e-15), fmt("two-sided value k=%.6g", k));
      const double slack2 = two - outside;
      o.worst = std::min(o.worst, slack2);
      o.expect(slack2 >= -1e-9, fmt("two-sided k=%.6g", k));
    }
  }
  return o;
}

Outcome l_shape() {
  Outcome o;
  Rng rng(1008);
  for (int t = 0; t < 100; ++t) {
    const double c = rng.uniform(-5.0, 5.0);
    const double ps = p_star(c);
    o.expect(feasible_p_interval(c).contains(ps), fmt("p* in feasible set c=%.6g", c));
    const int n = 400;
    double prev = l_value(ps / n, c);
    for (int i = 2; i <= n; ++i) {
      const double p = i == n ? ps : ps * i / n;
      const double v = l_value(p, c);
      o.expect(v < prev, fmt("decrease c=%.6g p=%.6g", c, p));
      prev = v;
    }
    prev = l_value(ps, c);
    for (int i = 1; i < n; ++i) {
      const double p = ps + (1.0 - ps) * i / n;
      const double v = l_value(p, c);
      o.expect(v > prev, fmt("increase c=%.6g p=%.6g", c, p));
      prev = v;
    }
  }
  return o;
}

Outcome reduction() {
  Outcome o;
  Rng rng(1009);
  for (int t = 0; t < 1000; ++t) {
    const auto [m, s, c] = draw_positive(rng);
    const double raw = scarf_min(MomentSpec(m, s), Strike(c)).min_winsorized;
    const double via = m + s * standardized_scarf_inf(m / s, (c - m) / s).value;
    const double e = rel_err(raw, via);
    o.worst = std::max(o.worst, e);
    o.expect(e <= 1e-12, fmt("m=%.6g s=%.6g c=%.6g", m, s, c));
  }
  return o;
}

struct Run {
  int code;
  std::string out;
};
Run cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str()};
}

Outcome cli_contract() {
  Outcome o;
  o.expect(cli_run({"verify", "--mean", "1", "--std", "0", "--strike", "1"}).code == 2, "exit 2 on sigma = 0");
  const auto dom = cli_run({"bounds", "--mean", "0", "--std", "1", "--strike", "1"});
  o.expect(dom.code == 3, "exit 3 on mean 0");
  o.expect(nlohmann::json::parse(dom.out).value("error", "") == "mean must be positive", "error key");
  o.expect(cli_run({"extremal", "--mean", "1", "--std", "1", "--strike", "-1"}).code == 3, "exit 3 on c <= 0");
  o.expect(cli_run({"sweep", "--mean", "1", "--std", "1", "--strike-min", "0.1", "--strike-max", "5", "--steps",
                    "5", "--out", "/nonexistent-dir/sweep.csv"})
                   .code == 4,
           "exit 4 on unwritable path");
  o.expect(cli_run({"verify", "--mean", "1", "--std", "1", "--strike", "2", "--grid-points", "3", "--trials", "5",
                    "--exclude-extremal"})
                   .code == 1,
           "exit 1 on coarse grid");

  const auto sweep = cli_run({"sweep", "--mean", "1", "--std", "1", "--strike-min", "0.1", "--strike-max", "5",
                              "--steps", "50"});
  o.expect(sweep.code == 0, "sweep exit 0");
  o.expect(sweep.out.rfind("c,scarf_min,lo_max,branch,p_opt,dlp_upper_at_pstar\n", 0) == 0, "sweep header");

  Rng rng(1010);
  for (int t = 0; t < 50; ++t) {
    const auto [m, s, c] = draw_positive(rng);
    const double p0 = rng.uniform(0.0, 1.0);
    const auto r = cli_run({"bounds", "--mean", cli::format_number(m), "--std", cli::format_number(s), "--strike",
                            cli::format_number(c), "--tail-prob", cli::format_number(p0)});
    o.expect(r.code == 0, "bounds exit 0");
    if (r.code != 0) continue;
    const auto doc = nlohmann::json::parse(r.out);
    const MomentSpec spec(doc["mean"].get<double>(), doc["std_dev"].get<double>());
    const Strike k(doc["strike"].get<double>());
    const auto sol = scarf_min(spec, k);
    const auto dlp = dlp_bounds(spec, k, doc["tail_prob"].get<double>());
    const bool same = doc["scarf_min"].get<double>() == cli::round_to_emitted(sol.min_winsorized) &&
                      doc["lo_max"].get<double>() == cli::round_to_emitted(lo_max(spec, k)) &&
                      doc["threshold_strike"].get<double>() == cli::round_to_emitted(threshold_strike(spec)) &&
                      doc["dlp_lower"].get<double>() == cli::round_to_emitted(dlp.lower) &&
                      doc["dlp_upper"].get<double>() == cli::round_to_emitted(dlp.upper);
    o.expect(same, fmt("round trip m=%.6g s=%.6g c=%.6g", m, s, c));
  }
  return o;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o, const std::string& detail) {
    std::printf("%s criterion %2d: %s (%zu checks, %s)%s%s\n", o.ok ? "PASS" : "FAIL", id, name, o.checks,
                detail.c_str(), o.ok ? "" : "; first failure: ", o.first_failure.c_str());
    std::fflush(stdout);
    if (!o.ok) ++failed;
  };

  auto o1 = duality();
  report(1, "duality lo_max = m - scarf_min", o1, fmt("max rel err %.3g", o1.worst));
  auto o2 = branch_continuity();
  report(2, "branch continuity at the threshold", o2, fmt("max rel err %.3g", o2.worst));
  auto o3 = attainment();
  report(3, "attainment and membership of the extremal law", o3, fmt("max rel err %.3g", o3.worst));
  auto o4 = oracle_equivalence();
  report(4, "oracle equivalence on 25 cases", o4, fmt("max |gap| %.3g", o4.worst));
  auto o5 = dlp_sharpness();
  report(5, "dlP upper bound attained", o5, fmt("max abs err %.3g", o5.worst));
  const auto samples = build_samples();
  auto o6 = dlp_validity(samples);
  report(6, "dlP bounds hold on sampled laws", o6, fmt("min slack %.3g", o6.worst));
  auto o7 = tail_bounds(samples);
  report(7, "tail bounds hold on sampled laws", o7, fmt("min slack %.3g", o7.worst));
  auto o8 = l_shape();
  report(8, "L_c decreases then increases around p*", o8, "strict");
  auto o9 = reduction();
  report(9, "reduction to the standardized problem", o9, fmt("max rel err %.3g", o9.worst));
  auto o10 = cli_contract();
  report(10, "CLI exit codes, header, JSON round trip", o10, "exact");

  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
