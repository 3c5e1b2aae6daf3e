#include <cmath>

#include "semibounds/kernels.hpp"

namespace semibounds::kernels {

TripleProbs solve_triple(std::span<const double> x, double m1, double m2, std::size_t i,
                         std::size_t j, std::size_t k) noexcept {
  const double a = x[i];
  const double b = x[j];
  const double c = x[k];
  const double dab = a - b;
  const double dac = a - c;
  const double dbc = b - c;
  const double num_a = m2 - m1 * (b + c) + b * c;
  const double num_b = m2 - m1 * (a + c) + a * c;
  const double num_c = m2 - m1 * (a + b) + a * b;
  return {num_a / (dab * dac), num_b / (-(dab * dbc)), num_c / (dac * dbc)};
}

TripleHit scan_triples_scalar(const TripleScan& in, std::size_t i, std::size_t j,
                              std::size_t k_begin) noexcept {
  TripleHit hit;
  const std::size_t n = in.x.size();
  const double a = in.x[i];
  const double b = in.x[j];
  const double wa = in.w[i];
  const double wb = in.w[j];
  const double dab = a - b;
  const double sum_ab = a + b;
  const double num_c = in.m2 - in.m1 * sum_ab + a * b;
  const double abs_a = std::fabs(a);

  for (std::size_t k = k_begin; k < n; ++k) {
    const double c = in.x[k];
    const double dac = a - c;
    const double dbc = b - c;
    const double den_a = dab * dac;
    const double den_b = -(dab * dbc);
    const double den_c = dac * dbc;

    double s = abs_a > std::fabs(c) ? abs_a : std::fabs(c);
    s = s > 1.0 ? s : 1.0;
    double dmin = std::fabs(den_a);
    dmin = std::fabs(den_b) < dmin ? std::fabs(den_b) : dmin;
    dmin = std::fabs(den_c) < dmin ? std::fabs(den_c) : dmin;
    ++hit.evaluated;
    if (dmin * kMaxCondition < s * s) {
      ++hit.skipped;
      continue;
    }

    const double pa = (in.m2 - in.m1 * (b + c) + b * c) / den_a;
    const double pb = (in.m2 - in.m1 * (a + c) + a * c) / den_b;
    const double pc = num_c / den_c;
    if (!(pa >= -kNegTolerance && pb >= -kNegTolerance && pc >= -kNegTolerance)) continue;

    const double qa = pa > 0.0 ? pa : 0.0;
    const double qb = pb > 0.0 ? pb : 0.0;
    const double qc = pc > 0.0 ? pc : 0.0;
    const double obj = qa * wa + qb * wb + qc * in.w[k];
    if (!hit.found || obj < hit.objective) {
      hit.found = true;
      hit.objective = obj;
      hit.k = k;
    }
  }
  return hit;
}

}  // namespace semibounds::kernels
