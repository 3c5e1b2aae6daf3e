#include "semibounds/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

#include <bit>
#endif

namespace semibounds::kernels {

#if defined(__AVX2__)

bool avx2_compiled() noexcept { return true; }

namespace {

inline __m256d vabs(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

}  // namespace

TripleHit scan_triples_avx2(const TripleScan& in, std::size_t i, std::size_t j,
                            std::size_t k_begin) noexcept {
  TripleHit hit;
  const std::size_t n = in.x.size();
  const double* xs = in.x.data();
  const double* ws = in.w.data();
  const double a = xs[i];
  const double b = xs[j];
  const double dab_s = a - b;
  const double num_c_s = in.m2 - in.m1 * (a + b) + a * b;

  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  const __m256d vwa = _mm256_set1_pd(ws[i]);
  const __m256d vwb = _mm256_set1_pd(ws[j]);
  const __m256d vdab = _mm256_set1_pd(dab_s);
  const __m256d vnum_c = _mm256_set1_pd(num_c_s);
  const __m256d vm1 = _mm256_set1_pd(in.m1);
  const __m256d vm2 = _mm256_set1_pd(in.m2);
  const __m256d vabs_a = vabs(va);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d neg_tol = _mm256_set1_pd(-kNegTolerance);
  const __m256d max_cond = _mm256_set1_pd(kMaxCondition);
  const __m256d sign = _mm256_set1_pd(-0.0);

  __m256d best = _mm256_setzero_pd();
  __m256d best_k = _mm256_setzero_pd();
  __m256d found = _mm256_setzero_pd();  // all-ones lanes hold a candidate
  __m256d kidx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  kidx = _mm256_add_pd(kidx, _mm256_set1_pd(static_cast<double>(k_begin)));
  const __m256d four = _mm256_set1_pd(4.0);

  std::size_t k = k_begin;
  for (; k + 4 <= n; k += 4) {
    const __m256d c = _mm256_loadu_pd(xs + k);
    const __m256d wc = _mm256_loadu_pd(ws + k);
    const __m256d dac = _mm256_sub_pd(va, c);
    const __m256d dbc = _mm256_sub_pd(vb, c);
    const __m256d den_a = _mm256_mul_pd(vdab, dac);
    const __m256d den_b = _mm256_xor_pd(_mm256_mul_pd(vdab, dbc), sign);
    const __m256d den_c = _mm256_mul_pd(dac, dbc);

    // s = max(1, |a|, |c|) written as the scalar ternary chain.
    const __m256d abs_c = vabs(c);
    __m256d s = _mm256_blendv_pd(abs_c, vabs_a, _mm256_cmp_pd(vabs_a, abs_c, _CMP_GT_OQ));
    s = _mm256_blendv_pd(one, s, _mm256_cmp_pd(s, one, _CMP_GT_OQ));
    const __m256d ada = vabs(den_a);
    const __m256d adb = vabs(den_b);
    const __m256d adc = vabs(den_c);
    __m256d dmin = _mm256_blendv_pd(ada, adb, _mm256_cmp_pd(adb, ada, _CMP_LT_OQ));
    dmin = _mm256_blendv_pd(dmin, adc, _mm256_cmp_pd(adc, dmin, _CMP_LT_OQ));
    const __m256d skip =
        _mm256_cmp_pd(_mm256_mul_pd(dmin, max_cond), _mm256_mul_pd(s, s), _CMP_LT_OQ);
    hit.skipped += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(_mm256_movemask_pd(skip))));

    const __m256d num_a = _mm256_add_pd(
        _mm256_sub_pd(vm2, _mm256_mul_pd(vm1, _mm256_add_pd(vb, c))), _mm256_mul_pd(vb, c));
    const __m256d num_b = _mm256_add_pd(
        _mm256_sub_pd(vm2, _mm256_mul_pd(vm1, _mm256_add_pd(va, c))), _mm256_mul_pd(va, c));
    const __m256d pa = _mm256_div_pd(num_a, den_a);
    const __m256d pb = _mm256_div_pd(num_b, den_b);
    const __m256d pc = _mm256_div_pd(vnum_c, den_c);

    __m256d ok = _mm256_and_pd(_mm256_cmp_pd(pa, neg_tol, _CMP_GE_OQ),
                               _mm256_cmp_pd(pb, neg_tol, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(pc, neg_tol, _CMP_GE_OQ));
    ok = _mm256_andnot_pd(skip, ok);

    const __m256d qa = _mm256_blendv_pd(zero, pa, _mm256_cmp_pd(pa, zero, _CMP_GT_OQ));
    const __m256d qb = _mm256_blendv_pd(zero, pb, _mm256_cmp_pd(pb, zero, _CMP_GT_OQ));
    const __m256d qc = _mm256_blendv_pd(zero, pc, _mm256_cmp_pd(pc, zero, _CMP_GT_OQ));
    const __m256d obj = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(qa, vwa), _mm256_mul_pd(qb, vwb)),
                                      _mm256_mul_pd(qc, wc));

    const __m256d better = _mm256_or_pd(_mm256_xor_pd(found, _mm256_castsi256_pd(_mm256_set1_epi64x(-1))),
                                        _mm256_cmp_pd(obj, best, _CMP_LT_OQ));
    const __m256d take = _mm256_and_pd(ok, better);
    best = _mm256_blendv_pd(best, obj, take);
    best_k = _mm256_blendv_pd(best_k, kidx, take);
    found = _mm256_or_pd(found, take);
    kidx = _mm256_add_pd(kidx, four);
  }
  hit.evaluated += k - k_begin;

  alignas(32) double lane_best[4];
  alignas(32) double lane_k[4];
  _mm256_store_pd(lane_best, best);
  _mm256_store_pd(lane_k, best_k);
  const int found_mask = _mm256_movemask_pd(found);
  for (int lane = 0; lane < 4; ++lane) {
    if (!(found_mask & (1 << lane))) continue;
    const auto lk = static_cast<std::size_t>(lane_k[lane]);
    if (!hit.found || lane_best[lane] < hit.objective ||
        (lane_best[lane] == hit.objective && lk < hit.k)) {
      hit.found = true;
      hit.objective = lane_best[lane];
      hit.k = lk;
    }
  }

  if (k < n) {
    const TripleHit tail = scan_triples_scalar(in, i, j, k);
    hit.evaluated += tail.evaluated;
    hit.skipped += tail.skipped;
    if (tail.found && (!hit.found || tail.objective < hit.objective)) {
      hit.found = true;
      hit.objective = tail.objective;
      hit.k = tail.k;
    }
  }
  return hit;
}

#else

bool avx2_compiled() noexcept { return false; }

TripleHit scan_triples_avx2(const TripleScan& in, std::size_t i, std::size_t j,
                            std::size_t k_begin) noexcept {
  return scan_triples_scalar(in, i, j, k_begin);
}

#endif

}  // namespace semibounds::kernels
