#pragma once

// Inner loop of the moment-problem vertex enumeration.
//
// For a sorted grid x and per-point objective weights w, a candidate vertex
// supported on {x_i, x_j, x_k} (i < j < k) is the unique solution of
//
//   p_i + p_j + p_k = 1,  sum p x = m1,  sum p x^2 = m2,
//
// given in Lagrange form by p_i = (m2 - m1 (x_j + x_k) + x_j x_k) /
// ((x_i - x_j)(x_i - x_k)) and cyclically. A triple is skipped when its
// condition proxy S^2 / min|denominator| exceeds kMaxCondition, where
// S = max(1, |x_i|, |x_k|). Probabilities >= -kNegTolerance are clamped to 0;
// anything below makes the triple infeasible. The scan over k for fixed
// (i, j) is the data-parallel part and has one implementation per ISA.
//
// Every variant performs the same IEEE operations in the same order; the
// project is built with -ffp-contract=off, so results are bit-identical
// across variants. Tests rely on that.

#include <cstddef>
#include <span>
#include <string_view>

namespace semibounds::kernels {

inline constexpr double kMaxCondition = 1e12;
inline constexpr double kNegTolerance = 1e-12;

struct TripleScan {
  std::span<const double> x;  // strictly increasing
  std::span<const double> w;  // same length as x
  double m1;
  double m2;
};

struct TripleHit {
  bool found = false;
  double objective = 0.0;
  std::size_t k = 0;
  std::size_t skipped = 0;    // ill-conditioned triples
  std::size_t evaluated = 0;  // triples visited
};

/// Probabilities of the triple (i, j, k); no conditioning or sign checks.
struct TripleProbs {
  double pi, pj, pk;
};
TripleProbs solve_triple(std::span<const double> x, double m1, double m2, std::size_t i,
                         std::size_t j, std::size_t k) noexcept;

/// Best feasible k in [k_begin, n) for fixed i < j < k_begin. Lowest k wins
/// ties.
TripleHit scan_triples_scalar(const TripleScan& in, std::size_t i, std::size_t j,
                              std::size_t k_begin) noexcept;

/// AVX2 variant. Falls back to the scalar kernel when the library was built
/// without AVX2 support; callers should check avx2_compiled().
TripleHit scan_triples_avx2(const TripleScan& in, std::size_t i, std::size_t j,
                            std::size_t k_begin) noexcept;

enum class Kernel {
  Auto,     // best variant supported by the running CPU
  Scalar,   // reference scan
  Avx2,     // AVX2 scan
  Generic,  // dense LU on every candidate support, no Lagrange fast path
};

std::string_view to_string(Kernel k) noexcept;

bool avx2_compiled() noexcept;
bool avx2_supported() noexcept;

/// Maps Auto to a concrete kernel. Avx2 degrades to Scalar when unsupported.
Kernel resolve(Kernel requested) noexcept;

using ScanFn = TripleHit (*)(const TripleScan&, std::size_t, std::size_t, std::size_t) noexcept;

/// Scan function for a resolved Scalar/Avx2 kernel.
ScanFn scan_function(Kernel resolved) noexcept;

}  // namespace semibounds::kernels
