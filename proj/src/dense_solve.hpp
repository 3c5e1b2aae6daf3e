#pragma once

// Tiny dense solves for the oracle's candidate vertices (order <= 4).

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace semibounds::detail {

inline constexpr std::size_t kMaxOrder = 4;

using Matrix = std::array<std::array<double, kMaxOrder>, kMaxOrder>;
using Vector = std::array<double, kMaxOrder>;

struct SmallSolve {
  bool singular = true;
  double condition = std::numeric_limits<double>::infinity();
  Vector x{};
};

/// Solves A x = b for the leading n x n block. Rows are equilibrated to unit
/// max-norm first; `condition` is ||A||_1 ||A^-1||_1 of the equilibrated
/// matrix, with A^-1 formed column by column from the LU factors.
inline SmallSolve solve_small(Matrix a, Vector b, std::size_t n) {
  SmallSolve out;
  for (std::size_t r = 0; r < n; ++r) {
    double scale = 0.0;
    for (std::size_t c = 0; c < n; ++c) scale = std::fmax(scale, std::fabs(a[r][c]));
    if (scale == 0.0) return out;
    for (std::size_t c = 0; c < n; ++c) a[r][c] /= scale;
    b[r] /= scale;
  }

  double norm_a = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double col = 0.0;
    for (std::size_t r = 0; r < n; ++r) col += std::fabs(a[r][c]);
    norm_a = std::fmax(norm_a, col);
  }

  std::array<std::size_t, kMaxOrder> perm{};
  for (std::size_t r = 0; r < n; ++r) perm[r] = r;
  Matrix lu = a;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::fabs(lu[r][k]) > std::fabs(lu[piv][k])) piv = r;
    }
    if (lu[piv][k] == 0.0) return out;
    std::swap(lu[piv], lu[k]);
    std::swap(perm[piv], perm[k]);
    for (std::size_t r = k + 1; r < n; ++r) {
      lu[r][k] /= lu[k][k];
      for (std::size_t c = k + 1; c < n; ++c) lu[r][c] -= lu[r][k] * lu[k][c];
    }
  }

  auto substitute = [&](const Vector& rhs) {
    Vector y{};
    for (std::size_t r = 0; r < n; ++r) {
      double v = rhs[perm[r]];
      for (std::size_t c = 0; c < r; ++c) v -= lu[r][c] * y[c];
      y[r] = v;
    }
    for (std::size_t r = n; r-- > 0;) {
      double v = y[r];
      for (std::size_t c = r + 1; c < n; ++c) v -= lu[r][c] * y[c];
      y[r] = v / lu[r][r];
    }
    return y;
  };

  double norm_inv = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    Vector e{};
    e[c] = 1.0;
    const Vector col = substitute(e);
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += std::fabs(col[r]);
    norm_inv = std::fmax(norm_inv, sum);
  }

  out.singular = false;
  out.condition = norm_a * norm_inv;
  out.x = substitute(b);
  return out;
}

}  // namespace semibounds::detail
