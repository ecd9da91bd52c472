#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cat {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline std::vector<double> sub(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

// Solve A x = b for small dense symmetric-ish systems by partial-pivot LU.
// Row-major A of size n*n; throws on (numerical) singularity.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  std::size_t n = b.size();
  if (a.size() != n * n) throw std::invalid_argument("solve_dense: shape mismatch");
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = col;
    double best_abs = std::abs(a[piv[col] * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double v = std::abs(a[piv[r] * n + col]);
      if (v > best_abs) {
        best = r;
        best_abs = v;
      }
    }
    if (best_abs < 1e-12) throw std::runtime_error("solve_dense: singular system");
    std::swap(piv[col], piv[best]);
    double d = a[piv[col] * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[piv[r] * n + col] / d;
      if (f == 0.0) continue;
      a[piv[r] * n + col] = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) a[piv[r] * n + c] -= f * a[piv[col] * n + c];
      b[piv[r]] -= f * b[piv[col]];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[piv[i]];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[piv[i] * n + c] * x[c];
    x[i] = s / a[piv[i] * n + i];
  }
  return x;
}

}  // namespace cat
