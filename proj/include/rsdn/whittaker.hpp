#pragma once

#include <cmath>
#include <vector>

#include "rsdn/error.hpp"

namespace rsdn {

// Penalized least-squares smoother: minimizes
//   sum_i w_i (y_i - z_i)^2 + lambda * sum (second difference of z)^2,
// i.e. solves (W + lambda D'D) z = W y with D the (n-2) x n second-difference
// operator. The system is pentadiagonal; an LDL' factorization makes the
// solve O(n).
inline std::vector<double> whittaker_smooth(const std::vector<double>& y,
                                            const std::vector<double>& w,
                                            double lambda) {
  const size_t n = y.size();
  if (w.size() != n)
    raise(ErrorKind::length_mismatch, "whittaker: |y| != |w|");
  if (n < 3) raise(ErrorKind::length_too_short, "whittaker: need length >= 3");
  if (!(lambda > 0.0))
    raise(ErrorKind::invalid_config, "whittaker: lambda must be > 0");

  bool any_weight = false;
  for (const double wi : w) {
    if (wi < 0.0)
      raise(ErrorKind::invalid_config, "whittaker: negative weight");
    if (wi > 0.0) any_weight = true;
  }
  if (!any_weight)
    raise(ErrorKind::singular_system, "whittaker: all weights are zero");

  // Bands of A = W + lambda D'D: main, first and second superdiagonal.
  std::vector<double> a0(n, 0.0);
  std::vector<double> a1(n > 1 ? n - 1 : 0, 0.0);
  std::vector<double> a2(n > 2 ? n - 2 : 0, 0.0);
  for (size_t j = 0; j + 2 < n; ++j) {
    a0[j] += lambda;
    a0[j + 1] += 4.0 * lambda;
    a0[j + 2] += lambda;
    a1[j] += -2.0 * lambda;
    a1[j + 1] += -2.0 * lambda;
    a2[j] += lambda;
  }
  for (size_t i = 0; i < n; ++i) a0[i] += w[i];

  // LDL' with unit lower bidiagonal-of-bandwidth-2 L.
  std::vector<double> d(n, 0.0);
  std::vector<double> l1(n, 0.0);  // L[i][i-1]
  std::vector<double> l2(n, 0.0);  // L[i][i-2]
  for (size_t i = 0; i < n; ++i) {
    if (i >= 2) l2[i] = a2[i - 2] / d[i - 2];
    if (i >= 1) {
      double v = a1[i - 1];
      if (i >= 2) v -= l2[i] * l1[i - 1] * d[i - 2];
      l1[i] = v / d[i - 1];
    }
    double di = a0[i];
    if (i >= 1) di -= l1[i] * l1[i] * d[i - 1];
    if (i >= 2) di -= l2[i] * l2[i] * d[i - 2];
    if (!(di > 0.0))
      raise(ErrorKind::singular_system,
            "whittaker: system not positive definite");
    d[i] = di;
  }

  std::vector<double> z(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double v = w[i] * y[i];
    if (i >= 1) v -= l1[i] * z[i - 1];
    if (i >= 2) v -= l2[i] * z[i - 2];
    z[i] = v;
  }
  for (size_t i = 0; i < n; ++i) z[i] /= d[i];
  for (size_t k = n; k-- > 0;) {
    double v = z[k];
    if (k + 1 < n) v -= l1[k + 1] * z[k + 1];
    if (k + 2 < n) v -= l2[k + 2] * z[k + 2];
    z[k] = v;
  }
  return z;
}

}  // namespace rsdn
