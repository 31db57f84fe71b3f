#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rsdn/error.hpp"

namespace rsdn {

// Dense [batch, channels, length] tensor, flat row-major storage.
struct Tensor {
  size_t batch = 0;
  size_t channels = 0;
  size_t length = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(size_t b, size_t c, size_t l)
      : batch(b), channels(c), length(l), data(b * c * l, 0.0) {}

  size_t numel() const { return data.size(); }

  double* row(size_t b, size_t c) { return data.data() + (b * channels + c) * length; }
  const double* row(size_t b, size_t c) const {
    return data.data() + (b * channels + c) * length;
  }

  double& at(size_t b, size_t c, size_t i) {
    return data[(b * channels + c) * length + i];
  }
  double at(size_t b, size_t c, size_t i) const {
    return data[(b * channels + c) * length + i];
  }

  // View with channels folded into length; shares no storage (copy of shape,
  // same data vector moved/copied by caller when needed).
  void reshape(size_t b, size_t c, size_t l) {
    if (b * c * l != data.size())
      raise(ErrorKind::shape_mismatch, "reshape changes element count");
    batch = b;
    channels = c;
    length = l;
  }
};

inline void check_finite(const Tensor& t, const char* where) {
  for (const double v : t.data)
    if (!std::isfinite(v))
      raise(ErrorKind::non_finite_value,
            std::string("non-finite activation in ") + where);
}

// Unrolled dot product: eight independent accumulators so the compiler can
// keep vector lanes busy; summation order is fixed, keeping runs bit-for-bit
// reproducible.
inline double dot8(const double* a, const double* b, size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  double s4 = 0.0, s5 = 0.0, s6 = 0.0, s7 = 0.0;
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return (((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))) + tail;
}

inline void axpy(double alpha, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Two axpys sharing one pass over x; the shared operand is loaded once per
// pair of fused multiply-adds, which matters when x is a long weight row.
inline void axpy_pair(double a0, double a1, const double* x, double* y0,
                      double* y1, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    y0[i] += a0 * xi;
    y1[i] += a1 * xi;
  }
}

// Two dot products against a shared x, same accumulation order as dot8
// (results may still differ from dot8 in the last ulp where the compiler
// contracts multiplies into FMAs differently per loop body).
inline void dot8_pair(const double* x, const double* a, const double* b,
                      size_t n, double* ra, double* rb) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  double t0 = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;
  double s4 = 0.0, s5 = 0.0, s6 = 0.0, s7 = 0.0;
  double t4 = 0.0, t5 = 0.0, t6 = 0.0, t7 = 0.0;
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += x[i] * a[i];
    t0 += x[i] * b[i];
    s1 += x[i + 1] * a[i + 1];
    t1 += x[i + 1] * b[i + 1];
    s2 += x[i + 2] * a[i + 2];
    t2 += x[i + 2] * b[i + 2];
    s3 += x[i + 3] * a[i + 3];
    t3 += x[i + 3] * b[i + 3];
    s4 += x[i + 4] * a[i + 4];
    t4 += x[i + 4] * b[i + 4];
    s5 += x[i + 5] * a[i + 5];
    t5 += x[i + 5] * b[i + 5];
    s6 += x[i + 6] * a[i + 6];
    t6 += x[i + 6] * b[i + 6];
    s7 += x[i + 7] * a[i + 7];
    t7 += x[i + 7] * b[i + 7];
  }
  double sa = 0.0, sb = 0.0;
  for (; i < n; ++i) {
    sa += x[i] * a[i];
    sb += x[i] * b[i];
  }
  *ra = (((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))) + sa;
  *rb = (((t0 + t1) + (t2 + t3)) + ((t4 + t5) + (t6 + t7))) + sb;
}

}  // namespace rsdn
