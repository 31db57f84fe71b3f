#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rsdn/error.hpp"
#include "rsdn/spectrum.hpp"

namespace rsdn {

enum class Extension { symmetric, periodic };

// Filter bank derived from the scaling (reconstruction low-pass) filter h:
//   rec_lo = h
//   dec_lo = reverse(h)
//   rec_hi[k] = (-1)^k dec_lo[k]      (quadrature mirror)
//   dec_hi = reverse(rec_hi)
// Construction verifies orthonormality and perfect reconstruction to 1e-10.
struct WaveletSpec {
  std::string name;
  std::vector<double> dec_lo, dec_hi, rec_lo, rec_hi;
  Extension extension = Extension::symmetric;

  size_t filter_length() const { return rec_lo.size(); }
};

namespace detail {

inline const std::vector<double>& scaling_filter(const std::string& name) {
  static const std::vector<double> haar{0.70710678118654752440,
                                        0.70710678118654752440};
  static const std::vector<double> sym4{
      0.032223100604042702, -0.012603967262037833, -0.099219543576847216,
      0.29785779560527736,  0.80373875180591614,   0.49761866763201545,
      -0.029635527645998855, -0.075765714789273325};
  static const std::vector<double> db4{
      0.23037781330885523,   0.7148465705525415,   0.6308807679295904,
      -0.02798376941698385,  -0.18703481171888114, 0.030841381835986965,
      0.032883011666982945,  -0.010597401784997278};
  if (name == "haar") return haar;
  if (name == "sym4") return sym4;
  if (name == "db4") return db4;
  raise(ErrorKind::invalid_config, "unknown wavelet '" + name + "'");
}

}  // namespace detail

// Band length produced by one analysis stage from an input of length n.
inline size_t band_length(size_t n, size_t filter_len, Extension ext) {
  if (ext == Extension::symmetric) return (n + filter_len - 1) / 2;
  return (n + 1) / 2;
}

// One-level analysis with half-point symmetric extension.
inline void dwt_step_symmetric(const std::vector<double>& x,
                               const WaveletSpec& w, std::vector<double>& a,
                               std::vector<double>& d) {
  const size_t n = x.size();
  const size_t f = w.filter_length();
  const size_t p = f - 1;
  std::vector<double> ext(n + 2 * p);
  for (size_t i = 0; i < p; ++i) ext[i] = x[p - 1 - i];
  for (size_t i = 0; i < n; ++i) ext[p + i] = x[i];
  for (size_t i = 0; i < p; ++i) ext[p + n + i] = x[n - 1 - i];

  const size_t bands = band_length(n, f, Extension::symmetric);
  a.assign(bands, 0.0);
  d.assign(bands, 0.0);
  for (size_t k = 0; k < bands; ++k) {
    const size_t j = 2 * k + 1;
    double sa = 0.0;
    double sd = 0.0;
    for (size_t m = 0; m < f; ++m) {
      const double v = ext[j + f - 1 - m];
      sa += w.dec_lo[m] * v;
      sd += w.dec_hi[m] * v;
    }
    a[k] = sa;
    d[k] = sd;
  }
}

// One-level synthesis for the symmetric mode; crops the full upsampled
// convolution at offset filter_len-2.
inline std::vector<double> idwt_step_symmetric(const std::vector<double>& a,
                                               const std::vector<double>& d,
                                               const WaveletSpec& w,
                                               size_t target_len) {
  const size_t f = w.filter_length();
  const size_t bands = a.size();
  const size_t full = 2 * bands + f - 2;
  if (f - 2 + target_len > full)
    raise(ErrorKind::bookkeeping_mismatch,
          "synthesis target length inconsistent with band length");
  std::vector<double> y(full, 0.0);
  for (size_t k = 0; k < bands; ++k) {
    const double av = a[k];
    const double dv = d[k];
    double* out = y.data() + 2 * k;
    for (size_t t = 0; t < f; ++t)
      out[t] += av * w.rec_lo[t] + dv * w.rec_hi[t];
  }
  return std::vector<double>(y.begin() + static_cast<long>(f - 2),
                             y.begin() + static_cast<long>(f - 2 + target_len));
}

// One-level analysis by periodization; odd lengths are edge-padded by one
// sample first, so the working length is always even.
inline void dwt_step_periodic(const std::vector<double>& x,
                              const WaveletSpec& w, std::vector<double>& a,
                              std::vector<double>& d) {
  std::vector<double> xv = x;
  if (xv.size() % 2 == 1) xv.push_back(xv.back());
  const size_t n = xv.size();
  const size_t f = w.filter_length();
  const size_t bands = n / 2;
  a.assign(bands, 0.0);
  d.assign(bands, 0.0);
  for (size_t k = 0; k < bands; ++k) {
    double sa = 0.0;
    double sd = 0.0;
    for (size_t m = 0; m < f; ++m) {
      const long raw = static_cast<long>(2 * k + 1) - static_cast<long>(m);
      const size_t idx = static_cast<size_t>(
          ((raw % static_cast<long>(n)) + static_cast<long>(n)) %
          static_cast<long>(n));
      sa += w.dec_lo[m] * xv[idx];
      sd += w.dec_hi[m] * xv[idx];
    }
    a[k] = sa;
    d[k] = sd;
  }
}

// Inverse of the periodized analysis: the analysis operator is orthonormal on
// the (padded) circle, so its adjoint inverts it; crop removes the edge pad.
inline std::vector<double> idwt_step_periodic(const std::vector<double>& a,
                                              const std::vector<double>& d,
                                              const WaveletSpec& w,
                                              size_t target_len) {
  const size_t f = w.filter_length();
  const size_t bands = a.size();
  const size_t n = 2 * bands;
  if (target_len > n)
    raise(ErrorKind::bookkeeping_mismatch,
          "synthesis target length inconsistent with band length");
  std::vector<double> y(n, 0.0);
  for (size_t k = 0; k < bands; ++k) {
    for (size_t m = 0; m < f; ++m) {
      const long raw = static_cast<long>(2 * k + 1) - static_cast<long>(m);
      const size_t idx = static_cast<size_t>(
          ((raw % static_cast<long>(n)) + static_cast<long>(n)) %
          static_cast<long>(n));
      y[idx] += a[k] * w.dec_lo[m] + d[k] * w.dec_hi[m];
    }
  }
  y.resize(target_len);
  return y;
}

inline void dwt_step(const std::vector<double>& x, const WaveletSpec& w,
                     std::vector<double>& a, std::vector<double>& d) {
  if (w.extension == Extension::symmetric) {
    dwt_step_symmetric(x, w, a, d);
  } else {
    dwt_step_periodic(x, w, a, d);
  }
}

inline std::vector<double> idwt_step(const std::vector<double>& a,
                                     const std::vector<double>& d,
                                     const WaveletSpec& w, size_t target_len) {
  if (w.extension == Extension::symmetric)
    return idwt_step_symmetric(a, d, w, target_len);
  return idwt_step_periodic(a, d, w, target_len);
}

// Multilevel coefficients: details finest-first plus the final approximation.
// level_lengths[i] is the input length of stage i (level_lengths[0] ==
// source_length), which is exactly what inversion needs for cropping.
struct CoefficientPyramid {
  size_t levels = 0;
  std::vector<std::vector<double>> details;
  std::vector<double> approximation;
  std::vector<size_t> level_lengths;
  size_t source_length = 0;
};

// Deepest decomposition that keeps the coarsest approximation at least one
// filter long.
inline size_t max_levels(size_t n, const WaveletSpec& w) {
  size_t levels = 0;
  size_t len = n;
  while (true) {
    const size_t next = band_length(len, w.filter_length(), w.extension);
    if (next < w.filter_length()) break;
    len = next;
    ++levels;
  }
  return levels;
}

inline size_t default_levels(size_t n, const WaveletSpec& w) {
  const double ratio =
      static_cast<double>(n) / static_cast<double>(w.filter_length());
  const auto by_rule =
      ratio >= 2.0 ? static_cast<size_t>(std::floor(std::log2(ratio))) : 0u;
  const size_t cap = max_levels(n, w);
  return std::min<size_t>(5, std::min<size_t>(by_rule, cap));
}

inline CoefficientPyramid dwt(const std::vector<double>& x,
                              const WaveletSpec& w, size_t levels) {
  if (levels < 1)
    raise(ErrorKind::invalid_config, "decomposition needs at least one level");
  if (levels > max_levels(x.size(), w))
    raise(x.size() < w.filter_length() ? ErrorKind::length_too_short
                                       : ErrorKind::too_many_levels,
          "requested " + std::to_string(levels) +
              " levels but only " + std::to_string(max_levels(x.size(), w)) +
              " are feasible for length " + std::to_string(x.size()));

  CoefficientPyramid p;
  p.levels = levels;
  p.source_length = x.size();
  std::vector<double> cur = x;
  for (size_t lev = 0; lev < levels; ++lev) {
    p.level_lengths.push_back(cur.size());
    std::vector<double> a;
    std::vector<double> d;
    dwt_step(cur, w, a, d);
    p.details.push_back(std::move(d));
    cur = std::move(a);
  }
  p.approximation = std::move(cur);
  return p;
}

inline CoefficientPyramid dwt(const Spectrum& x, const WaveletSpec& w,
                              size_t levels) {
  validate_spectrum(x);
  return dwt(x.intensities, w, levels);
}

inline void validate_pyramid(const CoefficientPyramid& p,
                             const WaveletSpec& w) {
  if (p.levels == 0 || p.details.size() != p.levels ||
      p.level_lengths.size() != p.levels)
    raise(ErrorKind::bookkeeping_mismatch, "pyramid bookkeeping incomplete");
  if (p.level_lengths[0] != p.source_length)
    raise(ErrorKind::bookkeeping_mismatch,
          "pyramid source length disagrees with stage bookkeeping");
  size_t len = p.source_length;
  for (size_t lev = 0; lev < p.levels; ++lev) {
    if (p.level_lengths[lev] != len)
      raise(ErrorKind::bookkeeping_mismatch,
            "stage input length mismatch at level " + std::to_string(lev + 1));
    const size_t bands = band_length(len, w.filter_length(), w.extension);
    if (p.details[lev].size() != bands)
      raise(ErrorKind::bookkeeping_mismatch,
            "detail band size mismatch at level " + std::to_string(lev + 1));
    len = bands;
  }
  if (p.approximation.size() != len)
    raise(ErrorKind::bookkeeping_mismatch, "approximation band size mismatch");
  for (const auto& lev : p.details)
    for (const double c : lev)
      if (!std::isfinite(c))
        raise(ErrorKind::non_finite_value, "non-finite detail coefficient");
  for (const double c : p.approximation)
    if (!std::isfinite(c))
      raise(ErrorKind::non_finite_value,
            "non-finite approximation coefficient");
}

inline std::vector<double> idwt_vec(const CoefficientPyramid& p,
                                    const WaveletSpec& w) {
  validate_pyramid(p, w);
  std::vector<double> cur = p.approximation;
  for (size_t lev = p.levels; lev-- > 0;)
    cur = idwt_step(cur, p.details[lev], w, p.level_lengths[lev]);
  return cur;
}

inline Spectrum idwt(const CoefficientPyramid& p, const WaveletSpec& w) {
  return make_spectrum(idwt_vec(p, w));
}

inline WaveletSpec make_wavelet(const std::string& name,
                                Extension ext = Extension::symmetric) {
  WaveletSpec w;
  w.name = name;
  w.extension = ext;
  w.rec_lo = detail::scaling_filter(name);
  const size_t f = w.rec_lo.size();
  w.dec_lo.assign(w.rec_lo.rbegin(), w.rec_lo.rend());
  w.rec_hi.resize(f);
  for (size_t k = 0; k < f; ++k)
    w.rec_hi[k] = (k % 2 == 0 ? 1.0 : -1.0) * w.dec_lo[k];
  w.dec_hi.assign(w.rec_hi.rbegin(), w.rec_hi.rend());

  // Orthonormal filter identities.
  double sum = 0.0;
  double energy = 0.0;
  for (const double h : w.rec_lo) {
    sum += h;
    energy += h * h;
  }
  if (std::abs(sum - std::sqrt(2.0)) > 1e-10 || std::abs(energy - 1.0) > 1e-10)
    raise(ErrorKind::invalid_config,
          "wavelet '" + name + "': scaling filter is not orthonormal");
  for (size_t shift = 2; shift < f; shift += 2) {
    double dot = 0.0;
    for (size_t k = 0; k + shift < f; ++k)
      dot += w.rec_lo[k] * w.rec_lo[k + shift];
    if (std::abs(dot) > 1e-10)
      raise(ErrorKind::invalid_config,
            "wavelet '" + name + "': even-shift orthogonality fails");
  }

  // End-to-end perfect-reconstruction self-check on a fixed pseudo-random
  // signal, in the wavelet's configured extension mode.
  std::vector<double> probe(37);
  uint64_t state = 0x9e3779b97f4a7c15ULL;
  for (auto& v : probe) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    v = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  }
  std::vector<double> a;
  std::vector<double> d;
  dwt_step(probe, w, a, d);
  const auto back = idwt_step(a, d, w, probe.size());
  for (size_t i = 0; i < probe.size(); ++i) {
    if (std::abs(back[i] - probe[i]) > 1e-10)
      raise(ErrorKind::invalid_config,
            "wavelet '" + name + "': perfect reconstruction check failed");
  }
  return w;
}

}  // namespace rsdn
