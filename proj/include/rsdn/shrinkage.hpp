#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rsdn/error.hpp"
#include "rsdn/special.hpp"
#include "rsdn/spectrum.hpp"
#include "rsdn/wavelet.hpp"

namespace rsdn {

enum class ShrinkKind { universal, sure, minimax, fdr, block_js, empirical_bayes };
enum class ShrinkMode { soft, hard };

struct ShrinkageRule {
  ShrinkKind kind = ShrinkKind::universal;
  ShrinkMode mode = ShrinkMode::soft;  // universal/SURE/minimax only
  double q = 0.05;                     // FDR rate
  double ebayes_scale = 0.5;           // Laplace prior scale a
};

inline ShrinkKind shrink_kind_from_name(const std::string& name) {
  if (name == "universal") return ShrinkKind::universal;
  if (name == "sure") return ShrinkKind::sure;
  if (name == "minimax") return ShrinkKind::minimax;
  if (name == "fdr") return ShrinkKind::fdr;
  if (name == "blockjs") return ShrinkKind::block_js;
  if (name == "ebayes") return ShrinkKind::empirical_bayes;
  raise(ErrorKind::invalid_config, "unknown shrinkage rule '" + name + "'");
}

inline const char* shrink_kind_name(ShrinkKind k) {
  switch (k) {
    case ShrinkKind::universal: return "universal";
    case ShrinkKind::sure: return "sure";
    case ShrinkKind::minimax: return "minimax";
    case ShrinkKind::fdr: return "fdr";
    case ShrinkKind::block_js: return "blockjs";
    case ShrinkKind::empirical_bayes: return "ebayes";
  }
  return "?";
}

inline void validate_rule(const ShrinkageRule& r) {
  if (!(r.q > 0.0 && r.q < 1.0))
    raise(ErrorKind::invalid_config, "FDR rate must lie in (0,1)");
  if (!(r.ebayes_scale > 0.0))
    raise(ErrorKind::invalid_config, "empirical Bayes scale must be > 0");
}

// Noise level from the finest detail band: median(|d1|) / 0.6745.
inline double estimate_sigma(const CoefficientPyramid& p) {
  if (p.details.empty() || p.details.front().empty())
    raise(ErrorKind::empty_level, "no finest detail level");
  std::vector<double> mags(p.details.front().size());
  for (size_t i = 0; i < mags.size(); ++i)
    mags[i] = std::abs(p.details.front()[i]);
  return median(std::move(mags)) / 0.6745;
}

inline double threshold_universal(double sigma, size_t n) {
  if (sigma < 0.0)
    raise(ErrorKind::invalid_config, "sigma must be >= 0");
  if (n < 2) raise(ErrorKind::invalid_config, "universal threshold needs n >= 2");
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

inline double threshold_minimax(double sigma, size_t n) {
  if (n < 2) raise(ErrorKind::invalid_config, "minimax threshold needs n >= 2");
  if (n <= 32) return 0.0;
  return sigma * (0.3936 + 0.1829 * std::log2(static_cast<double>(n)));
}

// SURE(t) = n - 2 #{|c| <= t sigma} + sum min(c^2/sigma^2, t^2), minimized
// over t in {|c_i|/sigma} plus 0, ties toward smaller t. A sparse level
// (standard hybrid guard) falls back to the universal threshold of the level.
inline double threshold_sure(const std::vector<double>& coeffs, double sigma) {
  if (coeffs.empty()) raise(ErrorKind::empty_level, "SURE on empty level");
  if (!(sigma > 0.0)) raise(ErrorKind::invalid_config, "SURE needs sigma > 0");
  const size_t n = coeffs.size();
  const double nd = static_cast<double>(n);

  double energy_excess = 0.0;
  for (const double c : coeffs) {
    const double z = c / sigma;
    energy_excess += z * z - 1.0;
  }
  energy_excess /= nd;
  const double guard =
      std::pow(std::log2(nd), 1.5) / std::sqrt(nd);
  if (energy_excess <= guard) return threshold_universal(sigma, std::max<size_t>(n, 2));

  std::vector<double> cand(n + 1, 0.0);
  for (size_t i = 0; i < n; ++i) cand[i + 1] = std::abs(coeffs[i]) / sigma;
  std::sort(cand.begin(), cand.end());

  double best_t = 0.0;
  double best_risk = 0.0;
  bool first = true;
  for (const double t : cand) {
    size_t killed = 0;
    double risk = 0.0;
    for (const double c : coeffs) {
      const double z = c / sigma;
      if (std::abs(z) <= t) ++killed;
      risk += std::min(z * z, t * t);
    }
    risk += nd - 2.0 * static_cast<double>(killed);
    if (first || risk < best_risk) {
      first = false;
      best_risk = risk;
      best_t = t;
    }
  }
  return sigma * best_t;
}

inline std::vector<double> shrink_soft(const std::vector<double>& coeffs,
                                       double t) {
  if (t < 0.0) raise(ErrorKind::invalid_config, "threshold must be >= 0");
  std::vector<double> out(coeffs.size());
  for (size_t i = 0; i < coeffs.size(); ++i) {
    const double mag = std::abs(coeffs[i]) - t;
    out[i] = mag > 0.0 ? (coeffs[i] > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

inline std::vector<double> shrink_hard(const std::vector<double>& coeffs,
                                       double t) {
  if (t < 0.0) raise(ErrorKind::invalid_config, "threshold must be >= 0");
  std::vector<double> out(coeffs.size());
  for (size_t i = 0; i < coeffs.size(); ++i)
    out[i] = std::abs(coeffs[i]) > t ? coeffs[i] : 0.0;
  return out;
}

// Benjamini-Hochberg on two-sided p-values, then hard thresholding at the
// k-th largest magnitude. No discoveries kills every coefficient.
inline std::vector<double> shrink_fdr(const std::vector<double>& coeffs,
                                      double sigma, double q) {
  if (!(sigma > 0.0)) raise(ErrorKind::invalid_config, "FDR needs sigma > 0");
  if (!(q > 0.0 && q < 1.0))
    raise(ErrorKind::invalid_config, "FDR rate must lie in (0,1)");
  const size_t n = coeffs.size();
  std::vector<double> mags(n);
  for (size_t i = 0; i < n; ++i) mags[i] = std::abs(coeffs[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());

  size_t k_best = 0;
  for (size_t k = 1; k <= n; ++k) {
    const double p = 2.0 * (1.0 - norm_cdf(mags[k - 1] / sigma));
    if (p <= q * static_cast<double>(k) / static_cast<double>(n)) k_best = k;
  }
  std::vector<double> out(n, 0.0);
  if (k_best == 0) return out;
  const double thresh = mags[k_best - 1];
  for (size_t i = 0; i < n; ++i)
    if (std::abs(coeffs[i]) >= thresh) out[i] = coeffs[i];
  return out;
}

inline constexpr double kBlockJsLambda = 4.50524;

// James-Stein shrinkage on contiguous blocks of length floor(ln n); the
// trailing partial block is shrunk with its actual length.
inline std::vector<double> shrink_block_js(const std::vector<double>& coeffs,
                                           double sigma) {
  if (!(sigma > 0.0))
    raise(ErrorKind::invalid_config, "block shrinkage needs sigma > 0");
  const size_t n = coeffs.size();
  const size_t block =
      std::max<size_t>(1, static_cast<size_t>(
                              std::floor(std::log(static_cast<double>(n)))));
  std::vector<double> out(n, 0.0);
  for (size_t start = 0; start < n; start += block) {
    const size_t len = std::min(block, n - start);
    double s2 = 0.0;
    for (size_t i = start; i < start + len; ++i) s2 += coeffs[i] * coeffs[i];
    const double floor_energy =
        kBlockJsLambda * static_cast<double>(len) * sigma * sigma;
    const double factor = s2 > floor_energy ? 1.0 - floor_energy / s2 : 0.0;
    for (size_t i = start; i < start + len; ++i) out[i] = factor * coeffs[i];
  }
  return out;
}

namespace detail {

// Marginal density ratio for the Laplace(a) prior convolved with a unit
// Gaussian: beta(z) = g(z)/phi(z) - 1, evaluated through erfcx for stability.
inline double beta_laplace(double z, double a) {
  const double x = std::abs(z);
  return (a / 4.0) * kSqrt2Pi *
             (erfcx((x + a) / kSqrt2) + erfcx((a - x) / kSqrt2)) -
         1.0;
}

// Posterior median of the spike-and-Laplace model at observation z (unit
// noise scale), mixing weight w.
inline double postmed_laplace(double z, double w, double a) {
  const double sx = z >= 0.0 ? 1.0 : -1.0;
  const double x = std::abs(z);
  const double xma = x - a;
  double zz;
  if (xma > 25.0) {
    zz = 0.5;
  } else {
    zz = (1.0 / a) * norm_pdf(xma) * (1.0 / w + beta_laplace(x, a));
  }
  if (zz >= 1.0) return 0.0;
  const double mucor = norm_ppf(std::max(zz, 1e-300));
  const double med = xma - mucor;
  return med > 0.0 ? sx * med : 0.0;
}

// Marginal-likelihood weight: the score sum beta_i/(1 + w beta_i) is
// decreasing in w, so bisection brackets the root; endpoints win when the
// score does not change sign in [wmin, 1].
inline double weight_from_scores(const std::vector<double>& betas,
                                 double wmin) {
  auto score = [&](double w) {
    double s = 0.0;
    for (const double b : betas) {
      if (std::isinf(b)) {
        s += 1.0 / w;
      } else {
        s += b / (1.0 + w * b);
      }
    }
    return s;
  };
  if (score(1.0) >= 0.0) return 1.0;
  if (score(wmin) <= 0.0) return wmin;
  double lo = wmin;
  double hi = 1.0;
  while (hi - lo > 1e-6 * 0.5 * (hi + lo)) {
    const double mid = 0.5 * (lo + hi);
    if (score(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline constexpr double kEbayesWeightMin = 1e-4;

// Spike-and-Laplace empirical Bayes: estimate the mixing weight per level by
// marginal likelihood, then shrink each coefficient to its posterior median.
inline std::vector<double> shrink_ebayes(const std::vector<double>& coeffs,
                                         double sigma, double a) {
  if (!(sigma > 0.0))
    raise(ErrorKind::invalid_config, "empirical Bayes needs sigma > 0");
  if (!(a > 0.0))
    raise(ErrorKind::invalid_config, "empirical Bayes scale must be > 0");
  const size_t n = coeffs.size();
  std::vector<double> betas(n);
  for (size_t i = 0; i < n; ++i)
    betas[i] = detail::beta_laplace(coeffs[i] / sigma, a);
  const double w = detail::weight_from_scores(betas, kEbayesWeightMin);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i)
    out[i] = sigma * detail::postmed_laplace(coeffs[i] / sigma, w, a);
  return out;
}

// dwt -> MAD sigma -> per-level shrinkage (approximation untouched) -> idwt.
// levels 0 selects the default depth for the signal length.
inline Spectrum wavelet_denoise(const Spectrum& x, const ShrinkageRule& rule,
                                const WaveletSpec& w, size_t levels = 0) {
  validate_spectrum(x);
  validate_rule(rule);
  if (levels == 0) levels = default_levels(x.length(), w);
  CoefficientPyramid p = dwt(x, w, levels);
  const double sigma = estimate_sigma(p);
  const size_t n = x.length();

  if (sigma > 0.0) {
    for (auto& level : p.details) {
      switch (rule.kind) {
        case ShrinkKind::universal: {
          const double t = threshold_universal(sigma, n);
          level = rule.mode == ShrinkMode::soft ? shrink_soft(level, t)
                                                : shrink_hard(level, t);
          break;
        }
        case ShrinkKind::sure: {
          const double t = threshold_sure(level, sigma);
          level = rule.mode == ShrinkMode::soft ? shrink_soft(level, t)
                                                : shrink_hard(level, t);
          break;
        }
        case ShrinkKind::minimax: {
          const double t = threshold_minimax(sigma, n);
          level = rule.mode == ShrinkMode::soft ? shrink_soft(level, t)
                                                : shrink_hard(level, t);
          break;
        }
        case ShrinkKind::fdr:
          level = shrink_fdr(level, sigma, rule.q);
          break;
        case ShrinkKind::block_js:
          level = shrink_block_js(level, sigma);
          break;
        case ShrinkKind::empirical_bayes:
          level = shrink_ebayes(level, sigma, rule.ebayes_scale);
          break;
      }
    }
  }
  Spectrum out = idwt(p, w);
  out.has_axis = x.has_axis;
  out.wavenumber_start = x.wavenumber_start;
  out.wavenumber_step = x.wavenumber_step;
  return out;
}

}  // namespace rsdn
