#pragma once

#include <cmath>
#include <vector>

#include "rsdn/error.hpp"
#include "rsdn/spectrum.hpp"
#include "rsdn/whittaker.hpp"

namespace rsdn {

struct AirplsConfig {
  double lambda = 1e5;
  int max_iter = 15;
  int order = 2;  // difference order of the smoother penalty
  double termination_ratio = 1e-3;
};

inline void validate_airpls_config(const AirplsConfig& cfg) {
  if (!(cfg.lambda > 0.0))
    raise(ErrorKind::invalid_config, "airPLS lambda must be > 0");
  if (cfg.max_iter < 1)
    raise(ErrorKind::invalid_config, "airPLS max_iter must be >= 1");
  if (cfg.order != 2)
    raise(ErrorKind::invalid_config,
          "airPLS supports second-order differences only");
  if (!(cfg.termination_ratio > 0.0))
    raise(ErrorKind::invalid_config, "airPLS termination ratio must be > 0");
}

struct BaselineFit {
  Spectrum baseline;
  int iterations_used = 0;
  bool converged = false;
  double final_weight_mass = 0.0;
};

// Adaptive iteratively reweighted penalized least squares. Points above the
// current baseline lose their weight entirely; points below gain
// exponentially growing weight, so the fit sinks under the peaks while
// following the smooth background. Stops when the mass of negative residuals
// is small relative to the signal.
inline BaselineFit airpls(const Spectrum& y, const AirplsConfig& cfg = {}) {
  validate_spectrum(y);
  validate_airpls_config(cfg);
  const size_t n = y.length();

  double total_abs = 0.0;
  for (size_t i = 0; i < n; ++i) total_abs += std::abs(y[i]);

  std::vector<double> w(n, 1.0);
  BaselineFit fit;
  fit.baseline.intensities.assign(n, 0.0);
  fit.baseline.has_axis = y.has_axis;
  fit.baseline.wavenumber_start = y.wavenumber_start;
  fit.baseline.wavenumber_step = y.wavenumber_step;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    fit.final_weight_mass = 0.0;
    for (const double wi : w) fit.final_weight_mass += wi;
    fit.baseline.intensities = whittaker_smooth(y.intensities, w, cfg.lambda);
    fit.iterations_used = it;

    double dssn = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double d = y[i] - fit.baseline.intensities[i];
      if (d < 0.0) dssn += -d;
    }
    if (dssn == 0.0 || dssn < cfg.termination_ratio * total_abs) {
      fit.converged = true;
      break;
    }
    for (size_t i = 0; i < n; ++i) {
      const double d = y[i] - fit.baseline.intensities[i];
      if (d >= 0.0) {
        w[i] = 0.0;
      } else {
        const double expo =
            std::min(static_cast<double>(it) * (-d) / dssn, 50.0);
        w[i] = std::exp(expo);
      }
    }
  }
  return fit;
}

inline Spectrum correct(const Spectrum& y, const AirplsConfig& cfg = {}) {
  const BaselineFit fit = airpls(y, cfg);
  Spectrum out = y;
  for (size_t i = 0; i < y.length(); ++i)
    out[i] = y[i] - fit.baseline.intensities[i];
  return out;
}

}  // namespace rsdn
