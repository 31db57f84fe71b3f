#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "rsdn/error.hpp"
#include "rsdn/spectrum.hpp"

namespace rsdn {

struct MetricsReport {
  double snr_db = 0.0;
  double rmse = 0.0;
  double mape_pct = 0.0;
  size_t excluded_points = 0;
};

inline void require_equal_lengths(const Spectrum& a, const Spectrum& b) {
  if (a.length() != b.length())
    raise(ErrorKind::length_mismatch,
          "spectrum lengths differ: " + std::to_string(a.length()) + " vs " +
              std::to_string(b.length()));
}

// 10 log10(Ps/Pn) with Ps = mean(reference^2), Pn = mean((observed-reference)^2).
// A perfect match (Pn = 0) returns +infinity.
inline double snr_db(const Spectrum& reference, const Spectrum& observed) {
  require_equal_lengths(reference, observed);
  const size_t n = reference.length();
  double ps = 0.0;
  double pn = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ps += reference[i] * reference[i];
    const double d = observed[i] - reference[i];
    pn += d * d;
  }
  ps /= static_cast<double>(n);
  pn /= static_cast<double>(n);
  if (ps <= 0.0)
    raise(ErrorKind::zero_power_signal, "reference spectrum has zero power");
  if (pn == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ps / pn);
}

inline double rmse(const Spectrum& original, const Spectrum& forecast) {
  require_equal_lengths(original, forecast);
  const size_t n = original.length();
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = original[i] - forecast[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

// Default MAPE floor: 1% of the largest absolute original intensity.
inline double mape_default_floor(const Spectrum& original) {
  double m = 0.0;
  for (size_t i = 0; i < original.length(); ++i)
    m = std::max(m, std::abs(original[i]));
  return 0.01 * m;
}

struct MapeResult {
  double mape_pct = 0.0;
  size_t excluded_points = 0;
};

// Mean absolute percentage error over points with |original| > floor.
// Exact zeros are always excluded, even at floor 0.
inline MapeResult mape_pct(const Spectrum& original, const Spectrum& forecast,
                           double floor) {
  require_equal_lengths(original, forecast);
  if (floor < 0.0)
    raise(ErrorKind::invalid_config, "MAPE floor must be >= 0");
  const size_t n = original.length();
  double acc = 0.0;
  size_t used = 0;
  for (size_t i = 0; i < n; ++i) {
    const double o = std::abs(original[i]);
    if (o == 0.0 || o <= floor) continue;
    acc += std::abs(original[i] - forecast[i]) / o;
    ++used;
  }
  if (used == 0)
    raise(ErrorKind::all_points_excluded,
          "every point fell at or below the MAPE floor");
  return {100.0 * acc / static_cast<double>(used), n - used};
}

inline MetricsReport compute_report(const Spectrum& reference,
                                    const Spectrum& observed) {
  MetricsReport r;
  r.snr_db = snr_db(reference, observed);
  r.rmse = rmse(reference, observed);
  const auto m = mape_pct(reference, observed, mape_default_floor(reference));
  r.mape_pct = m.mape_pct;
  r.excluded_points = m.excluded_points;
  return r;
}

}  // namespace rsdn
