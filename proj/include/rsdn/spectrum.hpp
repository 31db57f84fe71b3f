#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rsdn/error.hpp"

namespace rsdn {

// Fixed-length intensity sequence; the unit of all processing. The wavenumber
// axis is optional metadata and never used numerically.
struct Spectrum {
  std::vector<double> intensities;
  bool has_axis = false;
  double wavenumber_start = 0.0;
  double wavenumber_step = 1.0;

  size_t length() const { return intensities.size(); }
  double operator[](size_t i) const { return intensities[i]; }
  double& operator[](size_t i) { return intensities[i]; }
};

constexpr size_t kMinSpectrumLength = 8;

inline void validate_spectrum(const Spectrum& s) {
  if (s.intensities.empty())
    raise(ErrorKind::empty_input, "spectrum has no samples");
  for (size_t i = 0; i < s.intensities.size(); ++i) {
    if (!std::isfinite(s.intensities[i]))
      raise(ErrorKind::non_finite_value,
            "non-finite intensity at index " + std::to_string(i));
  }
  if (s.intensities.size() < kMinSpectrumLength)
    raise(ErrorKind::length_too_short,
          "spectrum length " + std::to_string(s.intensities.size()) +
              " below minimum " + std::to_string(kMinSpectrumLength));
}

inline Spectrum make_spectrum(std::vector<double> values) {
  Spectrum s;
  s.intensities = std::move(values);
  validate_spectrum(s);
  return s;
}

inline Spectrum make_spectrum(std::vector<double> values,
                              double wavenumber_start, double wavenumber_step) {
  Spectrum s = make_spectrum(std::move(values));
  s.has_axis = true;
  s.wavenumber_start = wavenumber_start;
  s.wavenumber_step = wavenumber_step;
  return s;
}

// Clean/noisy pair with noise metadata; the dataset element.
struct SpectrumPair {
  std::string id;
  Spectrum clean;
  Spectrum noisy;
  double target_snr_db = 0.0;
  double realized_snr_db = 0.0;
  uint64_t seed = 0;
};

// Pairs built with the no-noise sentinel carry an infinite realized SNR and
// are legal in-memory values, but datasets (the serialized form) require a
// finite realized SNR.
inline void validate_pair(const SpectrumPair& p, bool require_finite_snr) {
  validate_spectrum(p.clean);
  validate_spectrum(p.noisy);
  if (p.clean.length() != p.noisy.length())
    raise(ErrorKind::length_mismatch,
          "pair '" + p.id + "': clean length " +
              std::to_string(p.clean.length()) + " != noisy length " +
              std::to_string(p.noisy.length()));
  if (require_finite_snr && !std::isfinite(p.realized_snr_db))
    raise(ErrorKind::non_finite_value,
          "pair '" + p.id + "': realized SNR is not finite");
}

enum class Split { train, test };

inline const char* split_name(Split s) {
  return s == Split::train ? "train" : "test";
}

inline Split split_from_name(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  raise(ErrorKind::parse_failure, "unknown split '" + name + "'");
}

struct Dataset {
  std::vector<SpectrumPair> pairs;
  Split split = Split::train;
  std::string generator_config_digest;
};

inline void validate_dataset(const Dataset& d) {
  std::unordered_set<std::string> ids;
  size_t common_length = 0;
  for (const auto& p : d.pairs) {
    validate_pair(p, /*require_finite_snr=*/true);
    if (common_length == 0) common_length = p.clean.length();
    if (p.clean.length() != common_length)
      raise(ErrorKind::length_mismatch,
            "pair '" + p.id + "': length " + std::to_string(p.clean.length()) +
                " differs from dataset length " +
                std::to_string(common_length));
    if (!ids.insert(p.id).second)
      raise(ErrorKind::duplicate_id, "duplicate pair id '" + p.id + "'");
  }
}

}  // namespace rsdn
