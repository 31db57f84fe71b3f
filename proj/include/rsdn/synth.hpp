#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rsdn/error.hpp"
#include "rsdn/metrics.hpp"
#include "rsdn/rng.hpp"
#include "rsdn/spectrum.hpp"
#include "rsdn/textio.hpp"

namespace rsdn {

// Target SNR meaning "add no noise at all" (sigma = 0).
inline constexpr double kNoNoiseSnrDb = std::numeric_limits<double>::infinity();

enum class PeakShape { lorentzian, gaussian };

struct PeakSpec {
  double center = 0.0;     // sample index
  double width = 1.0;      // samples
  double amplitude = 1.0;  // intensity units
  PeakShape shape = PeakShape::lorentzian;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct CountRange {
  int lo = 0;
  int hi = 0;
};

struct GeneratorConfig {
  size_t length = 2051;
  CountRange peak_count_range{3, 12};
  Range amplitude_range{0.2, 1.0};
  Range width_range{8.0, 30.0};
  int baseline_poly_degree = 2;
  Range baseline_amp_range{0.0, 0.5};
  CountRange hump_count_range{1, 3};
  std::vector<double> snr_grid_db{9.5};
  uint64_t base_seed = 1;
};

inline void validate_config(const GeneratorConfig& cfg) {
  if (cfg.length < kMinSpectrumLength)
    raise(ErrorKind::invalid_config, "generator length below minimum");
  if (cfg.peak_count_range.lo < 0 ||
      cfg.peak_count_range.hi < cfg.peak_count_range.lo)
    raise(ErrorKind::invalid_config, "bad peak count range");
  if (cfg.amplitude_range.lo <= 0.0 ||
      cfg.amplitude_range.hi < cfg.amplitude_range.lo)
    raise(ErrorKind::invalid_config, "bad amplitude range");
  if (cfg.width_range.lo < 0.5 || cfg.width_range.hi < cfg.width_range.lo)
    raise(ErrorKind::invalid_config, "bad width range (minimum width 0.5)");
  if (cfg.baseline_poly_degree < 0 || cfg.baseline_poly_degree > 10)
    raise(ErrorKind::invalid_config, "baseline polynomial degree out of range");
  if (cfg.baseline_amp_range.lo < 0.0 ||
      cfg.baseline_amp_range.hi < cfg.baseline_amp_range.lo)
    raise(ErrorKind::invalid_config, "bad baseline amplitude range");
  if (cfg.hump_count_range.lo < 0 ||
      cfg.hump_count_range.hi < cfg.hump_count_range.lo)
    raise(ErrorKind::invalid_config, "bad hump count range");
  if (cfg.snr_grid_db.empty())
    raise(ErrorKind::invalid_config, "SNR grid is empty");
  for (const double v : cfg.snr_grid_db) {
    if (!(v >= 0.0 && v <= 80.0))
      raise(ErrorKind::invalid_config, "SNR grid value outside [0, 80] dB");
  }
}

// Canonical key/value rendering; the digest is taken over these exact bytes.
inline std::string config_text(const GeneratorConfig& cfg) {
  std::ostringstream out;
  out << "length = " << cfg.length << "\n";
  out << "peak_count = " << cfg.peak_count_range.lo << ","
      << cfg.peak_count_range.hi << "\n";
  out << "amplitude = " << format_double(cfg.amplitude_range.lo) << ","
      << format_double(cfg.amplitude_range.hi) << "\n";
  out << "width = " << format_double(cfg.width_range.lo) << ","
      << format_double(cfg.width_range.hi) << "\n";
  out << "baseline_poly_degree = " << cfg.baseline_poly_degree << "\n";
  out << "baseline_amp = " << format_double(cfg.baseline_amp_range.lo) << ","
      << format_double(cfg.baseline_amp_range.hi) << "\n";
  out << "hump_count = " << cfg.hump_count_range.lo << ","
      << cfg.hump_count_range.hi << "\n";
  out << "snr_grid_db = ";
  for (size_t i = 0; i < cfg.snr_grid_db.size(); ++i) {
    if (i) out << ",";
    out << format_double(cfg.snr_grid_db[i]);
  }
  out << "\n";
  out << "base_seed = " << cfg.base_seed << "\n";
  return out.str();
}

inline std::string config_digest(const GeneratorConfig& cfg) {
  return fnv1a_hex(config_text(cfg));
}

inline std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

inline GeneratorConfig parse_config_text(const std::string& text) {
  GeneratorConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  auto pair_of = [&](std::string_view value) {
    const auto parts = split_on(value, ',');
    if (parts.size() != 2)
      raise(ErrorKind::parse_failure,
            "config line " + std::to_string(lineno) + ": expected 'lo,hi'");
    return std::pair<std::string_view, std::string_view>(trim(parts[0]),
                                                         trim(parts[1]));
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string_view::npos)
      raise(ErrorKind::parse_failure,
            "config line " + std::to_string(lineno) + ": missing '='");
    const auto key = trim(stripped.substr(0, eq));
    const auto value = trim(stripped.substr(eq + 1));
    if (key == "length") {
      cfg.length = static_cast<size_t>(parse_u64(value));
    } else if (key == "peak_count") {
      const auto [lo, hi] = pair_of(value);
      cfg.peak_count_range = {static_cast<int>(parse_u64(lo)),
                              static_cast<int>(parse_u64(hi))};
    } else if (key == "amplitude") {
      const auto [lo, hi] = pair_of(value);
      cfg.amplitude_range = {parse_double(lo), parse_double(hi)};
    } else if (key == "width") {
      const auto [lo, hi] = pair_of(value);
      cfg.width_range = {parse_double(lo), parse_double(hi)};
    } else if (key == "baseline_poly_degree") {
      cfg.baseline_poly_degree = static_cast<int>(parse_u64(value));
    } else if (key == "baseline_amp") {
      const auto [lo, hi] = pair_of(value);
      cfg.baseline_amp_range = {parse_double(lo), parse_double(hi)};
    } else if (key == "hump_count") {
      const auto [lo, hi] = pair_of(value);
      cfg.hump_count_range = {static_cast<int>(parse_u64(lo)),
                              static_cast<int>(parse_u64(hi))};
    } else if (key == "snr_grid_db") {
      cfg.snr_grid_db.clear();
      for (const auto part : split_on(value, ','))
        cfg.snr_grid_db.push_back(parse_double(trim(part)));
    } else if (key == "base_seed") {
      cfg.base_seed = parse_u64(value);
    } else {
      raise(ErrorKind::parse_failure,
            "config line " + std::to_string(lineno) + ": unknown key '" +
                std::string(key) + "'");
    }
  }
  validate_config(cfg);
  return cfg;
}

inline double eval_peak(const PeakSpec& p, double x) {
  const double t = (x - p.center) / p.width;
  if (p.shape == PeakShape::lorentzian) return p.amplitude / (1.0 + t * t);
  return p.amplitude * std::exp(-0.5 * t * t);
}

// Sum of 50/50 Lorentzian/Gaussian peaks with uniform draws from the config
// ranges; non-negative by construction.
inline Spectrum gen_clean_spectrum(const GeneratorConfig& cfg, uint64_t seed) {
  validate_config(cfg);
  Rng rng(seed);
  const int span = cfg.peak_count_range.hi - cfg.peak_count_range.lo + 1;
  const int n_peaks =
      cfg.peak_count_range.lo +
      static_cast<int>(rng.uniform_int(static_cast<uint64_t>(span)));
  std::vector<double> s(cfg.length, 0.0);
  for (int k = 0; k < n_peaks; ++k) {
    PeakSpec p;
    p.center = rng.uniform(0.0, static_cast<double>(cfg.length));
    p.width = rng.uniform(cfg.width_range.lo, cfg.width_range.hi);
    p.amplitude = rng.uniform(cfg.amplitude_range.lo, cfg.amplitude_range.hi);
    p.shape =
        rng.uniform01() < 0.5 ? PeakShape::lorentzian : PeakShape::gaussian;
    for (size_t i = 0; i < cfg.length; ++i)
      s[i] += eval_peak(p, static_cast<double>(i));
  }
  return make_spectrum(std::move(s));
}

// Low-degree polynomial with non-negative coefficients plus a few very broad
// Gaussian humps (width >= length/8): smooth and non-negative.
inline Spectrum gen_baseline(const GeneratorConfig& cfg, uint64_t seed) {
  validate_config(cfg);
  Rng rng(seed);
  const auto n = cfg.length;
  std::vector<double> b(n, 0.0);
  for (int j = 0; j <= cfg.baseline_poly_degree; ++j) {
    const double coef =
        rng.uniform(cfg.baseline_amp_range.lo, cfg.baseline_amp_range.hi);
    for (size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(n);
      b[i] += coef * std::pow(x, j);
    }
  }
  const int span = cfg.hump_count_range.hi - cfg.hump_count_range.lo + 1;
  const int n_humps =
      cfg.hump_count_range.lo +
      static_cast<int>(rng.uniform_int(static_cast<uint64_t>(span)));
  for (int k = 0; k < n_humps; ++k) {
    const double c = rng.uniform(0.0, static_cast<double>(n));
    const double w = rng.uniform(static_cast<double>(n) / 8.0,
                                 static_cast<double>(n) / 2.0);
    const double a =
        rng.uniform(cfg.baseline_amp_range.lo, cfg.baseline_amp_range.hi);
    for (size_t i = 0; i < n; ++i) {
      const double t = (static_cast<double>(i) - c) / w;
      b[i] += a * std::exp(-0.5 * t * t);
    }
  }
  return make_spectrum(std::move(b));
}

struct NoiseRecord {
  double sigma = 0.0;
  double target_snr_db = 0.0;
  double realized_snr_db = 0.0;
};

// White Gaussian noise with sigma chosen so the expected SNR against `s`
// equals the target. The no-noise sentinel yields sigma 0.
inline std::pair<Spectrum, NoiseRecord> add_awgn(const Spectrum& s,
                                                 double target_snr_db,
                                                 uint64_t seed) {
  validate_spectrum(s);
  const bool no_noise = target_snr_db == kNoNoiseSnrDb;
  if (!no_noise && !(target_snr_db >= 0.0 && target_snr_db <= 80.0))
    raise(ErrorKind::invalid_config,
          "target SNR must lie in [0, 80] dB or be the no-noise sentinel");
  double ps = 0.0;
  for (size_t i = 0; i < s.length(); ++i) ps += s[i] * s[i];
  ps /= static_cast<double>(s.length());
  if (ps <= 0.0)
    raise(ErrorKind::zero_power_signal, "cannot calibrate noise: zero power");

  NoiseRecord rec;
  rec.target_snr_db = target_snr_db;
  rec.sigma =
      no_noise ? 0.0 : std::sqrt(ps / std::pow(10.0, target_snr_db / 10.0));

  Spectrum noisy = s;
  if (!no_noise) {
    Rng rng(seed);
    for (size_t i = 0; i < noisy.length(); ++i)
      noisy[i] += rec.sigma * rng.normal();
  }
  rec.realized_snr_db = snr_db(s, noisy);
  return {std::move(noisy), rec};
}

// noisy = clean + baseline + AWGN, with sigma calibrated against the clean
// (baseline-free) spectrum; the pair keeps the clean spectrum as the target.
inline SpectrumPair compose_noisy(const Spectrum& clean,
                                  const Spectrum& baseline,
                                  double target_snr_db, uint64_t seed,
                                  std::string id = "") {
  if (clean.length() != baseline.length())
    raise(ErrorKind::length_mismatch,
          "clean and baseline lengths differ: " +
              std::to_string(clean.length()) + " vs " +
              std::to_string(baseline.length()));
  auto [with_noise, rec] = add_awgn(clean, target_snr_db, seed);
  for (size_t i = 0; i < with_noise.length(); ++i)
    with_noise[i] += baseline[i];

  SpectrumPair pair;
  pair.id = std::move(id);
  pair.clean = clean;
  pair.noisy = std::move(with_noise);
  pair.target_snr_db = target_snr_db;
  pair.realized_snr_db = rec.realized_snr_db;
  pair.seed = seed;
  validate_pair(pair, /*require_finite_snr=*/false);
  return pair;
}

namespace seed_stream {
constexpr uint64_t train_split = 1;
constexpr uint64_t test_split = 2;
constexpr uint64_t clean = 1;
constexpr uint64_t baseline = 2;
constexpr uint64_t noise = 3;
}  // namespace seed_stream

inline std::string pair_id(Split split, size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06zu", index);
  return std::string(split_name(split)) + "-" + buf;
}

inline SpectrumPair build_pair(const GeneratorConfig& cfg, Split split,
                               size_t index) {
  const uint64_t split_tag = split == Split::train ? seed_stream::train_split
                                                   : seed_stream::test_split;
  const uint64_t pair_seed = derive_seed(cfg.base_seed, split_tag, index);
  const Spectrum clean =
      gen_clean_spectrum(cfg, derive_seed(pair_seed, seed_stream::clean));
  const Spectrum baseline =
      gen_baseline(cfg, derive_seed(pair_seed, seed_stream::baseline));
  const double target = cfg.snr_grid_db[index % cfg.snr_grid_db.size()];
  SpectrumPair pair =
      compose_noisy(clean, baseline, target,
                    derive_seed(pair_seed, seed_stream::noise),
                    pair_id(split, index));
  pair.seed = pair_seed;
  return pair;
}

// Round-robin SNR targets over the grid; train/test draw from disjoint seed
// streams so either split can be rebuilt independently.
inline std::pair<Dataset, Dataset> build_dataset(const GeneratorConfig& cfg,
                                                 size_t n_train,
                                                 size_t n_test) {
  validate_config(cfg);
  if (n_train == 0 || n_test == 0)
    raise(ErrorKind::invalid_config, "split sizes must be positive");
  const std::string digest = config_digest(cfg);

  Dataset train;
  train.split = Split::train;
  train.generator_config_digest = digest;
  train.pairs.reserve(n_train);
  for (size_t i = 0; i < n_train; ++i)
    train.pairs.push_back(build_pair(cfg, Split::train, i));

  Dataset test;
  test.split = Split::test;
  test.generator_config_digest = digest;
  test.pairs.reserve(n_test);
  for (size_t i = 0; i < n_test; ++i)
    test.pairs.push_back(build_pair(cfg, Split::test, i));

  validate_dataset(train);
  validate_dataset(test);
  return {std::move(train), std::move(test)};
}

}  // namespace rsdn
