#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "rsdn/metrics.hpp"
#include "rsdn/rng.hpp"
#include "rsdn/shrinkage.hpp"
#include "rsdn/wavelet.hpp"

using namespace rsdn;

namespace {

std::vector<double> random_signal(size_t n, Rng& rng) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double energy(const std::vector<double>& v) {
  double e = 0.0;
  for (const double x : v) e += x * x;
  return e;
}

}  // namespace

TEST_CASE("filter banks") {
  for (const char* name : {"haar", "sym4", "db4"}) {
    WaveletSpec w = make_wavelet(name);
    const size_t f = w.filter_length();
    REQUIRE(w.dec_lo.size() == f);
    REQUIRE(w.dec_hi.size() == f);
    REQUIRE(w.rec_hi.size() == f);
    double sum = 0.0, e = 0.0;
    for (double h : w.rec_lo) {
      sum += h;
      e += h * h;
    }
    REQUIRE(sum == Catch::Approx(std::sqrt(2.0)).margin(1e-10));
    REQUIRE(e == Catch::Approx(1.0).margin(1e-10));
    // high-pass has zero mean
    double hsum = 0.0;
    for (double h : w.rec_hi) hsum += h;
    REQUIRE(std::abs(hsum) < 1e-10);
  }
  WaveletSpec haar = make_wavelet("haar");
  REQUIRE(haar.rec_lo[0] == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-15));
  REQUIRE_THROWS_AS(make_wavelet("sym9"), Error);
}

TEST_CASE("perfect reconstruction") {
  Rng rng(1);
  for (const char* name : {"haar", "sym4", "db4"}) {
    for (Extension ext : {Extension::symmetric, Extension::periodic}) {
      WaveletSpec w = make_wavelet(name, ext);
      for (size_t n : {37u, 64u, 100u, 257u, 1000u, 2051u}) {
        if (n < w.filter_length()) continue;
        const size_t cap = max_levels(n, w);
        for (size_t levels = 1; levels <= std::min<size_t>(cap, 5); ++levels) {
          const auto x = random_signal(n, rng);
          const auto p = dwt(x, w, levels);
          const auto back = idwt_vec(p, w);
          REQUIRE(back.size() == n);
          INFO(name << " ext=" << (ext == Extension::symmetric ? "sym" : "per")
                    << " n=" << n << " levels=" << levels);
          REQUIRE(max_abs_diff(back, x) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("pyramid bookkeeping") {
  WaveletSpec w = make_wavelet("sym4");
  Rng rng(2);
  const auto x = random_signal(200, rng);
  auto p = dwt(x, w, 3);
  REQUIRE(p.levels == 3);
  REQUIRE(p.source_length == 200);
  REQUIRE(p.level_lengths.size() == 3);
  REQUIRE(p.level_lengths[0] == 200);
  size_t len = 200;
  for (size_t lev = 0; lev < 3; ++lev) {
    const size_t bands = band_length(len, w.filter_length(), w.extension);
    REQUIRE(p.details[lev].size() == bands);
    len = bands;
  }
  REQUIRE(p.approximation.size() == len);
  validate_pyramid(p, w);

  SECTION("tampered band sizes are caught") {
    auto bad = p;
    bad.details[1].push_back(0.0);
    try {
      validate_pyramid(bad, w);
      FAIL("expected bookkeeping_mismatch");
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::bookkeeping_mismatch);
    }
    bad = p;
    bad.level_lengths[0] = 199;
    REQUIRE_THROWS_AS(validate_pyramid(bad, w), Error);
    bad = p;
    bad.approximation.pop_back();
    REQUIRE_THROWS_AS(validate_pyramid(bad, w), Error);
  }

  SECTION("infeasible depths are rejected with distinct kinds") {
    try {
      dwt(x, w, 40);
      FAIL("expected too_many_levels");
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::too_many_levels);
    }
    try {
      dwt(random_signal(4, rng), w, 1);
      FAIL("expected length_too_short");
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::length_too_short);
    }
    REQUIRE_THROWS_AS(dwt(x, w, 0), Error);
  }

  SECTION("band lengths by mode") {
    REQUIRE(band_length(100, 8, Extension::symmetric) == 53);
    REQUIRE(band_length(100, 8, Extension::periodic) == 50);
    REQUIRE(band_length(101, 8, Extension::periodic) == 51);
  }
}

TEST_CASE("haar hand example and energy conservation") {
  WaveletSpec haar = make_wavelet("haar", Extension::periodic);
  std::vector<double> x{1.0, 1.0, 1.0, 1.0};
  std::vector<double> a, d;
  dwt_step(x, haar, a, d);
  REQUIRE(a.size() == 2);
  for (double v : a) REQUIRE(v == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
  for (double v : d) REQUIRE(std::abs(v) < 1e-12);

  SECTION("periodized transform is orthonormal on even lengths") {
    Rng rng(3);
    for (const char* name : {"haar", "sym4", "db4"}) {
      WaveletSpec w = make_wavelet(name, Extension::periodic);
      const auto sig = random_signal(256, rng);
      const auto p = dwt(sig, w, 4);
      double coeff_energy = energy(p.approximation);
      for (const auto& lev : p.details) coeff_energy += energy(lev);
      REQUIRE(coeff_energy ==
              Catch::Approx(energy(sig)).epsilon(1e-9));
    }
  }
}

TEST_CASE("sigma estimation from the finest band") {
  Rng rng(4);
  const double sigma = 2.5;
  std::vector<double> noise(4096);
  for (auto& v : noise) v = sigma * rng.normal();
  WaveletSpec w = make_wavelet("haar");
  const auto p = dwt(noise, w, 3);
  const double est = estimate_sigma(p);
  REQUIRE(est == Catch::Approx(sigma).epsilon(0.1));

  CoefficientPyramid empty;
  REQUIRE_THROWS_AS(estimate_sigma(empty), Error);
}

TEST_CASE("fixed thresholds") {
  REQUIRE(threshold_universal(2.0, 1024) ==
          Catch::Approx(2.0 * std::sqrt(2.0 * std::log(1024.0))));
  REQUIRE(threshold_universal(0.0, 16) == 0.0);
  REQUIRE_THROWS_AS(threshold_universal(-1.0, 16), Error);
  REQUIRE_THROWS_AS(threshold_universal(1.0, 1), Error);

  REQUIRE(threshold_minimax(1.0, 32) == 0.0);
  REQUIRE(threshold_minimax(2.0, 2048) ==
          Catch::Approx(2.0 * (0.3936 + 0.1829 * 11.0)));
  // universal dominates minimax at practical sizes
  for (size_t n : {64u, 512u, 2051u})
    REQUIRE(threshold_universal(1.0, n) > threshold_minimax(1.0, n));
}

TEST_CASE("soft and hard shrinkage") {
  std::vector<double> c{-3.0, -1.0, -0.2, 0.0, 0.4, 1.5, 2.5};
  const auto soft = shrink_soft(c, 1.0);
  const auto hard = shrink_hard(c, 1.0);
  REQUIRE(soft == std::vector<double>{-2.0, 0.0, 0.0, 0.0, 0.0, 0.5, 1.5});
  REQUIRE(hard == std::vector<double>{-3.0, 0.0, 0.0, 0.0, 0.0, 1.5, 2.5});
  REQUIRE(shrink_soft(c, 0.0) == c);
  REQUIRE(shrink_hard(c, 0.0) == c);
  REQUIRE_THROWS_AS(shrink_soft(c, -0.5), Error);
}

TEST_CASE("sure threshold equals an exhaustive search") {
  Rng rng(5);
  const double sigma = 1.3;
  for (size_t n : {64u, 300u, 1024u}) {
    // dense-signal regime so the sparse guard stays out of the way
    std::vector<double> c(n);
    for (size_t i = 0; i < n; ++i) {
      const double mean = (i % 3 == 0) ? rng.uniform(-8.0, 8.0) : 0.0;
      c[i] = mean + sigma * rng.normal();
    }
    const double t = threshold_sure(c, sigma);

    // Independent minimization: the risk is nondecreasing in t between
    // candidate magnitudes, so scanning {0} plus every |c|/sigma is global.
    auto risk_of = [&](double th) {
      double killed = 0.0, acc = 0.0;
      for (const double v : c) {
        const double z = std::abs(v) / sigma;
        if (z <= th) killed += 1.0;
        acc += std::min(z * z, th * th);
      }
      return static_cast<double>(n) - 2.0 * killed + acc;
    };
    std::vector<double> cand{0.0};
    for (const double v : c) cand.push_back(std::abs(v) / sigma);
    std::sort(cand.begin(), cand.end());
    double best_t = cand[0], best_r = risk_of(cand[0]);
    for (const double th : cand) {
      const double r = risk_of(th);
      if (r < best_r) {
        best_r = r;
        best_t = th;
      }
    }
    INFO("n=" << n);
    REQUIRE(t == sigma * best_t);
    REQUIRE(risk_of(t / sigma) == Catch::Approx(best_r));
  }

  SECTION("sparse levels fall back to the universal threshold") {
    std::vector<double> sparse(512);
    Rng r2(6);
    for (auto& v : sparse) v = 0.05 * r2.normal();  // nearly dead band
    const double t = threshold_sure(sparse, 1.0);
    REQUIRE(t == threshold_universal(1.0, 512));
  }

  REQUIRE_THROWS_AS(threshold_sure({}, 1.0), Error);
  REQUIRE_THROWS_AS(threshold_sure({1.0, 2.0}, 0.0), Error);
}

TEST_CASE("fdr keep set equals brute-force benjamini-hochberg") {
  Rng rng(7);
  const double sigma = 1.1;
  for (double q : {0.01, 0.05, 0.2}) {
    for (size_t n : {50u, 400u}) {
      std::vector<double> c(n);
      for (size_t i = 0; i < n; ++i) {
        const double mean = (i % 5 == 0) ? rng.uniform(-10.0, 10.0) : 0.0;
        c[i] = mean + sigma * rng.normal();
      }
      const auto kept = shrink_fdr(c, sigma, q);

      // independent: p-values via std::erfc, classic step-up rule
      std::vector<size_t> order(n);
      for (size_t i = 0; i < n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return std::abs(c[a]) > std::abs(c[b]);
      });
      size_t k_best = 0;
      for (size_t k = 1; k <= n; ++k) {
        const double m = std::abs(c[order[k - 1]]) / sigma;
        const double p = std::erfc(m / std::sqrt(2.0));
        if (p <= q * static_cast<double>(k) / static_cast<double>(n))
          k_best = k;
      }
      std::set<size_t> expect;
      for (size_t k = 0; k < k_best; ++k) expect.insert(order[k]);

      std::set<size_t> got;
      for (size_t i = 0; i < n; ++i)
        if (kept[i] != 0.0) {
          REQUIRE(kept[i] == c[i]);  // hard rule: survivors unchanged
          got.insert(i);
        }
      INFO("q=" << q << " n=" << n);
      REQUIRE(got == expect);
    }
  }

  SECTION("pure noise at strict q yields no discoveries") {
    Rng r2(8);
    std::vector<double> noise(1000);
    for (auto& v : noise) v = r2.normal();
    const auto out = shrink_fdr(noise, 1.0, 0.001);
    for (double v : out) REQUIRE(v == 0.0);
  }
  REQUIRE_THROWS_AS(shrink_fdr({1.0}, 0.0, 0.05), Error);
  REQUIRE_THROWS_AS(shrink_fdr({1.0}, 1.0, 1.5), Error);
}

TEST_CASE("block james-stein") {
  const size_t n = 100;  // block length floor(ln 100) = 4
  std::vector<double> c(n, 0.0);
  for (size_t i = 0; i < 4; ++i) c[i] = 50.0;   // loud block
  for (size_t i = 4; i < 8; ++i) c[i] = 0.01;   // dead block
  const auto out = shrink_block_js(c, 1.0);

  const double s2 = 4.0 * 50.0 * 50.0;
  const double factor = 1.0 - kBlockJsLambda * 4.0 / s2;
  for (size_t i = 0; i < 4; ++i)
    REQUIRE(out[i] == Catch::Approx(50.0 * factor).margin(1e-12));
  for (size_t i = 4; i < 8; ++i) REQUIRE(out[i] == 0.0);

  SECTION("trailing partial block uses its own length") {
    std::vector<double> tail(9, 3.0);  // block floor(ln 9) = 2 -> 4 pairs + 1
    const auto o = shrink_block_js(tail, 1.0);
    const double f_pair = 1.0 - kBlockJsLambda * 2.0 / (2.0 * 9.0);
    const double f_last = 1.0 - kBlockJsLambda * 1.0 / 9.0;
    for (size_t i = 0; i < 8; ++i)
      REQUIRE(o[i] == Catch::Approx(3.0 * f_pair).margin(1e-12));
    REQUIRE(o[8] == Catch::Approx(3.0 * f_last).margin(1e-12));
  }
  REQUIRE_THROWS_AS(shrink_block_js({1.0}, 0.0), Error);
}

TEST_CASE("empirical bayes shrinkage invariants") {
  Rng rng(9);
  std::vector<double> c(600);
  for (size_t i = 0; i < c.size(); ++i) {
    const double mean = (i % 4 == 0) ? rng.uniform(-6.0, 6.0) : 0.0;
    c[i] = mean + rng.normal();
  }
  const double sigma = 1.0, a = 0.5;
  const auto out = shrink_ebayes(c, sigma, a);

  SECTION("odd symmetry") {
    std::vector<double> neg(c.size());
    for (size_t i = 0; i < c.size(); ++i) neg[i] = -c[i];
    const auto out_neg = shrink_ebayes(neg, sigma, a);
    for (size_t i = 0; i < c.size(); ++i)
      REQUIRE(out_neg[i] == Catch::Approx(-out[i]).margin(1e-12));
  }

  SECTION("shrinks toward zero without sign flips") {
    for (size_t i = 0; i < c.size(); ++i) {
      REQUIRE(std::abs(out[i]) <= std::abs(c[i]) + 1e-12);
      REQUIRE(out[i] * c[i] >= -1e-12);
    }
  }

  SECTION("small coefficients die, huge ones keep all but about a*sigma") {
    std::vector<double> probe = c;
    probe[0] = 30.0;
    probe[1] = 0.05;
    const auto o = shrink_ebayes(probe, sigma, a);
    REQUIRE(o[1] == 0.0);
    REQUIRE(o[0] == Catch::Approx(30.0 - a).margin(0.1));
  }

  SECTION("posterior median is monotone in the observation") {
    const double w = 0.3;
    double prev = -1e9;
    for (double z = -10.0; z <= 10.0; z += 0.05) {
      const double m = detail::postmed_laplace(z, w, a);
      REQUIRE(m >= prev - 1e-12);
      prev = m;
    }
  }

  REQUIRE_THROWS_AS(shrink_ebayes({1.0}, 0.0, 0.5), Error);
  REQUIRE_THROWS_AS(shrink_ebayes({1.0}, 1.0, 0.0), Error);
}

TEST_CASE("wavelet denoise end to end") {
  Rng rng(10);
  const size_t n = 2048;
  Spectrum clean;
  clean.intensities.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    double v = 0.0;
    for (const double c : {0.2, 0.45, 0.6, 0.8}) {
      const double t = (x - c) / 0.01;
      v += std::exp(-0.5 * t * t);
    }
    clean[i] = v;
  }
  double ps = 0.0;
  for (size_t i = 0; i < n; ++i) ps += clean[i] * clean[i];
  ps /= static_cast<double>(n);
  const double sigma = std::sqrt(ps / std::pow(10.0, 5.0 / 10.0));  // 5 dB
  Spectrum noisy = clean;
  for (size_t i = 0; i < n; ++i) noisy[i] += sigma * rng.normal();
  const double snr_in = snr_db(clean, noisy);

  WaveletSpec w = make_wavelet("sym4");
  for (const char* rule_name :
       {"universal", "sure", "minimax", "fdr", "blockjs", "ebayes"}) {
    ShrinkageRule rule;
    rule.kind = shrink_kind_from_name(rule_name);
    Spectrum out = wavelet_denoise(noisy, rule, w);
    REQUIRE(out.length() == n);
    INFO(rule_name);
    REQUIRE(snr_db(clean, out) > snr_in + 1.0);
  }

  SECTION("hard mode differs from soft where applicable") {
    ShrinkageRule soft_rule;  // universal soft
    ShrinkageRule hard_rule;
    hard_rule.mode = ShrinkMode::hard;
    Spectrum a = wavelet_denoise(noisy, soft_rule, w);
    Spectrum b = wavelet_denoise(noisy, hard_rule, w);
    REQUIRE(a.intensities != b.intensities);
  }

  SECTION("noiseless constant input passes through untouched") {
    WaveletSpec haar = make_wavelet("haar", Extension::periodic);
    Spectrum flat = make_spectrum(std::vector<double>(64, 3.25));
    ShrinkageRule rule;
    Spectrum out = wavelet_denoise(flat, rule, haar);
    for (size_t i = 0; i < 64; ++i)
      REQUIRE(out[i] == Catch::Approx(3.25).margin(1e-9));
  }

  SECTION("soft universal never adds energy in the orthonormal mode") {
    WaveletSpec per = make_wavelet("sym4", Extension::periodic);
    ShrinkageRule rule;
    Spectrum out = wavelet_denoise(noisy, rule, per);
    REQUIRE(energy(out.intensities) <=
            energy(noisy.intensities) * (1.0 + 1e-9));
  }

  SECTION("explicit level counts are honored and validated") {
    ShrinkageRule rule;
    Spectrum shallow = wavelet_denoise(noisy, rule, w, 1);
    Spectrum deep = wavelet_denoise(noisy, rule, w, 5);
    REQUIRE(shallow.intensities != deep.intensities);
    REQUIRE_THROWS_AS(wavelet_denoise(noisy, rule, w, 40), Error);
  }

  SECTION("bad rule parameters raise before any work") {
    ShrinkageRule rule;
    rule.q = 1.5;
    REQUIRE_THROWS_AS(wavelet_denoise(noisy, rule, w), Error);
    rule = ShrinkageRule{};
    rule.ebayes_scale = -1.0;
    REQUIRE_THROWS_AS(wavelet_denoise(noisy, rule, w), Error);
  }
}
