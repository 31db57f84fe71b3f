#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "rsdn/io.hpp"
#include "rsdn/metrics.hpp"
#include "rsdn/rng.hpp"
#include "rsdn/spectrum.hpp"
#include "rsdn/synth.hpp"
#include "rsdn/textio.hpp"

using namespace rsdn;

namespace {

Spectrum spec_of(std::vector<double> v) { return make_spectrum(std::move(v)); }

std::string temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "rsdn_core_test";
  std::filesystem::create_directories(dir);
  return dir.string();
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected an rsdn::Error");
}

}  // namespace

TEST_CASE("rng streams") {
  Rng a(123), b(123), c(124);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform01();
    REQUIRE(x == b.uniform01());
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
  }
  bool differs = false;
  Rng a2(123);
  for (int i = 0; i < 100; ++i) differs |= (a2.uniform01() != c.uniform01());
  REQUIRE(differs);

  Rng r(5);
  for (int i = 0; i < 200; ++i) {
    const double u = r.uniform(-3.0, 7.0);
    REQUIRE(u >= -3.0);
    REQUIRE(u < 7.0);
    REQUIRE(r.uniform_int(10) < 10);
  }

  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double g = r.normal();
    sum += g;
    sq += g * g;
  }
  REQUIRE(std::abs(sum / n) < 0.05);
  REQUIRE(std::abs(sq / n - 1.0) < 0.05);

  SECTION("shuffle is a deterministic permutation") {
    std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> w = v;
    Rng s1(9), s2(9);
    s1.shuffle(v);
    s2.shuffle(w);
    REQUIRE(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  }

  SECTION("derived seeds separate streams") {
    const uint64_t base = 42;
    std::set<uint64_t> seen;
    for (uint64_t tag = 0; tag < 20; ++tag)
      seen.insert(derive_seed(base, tag));
    REQUIRE(seen.size() == 20);
    REQUIRE(derive_seed(base, 1, 7) == derive_seed(base, 1, 7));
    REQUIRE(derive_seed(base, 1, 7) != derive_seed(base, 2, 7));
    REQUIRE(derive_seed(base, 1, 7) != derive_seed(base, 1, 8));
  }
}

TEST_CASE("textio") {
  for (double v : {0.0, -0.0, 0.1, 1.0 / 3.0, 6.02214076e23, -3.5e-17,
                   9.5, 1e300, 5e-324}) {
    REQUIRE(parse_double(format_double(v)) == v);
  }
  REQUIRE_THROWS_AS(parse_double("abc"), Error);
  REQUIRE_THROWS_AS(parse_double("1.5x"), Error);
  REQUIRE_THROWS_AS(parse_double(""), Error);
  REQUIRE(parse_u64("18446744073709551615") == 18446744073709551615ULL);
  REQUIRE_THROWS_AS(parse_u64("-1"), Error);

  REQUIRE(trim("  hi \t") == "hi");
  REQUIRE(trim("line\r") == "line");
  REQUIRE(trim("") == "");

  // Published FNV-1a 64-bit vectors.
  REQUIRE(fnv1a_hex("") == "cbf29ce484222325");
  REQUIRE(fnv1a_hex("a") == "af63dc4c8601ec8c");
  REQUIRE(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("spectrum validation") {
  REQUIRE(kind_of([] { make_spectrum({}); }) == ErrorKind::empty_input);
  REQUIRE(kind_of([] { make_spectrum({1, 2, 3}); }) ==
          ErrorKind::length_too_short);
  // Finiteness is checked before the length floor.
  REQUIRE(kind_of([] {
            make_spectrum({1.0, std::nan(""), 3.0});
          }) == ErrorKind::non_finite_value);
  Spectrum s = make_spectrum({1, 2, 3, 4, 5, 6, 7, 8}, 400.0, 2.0);
  REQUIRE(s.has_axis);
  REQUIRE(s.wavenumber_start == 400.0);
  REQUIRE(s.length() == 8);
}

TEST_CASE("snr identities") {
  Spectrum ref = spec_of({3, 3, 3, 3, 3, 3, 3, 3});
  Spectrum obs = ref;
  for (auto& v : obs.intensities) v += 1.0;
  REQUIRE(snr_db(ref, obs) == Catch::Approx(10.0 * std::log10(9.0)));
  REQUIRE(std::isinf(snr_db(ref, ref)));

  SECTION("scaling the error by 10 costs exactly 20 dB") {
    Rng rng(2);
    Spectrum base = spec_of({5, 1, 4, 2, 8, 3, 7, 6, 2, 9, 1, 5});
    Spectrum small = base, big = base;
    for (size_t i = 0; i < base.length(); ++i) {
      const double e = rng.normal();
      small[i] += e;
      big[i] += 10.0 * e;
    }
    REQUIRE(snr_db(base, small) - snr_db(base, big) ==
            Catch::Approx(20.0).margin(1e-9));
  }

  SECTION("more noise, lower snr") {
    Rng rng(3);
    Spectrum base = spec_of(std::vector<double>(64, 2.0));
    std::vector<double> noise(64);
    for (auto& v : noise) v = rng.normal();
    double prev = std::numeric_limits<double>::infinity();
    for (double a : {0.1, 0.3, 1.0, 3.0}) {
      Spectrum obs = base;
      for (size_t i = 0; i < 64; ++i) obs[i] += a * noise[i];
      const double s = snr_db(base, obs);
      REQUIRE(s < prev);
      prev = s;
    }
  }

  REQUIRE(kind_of([] {
            Spectrum z = spec_of(std::vector<double>(8, 0.0));
            snr_db(z, z);
          }) == ErrorKind::zero_power_signal);
  REQUIRE(kind_of([] {
            snr_db(spec_of({1, 2, 3, 4, 5, 6, 7, 8}),
                   spec_of({1, 2, 3, 4, 5, 6, 7, 8, 9}));
          }) == ErrorKind::length_mismatch);
}

TEST_CASE("rmse identities") {
  Spectrum a = spec_of({1, 2, 3, 4, 5, 6, 7, 8});
  Spectrum b = spec_of({2, 2, 3, 4, 5, 6, 7, 10});
  REQUIRE(rmse(a, a) == 0.0);
  REQUIRE(rmse(a, b) == Catch::Approx(std::sqrt((1.0 + 4.0) / 8.0)));
  REQUIRE(rmse(a, b) == rmse(b, a));

  SECTION("triangle inequality") {
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> x(16), y(16), z(16);
      for (size_t i = 0; i < 16; ++i) {
        x[i] = rng.uniform(-5, 5);
        y[i] = rng.uniform(-5, 5);
        z[i] = rng.uniform(-5, 5);
      }
      Spectrum sx = spec_of(x), sy = spec_of(y), sz = spec_of(z);
      REQUIRE(rmse(sx, sz) <= rmse(sx, sy) + rmse(sy, sz) + 1e-12);
    }
  }

  SECTION("translation invariance") {
    Spectrum a2 = a, b2 = b;
    for (size_t i = 0; i < a.length(); ++i) {
      a2[i] += 17.5;
      b2[i] += 17.5;
    }
    REQUIRE(rmse(a2, b2) == Catch::Approx(rmse(a, b)).margin(1e-12));
  }
}

TEST_CASE("mape identities") {
  Spectrum o = spec_of(std::vector<double>(8, 10.0));
  Spectrum f = o;
  for (auto& v : f.intensities) v = 11.0;
  auto r = mape_pct(o, f, 0.0);
  REQUIRE(r.mape_pct == Catch::Approx(10.0));
  REQUIRE(r.excluded_points == 0);

  SECTION("scale invariance") {
    Rng rng(5);
    std::vector<double> ov(16), fv(16);
    for (size_t i = 0; i < 16; ++i) {
      ov[i] = rng.uniform(0.5, 2.0);
      fv[i] = ov[i] + rng.uniform(-0.2, 0.2);
    }
    const double base = mape_pct(spec_of(ov), spec_of(fv), 0.0).mape_pct;
    for (double k : {0.01, 3.0, 1e6}) {
      std::vector<double> ok = ov, fk = fv;
      for (size_t i = 0; i < 16; ++i) {
        ok[i] *= k;
        fk[i] *= k;
      }
      REQUIRE(mape_pct(spec_of(ok), spec_of(fk), 0.0).mape_pct ==
              Catch::Approx(base).epsilon(1e-12));
    }
  }

  SECTION("floor excludes small points") {
    Spectrum obig = spec_of({10, 0.05, 10, 0.05, 10, 0.05, 10, 0.05});
    Spectrum fbig = obig;
    for (auto& v : fbig.intensities) v += 1.0;
    auto res = mape_pct(obig, fbig, 0.1);
    REQUIRE(res.excluded_points == 4);
    REQUIRE(res.mape_pct == Catch::Approx(10.0));
    REQUIRE(kind_of([&] { mape_pct(obig, fbig, 100.0); }) ==
            ErrorKind::all_points_excluded);
  }

  SECTION("default floor is 1% of the max magnitude") {
    Spectrum big = spec_of({200, 1, 1, 1, 1, 1, 1, 1});
    REQUIRE(mape_default_floor(big) == Catch::Approx(2.0));
  }

  REQUIRE_THROWS_AS(mape_pct(o, f, -1.0), Error);
}

TEST_CASE("error categories drive exit codes") {
  REQUIRE(Error(ErrorKind::zero_power_signal, "").category() ==
          ErrorCategory::numeric);
  REQUIRE(Error(ErrorKind::singular_system, "").category() ==
          ErrorCategory::numeric);
  REQUIRE(Error(ErrorKind::all_points_excluded, "").category() ==
          ErrorCategory::numeric);
  REQUIRE(Error(ErrorKind::parse_failure, "").category() ==
          ErrorCategory::data);
  REQUIRE(Error(ErrorKind::io_failure, "").category() == ErrorCategory::data);
}

TEST_CASE("generator config round trip") {
  GeneratorConfig cfg;
  cfg.length = 512;
  cfg.peak_count_range = {2, 6};
  cfg.amplitude_range = {0.3, 0.9};
  cfg.width_range = {5.0, 12.0};
  cfg.baseline_poly_degree = 3;
  cfg.baseline_amp_range = {0.1, 0.4};
  cfg.hump_count_range = {0, 2};
  cfg.snr_grid_db = {9.5, 20.0};
  cfg.base_seed = 77;

  GeneratorConfig back = parse_config_text(config_text(cfg));
  REQUIRE(back.length == cfg.length);
  REQUIRE(back.peak_count_range.lo == 2);
  REQUIRE(back.peak_count_range.hi == 6);
  REQUIRE(back.amplitude_range.lo == 0.3);
  REQUIRE(back.width_range.hi == 12.0);
  REQUIRE(back.baseline_poly_degree == 3);
  REQUIRE(back.hump_count_range.hi == 2);
  REQUIRE(back.snr_grid_db == cfg.snr_grid_db);
  REQUIRE(back.base_seed == 77);
  REQUIRE(config_digest(back) == config_digest(cfg));

  GeneratorConfig other = cfg;
  other.base_seed = 78;
  REQUIRE(config_digest(other) != config_digest(cfg));

  SECTION("bad config text raises") {
    REQUIRE(kind_of([] { parse_config_text("length 64\n"); }) ==
            ErrorKind::parse_failure);
    REQUIRE(kind_of([] { parse_config_text("peak_count = 3\n"); }) ==
            ErrorKind::parse_failure);
    REQUIRE(kind_of([] { parse_config_text("wat = 1\n"); }) ==
            ErrorKind::parse_failure);
    REQUIRE(kind_of([] { parse_config_text("length = 4\n"); }) ==
            ErrorKind::invalid_config);
  }

  SECTION("validate_config rejects bad ranges") {
    GeneratorConfig bad = cfg;
    bad.amplitude_range = {0.0, 1.0};
    REQUIRE_THROWS_AS(validate_config(bad), Error);
    bad = cfg;
    bad.width_range = {0.1, 5.0};
    REQUIRE_THROWS_AS(validate_config(bad), Error);
    bad = cfg;
    bad.snr_grid_db = {90.0};
    REQUIRE_THROWS_AS(validate_config(bad), Error);
    bad = cfg;
    bad.snr_grid_db.clear();
    REQUIRE_THROWS_AS(validate_config(bad), Error);
  }
}

TEST_CASE("clean spectra and baselines") {
  GeneratorConfig cfg;
  cfg.length = 256;
  Spectrum a = gen_clean_spectrum(cfg, 11);
  Spectrum b = gen_clean_spectrum(cfg, 11);
  Spectrum c = gen_clean_spectrum(cfg, 12);
  REQUIRE(a.intensities == b.intensities);
  REQUIRE(a.intensities != c.intensities);
  REQUIRE(a.length() == 256);
  for (double v : a.intensities) REQUIRE(v >= 0.0);

  Spectrum base = gen_baseline(cfg, 21);
  REQUIRE(base.length() == 256);
  for (double v : base.intensities) REQUIRE(v >= 0.0);
  REQUIRE(gen_baseline(cfg, 21).intensities == base.intensities);
}

TEST_CASE("awgn calibration and sentinel") {
  GeneratorConfig cfg;
  cfg.length = 4096;
  Spectrum clean = gen_clean_spectrum(cfg, 31);

  SECTION("single-draw realized snr lands near the target") {
    for (double target : {5.0, 15.0, 40.0}) {
      auto [noisy, rec] = add_awgn(clean, target, 7);
      REQUIRE(rec.realized_snr_db == Catch::Approx(target).margin(0.5));
      REQUIRE(rec.realized_snr_db == snr_db(clean, noisy));
      REQUIRE(rec.sigma > 0.0);
    }
  }

  SECTION("the no-noise sentinel adds nothing") {
    auto [noisy, rec] = add_awgn(clean, kNoNoiseSnrDb, 7);
    REQUIRE(noisy.intensities == clean.intensities);
    REQUIRE(rec.sigma == 0.0);
    REQUIRE(std::isinf(rec.realized_snr_db));
  }

  SECTION("targets outside [0, 80] raise") {
    REQUIRE_THROWS_AS(add_awgn(clean, -1.0, 7), Error);
    REQUIRE_THROWS_AS(add_awgn(clean, 81.0, 7), Error);
  }

  SECTION("noise is calibrated against the clean spectrum, not the sum") {
    Spectrum baseline = gen_baseline(cfg, 32);
    SpectrumPair p = compose_noisy(clean, baseline, 10.0, 99);
    // subtracting the known baseline must recover clean + noise at ~10 dB
    Spectrum recovered = p.noisy;
    for (size_t i = 0; i < recovered.length(); ++i)
      recovered[i] -= baseline[i];
    REQUIRE(snr_db(clean, recovered) == Catch::Approx(10.0).margin(0.5));
    REQUIRE(p.realized_snr_db == Catch::Approx(snr_db(clean, recovered))
                                     .margin(1e-9));
  }
}

TEST_CASE("dataset construction") {
  GeneratorConfig cfg;
  cfg.length = 128;
  cfg.snr_grid_db = {10.0, 20.0};
  cfg.base_seed = 5;
  auto [train, test] = build_dataset(cfg, 4, 3);
  REQUIRE(train.pairs.size() == 4);
  REQUIRE(test.pairs.size() == 3);
  REQUIRE(train.split == Split::train);
  REQUIRE(test.split == Split::test);
  REQUIRE(train.generator_config_digest == config_digest(cfg));

  SECTION("ids are zero-padded and split-tagged") {
    REQUIRE(train.pairs[0].id == "train-000000");
    REQUIRE(train.pairs[3].id == "train-000003");
    REQUIRE(test.pairs[0].id == "test-000000");
  }

  SECTION("snr targets cycle round robin") {
    REQUIRE(train.pairs[0].target_snr_db == 10.0);
    REQUIRE(train.pairs[1].target_snr_db == 20.0);
    REQUIRE(train.pairs[2].target_snr_db == 10.0);
    REQUIRE(train.pairs[3].target_snr_db == 20.0);
  }

  SECTION("splits use disjoint seed streams") {
    REQUIRE(train.pairs[0].clean.intensities !=
            test.pairs[0].clean.intensities);
  }

  SECTION("rebuilding is bit-identical") {
    auto [train2, test2] = build_dataset(cfg, 4, 3);
    for (size_t i = 0; i < 4; ++i) {
      REQUIRE(train2.pairs[i].noisy.intensities ==
              train.pairs[i].noisy.intensities);
      REQUIRE(train2.pairs[i].realized_snr_db ==
              train.pairs[i].realized_snr_db);
    }
  }

  SECTION("test split does not depend on train size") {
    auto [train3, test3] = build_dataset(cfg, 9, 3);
    for (size_t i = 0; i < 3; ++i)
      REQUIRE(test3.pairs[i].noisy.intensities ==
              test.pairs[i].noisy.intensities);
  }

  REQUIRE_THROWS_AS(build_dataset(cfg, 0, 3), Error);
}

TEST_CASE("dataset file round trip") {
  const std::string dir = temp_dir();
  GeneratorConfig cfg;
  cfg.length = 64;
  cfg.base_seed = 9;
  auto [train, test] = build_dataset(cfg, 3, 2);

  const std::string path = dir + "/train.jsonl";
  write_dataset(train, path);
  Dataset back = read_dataset(path);
  REQUIRE(back.pairs.size() == 3);
  REQUIRE(back.split == Split::train);
  REQUIRE(back.generator_config_digest == train.generator_config_digest);
  for (size_t i = 0; i < 3; ++i) {
    REQUIRE(back.pairs[i].id == train.pairs[i].id);
    REQUIRE(back.pairs[i].clean.intensities ==
            train.pairs[i].clean.intensities);
    REQUIRE(back.pairs[i].noisy.intensities ==
            train.pairs[i].noisy.intensities);
    REQUIRE(back.pairs[i].realized_snr_db == train.pairs[i].realized_snr_db);
    REQUIRE(back.pairs[i].seed == train.pairs[i].seed);
  }

  SECTION("writing twice produces identical bytes") {
    const std::string again = dir + "/train2.jsonl";
    write_dataset(train, again);
    REQUIRE(read_text_file(path) == read_text_file(again));
  }

  SECTION("malformed files are rejected") {
    const std::string bad = dir + "/bad.jsonl";
    write_text_file(bad, "not json\n");
    REQUIRE(kind_of([&] { read_dataset(bad); }) == ErrorKind::parse_failure);

    write_text_file(bad, "{\"format_version\":2,\"length\":64,"
                         "\"split\":\"train\",\"generator_config_digest\":\"x\"}\n");
    REQUIRE(kind_of([&] { read_dataset(bad); }) == ErrorKind::parse_failure);

    std::string contents = read_text_file(path);
    const size_t second_record = contents.find('\n', contents.find('\n') + 1);
    std::string dup = contents;
    const size_t record_end = contents.find('\n', second_record + 1);
    dup += contents.substr(second_record + 1,
                           record_end - second_record);
    write_text_file(bad, dup);
    REQUIRE(kind_of([&] { read_dataset(bad); }) == ErrorKind::duplicate_id);
  }

  SECTION("missing files raise io_failure") {
    REQUIRE(kind_of([&] { read_dataset(dir + "/nope.jsonl"); }) ==
            ErrorKind::io_failure);
  }
}

TEST_CASE("spectrum csv round trip") {
  const std::string dir = temp_dir();
  Spectrum s = spec_of({0.25, 1.5, -0.75, 3.125, 2.0, 1.0, 0.5, 0.125});

  const std::string plain = dir + "/plain.csv";
  write_spectrum_csv(s, plain);
  Spectrum back = read_spectrum_csv(plain);
  REQUIRE(back.intensities == s.intensities);
  REQUIRE_FALSE(back.has_axis);

  Spectrum axis = s;
  axis.has_axis = true;
  axis.wavenumber_start = 400.0;
  axis.wavenumber_step = 2.0;
  const std::string with_axis = dir + "/axis.csv";
  write_spectrum_csv(axis, with_axis);
  Spectrum back2 = read_spectrum_csv(with_axis);
  REQUIRE(back2.intensities == s.intensities);
  REQUIRE(back2.has_axis);
  REQUIRE(back2.wavenumber_start == 400.0);
  REQUIRE(back2.wavenumber_step == 2.0);

  SECTION("bad csv raises") {
    const std::string bad = dir + "/bad.csv";
    write_text_file(bad, "1,2,3\n");
    REQUIRE(kind_of([&] { read_spectrum_csv(bad); }) ==
            ErrorKind::parse_failure);
    write_text_file(bad, "0,zebra\n");
    REQUIRE(kind_of([&] { read_spectrum_csv(bad); }) ==
            ErrorKind::parse_failure);
    write_text_file(bad, "# only a comment\n");
    REQUIRE(kind_of([&] { read_spectrum_csv(bad); }) == ErrorKind::empty_input);
  }
}

TEST_CASE("config file round trip") {
  const std::string dir = temp_dir();
  GeneratorConfig cfg;
  cfg.length = 300;
  cfg.snr_grid_db = {9.5};
  const std::string path = dir + "/gen.cfg";
  write_config_file(cfg, path);
  GeneratorConfig back = read_config_file(path);
  REQUIRE(back.length == 300);
  REQUIRE(config_digest(back) == config_digest(cfg));
}
