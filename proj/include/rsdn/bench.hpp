#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "rsdn/airpls.hpp"
#include "rsdn/checkpoint.hpp"
#include "rsdn/error.hpp"
#include "rsdn/metrics.hpp"
#include "rsdn/shrinkage.hpp"
#include "rsdn/spectrum.hpp"
#include "rsdn/textio.hpp"
#include "rsdn/train.hpp"
#include "rsdn/wavelet.hpp"

namespace rsdn {

enum class Method {
  dl,
  cnn_serial,
  universal,
  sure,
  minimax,
  fdr,
  blockjs,
  ebayes,
};

// Report row order: the two networks first, then the wavelet rules.
constexpr std::array<Method, 8> kAllMethods = {
    Method::dl,      Method::cnn_serial, Method::universal, Method::sure,
    Method::minimax, Method::fdr,        Method::blockjs,   Method::ebayes};

inline const char* method_name(Method m) {
  switch (m) {
    case Method::dl: return "dl";
    case Method::cnn_serial: return "cnn_serial";
    case Method::universal: return "universal";
    case Method::sure: return "sure";
    case Method::minimax: return "minimax";
    case Method::fdr: return "fdr";
    case Method::blockjs: return "blockjs";
    case Method::ebayes: return "ebayes";
  }
  return "?";
}

inline Method method_from_name(const std::string& name) {
  for (Method m : kAllMethods)
    if (name == method_name(m)) return m;
  raise(ErrorKind::parse_failure, "unknown method '" + name + "'");
}

inline bool method_is_neural(Method m) {
  return m == Method::dl || m == Method::cnn_serial;
}

inline ShrinkKind method_shrink_kind(Method m) {
  switch (m) {
    case Method::universal: return ShrinkKind::universal;
    case Method::sure: return ShrinkKind::sure;
    case Method::minimax: return ShrinkKind::minimax;
    case Method::fdr: return ShrinkKind::fdr;
    case Method::blockjs: return ShrinkKind::block_js;
    case Method::ebayes: return ShrinkKind::empirical_bayes;
    default:
      raise(ErrorKind::invalid_config, "method has no shrinkage rule");
  }
}

// Pipeline defaults for baseline removal ahead of denoising. A stiff smoother
// with two sweeps takes out the fluorescence hump without chewing into the
// peaks the way the looser per-module default does on these signals.
inline AirplsConfig pipeline_airpls_defaults() {
  AirplsConfig cfg;
  cfg.lambda = 1e9;
  cfg.max_iter = 2;
  return cfg;
}

struct BenchOptions {
  std::vector<Method> methods;     // required: at least one
  std::string ckpt_path;           // dl checkpoint
  std::string ckpt_serial_path;    // cnn_serial checkpoint
  AirplsConfig airpls = pipeline_airpls_defaults();
  std::string wavelet = "sym4";
  Extension extension = Extension::symmetric;
  size_t levels = 0;  // 0 = default depth for the signal length
  double fdr_q = 0.05;
  size_t overlay_index = 0;  // which test pair feeds the overlay CSV
};

inline void validate_bench_options(const BenchOptions& opt) {
  if (opt.methods.empty())
    raise(ErrorKind::invalid_config, "no methods selected");
  for (Method m : opt.methods) {
    if (m == Method::dl && opt.ckpt_path.empty())
      raise(ErrorKind::missing_checkpoint, "method dl needs --ckpt");
    if (m == Method::cnn_serial && opt.ckpt_serial_path.empty())
      raise(ErrorKind::missing_checkpoint,
            "method cnn_serial needs --ckpt-serial");
  }
}

struct PerSpectrumRow {
  std::string method;
  std::string id;
  double snr_db = 0.0;
  double rmse = 0.0;
  double mape_pct = 0.0;
};

struct AggregateRow {
  std::string method;
  double snr_db = 0.0;
  double rmse = 0.0;
  double mape_pct = 0.0;
  size_t n_spectra = 0;
};

struct BenchReport {
  std::vector<AggregateRow> aggregate;      // noisy row first, then methods
  std::vector<PerSpectrumRow> per_spectrum;
  // Overlay for one designated pair: clean, corrected input, one denoised
  // trace per method, all aligned on the wavenumber axis.
  std::string overlay_id;
  Spectrum overlay_clean;
  Spectrum overlay_noisy;
  std::vector<std::pair<std::string, Spectrum>> overlay_denoised;
};

// Denoise one baseline-corrected signal with one method. Networks arrive
// preloaded so bench does not reread checkpoints per spectrum.
inline Spectrum denoise_corrected(const Spectrum& corrected, Method m,
                                  const BenchOptions& opt, Network* dl_net,
                                  Network* serial_net) {
  if (method_is_neural(m)) {
    Network* net = m == Method::dl ? dl_net : serial_net;
    if (!net)
      raise(ErrorKind::missing_checkpoint,
            std::string("no network loaded for method ") + method_name(m));
    Spectrum out = corrected;
    out.intensities = infer_one(*net, corrected.intensities);
    return out;
  }
  ShrinkageRule rule;
  rule.kind = method_shrink_kind(m);
  rule.q = opt.fdr_q;
  const WaveletSpec w = make_wavelet(opt.wavelet, opt.extension);
  return wavelet_denoise(corrected, rule, w, opt.levels);
}

inline BenchReport run_bench(const Dataset& test, const BenchOptions& opt) {
  validate_bench_options(opt);
  validate_dataset(test);
  if (test.pairs.empty()) raise(ErrorKind::empty_dataset, "no test pairs");

  std::unique_ptr<Network> dl_net, serial_net;
  for (Method m : opt.methods) {
    if (m == Method::dl && !dl_net)
      dl_net = std::move(load_checkpoint(opt.ckpt_path).net);
    if (m == Method::cnn_serial && !serial_net)
      serial_net = std::move(load_checkpoint(opt.ckpt_serial_path).net);
  }

  const size_t np = test.pairs.size();
  std::vector<Spectrum> corrected(np);
  for (size_t i = 0; i < np; ++i)
    corrected[i] = correct(test.pairs[i].noisy, opt.airpls);

  BenchReport report;
  const size_t oi = std::min(opt.overlay_index, np - 1);
  report.overlay_id = test.pairs[oi].id;
  report.overlay_clean = test.pairs[oi].clean;
  report.overlay_noisy = corrected[oi];

  auto add_rows = [&](const std::string& name,
                      const std::vector<Spectrum>& outputs) {
    AggregateRow agg;
    agg.method = name;
    agg.n_spectra = np;
    for (size_t i = 0; i < np; ++i) {
      const MetricsReport r =
          compute_report(test.pairs[i].clean, outputs[i]);
      report.per_spectrum.push_back(
          {name, test.pairs[i].id, r.snr_db, r.rmse, r.mape_pct});
      agg.snr_db += r.snr_db;
      agg.rmse += r.rmse;
      agg.mape_pct += r.mape_pct;
    }
    agg.snr_db /= static_cast<double>(np);
    agg.rmse /= static_cast<double>(np);
    agg.mape_pct /= static_cast<double>(np);
    report.aggregate.push_back(agg);
  };

  // Reference row: the baseline-corrected input scored against clean, the
  // "before denoising" line every method is compared to.
  add_rows("noisy", corrected);

  for (Method m : kAllMethods) {
    bool selected = false;
    for (Method s : opt.methods) selected |= (s == m);
    if (!selected) continue;
    std::vector<Spectrum> outputs(np);
    for (size_t i = 0; i < np; ++i)
      outputs[i] = denoise_corrected(corrected[i], m, opt, dl_net.get(),
                                     serial_net.get());
    add_rows(method_name(m), outputs);
    report.overlay_denoised.emplace_back(method_name(m), outputs[oi]);
  }
  return report;
}

inline std::string aggregate_csv(const BenchReport& report) {
  std::string out = "method,snr_db,rmse,mape_pct,n_spectra\n";
  for (const auto& row : report.aggregate) {
    out += row.method + ',' + format_double(row.snr_db) + ',' +
           format_double(row.rmse) + ',' + format_double(row.mape_pct) + ',' +
           std::to_string(row.n_spectra) + '\n';
  }
  return out;
}

inline std::string per_spectrum_csv(const BenchReport& report) {
  std::string out = "method,id,snr_db,rmse,mape_pct\n";
  for (const auto& row : report.per_spectrum) {
    out += row.method + ',' + row.id + ',' + format_double(row.snr_db) + ',' +
           format_double(row.rmse) + ',' + format_double(row.mape_pct) + '\n';
  }
  return out;
}

inline std::string overlay_csv(const BenchReport& report) {
  const Spectrum& clean = report.overlay_clean;
  std::string out = "index,clean,noisy";
  for (const auto& [name, spec] : report.overlay_denoised) out += "," + name;
  out += "\n";
  for (size_t i = 0; i < clean.length(); ++i) {
    out += std::to_string(i) + ',' + format_double(clean[i]) + ',' +
           format_double(report.overlay_noisy[i]);
    for (const auto& [name, spec] : report.overlay_denoised)
      out += "," + format_double(spec[i]);
    out += "\n";
  }
  return out;
}

}  // namespace rsdn
