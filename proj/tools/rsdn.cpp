#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsdn/presets.hpp"
#include "rsdn/rsdn.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<rsdn::Method> parse_methods(const std::string& list) {
  std::vector<rsdn::Method> out;
  if (list == "all") {
    out.assign(rsdn::kAllMethods.begin(), rsdn::kAllMethods.end());
    return out;
  }
  for (const auto piece : rsdn::split_on(list, ','))
    out.push_back(rsdn::method_from_name(std::string(rsdn::trim(
        std::string(piece)))));
  if (out.empty()) rsdn::raise(rsdn::ErrorKind::invalid_config, "no methods");
  return out;
}

rsdn::Extension parse_extension(const std::string& name) {
  if (name == "symmetric") return rsdn::Extension::symmetric;
  if (name == "periodic") return rsdn::Extension::periodic;
  rsdn::raise(rsdn::ErrorKind::parse_failure,
              "unknown extension mode '" + name + "'");
}

std::vector<double> parse_snr_grid(const std::string& text) {
  const auto parts = rsdn::split_on(text, ':');
  if (parts.size() != 3)
    rsdn::raise(rsdn::ErrorKind::parse_failure,
                "--snr-grid expects lo:hi:step");
  const double lo = rsdn::parse_double(std::string(parts[0]));
  const double hi = rsdn::parse_double(std::string(parts[1]));
  const double step = rsdn::parse_double(std::string(parts[2]));
  if (!(step > 0.0) || hi < lo)
    rsdn::raise(rsdn::ErrorKind::invalid_config, "bad --snr-grid range");
  std::vector<double> grid;
  for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v);
  return grid;
}

struct GlobalOpts {
  uint64_t seed = 1;
  bool seed_given = false;
  std::string out;
  bool verbose = false;
};

int run_gen(const GlobalOpts& g, const std::string& config_path,
            size_t n_train, size_t n_test, const std::string& snr,
            const std::string& snr_grid, size_t length) {
  rsdn::GeneratorConfig cfg;
  if (!config_path.empty()) cfg = rsdn::read_config_file(config_path);
  if (g.seed_given) cfg.base_seed = g.seed;
  if (length) cfg.length = length;
  if (!snr.empty()) cfg.snr_grid_db = {rsdn::parse_double(snr)};
  if (!snr_grid.empty()) cfg.snr_grid_db = parse_snr_grid(snr_grid);
  rsdn::validate_config(cfg);

  const std::string out_dir = g.out.empty() ? "." : g.out;
  std::filesystem::create_directories(out_dir);
  auto [train, test] = rsdn::build_dataset(cfg, n_train, n_test);
  rsdn::write_dataset(train, out_dir + "/train.jsonl");
  rsdn::write_dataset(test, out_dir + "/test.jsonl");
  rsdn::write_config_file(cfg, out_dir + "/generator.cfg");
  std::cout << "train " << train.pairs.size() << "\n"
            << "test " << test.pairs.size() << "\n"
            << "digest " << rsdn::config_digest(cfg) << "\n";
  return 0;
}

int run_train(const GlobalOpts& g, const std::string& data_path,
              const std::string& preset_name, const std::string& topology,
              double lr, size_t batch, size_t epochs, double airpls_lambda,
              int airpls_max_iter, std::string ckpt_path,
              std::string history_path) {
  const auto t0 = Clock::now();
  rsdn::Dataset data = rsdn::read_dataset(data_path);
  if (data.pairs.empty())
    rsdn::raise(rsdn::ErrorKind::empty_dataset, "training dataset is empty");
  const size_t input_len = data.pairs.front().clean.length();

  rsdn::Preset preset = rsdn::preset_by_name(preset_name, input_len);
  preset.net.topology = rsdn::topology_from_name(topology);
  if (lr > 0.0) preset.hyper.learning_rate = lr;
  if (batch) preset.hyper.batch_size = batch;
  if (epochs) preset.hyper.epochs = epochs;
  preset.hyper.seed = g.seed;

  rsdn::AirplsConfig acfg = rsdn::pipeline_airpls_defaults();
  acfg.lambda = airpls_lambda;
  acfg.max_iter = airpls_max_iter;
  rsdn::validate_airpls_config(acfg);

  if (ckpt_path.empty()) ckpt_path = g.out.empty() ? "model.rsdn" : g.out;
  if (history_path.empty()) history_path = ckpt_path + ".loss.csv";

  std::vector<std::vector<double>> inputs, targets;
  inputs.reserve(data.pairs.size());
  targets.reserve(data.pairs.size());
  for (const auto& pair : data.pairs) {
    inputs.push_back(rsdn::correct(pair.noisy, acfg).intensities);
    targets.push_back(pair.clean.intensities);
  }
  if (g.verbose)
    std::cerr << "prepared " << inputs.size() << " pairs ("
              << seconds_since(t0) << "s)\n";

  rsdn::Network net(preset.net);
  net.init_params(rsdn::derive_seed(preset.hyper.seed, rsdn::kParamInitStream));
  rsdn::AdamState adam;
  rsdn::EpochCallback progress;
  if (g.verbose)
    progress = [&](size_t epoch, double loss) {
      std::fprintf(stderr, "epoch %zu/%zu loss %.4f (%.1fs)\n", epoch + 1,
                   preset.hyper.epochs, loss, seconds_since(t0));
    };
  rsdn::TrainResult result =
      rsdn::train(net, inputs, targets, preset.hyper, adam, progress);

  rsdn::save_checkpoint(ckpt_path, net, preset.hyper, adam, result.epoch_loss);
  std::string csv = "epoch,mean_loss\n";
  for (size_t e = 0; e < result.epoch_loss.size(); ++e)
    csv += std::to_string(e + 1) + "," +
           rsdn::format_double(result.epoch_loss[e]) + "\n";
  rsdn::write_text_file(history_path, csv);
  std::cout << "checkpoint " << ckpt_path << "\n"
            << "final_loss " << rsdn::format_double(result.epoch_loss.back())
            << "\n";
  return 0;
}

int run_denoise(const std::string& method_name, const std::string& ckpt,
                double airpls_lambda, int airpls_max_iter,
                const std::string& wavelet, const std::string& mode,
                size_t levels, double fdr_q, const std::string& in_path,
                const std::string& out_path) {
  const rsdn::Method method = rsdn::method_from_name(method_name);
  rsdn::BenchOptions opt;
  opt.methods = {method};
  opt.ckpt_path = ckpt;
  opt.ckpt_serial_path = ckpt;
  opt.airpls.lambda = airpls_lambda;
  opt.airpls.max_iter = airpls_max_iter;
  rsdn::validate_airpls_config(opt.airpls);
  opt.wavelet = wavelet;
  opt.extension = parse_extension(mode);
  opt.levels = levels;
  opt.fdr_q = fdr_q;
  if (rsdn::method_is_neural(method) && ckpt.empty())
    rsdn::raise(rsdn::ErrorKind::missing_checkpoint,
                std::string("--method ") + method_name + " needs --ckpt");

  const rsdn::Spectrum input = rsdn::read_spectrum_csv(in_path);
  const rsdn::Spectrum corrected = rsdn::correct(input, opt.airpls);
  std::unique_ptr<rsdn::Network> net;
  if (rsdn::method_is_neural(method))
    net = std::move(rsdn::load_checkpoint(ckpt).net);
  const rsdn::Spectrum out =
      rsdn::denoise_corrected(corrected, method, opt, net.get(), net.get());
  rsdn::write_spectrum_csv(out, out_path);
  return 0;
}

int run_eval(const std::string& clean_path, const std::string& denoised_path) {
  const rsdn::Spectrum clean = rsdn::read_spectrum_csv(clean_path);
  const rsdn::Spectrum denoised = rsdn::read_spectrum_csv(denoised_path);
  const rsdn::MetricsReport r = rsdn::compute_report(clean, denoised);
  std::cout << rsdn::format_double(r.snr_db) << ","
            << rsdn::format_double(r.rmse) << ","
            << rsdn::format_double(r.mape_pct) << "\n";
  return 0;
}

int run_bench(const GlobalOpts& g, const std::string& data_path,
              const std::string& methods, const std::string& ckpt,
              const std::string& ckpt_serial, double airpls_lambda,
              int airpls_max_iter, const std::string& wavelet,
              const std::string& mode, size_t levels, double fdr_q,
              size_t overlay_index) {
  rsdn::BenchOptions opt;
  opt.methods = parse_methods(methods);
  opt.ckpt_path = ckpt;
  opt.ckpt_serial_path = ckpt_serial;
  opt.airpls.lambda = airpls_lambda;
  opt.airpls.max_iter = airpls_max_iter;
  rsdn::validate_airpls_config(opt.airpls);
  opt.wavelet = wavelet;
  opt.extension = parse_extension(mode);
  opt.levels = levels;
  opt.fdr_q = fdr_q;
  opt.overlay_index = overlay_index;

  const rsdn::Dataset test = rsdn::read_dataset(data_path);
  const rsdn::BenchReport report = rsdn::run_bench(test, opt);

  const std::string out_dir = g.out.empty() ? "." : g.out;
  std::filesystem::create_directories(out_dir);
  const std::string agg = rsdn::aggregate_csv(report);
  rsdn::write_text_file(out_dir + "/report.csv", agg);
  rsdn::write_text_file(out_dir + "/per_spectrum.csv",
                        rsdn::per_spectrum_csv(report));
  rsdn::write_text_file(out_dir + "/overlay.csv", rsdn::overlay_csv(report));
  std::cout << agg;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Raman spectral denoising toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  auto* seed_opt = app.add_option("--seed", g.seed, "base random seed");
  app.add_option("--out", g.out, "output directory or file");
  app.add_flag("--verbose", g.verbose, "progress to stderr");

  // gen
  auto* gen = app.add_subcommand("gen", "synthesize train/test datasets");
  gen->fallthrough();
  std::string gen_config, gen_snr, gen_snr_grid;
  size_t gen_n_train = 500, gen_n_test = 50, gen_length = 0;
  gen->add_option("--config", gen_config, "generator config file");
  gen->add_option("--n-train", gen_n_train, "training pairs");
  gen->add_option("--n-test", gen_n_test, "test pairs");
  auto* snr_opt = gen->add_option("--snr", gen_snr, "single SNR target (dB)");
  gen->add_option("--snr-grid", gen_snr_grid, "SNR grid lo:hi:step (dB)")
      ->excludes(snr_opt);
  gen->add_option("--length", gen_length, "samples per spectrum");

  // train
  auto* train = app.add_subcommand("train", "train a denoising network");
  train->fallthrough();
  std::string tr_data, tr_preset = "desk", tr_topology = "parallel";
  std::string tr_ckpt, tr_history;
  double tr_lr = 0.0, tr_lambda = 1e9;
  size_t tr_batch = 0, tr_epochs = 0;
  int tr_max_iter = 2;
  train->add_option("--data", tr_data, "training dataset (jsonl)")->required();
  train->add_option("--preset", tr_preset, "desk or paper");
  train->add_option("--topology", tr_topology, "parallel or serial");
  train->add_option("--lr", tr_lr, "override learning rate");
  train->add_option("--batch", tr_batch, "override batch size");
  train->add_option("--epochs", tr_epochs, "override epoch count");
  train->add_option("--airpls-lambda", tr_lambda, "baseline stiffness");
  train->add_option("--airpls-max-iter", tr_max_iter, "baseline sweeps");
  train->add_option("--ckpt", tr_ckpt, "checkpoint output path");
  train->add_option("--history", tr_history, "loss history CSV path");

  // denoise
  auto* denoise = app.add_subcommand("denoise", "denoise one spectrum file");
  denoise->fallthrough();
  std::string dn_method, dn_ckpt, dn_wavelet = "sym4", dn_mode = "symmetric";
  std::string dn_in, dn_out;
  double dn_lambda = 1e9, dn_q = 0.05;
  int dn_max_iter = 2;
  size_t dn_levels = 0;
  denoise->add_option("--method", dn_method, "denoising method")->required();
  denoise->add_option("--ckpt", dn_ckpt, "checkpoint for dl/cnn_serial");
  denoise->add_option("--airpls-lambda", dn_lambda, "baseline stiffness");
  denoise->add_option("--airpls-max-iter", dn_max_iter, "baseline sweeps");
  denoise->add_option("--wavelet", dn_wavelet, "haar, sym4, or db4");
  denoise->add_option("--mode", dn_mode, "symmetric or periodic");
  denoise->add_option("--levels", dn_levels, "decomposition depth (0=auto)");
  denoise->add_option("--fdr-q", dn_q, "FDR rate");
  denoise->add_option("input", dn_in, "input spectrum CSV")->required();
  denoise->add_option("output", dn_out, "output spectrum CSV")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "score a denoised spectrum");
  eval->fallthrough();
  std::string ev_clean, ev_denoised;
  eval->add_option("clean", ev_clean, "reference spectrum CSV")->required();
  eval->add_option("denoised", ev_denoised, "spectrum to score")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "benchmark methods on a dataset");
  bench->fallthrough();
  std::string be_data, be_methods = "all", be_ckpt, be_ckpt_serial;
  std::string be_wavelet = "sym4", be_mode = "symmetric";
  double be_lambda = 1e9, be_q = 0.05;
  int be_max_iter = 2;
  size_t be_levels = 0, be_overlay = 0;
  bench->add_option("--data", be_data, "test dataset (jsonl)")->required();
  bench->add_option("--methods", be_methods, "'all' or comma list");
  bench->add_option("--ckpt", be_ckpt, "dl checkpoint");
  bench->add_option("--ckpt-serial", be_ckpt_serial, "cnn_serial checkpoint");
  bench->add_option("--airpls-lambda", be_lambda, "baseline stiffness");
  bench->add_option("--airpls-max-iter", be_max_iter, "baseline sweeps");
  bench->add_option("--wavelet", be_wavelet, "haar, sym4, or db4");
  bench->add_option("--mode", be_mode, "symmetric or periodic");
  bench->add_option("--levels", be_levels, "decomposition depth (0=auto)");
  bench->add_option("--fdr-q", be_q, "FDR rate");
  bench->add_option("--overlay-index", be_overlay, "pair for the overlay CSV");

  try {
    app.parse(argc, argv);
    g.seed_given = seed_opt->count() > 0;
    if (gen->parsed())
      return run_gen(g, gen_config, gen_n_train, gen_n_test, gen_snr,
                     gen_snr_grid, gen_length);
    if (train->parsed())
      return run_train(g, tr_data, tr_preset, tr_topology, tr_lr, tr_batch,
                       tr_epochs, tr_lambda, tr_max_iter, tr_ckpt, tr_history);
    if (denoise->parsed())
      return run_denoise(dn_method, dn_ckpt, dn_lambda, dn_max_iter,
                         dn_wavelet, dn_mode, dn_levels, dn_q, dn_in, dn_out);
    if (eval->parsed()) return run_eval(ev_clean, ev_denoised);
    if (bench->parsed())
      return run_bench(g, be_data, be_methods, be_ckpt, be_ckpt_serial,
                       be_lambda, be_max_iter, be_wavelet, be_mode, be_levels,
                       be_q, be_overlay);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rsdn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.category() == rsdn::ErrorCategory::data ? 3 : 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
