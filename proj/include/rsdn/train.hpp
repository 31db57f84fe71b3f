#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "rsdn/error.hpp"
#include "rsdn/network.hpp"
#include "rsdn/rng.hpp"
#include "rsdn/tensor.hpp"

namespace rsdn {

struct TrainHyper {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  size_t epochs = 600;
  size_t batch_size = 50;
  uint64_t seed = 1;
};

inline void validate_hyper(const TrainHyper& h) {
  if (!(h.learning_rate > 0.0) || !std::isfinite(h.learning_rate))
    raise(ErrorKind::invalid_config, "learning rate must be positive");
  if (!(h.beta1 >= 0.0 && h.beta1 < 1.0) || !(h.beta2 >= 0.0 && h.beta2 < 1.0))
    raise(ErrorKind::invalid_config, "adam betas must lie in [0,1)");
  if (!(h.eps > 0.0))
    raise(ErrorKind::invalid_config, "adam eps must be positive");
  if (h.epochs < 1) raise(ErrorKind::invalid_config, "epochs must be >= 1");
  if (h.batch_size < 1)
    raise(ErrorKind::invalid_config, "batch size must be >= 1");
}

// Mean over the batch of the per-sample sum of squared errors. If grad is
// non-null it receives d(loss)/d(pred) = 2 (pred - target) / batch.
inline double mse_loss(const Tensor& pred, const Tensor& target, Tensor* grad) {
  if (pred.batch != target.batch || pred.channels != target.channels ||
      pred.length != target.length)
    raise(ErrorKind::shape_mismatch, "loss shape mismatch");
  if (pred.batch == 0) raise(ErrorKind::empty_dataset, "loss over empty batch");
  if (grad) *grad = Tensor(pred.batch, pred.channels, pred.length);
  const double inv_b = 1.0 / static_cast<double>(pred.batch);
  double total = 0.0;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    const double d = pred.data[i] - target.data[i];
    total += d * d;
    if (grad) grad->data[i] = 2.0 * d * inv_b;
  }
  return total * inv_b;
}

// First/second moment accumulators aligned with Network::params() order.
struct AdamState {
  std::vector<std::vector<double>> m, v;
  uint64_t step = 0;
};

inline void adam_init(AdamState& st, Network& net) {
  st.m.clear();
  st.v.clear();
  st.step = 0;
  for (auto* p : net.params()) {
    st.m.emplace_back(p->value.size(), 0.0);
    st.v.emplace_back(p->value.size(), 0.0);
  }
}

// One Adam update over all parameters (bias-corrected). `skip_param` lets the
// training loop exclude an array that a fused layer update already handled.
inline void adam_step(AdamState& st, Network& net, const TrainHyper& h,
                      size_t skip_param = static_cast<size_t>(-1)) {
  auto params = net.params();
  if (st.m.size() != params.size())
    raise(ErrorKind::shape_mismatch, "adam state does not match network");
  st.step += 1;
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(st.step));
  for (size_t p = 0; p < params.size(); ++p) {
    if (p == skip_param) continue;
    auto& value = params[p]->value;
    auto& grad = params[p]->grad;
    auto& m = st.m[p];
    auto& v = st.v[p];
    if (m.size() != value.size())
      raise(ErrorKind::shape_mismatch, "adam state does not match network");
    for (size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
      value[i] -= h.learning_rate * (m[i] / bc1) /
                  (std::sqrt(v[i] / bc2) + h.eps);
    }
  }
}

// Seed-stream tags for training-side randomness.
constexpr uint64_t kParamInitStream = 4;
constexpr uint64_t kShuffleStream = 5;

struct TrainResult {
  std::vector<double> epoch_loss;  // mean per-sample sum of squared errors
};

using EpochCallback = std::function<void(size_t epoch, double loss)>;

// Minibatch Adam training. Inputs are the (baseline-corrected) noisy signals,
// targets the clean ones. Per-position means of the inputs are computed once
// and stored in the network config so inference can repeat the same shift;
// a resumed network keeps the means it was saved with.
inline TrainResult train(Network& net,
                         const std::vector<std::vector<double>>& inputs,
                         const std::vector<std::vector<double>>& targets,
                         const TrainHyper& hyper, AdamState& adam,
                         const EpochCallback& on_epoch = nullptr) {
  validate_hyper(hyper);
  if (inputs.empty()) raise(ErrorKind::empty_dataset, "no training pairs");
  if (inputs.size() != targets.size())
    raise(ErrorKind::shape_mismatch, "input/target counts differ");
  const size_t n = inputs.size();
  const size_t len = net.config().input_len;
  for (size_t i = 0; i < n; ++i)
    if (inputs[i].size() != len || targets[i].size() != len)
      raise(ErrorKind::shape_mismatch, "training pair length mismatch");

  if (net.config().zero_center_means.empty()) {
    std::vector<double> means(len, 0.0);
    for (const auto& x : inputs)
      for (size_t i = 0; i < len; ++i) means[i] += x[i];
    for (double& m : means) m /= static_cast<double>(n);
    net.config().zero_center_means = std::move(means);
  }
  if (adam.m.empty()) adam_init(adam, net);

  // The fc weight dominates the parameter count by orders of magnitude, so
  // its gradient is never materialized: the head layer defers it and applies
  // Adam row-by-row from its cached activations. Bit-identical to the plain
  // accumulate-then-step loop, just far less memory traffic.
  const size_t fc_w = net.head_weight_index();
  net.head().set_defer_weight_grad(true);
  net.zero_grad();

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  TrainResult result;
  result.epoch_loss.reserve(hyper.epochs);

  for (size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(hyper.seed, kShuffleStream, epoch));
    shuffle_rng.shuffle(order);
    double epoch_total = 0.0;
    for (size_t start = 0; start < n; start += hyper.batch_size) {
      const size_t bsz = std::min(hyper.batch_size, n - start);
      Tensor xb(bsz, 1, len), yb(bsz, 1, len);
      for (size_t b = 0; b < bsz; ++b) {
        const size_t idx = order[start + b];
        std::copy_n(inputs[idx].data(), len, xb.row(b, 0));
        std::copy_n(targets[idx].data(), len, yb.row(b, 0));
      }
      net.zero_grad(fc_w);
      Tensor pred = net.forward(xb, true);
      Tensor grad;
      const double loss = mse_loss(pred, yb, &grad);
      if (!std::isfinite(loss))
        raise(ErrorKind::non_finite_value, "training loss diverged");
      net.backward(grad);
      adam_step(adam, net, hyper, fc_w);
      const double bc1 =
          1.0 - std::pow(hyper.beta1, static_cast<double>(adam.step));
      const double bc2 =
          1.0 - std::pow(hyper.beta2, static_cast<double>(adam.step));
      net.head().fused_weight_adam(hyper.learning_rate, hyper.beta1,
                                   hyper.beta2, hyper.eps, bc1, bc2,
                                   adam.m[fc_w], adam.v[fc_w]);
      epoch_total += loss * static_cast<double>(bsz);
    }
    const double mean_loss = epoch_total / static_cast<double>(n);
    result.epoch_loss.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch, mean_loss);
  }
  net.head().set_defer_weight_grad(false);
  return result;
}

// Run the network on one signal (inference mode).
inline std::vector<double> infer_one(Network& net,
                                     const std::vector<double>& input) {
  Tensor x(1, 1, net.config().input_len);
  if (input.size() != net.config().input_len)
    raise(ErrorKind::shape_mismatch, "inference input length mismatch");
  std::copy_n(input.data(), input.size(), x.row(0, 0));
  Tensor y = net.forward(x, false);
  return std::vector<double>(y.row(0, 0), y.row(0, 0) + y.length);
}

}  // namespace rsdn
