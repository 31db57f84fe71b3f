#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rsdn/error.hpp"
#include "rsdn/layers.hpp"
#include "rsdn/rng.hpp"
#include "rsdn/tensor.hpp"

namespace rsdn {

enum class Topology { parallel, serial };

inline const char* topology_name(Topology t) {
  return t == Topology::parallel ? "parallel" : "serial";
}

inline Topology topology_from_name(const std::string& name) {
  if (name == "parallel") return Topology::parallel;
  if (name == "serial") return Topology::serial;
  raise(ErrorKind::parse_failure, "unknown topology '" + name + "'");
}

struct NetworkConfig {
  Topology topology = Topology::parallel;
  size_t branch_depth = 3;
  size_t filters_per_layer = 16;
  size_t kernel_len = 15;
  size_t input_len = 2051;
  // Per-position means of the training inputs, subtracted before the first
  // conv layer. Empty until training computes them.
  std::vector<double> zero_center_means;
};

inline size_t pooled_length(const NetworkConfig& cfg) {
  size_t len = cfg.input_len;
  for (size_t d = 0; d < cfg.branch_depth; ++d) len = (len + 1) / 2;
  return len;
}

inline size_t second_kernel_len(const NetworkConfig& cfg) {
  return std::max<size_t>(1, cfg.kernel_len / 2);
}

inline void validate_network_config(const NetworkConfig& cfg) {
  if (cfg.branch_depth < 1)
    raise(ErrorKind::invalid_config, "branch depth must be >= 1");
  if (cfg.filters_per_layer < 1)
    raise(ErrorKind::invalid_config, "filter count must be >= 1");
  if (cfg.kernel_len < 1)
    raise(ErrorKind::invalid_config, "kernel length must be >= 1");
  if (cfg.input_len < 8)
    raise(ErrorKind::invalid_config, "input length must be >= 8");
  if (pooled_length(cfg) < 1)
    raise(ErrorKind::invalid_config, "branch pools away the whole signal");
  if (!cfg.zero_center_means.empty() &&
      cfg.zero_center_means.size() != cfg.input_len)
    raise(ErrorKind::invalid_config,
          "zero-center means length does not match input length");
}

enum class LayerKind { conv, batchnorm, relu, maxpool, concat, fully_connected };

// Structural description of one layer; the dimension chain is validated when
// the network is assembled.
struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  size_t in_ch = 0, out_ch = 0, kernel_len = 0;  // conv
  size_t channels = 0;                           // batchnorm
  size_t in_dim = 0, out_dim = 0;                // fully connected
};

inline std::vector<LayerSpec> branch_specs(const NetworkConfig& cfg,
                                           size_t kernel_len) {
  std::vector<LayerSpec> specs;
  size_t ch = 1;
  for (size_t d = 0; d < cfg.branch_depth; ++d) {
    LayerSpec conv;
    conv.kind = LayerKind::conv;
    conv.in_ch = ch;
    conv.out_ch = cfg.filters_per_layer;
    conv.kernel_len = kernel_len;
    specs.push_back(conv);
    ch = cfg.filters_per_layer;
    LayerSpec bn;
    bn.kind = LayerKind::batchnorm;
    bn.channels = ch;
    specs.push_back(bn);
    specs.push_back({LayerKind::relu});
    specs.push_back({LayerKind::maxpool});
  }
  return specs;
}

// The denoising network: one or two conv branches (independent weights,
// branch kernels kernel_len and kernel_len/2), channel concat, and one fully
// connected layer regressing back to input_len samples.
class Network {
public:
  explicit Network(const NetworkConfig& cfg) : cfg_(cfg) {
    validate_network_config(cfg_);
    build_branch(branch1_, branch_specs(cfg_, cfg_.kernel_len));
    if (cfg_.topology == Topology::parallel)
      build_branch(branch2_, branch_specs(cfg_, second_kernel_len(cfg_)));
    const size_t branches = cfg_.topology == Topology::parallel ? 2 : 1;
    fc_in_ = branches * cfg_.filters_per_layer * pooled_length(cfg_);
    fc_ = std::make_unique<Linear>(fc_in_, cfg_.input_len);
  }

  const NetworkConfig& config() const { return cfg_; }
  NetworkConfig& config() { return cfg_; }

  // Xavier-uniform conv/fc weights, zero biases; batchnorm starts at the
  // identity transform. Draw order is fixed: branch 1, branch 2, fc.
  void init_params(uint64_t seed) {
    Rng rng(seed);
    for (auto& layer : branch1_)
      if (auto* conv = dynamic_cast<Conv1d*>(layer.get())) conv->init(rng);
    for (auto& layer : branch2_)
      if (auto* conv = dynamic_cast<Conv1d*>(layer.get())) conv->init(rng);
    fc_->init(rng);
  }

  Tensor forward(const Tensor& x, bool train) {
    if (x.channels != 1 || x.length != cfg_.input_len)
      raise(ErrorKind::shape_mismatch,
            "network expects [batch,1," + std::to_string(cfg_.input_len) +
                "] input");
    Tensor x0 = x;
    if (!cfg_.zero_center_means.empty()) {
      for (size_t b = 0; b < x0.batch; ++b) {
        double* row = x0.row(b, 0);
        for (size_t i = 0; i < x0.length; ++i)
          row[i] -= cfg_.zero_center_means[i];
      }
    }
    Tensor f1 = run_branch(branch1_, x0, train);
    Tensor feat;
    if (cfg_.topology == Topology::parallel) {
      Tensor f2 = run_branch(branch2_, x0, train);
      feat = concat_channels(f1, f2);
    } else {
      feat = std::move(f1);
    }
    concat_channels_split_ = cfg_.filters_per_layer;
    feat_shape_[0] = feat.batch;
    feat_shape_[1] = feat.channels;
    feat_shape_[2] = feat.length;
    feat.reshape(feat.batch, 1, feat.channels * feat.length);
    return fc_->forward(feat, train);
  }

  // Gradient of the loss w.r.t. the input; parameter gradients accumulate in
  // the layers.
  Tensor backward(const Tensor& grad_out) {
    Tensor gfeat = fc_->backward(grad_out);
    gfeat.reshape(feat_shape_[0], feat_shape_[1], feat_shape_[2]);
    if (cfg_.topology == Topology::parallel) {
      Tensor g1(gfeat.batch, concat_channels_split_, gfeat.length);
      Tensor g2(gfeat.batch, gfeat.channels - concat_channels_split_,
                gfeat.length);
      split_channels(gfeat, g1, g2);
      Tensor gx1 = run_branch_backward(branch1_, g1);
      Tensor gx2 = run_branch_backward(branch2_, g2);
      for (size_t i = 0; i < gx1.data.size(); ++i) gx1.data[i] += gx2.data[i];
      return gx1;
    }
    return run_branch_backward(branch1_, gfeat);
  }

  // Parameters in checkpoint order: branch 1 layers, branch 2 layers, fc.
  std::vector<Param*> params() {
    std::vector<Param*> all;
    for (auto& layer : branch1_)
      for (auto* p : layer->params()) all.push_back(p);
    for (auto& layer : branch2_)
      for (auto* p : layer->params()) all.push_back(p);
    for (auto* p : fc_->params()) all.push_back(p);
    return all;
  }

  // Batchnorm running statistics in the same layer order.
  std::vector<std::vector<double>*> state() {
    std::vector<std::vector<double>*> all;
    for (auto& layer : branch1_)
      for (auto* s : layer->state()) all.push_back(s);
    for (auto& layer : branch2_)
      for (auto* s : layer->state()) all.push_back(s);
    return all;
  }

  size_t param_count() {
    size_t n = 0;
    for (auto* p : params()) n += p->value.size();
    return n;
  }

  // The fully connected head, exposed for the fused-optimizer fast path.
  Linear& head() { return *fc_; }

  // Index of the head's weight array within params() order.
  size_t head_weight_index() { return params().size() - 2; }

  void zero_grad(size_t skip_param = static_cast<size_t>(-1)) {
    auto all = params();
    for (size_t i = 0; i < all.size(); ++i) {
      if (i == skip_param) continue;
      std::fill(all[i]->grad.begin(), all[i]->grad.end(), 0.0);
    }
  }

  std::string describe() {
    std::string out = std::string("topology ") + topology_name(cfg_.topology) +
                      "\nbranch1:\n";
    for (auto& layer : branch1_) out += "  " + layer->describe() + "\n";
    if (!branch2_.empty()) {
      out += "branch2:\n";
      for (auto& layer : branch2_) out += "  " + layer->describe() + "\n";
    }
    out += "head: concat+flatten, " + fc_->describe() + "\n";
    return out;
  }

private:
  static void build_branch(std::vector<std::unique_ptr<Layer>>& branch,
                           const std::vector<LayerSpec>& specs) {
    size_t ch = 1;
    for (const auto& s : specs) {
      switch (s.kind) {
        case LayerKind::conv:
          if (s.in_ch != ch)
            raise(ErrorKind::invalid_config, "conv input channel mismatch");
          branch.push_back(
              std::make_unique<Conv1d>(s.in_ch, s.out_ch, s.kernel_len));
          ch = s.out_ch;
          break;
        case LayerKind::batchnorm:
          if (s.channels != ch)
            raise(ErrorKind::invalid_config, "batchnorm channel mismatch");
          branch.push_back(std::make_unique<BatchNorm1d>(s.channels));
          break;
        case LayerKind::relu:
          branch.push_back(std::make_unique<ReLU>());
          break;
        case LayerKind::maxpool:
          branch.push_back(std::make_unique<MaxPool2>());
          break;
        default:
          raise(ErrorKind::invalid_config, "unexpected layer kind in branch");
      }
    }
  }

  static Tensor run_branch(std::vector<std::unique_ptr<Layer>>& branch,
                           const Tensor& x, bool train) {
    Tensor cur = x;
    for (auto& layer : branch) cur = layer->forward(cur, train);
    return cur;
  }

  static Tensor run_branch_backward(
      std::vector<std::unique_ptr<Layer>>& branch, const Tensor& grad) {
    Tensor cur = grad;
    for (auto it = branch.rbegin(); it != branch.rend(); ++it)
      cur = (*it)->backward(cur);
    return cur;
  }

  static Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.batch != b.batch || a.length != b.length)
      raise(ErrorKind::shape_mismatch, "concat shape mismatch");
    Tensor out(a.batch, a.channels + b.channels, a.length);
    for (size_t bt = 0; bt < a.batch; ++bt) {
      for (size_t c = 0; c < a.channels; ++c)
        std::copy_n(a.row(bt, c), a.length, out.row(bt, c));
      for (size_t c = 0; c < b.channels; ++c)
        std::copy_n(b.row(bt, c), b.length, out.row(bt, a.channels + c));
    }
    return out;
  }

  static void split_channels(const Tensor& g, Tensor& g1, Tensor& g2) {
    for (size_t bt = 0; bt < g.batch; ++bt) {
      for (size_t c = 0; c < g1.channels; ++c)
        std::copy_n(g.row(bt, c), g.length, g1.row(bt, c));
      for (size_t c = 0; c < g2.channels; ++c)
        std::copy_n(g.row(bt, g1.channels + c), g.length, g2.row(bt, c));
    }
  }

  NetworkConfig cfg_;
  std::vector<std::unique_ptr<Layer>> branch1_;
  std::vector<std::unique_ptr<Layer>> branch2_;
  std::unique_ptr<Linear> fc_;
  size_t fc_in_ = 0;
  size_t concat_channels_split_ = 0;
  size_t feat_shape_[3] = {0, 0, 0};
};

}  // namespace rsdn
