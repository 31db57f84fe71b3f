#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rsdn/error.hpp"
#include "rsdn/rng.hpp"
#include "rsdn/tensor.hpp"

namespace rsdn {

// Trainable parameter array paired with its gradient accumulator.
struct Param {
  std::string name;
  std::vector<double> value;
  std::vector<double> grad;

  void resize(size_t n) {
    value.assign(n, 0.0);
    grad.assign(n, 0.0);
  }
};

class Layer {
public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, bool train) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<Param*> params() { return {}; }
  // Persistent non-trainable state (batchnorm running statistics).
  virtual std::vector<std::vector<double>*> state() { return {}; }
  virtual std::string describe() const = 0;

protected:
  bool has_cache_ = false;
  void need_cache() const {
    if (!has_cache_)
      raise(ErrorKind::missing_forward_cache,
            "backward called before a training-mode forward");
  }
};

// 1-D cross-correlation, stride 1, same-size output. Total padding is
// kernel_len-1, split evenly with the extra sample on the right.
class Conv1d : public Layer {
public:
  Conv1d(size_t in_ch, size_t out_ch, size_t kernel_len)
      : in_ch_(in_ch), out_ch_(out_ch), k_(kernel_len) {
    if (kernel_len == 0)
      raise(ErrorKind::invalid_config, "conv kernel length must be >= 1");
    weight_.name = "conv.weight";
    weight_.resize(out_ch_ * in_ch_ * k_);
    bias_.name = "conv.bias";
    bias_.resize(out_ch_);
    pad_left_ = (k_ - 1) / 2;
  }

  void init(Rng& rng) {
    const double fan_in = static_cast<double>(in_ch_ * k_);
    const double fan_out = static_cast<double>(out_ch_ * k_);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& w : weight_.value) w = rng.uniform(-bound, bound);
    for (auto& b : bias_.value) b = 0.0;
  }

  Tensor forward(const Tensor& x, bool train) override {
    if (x.channels != in_ch_)
      raise(ErrorKind::shape_mismatch,
            "conv expects " + std::to_string(in_ch_) + " channels, got " +
                std::to_string(x.channels));
    const size_t L = x.length;
    Tensor y(x.batch, out_ch_, L);
    for (size_t b = 0; b < x.batch; ++b) {
      for (size_t o = 0; o < out_ch_; ++o) {
        double* out = y.row(b, o);
        const double bias = bias_.value[o];
        for (size_t i = 0; i < L; ++i) out[i] = bias;
        for (size_t c = 0; c < in_ch_; ++c) {
          const double* in = x.row(b, c);
          const double* w = kernel(o, c);
          for (size_t t = 0; t < k_; ++t) {
            // out[i] += w[t] * in[i + t - pad_left] over valid i
            const long shift = static_cast<long>(t) - static_cast<long>(pad_left_);
            const size_t i0 = shift < 0 ? static_cast<size_t>(-shift) : 0;
            const size_t i1 = shift > 0 ? L - static_cast<size_t>(shift) : L;
            axpy(w[t], in + (static_cast<long>(i0) + shift), out + i0,
                 i1 - i0);
          }
        }
      }
    }
    if (train) {
      cached_input_ = x;
      has_cache_ = true;
    }
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    need_cache();
    const Tensor& x = cached_input_;
    const size_t L = x.length;
    if (grad_out.batch != x.batch || grad_out.channels != out_ch_ ||
        grad_out.length != L)
      raise(ErrorKind::shape_mismatch, "conv backward shape mismatch");
    Tensor dx(x.batch, in_ch_, L);
    for (size_t b = 0; b < x.batch; ++b) {
      for (size_t o = 0; o < out_ch_; ++o) {
        const double* gy = grad_out.row(b, o);
        double gb = 0.0;
        for (size_t i = 0; i < L; ++i) gb += gy[i];
        bias_.grad[o] += gb;
        for (size_t c = 0; c < in_ch_; ++c) {
          const double* in = x.row(b, c);
          const double* w = kernel(o, c);
          double* gw = kernel_grad(o, c);
          double* gx = dx.row(b, c);
          for (size_t t = 0; t < k_; ++t) {
            const long shift = static_cast<long>(t) - static_cast<long>(pad_left_);
            const size_t i0 = shift < 0 ? static_cast<size_t>(-shift) : 0;
            const size_t i1 = shift > 0 ? L - static_cast<size_t>(shift) : L;
            const size_t n = i1 - i0;
            // dW[t] = sum_i gy[i] * in[i + shift]
            gw[t] += dot8(gy + i0, in + (static_cast<long>(i0) + shift), n);
            // dX[i + shift] += w[t] * gy[i]
            axpy(w[t], gy + i0, gx + (static_cast<long>(i0) + shift), n);
          }
        }
      }
    }
    return dx;
  }

  std::vector<Param*> params() override { return {&weight_, &bias_}; }

  std::string describe() const override {
    return "conv " + std::to_string(in_ch_) + "->" + std::to_string(out_ch_) +
           " k" + std::to_string(k_);
  }

private:
  double* kernel(size_t o, size_t c) {
    return weight_.value.data() + (o * in_ch_ + c) * k_;
  }
  double* kernel_grad(size_t o, size_t c) {
    return weight_.grad.data() + (o * in_ch_ + c) * k_;
  }

  size_t in_ch_, out_ch_, k_, pad_left_;
  Param weight_, bias_;
  Tensor cached_input_;
};

// Per-channel batch normalization over (batch x length). Training mode uses
// biased batch statistics and folds them into the running statistics with
// momentum on the new value: running = (1-m) running + m batch.
class BatchNorm1d : public Layer {
public:
  explicit BatchNorm1d(size_t channels, double eps = 1e-5,
                       double momentum = 0.9)
      : ch_(channels), eps_(eps), momentum_(momentum) {
    gamma_.name = "bn.gamma";
    gamma_.resize(ch_);
    beta_.name = "bn.beta";
    beta_.resize(ch_);
    for (auto& g : gamma_.value) g = 1.0;
    running_mean_.assign(ch_, 0.0);
    running_var_.assign(ch_, 1.0);
  }

  Tensor forward(const Tensor& x, bool train) override {
    if (x.channels != ch_)
      raise(ErrorKind::shape_mismatch, "batchnorm channel count mismatch");
    Tensor y(x.batch, ch_, x.length);
    const size_t n = x.batch * x.length;
    if (train) {
      xhat_ = Tensor(x.batch, ch_, x.length);
      invstd_.assign(ch_, 0.0);
      for (size_t c = 0; c < ch_; ++c) {
        double mean = 0.0;
        for (size_t b = 0; b < x.batch; ++b) {
          const double* in = x.row(b, c);
          for (size_t i = 0; i < x.length; ++i) mean += in[i];
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (size_t b = 0; b < x.batch; ++b) {
          const double* in = x.row(b, c);
          for (size_t i = 0; i < x.length; ++i) {
            const double d = in[i] - mean;
            var += d * d;
          }
        }
        var /= static_cast<double>(n);
        const double inv = 1.0 / std::sqrt(var + eps_);
        invstd_[c] = inv;
        for (size_t b = 0; b < x.batch; ++b) {
          const double* in = x.row(b, c);
          double* xh = xhat_.row(b, c);
          double* out = y.row(b, c);
          for (size_t i = 0; i < x.length; ++i) {
            xh[i] = (in[i] - mean) * inv;
            out[i] = gamma_.value[c] * xh[i] + beta_.value[c];
          }
        }
        running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
        running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * var;
      }
      has_cache_ = true;
    } else {
      for (size_t c = 0; c < ch_; ++c) {
        const double inv = 1.0 / std::sqrt(running_var_[c] + eps_);
        for (size_t b = 0; b < x.batch; ++b) {
          const double* in = x.row(b, c);
          double* out = y.row(b, c);
          for (size_t i = 0; i < x.length; ++i)
            out[i] = gamma_.value[c] * (in[i] - running_mean_[c]) * inv +
                     beta_.value[c];
        }
      }
    }
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    need_cache();
    if (grad_out.batch != xhat_.batch || grad_out.channels != ch_ ||
        grad_out.length != xhat_.length)
      raise(ErrorKind::shape_mismatch, "batchnorm backward shape mismatch");
    const size_t n = grad_out.batch * grad_out.length;
    const double nd = static_cast<double>(n);
    Tensor dx(grad_out.batch, ch_, grad_out.length);
    for (size_t c = 0; c < ch_; ++c) {
      double sum_gy = 0.0;
      double sum_gy_xhat = 0.0;
      for (size_t b = 0; b < grad_out.batch; ++b) {
        const double* gy = grad_out.row(b, c);
        const double* xh = xhat_.row(b, c);
        for (size_t i = 0; i < grad_out.length; ++i) {
          sum_gy += gy[i];
          sum_gy_xhat += gy[i] * xh[i];
        }
      }
      beta_.grad[c] += sum_gy;
      gamma_.grad[c] += sum_gy_xhat;
      const double scale = gamma_.value[c] * invstd_[c] / nd;
      for (size_t b = 0; b < grad_out.batch; ++b) {
        const double* gy = grad_out.row(b, c);
        const double* xh = xhat_.row(b, c);
        double* gx = dx.row(b, c);
        for (size_t i = 0; i < grad_out.length; ++i)
          gx[i] = scale * (nd * gy[i] - sum_gy - xh[i] * sum_gy_xhat);
      }
    }
    return dx;
  }

  std::vector<Param*> params() override { return {&gamma_, &beta_}; }
  std::vector<std::vector<double>*> state() override {
    return {&running_mean_, &running_var_};
  }

  std::string describe() const override {
    return "batchnorm c" + std::to_string(ch_);
  }

private:
  size_t ch_;
  double eps_, momentum_;
  Param gamma_, beta_;
  std::vector<double> running_mean_, running_var_;
  Tensor xhat_;
  std::vector<double> invstd_;
};

class ReLU : public Layer {
public:
  Tensor forward(const Tensor& x, bool train) override {
    Tensor y = x;
    if (train) {
      mask_.resize(x.numel());
      for (size_t i = 0; i < y.data.size(); ++i) {
        const bool on = y.data[i] > 0.0;
        mask_[i] = on;
        if (!on) y.data[i] = 0.0;
      }
      has_cache_ = true;
    } else {
      for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
    }
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    need_cache();
    if (grad_out.numel() != mask_.size())
      raise(ErrorKind::shape_mismatch, "relu backward shape mismatch");
    Tensor dx = grad_out;
    for (size_t i = 0; i < dx.data.size(); ++i)
      if (!mask_[i]) dx.data[i] = 0.0;
    return dx;
  }

  std::string describe() const override { return "relu"; }

private:
  std::vector<unsigned char> mask_;  // pre-activation > 0
};

// Max pooling, size 2 / stride 2, with a trailing singleton window for odd
// lengths (output length = ceil(n/2)). Ties take the earlier index.
class MaxPool2 : public Layer {
public:
  Tensor forward(const Tensor& x, bool train) override {
    if (x.length < 1)
      raise(ErrorKind::shape_mismatch, "maxpool on empty signal");
    const size_t out_len = (x.length + 1) / 2;
    Tensor y(x.batch, x.channels, out_len);
    argmax_.assign(x.batch * x.channels * out_len, 0);
    input_length_ = x.length;
    for (size_t b = 0; b < x.batch; ++b) {
      for (size_t c = 0; c < x.channels; ++c) {
        const double* in = x.row(b, c);
        double* out = y.row(b, c);
        size_t* amax = argmax_.data() + (b * x.channels + c) * out_len;
        for (size_t k = 0; k < out_len; ++k) {
          const size_t i0 = 2 * k;
          const size_t i1 = i0 + 1;
          if (i1 < x.length && in[i1] > in[i0]) {
            out[k] = in[i1];
            amax[k] = i1;
          } else {
            out[k] = in[i0];
            amax[k] = i0;
          }
        }
      }
    }
    if (train) has_cache_ = true;
    batch_ = x.batch;
    channels_ = x.channels;
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    need_cache();
    const size_t out_len = (input_length_ + 1) / 2;
    if (grad_out.batch != batch_ || grad_out.channels != channels_ ||
        grad_out.length != out_len)
      raise(ErrorKind::shape_mismatch, "maxpool backward shape mismatch");
    Tensor dx(batch_, channels_, input_length_);
    for (size_t b = 0; b < batch_; ++b) {
      for (size_t c = 0; c < channels_; ++c) {
        const double* gy = grad_out.row(b, c);
        double* gx = dx.row(b, c);
        const size_t* amax = argmax_.data() + (b * channels_ + c) * out_len;
        for (size_t k = 0; k < out_len; ++k) gx[amax[k]] += gy[k];
      }
    }
    return dx;
  }

  std::string describe() const override { return "maxpool 2/2"; }

private:
  std::vector<size_t> argmax_;
  size_t input_length_ = 0, batch_ = 0, channels_ = 0;
};

// Fully connected layer on flattened features. Weights are stored
// input-major (weight[f * out + o]) so both the forward pass and the weight
// gradient walk contiguous rows.
class Linear : public Layer {
public:
  Linear(size_t in_dim, size_t out_dim) : in_(in_dim), out_(out_dim) {
    weight_.name = "fc.weight";
    weight_.resize(in_ * out_);
    bias_.name = "fc.bias";
    bias_.resize(out_);
  }

  void init(Rng& rng) {
    const double bound =
        std::sqrt(6.0 / (static_cast<double>(in_) + static_cast<double>(out_)));
    for (auto& w : weight_.value) w = rng.uniform(-bound, bound);
    for (auto& b : bias_.value) b = 0.0;
  }

  Tensor forward(const Tensor& x, bool train) override {
    if (x.channels * x.length != in_)
      raise(ErrorKind::shape_mismatch,
            "fc expects " + std::to_string(in_) + " features, got " +
                std::to_string(x.channels * x.length));
    Tensor y(x.batch, 1, out_);
    for (size_t b = 0; b < x.batch; ++b) {
      double* out = y.row(b, 0);
      for (size_t o = 0; o < out_; ++o) out[o] = bias_.value[o];
    }
    // Feature-outer loop: each 8*out_ byte weight row stays cache-hot while
    // it serves every sample in the batch, so the weight matrix streams
    // through memory once per batch instead of once per sample. Samples are
    // handled in pairs to reuse each weight load for two accumulations.
    for (size_t f = 0; f < in_; ++f) {
      const double* wrow = weight_.value.data() + f * out_;
      size_t b = 0;
      for (; b + 2 <= x.batch; b += 2)
        axpy_pair(x.row(b, 0)[f], x.row(b + 1, 0)[f], wrow, y.row(b, 0),
                  y.row(b + 1, 0), out_);
      for (; b < x.batch; ++b) axpy(x.row(b, 0)[f], wrow, y.row(b, 0), out_);
    }
    if (train) {
      cached_input_ = x;
      cached_input_.reshape(x.batch, 1, in_);
      has_cache_ = true;
    }
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    need_cache();
    if (grad_out.batch != cached_input_.batch || grad_out.numel() !=
        grad_out.batch * out_)
      raise(ErrorKind::shape_mismatch, "fc backward shape mismatch");
    Tensor dx(cached_input_.batch, 1, in_);
    for (size_t b = 0; b < grad_out.batch; ++b) {
      const double* gy = grad_out.row(b, 0);
      for (size_t o = 0; o < out_; ++o) bias_.grad[o] += gy[o];
    }
    // Same batch-blocked order as forward: weight (and weight-grad) rows are
    // touched once per batch.
    for (size_t f = 0; f < in_; ++f) {
      const double* wrow = weight_.value.data() + f * out_;
      double* gwrow = weight_.grad.data() + f * out_;
      for (size_t b = 0; b < grad_out.batch; ++b) {
        const double* gy = grad_out.row(b, 0);
        if (!defer_weight_grad_)
          axpy(cached_input_.row(b, 0)[f], gy, gwrow, out_);
        dx.row(b, 0)[f] = dot8(gy, wrow, out_);
      }
    }
    if (defer_weight_grad_) {
      cached_grad_ = grad_out;
      has_grad_cache_ = true;
    }
    return dx;
  }

  // In deferred mode backward() leaves weight_.grad untouched and keeps the
  // upstream gradient instead; fused_weight_adam() then rebuilds each
  // gradient row in a cache-resident scratch buffer and applies Adam on the
  // spot. The full-size gradient matrix never travels through memory, which
  // is the dominant cost of a step at this layer's size. Arithmetic and
  // accumulation order match the accumulate-then-step path exactly, so both
  // paths produce bit-identical weights. Deferred mode supports exactly one
  // backward() per forward(); gradient accumulation across calls needs the
  // default path.
  void set_defer_weight_grad(bool on) { defer_weight_grad_ = on; }

  void fused_weight_adam(double lr, double beta1, double beta2, double eps,
                         double bc1, double bc2, std::vector<double>& m,
                         std::vector<double>& v) {
    need_cache();
    if (!defer_weight_grad_ || !has_grad_cache_)
      raise(ErrorKind::missing_forward_cache,
            "fused adam needs a deferred-mode backward pass");
    if (m.size() != weight_.value.size() || v.size() != weight_.value.size())
      raise(ErrorKind::count_mismatch, "adam state does not match fc weight");
    const size_t batch = cached_grad_.batch;
    scratch_.assign(out_, 0.0);
    for (size_t f = 0; f < in_; ++f) {
      std::fill(scratch_.begin(), scratch_.end(), 0.0);
      for (size_t b = 0; b < batch; ++b)
        axpy(cached_input_.row(b, 0)[f], cached_grad_.row(b, 0),
             scratch_.data(), out_);
      double* wrow = weight_.value.data() + f * out_;
      double* mrow = m.data() + f * out_;
      double* vrow = v.data() + f * out_;
      for (size_t o = 0; o < out_; ++o) {
        const double g = scratch_[o];
        mrow[o] = beta1 * mrow[o] + (1.0 - beta1) * g;
        vrow[o] = beta2 * vrow[o] + (1.0 - beta2) * g * g;
        wrow[o] -= lr * (mrow[o] / bc1) / (std::sqrt(vrow[o] / bc2) + eps);
      }
    }
    has_grad_cache_ = false;
  }

  std::vector<Param*> params() override { return {&weight_, &bias_}; }

  std::string describe() const override {
    return "fc " + std::to_string(in_) + "->" + std::to_string(out_);
  }

private:
  size_t in_, out_;
  Param weight_, bias_;
  Tensor cached_input_, cached_grad_;
  std::vector<double> scratch_;
  bool defer_weight_grad_ = false;
  bool has_grad_cache_ = false;
};

}  // namespace rsdn
