#include "core/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "core/errors.hpp"

namespace ordmtl {

namespace {

constexpr double kBatchNormEps = 1e-8;
constexpr double kRunningStatMomentum = 0.9;

struct DataShape {
  bool image = false;
  int h = 0, w = 0, c = 0;  // image
  int units = 0;            // flat
  int count() const { return image ? h * w * c : units; }
};

void check_finite(const Matrix& m, int layer_index, const std::string& kind) {
  for (double v : m.data) {
    if (!std::isfinite(v)) {
      throw NumericError("non-finite activation after layer " + std::to_string(layer_index) +
                         " (" + kind + ")");
    }
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

class LayerBase {
 public:
  virtual ~LayerBase() = default;
  virtual std::string kind() const = 0;
  // frozen: reuse stochastic state (dropout masks) and leave running
  // statistics untouched.
  virtual Matrix train_forward(const Matrix& x, Rng& rng, bool frozen) = 0;
  virtual Matrix infer(const Matrix& x) const = 0;
  virtual Matrix backward(const Matrix& dy) = 0;
  virtual std::vector<ParamTensor*> params() { return {}; }
};

namespace {

class DenseLayer : public LayerBase {
 public:
  DenseLayer(int index, int in_units, int out_units) : in_(in_units), out_(out_units) {
    w_.name = "layer" + std::to_string(index) + ".dense.weight";
    b_.name = "layer" + std::to_string(index) + ".dense.bias";
    w_.value.assign(static_cast<std::size_t>(in_) * out_, 0.0);
    w_.grad.assign(w_.value.size(), 0.0);
    b_.value.assign(out_, 0.0);
    b_.grad.assign(out_, 0.0);
  }

  std::string kind() const override { return "dense"; }

  Matrix train_forward(const Matrix& x, Rng&, bool) override {
    x_cache_ = x;
    return apply(x);
  }

  Matrix infer(const Matrix& x) const override { return apply(x); }

  Matrix backward(const Matrix& dy) override {
    const Matrix& x = x_cache_;
    std::fill(w_.grad.begin(), w_.grad.end(), 0.0);
    for (int n = 0; n < x.rows; ++n) {
      const double* xr = x.row(n);
      const double* dyr = dy.row(n);
      for (int i = 0; i < in_; ++i) {
        double xi = xr[i];
        if (xi == 0.0) continue;
        double* wg = w_.grad.data() + static_cast<std::size_t>(i) * out_;
        for (int o = 0; o < out_; ++o) wg[o] += xi * dyr[o];
      }
    }
    std::fill(b_.grad.begin(), b_.grad.end(), 0.0);
    for (int n = 0; n < dy.rows; ++n) {
      const double* dyr = dy.row(n);
      for (int o = 0; o < out_; ++o) b_.grad[o] += dyr[o];
    }
    Matrix dx(x.rows, in_);
    for (int n = 0; n < x.rows; ++n) {
      const double* dyr = dy.row(n);
      double* dxr = dx.row(n);
      for (int i = 0; i < in_; ++i) {
        const double* wr = w_.value.data() + static_cast<std::size_t>(i) * out_;
        double acc = 0.0;
        for (int o = 0; o < out_; ++o) acc += dyr[o] * wr[o];
        dxr[i] = acc;
      }
    }
    return dx;
  }

  std::vector<ParamTensor*> params() override { return {&w_, &b_}; }

  int fan_in() const { return in_; }
  ParamTensor& weights() { return w_; }

 protected:
  Matrix apply(const Matrix& x) const {
    Matrix y(x.rows, out_);
    for (int n = 0; n < x.rows; ++n) {
      const double* xr = x.row(n);
      double* yr = y.row(n);
      for (int o = 0; o < out_; ++o) yr[o] = b_.value[o];
      for (int i = 0; i < in_; ++i) {
        double xi = xr[i];
        if (xi == 0.0) continue;
        const double* wr = w_.value.data() + static_cast<std::size_t>(i) * out_;
        for (int o = 0; o < out_; ++o) yr[o] += xi * wr[o];
      }
    }
    return y;
  }

  int in_, out_;
  ParamTensor w_, b_;
  Matrix x_cache_;
};

// Dense layer plus sigmoid. Network::backward hands this layer the gradient
// with respect to the LOGITS (the sigmoid/BCE fusion), so backward is the
// plain dense backward.
class SigmoidHeadLayer : public DenseLayer {
 public:
  SigmoidHeadLayer(int index, int in_units, int out_units) : DenseLayer(index, in_units, out_units) {
    w_.name = "head.weight";
    b_.name = "head.bias";
  }

  std::string kind() const override { return "head"; }

  Matrix train_forward(const Matrix& x, Rng&, bool) override {
    x_cache_ = x;
    Matrix y = apply(x);
    for (double& v : y.data) v = sigmoid(v);
    return y;
  }

  Matrix infer(const Matrix& x) const override {
    Matrix y = apply(x);
    for (double& v : y.data) v = sigmoid(v);
    return y;
  }
};

class Conv2DLayer : public LayerBase {
 public:
  Conv2DLayer(int index, int h, int w, int in_c, int filters)
      : height_(h), width_(w), c_(in_c), f_(filters) {
    w_.name = "layer" + std::to_string(index) + ".conv.weight";
    b_.name = "layer" + std::to_string(index) + ".conv.bias";
    // Layout [ky][kx][c][f]; contiguous over filters in the inner loops.
    w_.value.assign(static_cast<std::size_t>(9) * c_ * f_, 0.0);
    w_.grad.assign(w_.value.size(), 0.0);
    b_.value.assign(f_, 0.0);
    b_.grad.assign(f_, 0.0);
  }

  std::string kind() const override { return "conv"; }

  Matrix train_forward(const Matrix& x, Rng&, bool) override {
    x_cache_ = x;
    return apply(x);
  }

  Matrix infer(const Matrix& x) const override { return apply(x); }

  Matrix backward(const Matrix& dy) override {
    const Matrix& x = x_cache_;
    std::fill(w_.grad.begin(), w_.grad.end(), 0.0);
    std::fill(b_.grad.begin(), b_.grad.end(), 0.0);
    Matrix dx(x.rows, x.cols);
    for (int n = 0; n < x.rows; ++n) {
      const double* xr = x.row(n);
      const double* dyr = dy.row(n);
      double* dxr = dx.row(n);
      for (int oy = 0; oy < height_; ++oy) {
        for (int ox = 0; ox < width_; ++ox) {
          const double* dout = dyr + (static_cast<std::size_t>(oy) * width_ + ox) * f_;
          for (int f = 0; f < f_; ++f) b_.grad[f] += dout[f];
          for (int ky = 0; ky < 3; ++ky) {
            int iy = oy + ky - 1;
            if (iy < 0 || iy >= height_) continue;
            for (int kx = 0; kx < 3; ++kx) {
              int ix = ox + kx - 1;
              if (ix < 0 || ix >= width_) continue;
              const double* in_px = xr + (static_cast<std::size_t>(iy) * width_ + ix) * c_;
              double* dx_px = dxr + (static_cast<std::size_t>(iy) * width_ + ix) * c_;
              for (int c = 0; c < c_; ++c) {
                const std::size_t base = ((static_cast<std::size_t>(ky) * 3 + kx) * c_ + c) * f_;
                double* wg = w_.grad.data() + base;
                const double* wv = w_.value.data() + base;
                double in_val = in_px[c];
                double acc = 0.0;
                for (int f = 0; f < f_; ++f) {
                  wg[f] += in_val * dout[f];
                  acc += wv[f] * dout[f];
                }
                dx_px[c] += acc;
              }
            }
          }
        }
      }
    }
    return dx;
  }

  std::vector<ParamTensor*> params() override { return {&w_, &b_}; }

  int fan_in() const { return 9 * c_; }
  ParamTensor& weights() { return w_; }

 private:
  Matrix apply(const Matrix& x) const {
    Matrix y(x.rows, height_ * width_ * f_);
    std::vector<double> acc(f_);
    for (int n = 0; n < x.rows; ++n) {
      const double* xr = x.row(n);
      double* yr = y.row(n);
      for (int oy = 0; oy < height_; ++oy) {
        for (int ox = 0; ox < width_; ++ox) {
          for (int f = 0; f < f_; ++f) acc[f] = b_.value[f];
          for (int ky = 0; ky < 3; ++ky) {
            int iy = oy + ky - 1;
            if (iy < 0 || iy >= height_) continue;
            for (int kx = 0; kx < 3; ++kx) {
              int ix = ox + kx - 1;
              if (ix < 0 || ix >= width_) continue;
              const double* in_px = xr + (static_cast<std::size_t>(iy) * width_ + ix) * c_;
              for (int c = 0; c < c_; ++c) {
                double in_val = in_px[c];
                if (in_val == 0.0) continue;
                const double* wv =
                    w_.value.data() + ((static_cast<std::size_t>(ky) * 3 + kx) * c_ + c) * f_;
                for (int f = 0; f < f_; ++f) acc[f] += in_val * wv[f];
              }
            }
          }
          double* out_px = yr + (static_cast<std::size_t>(oy) * width_ + ox) * f_;
          for (int f = 0; f < f_; ++f) out_px[f] = acc[f];
        }
      }
    }
    return y;
  }

  int height_, width_, c_, f_;
  ParamTensor w_, b_;
  Matrix x_cache_;
};

class MaxPoolLayer : public LayerBase {
 public:
  MaxPoolLayer(int h, int w, int c) : h_(h), w_(w), c_(c), oh_(h / 2), ow_(w / 2) {}

  std::string kind() const override { return "maxpool"; }

  Matrix train_forward(const Matrix& x, Rng&, bool) override {
    in_cols_ = x.cols;
    argmax_.assign(static_cast<std::size_t>(x.rows) * oh_ * ow_ * c_, 0);
    return pool(x, &argmax_);
  }

  Matrix infer(const Matrix& x) const override { return pool(x, nullptr); }

  Matrix backward(const Matrix& dy) override {
    Matrix dx(dy.rows, in_cols_);
    const int out_cols = oh_ * ow_ * c_;
    for (int n = 0; n < dy.rows; ++n) {
      const double* dyr = dy.row(n);
      double* dxr = dx.row(n);
      const int* arg = argmax_.data() + static_cast<std::size_t>(n) * out_cols;
      for (int j = 0; j < out_cols; ++j) dxr[arg[j]] += dyr[j];
    }
    return dx;
  }

 private:
  Matrix pool(const Matrix& x, std::vector<int>* argmax) const {
    Matrix y(x.rows, oh_ * ow_ * c_);
    for (int n = 0; n < x.rows; ++n) {
      const double* xr = x.row(n);
      double* yr = y.row(n);
      int* arg = argmax ? argmax->data() + static_cast<std::size_t>(n) * oh_ * ow_ * c_ : nullptr;
      for (int oy = 0; oy < oh_; ++oy) {
        for (int ox = 0; ox < ow_; ++ox) {
          for (int c = 0; c < c_; ++c) {
            double best = -std::numeric_limits<double>::infinity();
            int best_col = 0;
            for (int dy = 0; dy < 2; ++dy) {
              for (int dx = 0; dx < 2; ++dx) {
                int col = ((2 * oy + dy) * w_ + (2 * ox + dx)) * c_ + c;
                if (xr[col] > best) {
                  best = xr[col];
                  best_col = col;
                }
              }
            }
            int out_col = (oy * ow_ + ox) * c_ + c;
            yr[out_col] = best;
            if (arg) arg[out_col] = best_col;
          }
        }
      }
    }
    return y;
  }

  int h_, w_, c_, oh_, ow_;
  int in_cols_ = 0;
  std::vector<int> argmax_;
};

class DropoutLayer : public LayerBase {
 public:
  explicit DropoutLayer(double rate) : rate_(rate), keep_(1.0 - rate) {}

  std::string kind() const override { return "dropout"; }

  Matrix train_forward(const Matrix& x, Rng& rng, bool frozen) override {
    if (rate_ == 0.0) {
      factors_ = Matrix();
      return x;
    }
    bool reuse = frozen && factors_.rows == x.rows && factors_.cols == x.cols;
    if (!reuse) {
      factors_ = Matrix(x.rows, x.cols);
      double inv_keep = 1.0 / keep_;
      for (double& f : factors_.data) f = rng.uniform() < keep_ ? inv_keep : 0.0;
    }
    Matrix y(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] = x.data[i] * factors_.data[i];
    return y;
  }

  Matrix infer(const Matrix& x) const override { return x; }

  Matrix backward(const Matrix& dy) override {
    if (rate_ == 0.0) return dy;
    Matrix dx(dy.rows, dy.cols);
    for (std::size_t i = 0; i < dy.data.size(); ++i) dx.data[i] = dy.data[i] * factors_.data[i];
    return dx;
  }

 private:
  double rate_, keep_;
  Matrix factors_;  // 0 or 1/keep per element (inverted dropout)
};

class BatchNormLayer : public LayerBase {
 public:
  BatchNormLayer(int index, int channels) : c_(channels) {
    gamma_.name = "layer" + std::to_string(index) + ".batchnorm.gain";
    beta_.name = "layer" + std::to_string(index) + ".batchnorm.shift";
    running_mean_.name = "layer" + std::to_string(index) + ".batchnorm.running_mean";
    running_var_.name = "layer" + std::to_string(index) + ".batchnorm.running_var";
    gamma_.value.assign(c_, 1.0);
    beta_.value.assign(c_, 0.0);
    gamma_.grad.assign(c_, 0.0);
    beta_.grad.assign(c_, 0.0);
    running_mean_.value.assign(c_, 0.0);
    running_var_.value.assign(c_, 1.0);
    running_mean_.trainable = false;
    running_var_.trainable = false;
  }

  std::string kind() const override { return "batchnorm"; }

  Matrix train_forward(const Matrix& x, Rng&, bool frozen) override {
    const std::int64_t n_per_channel = static_cast<std::int64_t>(x.rows) * (x.cols / c_);
    mean_.assign(c_, 0.0);
    var_.assign(c_, 0.0);
    for (int n = 0; n < x.rows; ++n) {
      const double* xr = x.row(n);
      for (int j = 0; j < x.cols; ++j) mean_[j % c_] += xr[j];
    }
    for (double& m : mean_) m /= static_cast<double>(n_per_channel);
    for (int n = 0; n < x.rows; ++n) {
      const double* xr = x.row(n);
      for (int j = 0; j < x.cols; ++j) {
        double d = xr[j] - mean_[j % c_];
        var_[j % c_] += d * d;
      }
    }
    for (double& v : var_) v /= static_cast<double>(n_per_channel);
    inv_std_.resize(c_);
    for (int c = 0; c < c_; ++c) inv_std_[c] = 1.0 / std::sqrt(var_[c] + kBatchNormEps);

    xhat_ = Matrix(x.rows, x.cols);
    Matrix y(x.rows, x.cols);
    for (int n = 0; n < x.rows; ++n) {
      const double* xr = x.row(n);
      double* hr = xhat_.row(n);
      double* yr = y.row(n);
      for (int j = 0; j < x.cols; ++j) {
        int c = j % c_;
        double h = (xr[j] - mean_[c]) * inv_std_[c];
        hr[j] = h;
        yr[j] = gamma_.value[c] * h + beta_.value[c];
      }
    }
    if (!frozen) {
      for (int c = 0; c < c_; ++c) {
        running_mean_.value[c] =
            kRunningStatMomentum * running_mean_.value[c] + (1.0 - kRunningStatMomentum) * mean_[c];
        running_var_.value[c] =
            kRunningStatMomentum * running_var_.value[c] + (1.0 - kRunningStatMomentum) * var_[c];
      }
    }
    return y;
  }

  Matrix infer(const Matrix& x) const override {
    Matrix y(x.rows, x.cols);
    std::vector<double> scale(c_), shift(c_);
    for (int c = 0; c < c_; ++c) {
      scale[c] = gamma_.value[c] / std::sqrt(running_var_.value[c] + kBatchNormEps);
      shift[c] = beta_.value[c] - scale[c] * running_mean_.value[c];
    }
    for (int n = 0; n < x.rows; ++n) {
      const double* xr = x.row(n);
      double* yr = y.row(n);
      for (int j = 0; j < x.cols; ++j) {
        int c = j % c_;
        yr[j] = scale[c] * xr[j] + shift[c];
      }
    }
    return y;
  }

  Matrix backward(const Matrix& dy) override {
    const double n_per_channel = static_cast<double>(dy.rows) * (dy.cols / c_);
    std::vector<double> sum_dy(c_, 0.0), sum_dy_xhat(c_, 0.0);
    for (int n = 0; n < dy.rows; ++n) {
      const double* dyr = dy.row(n);
      const double* hr = xhat_.row(n);
      for (int j = 0; j < dy.cols; ++j) {
        int c = j % c_;
        sum_dy[c] += dyr[j];
        sum_dy_xhat[c] += dyr[j] * hr[j];
      }
    }
    for (int c = 0; c < c_; ++c) {
      beta_.grad[c] = sum_dy[c];
      gamma_.grad[c] = sum_dy_xhat[c];
    }
    Matrix dx(dy.rows, dy.cols);
    for (int n = 0; n < dy.rows; ++n) {
      const double* dyr = dy.row(n);
      const double* hr = xhat_.row(n);
      double* dxr = dx.row(n);
      for (int j = 0; j < dy.cols; ++j) {
        int c = j % c_;
        dxr[j] = gamma_.value[c] * inv_std_[c] *
                 (dyr[j] - sum_dy[c] / n_per_channel - hr[j] * sum_dy_xhat[c] / n_per_channel);
      }
    }
    return dx;
  }

  std::vector<ParamTensor*> params() override {
    return {&gamma_, &beta_, &running_mean_, &running_var_};
  }

 private:
  int c_;
  ParamTensor gamma_, beta_, running_mean_, running_var_;
  std::vector<double> mean_, var_, inv_std_;
  Matrix xhat_;
};

class ReluLayer : public LayerBase {
 public:
  std::string kind() const override { return "relu"; }

  Matrix train_forward(const Matrix& x, Rng&, bool) override {
    x_cache_ = x;
    return apply(x);
  }

  Matrix infer(const Matrix& x) const override { return apply(x); }

  Matrix backward(const Matrix& dy) override {
    Matrix dx(dy.rows, dy.cols);
    for (std::size_t i = 0; i < dy.data.size(); ++i) {
      dx.data[i] = x_cache_.data[i] > 0.0 ? dy.data[i] : 0.0;
    }
    return dx;
  }

 private:
  static Matrix apply(const Matrix& x) {
    Matrix y(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
    return y;
  }

  Matrix x_cache_;
};

class FlattenLayer : public LayerBase {
 public:
  std::string kind() const override { return "flatten"; }
  Matrix train_forward(const Matrix& x, Rng&, bool) override { return x; }
  Matrix infer(const Matrix& x) const override { return x; }
  Matrix backward(const Matrix& dy) override { return dy; }
};

// True when the next activation-bearing position after `index` is a ReLU;
// shape/regularization layers in between are skipped. Decides the fan-in
// variance scheme (2/fan_in before ReLU, 1/fan_in otherwise).
bool followed_by_relu(const std::vector<LayerSpec>& layers, std::size_t index) {
  for (std::size_t j = index + 1; j < layers.size(); ++j) {
    switch (layers[j].kind) {
      case LayerSpec::Kind::ReLU:
        return true;
      case LayerSpec::Kind::Dropout:
      case LayerSpec::Kind::BatchNorm:
      case LayerSpec::Kind::MaxPool2x2:
      case LayerSpec::Kind::Flatten:
        continue;
      default:
        return false;
    }
  }
  return false;
}

void fill_normal(ParamTensor& t, Rng& rng, double sd) {
  for (double& v : t.value) v = rng.normal(0.0, sd);
}

}  // namespace

int NetworkConfig::scaled_width(int nominal) const {
  return std::max(1, static_cast<int>(std::llround(nominal * width_scale)));
}

Network::Network(const NetworkConfig& config, std::uint64_t seed)
    : config_(config), seed_(seed), rng_(mix_seed(seed, 7001)) {
  if (config_.head.num_outputs < 1) throw ConfigError("head needs at least one output");
  if (!(config_.width_scale > 0.0)) throw ConfigError("width_scale must be positive");

  DataShape shape;
  if (config_.input.mode == FeatureMode::Vector) {
    if (config_.input.dim < 1) throw ConfigError("vector input needs a positive dimension");
    shape.units = config_.input.dim;
  } else {
    if (config_.input.dim < 1 || config_.input.channels < 1) {
      throw ConfigError("image input needs positive side and channel counts");
    }
    shape.image = true;
    shape.h = shape.w = config_.input.dim;
    shape.c = config_.input.channels;
  }

  Rng init_rng(mix_seed(seed, 7002));
  for (std::size_t i = 0; i < config_.layers.size(); ++i) {
    const LayerSpec& spec = config_.layers[i];
    const std::string at = "layer index " + std::to_string(i);
    switch (spec.kind) {
      case LayerSpec::Kind::Dense: {
        if (shape.image) {
          throw ConfigError(at + " (dense): input is an image; insert flatten first");
        }
        if (spec.units < 1) throw ConfigError(at + " (dense): units must be positive");
        int out = config_.scaled_width(spec.units);
        auto layer = std::make_unique<DenseLayer>(static_cast<int>(i), shape.units, out);
        double var = (followed_by_relu(config_.layers, i) ? 2.0 : 1.0) / layer->fan_in();
        fill_normal(layer->weights(), init_rng, std::sqrt(var));
        shape.units = out;
        layers_.push_back(std::move(layer));
        break;
      }
      case LayerSpec::Kind::Conv2D: {
        if (!shape.image) throw ConfigError(at + " (conv): input is flat, expected an image");
        if (spec.filters < 1) throw ConfigError(at + " (conv): filters must be positive");
        int f = config_.scaled_width(spec.filters);
        auto layer =
            std::make_unique<Conv2DLayer>(static_cast<int>(i), shape.h, shape.w, shape.c, f);
        double var = (followed_by_relu(config_.layers, i) ? 2.0 : 1.0) / layer->fan_in();
        fill_normal(layer->weights(), init_rng, std::sqrt(var));
        shape.c = f;
        layers_.push_back(std::move(layer));
        break;
      }
      case LayerSpec::Kind::MaxPool2x2: {
        if (!shape.image) throw ConfigError(at + " (maxpool): input is flat, expected an image");
        if (shape.h < 2 || shape.w < 2) {
          throw ConfigError(at + " (maxpool): feature map " + std::to_string(shape.h) + "x" +
                            std::to_string(shape.w) + " is too small to pool");
        }
        layers_.push_back(std::make_unique<MaxPoolLayer>(shape.h, shape.w, shape.c));
        shape.h /= 2;
        shape.w /= 2;
        break;
      }
      case LayerSpec::Kind::Dropout: {
        if (!(spec.rate >= 0.0 && spec.rate < 1.0)) {
          throw ConfigError(at + " (dropout): rate must lie in [0, 1)");
        }
        layers_.push_back(std::make_unique<DropoutLayer>(spec.rate));
        break;
      }
      case LayerSpec::Kind::BatchNorm: {
        int channels = shape.image ? shape.c : shape.units;
        layers_.push_back(std::make_unique<BatchNormLayer>(static_cast<int>(i), channels));
        break;
      }
      case LayerSpec::Kind::ReLU:
        layers_.push_back(std::make_unique<ReluLayer>());
        break;
      case LayerSpec::Kind::Flatten: {
        if (!shape.image) {
          throw ConfigError(at + " (flatten): input is already flat");
        }
        layers_.push_back(std::make_unique<FlattenLayer>());
        shape.units = shape.h * shape.w * shape.c;
        shape.image = false;
        break;
      }
    }
  }
  if (shape.image) {
    throw ConfigError("head requires flat input; append a flatten layer");
  }
  auto head = std::make_unique<SigmoidHeadLayer>(static_cast<int>(config_.layers.size()),
                                                 shape.units, config_.head.num_outputs);
  fill_normal(head->weights(), init_rng, std::sqrt(1.0 / head->fan_in()));
  layers_.push_back(std::move(head));
}

Network::Network(Network&&) noexcept = default;
Network& Network::operator=(Network&&) noexcept = default;
Network::~Network() = default;

namespace {

void check_batch(const Matrix& batch, const NetworkConfig& config) {
  if (batch.cols != config.input.count()) {
    throw ValidationError("batch has " + std::to_string(batch.cols) +
                          " features per sample, network expects " +
                          std::to_string(config.input.count()));
  }
  if (batch.rows < 1) throw ValidationError("empty batch");
}

}  // namespace

Matrix Network::forward_train(const Matrix& batch) {
  check_batch(batch, config_);
  Matrix x = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->train_forward(x, rng_, false);
    check_finite(x, static_cast<int>(i), layers_[i]->kind());
  }
  return x;
}

Matrix Network::forward_frozen(const Matrix& batch) {
  check_batch(batch, config_);
  Matrix x = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->train_forward(x, rng_, true);
    check_finite(x, static_cast<int>(i), layers_[i]->kind());
  }
  return x;
}

Matrix Network::infer(const Matrix& batch) const {
  check_batch(batch, config_);
  Matrix x = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->infer(x);
    check_finite(x, static_cast<int>(i), layers_[i]->kind());
  }
  return x;
}

void Network::backward(const Matrix& dlogits) {
  Matrix g = dlogits;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
}

std::vector<ParamTensor*> Network::parameters() {
  std::vector<ParamTensor*> out;
  for (auto& layer : layers_) {
    for (ParamTensor* t : layer->params()) out.push_back(t);
  }
  return out;
}

std::vector<const ParamTensor*> Network::parameters() const {
  std::vector<const ParamTensor*> out;
  for (ParamTensor* t : const_cast<Network*>(this)->parameters()) out.push_back(t);
  return out;
}

std::int64_t Network::trainable_parameter_count() const {
  std::int64_t count = 0;
  for (const ParamTensor* t : parameters()) {
    if (t->trainable) count += static_cast<std::int64_t>(t->value.size());
  }
  return count;
}

std::string LayerSpec::to_string() const {
  char buf[48];
  switch (kind) {
    case Kind::Dense:
      std::snprintf(buf, sizeof(buf), "dense:%d", units);
      return buf;
    case Kind::Conv2D:
      std::snprintf(buf, sizeof(buf), "conv:%d", filters);
      return buf;
    case Kind::MaxPool2x2:
      return "maxpool";
    case Kind::Dropout:
      std::snprintf(buf, sizeof(buf), "dropout:%.17g", rate);
      return buf;
    case Kind::BatchNorm:
      return "batchnorm";
    case Kind::ReLU:
      return "relu";
    case Kind::Flatten:
      return "flatten";
  }
  return "?";
}

LayerSpec LayerSpec::parse(const std::string& text) {
  auto colon = text.find(':');
  std::string name = text.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto int_arg = [&](const char* what) {
    char* end = nullptr;
    long v = std::strtol(arg.c_str(), &end, 10);
    if (arg.empty() || *end != '\0' || v < 1) {
      throw ConfigError(std::string(what) + " layer needs a positive integer argument, got '" +
                        text + "'");
    }
    return static_cast<int>(v);
  };
  if (name == "dense") return dense(int_arg("dense"));
  if (name == "conv") return conv(int_arg("conv"));
  if (name == "dropout") {
    char* end = nullptr;
    double r = std::strtod(arg.c_str(), &end);
    if (arg.empty() || *end != '\0' || !(r >= 0.0 && r < 1.0)) {
      throw ConfigError("dropout rate must lie in [0, 1), got '" + text + "'");
    }
    return dropout(r);
  }
  if (!arg.empty()) throw ConfigError("layer '" + name + "' takes no argument, got '" + text + "'");
  if (name == "maxpool") return maxpool();
  if (name == "batchnorm") return batchnorm();
  if (name == "relu") return relu();
  if (name == "flatten") return flatten();
  throw ConfigError("unknown layer spec '" + text + "'");
}

std::string InputShape::to_string() const {
  char buf[48];
  if (mode == FeatureMode::Vector) {
    std::snprintf(buf, sizeof(buf), "vector:%d", dim);
  } else {
    std::snprintf(buf, sizeof(buf), "image:%dx%d", dim, channels);
  }
  return buf;
}

InputShape InputShape::parse(const std::string& text) {
  InputShape s;
  int dim = 0, ch = 0;
  if (std::sscanf(text.c_str(), "vector:%d", &dim) == 1 && dim > 0) {
    s.mode = FeatureMode::Vector;
    s.dim = dim;
    return s;
  }
  int matched = std::sscanf(text.c_str(), "image:%dx%d", &dim, &ch);
  if (matched >= 1 && dim > 0) {
    s.mode = FeatureMode::Image;
    s.dim = dim;
    s.channels = matched == 2 ? ch : 1;
    if (s.channels < 1) throw ConfigError("invalid input shape '" + text + "'");
    return s;
  }
  throw ConfigError("invalid input shape '" + text + "'");
}

NetworkConfig reference_image_config(int side, double width_scale, int head_outputs) {
  NetworkConfig cfg;
  cfg.input = {FeatureMode::Image, side, 1};
  cfg.width_scale = width_scale;
  cfg.head.num_outputs = head_outputs;
  using L = LayerSpec;
  cfg.layers = {
      L::conv(80),   L::relu(), L::dropout(0.5),
      L::conv(80),   L::relu(),
      L::conv(80),   L::relu(), L::batchnorm(), L::maxpool(), L::dropout(0.5),
      L::conv(160),  L::relu(),
      L::conv(160),  L::relu(), L::batchnorm(), L::maxpool(), L::dropout(0.5),
      L::conv(320),  L::relu(), L::batchnorm(), L::maxpool(), L::dropout(0.5),
      L::flatten(),
      L::dense(320), L::relu(),
  };
  return cfg;
}

NetworkConfig default_vector_config(int dim, double width_scale, int head_outputs) {
  NetworkConfig cfg;
  cfg.input = {FeatureMode::Vector, dim, 1};
  cfg.width_scale = width_scale;
  cfg.head.num_outputs = head_outputs;
  using L = LayerSpec;
  cfg.layers = {
      L::dense(80),  L::relu(), L::dropout(0.5),
      L::dense(160), L::relu(),
      L::dense(320), L::relu(),
  };
  return cfg;
}

}  // namespace ordmtl
