#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "core/errors.hpp"
#include "core/nn.hpp"

namespace ordmtl {

namespace {

constexpr double kClipEps = 1e-7;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr int kPredictChunk = 256;

double clip_prob(double p) { return std::min(1.0 - kClipEps, std::max(kClipEps, p)); }

void check_pair(const Matrix& predictions, const Matrix& targets) {
  if (predictions.rows != targets.rows || predictions.cols != targets.cols) {
    throw ValidationError("predictions are " + std::to_string(predictions.rows) + "x" +
                          std::to_string(predictions.cols) + ", targets are " +
                          std::to_string(targets.rows) + "x" + std::to_string(targets.cols));
  }
  if (predictions.rows < 1 || predictions.cols < 1) throw ValidationError("empty loss input");
}

class Optimizer {
 public:
  Optimizer(std::vector<ParamTensor*> params, const TrainConfig& config)
      : params_(std::move(params)), config_(config) {
    state_a_.resize(params_.size());
    state_b_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (!params_[i]->trainable) continue;
      state_a_[i].assign(params_[i]->value.size(), 0.0);
      if (config_.optimizer == TrainConfig::Optimizer::Adam) {
        state_b_[i].assign(params_[i]->value.size(), 0.0);
      }
    }
  }

  void step() {
    ++t_;
    if (config_.optimizer == TrainConfig::Optimizer::Adam) {
      const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t_));
      const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t_));
      for (std::size_t i = 0; i < params_.size(); ++i) {
        ParamTensor* p = params_[i];
        if (!p->trainable) continue;
        std::vector<double>& m = state_a_[i];
        std::vector<double>& v = state_b_[i];
        for (std::size_t j = 0; j < p->value.size(); ++j) {
          double g = p->grad[j];
          m[j] = kAdamBeta1 * m[j] + (1.0 - kAdamBeta1) * g;
          v[j] = kAdamBeta2 * v[j] + (1.0 - kAdamBeta2) * g * g;
          double mhat = m[j] / bc1;
          double vhat = v[j] / bc2;
          p->value[j] -= config_.learning_rate * mhat / (std::sqrt(vhat) + kAdamEps);
        }
      }
    } else {
      for (std::size_t i = 0; i < params_.size(); ++i) {
        ParamTensor* p = params_[i];
        if (!p->trainable) continue;
        std::vector<double>& vel = state_a_[i];
        for (std::size_t j = 0; j < p->value.size(); ++j) {
          vel[j] = config_.momentum * vel[j] - config_.learning_rate * p->grad[j];
          p->value[j] += vel[j];
        }
      }
    }
  }

 private:
  std::vector<ParamTensor*> params_;
  TrainConfig config_;
  std::vector<std::vector<double>> state_a_;  // Adam first moment, or SGD velocity
  std::vector<std::vector<double>> state_b_;  // Adam second moment
  std::int64_t t_ = 0;
};

Matrix gather_rows(const Matrix& src, const std::vector<int>& order, int start, int end) {
  Matrix out(end - start, src.cols);
  for (int i = start; i < end; ++i) {
    std::memcpy(out.row(i - start), src.row(order[i]), sizeof(double) * src.cols);
  }
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive and finite");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
}

BceResult bce_multi_loss(const Matrix& predictions, const Matrix& targets) {
  check_pair(predictions, targets);
  const double denom = static_cast<double>(predictions.rows) * predictions.cols;
  BceResult res;
  res.dloss_dpred = Matrix(predictions.rows, predictions.cols);
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.data.size(); ++i) {
    double y = targets.data[i];
    if (!(y >= 0.0 && y <= 1.0)) throw ValidationError("targets must lie in [0, 1]");
    double p = clip_prob(predictions.data[i]);
    sum -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    res.dloss_dpred.data[i] = (p - y) / (p * (1.0 - p) * denom);
  }
  res.loss = sum / denom;
  return res;
}

double bce_loss_value(const Matrix& predictions, const Matrix& targets) {
  check_pair(predictions, targets);
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.data.size(); ++i) {
    double y = targets.data[i];
    if (!(y >= 0.0 && y <= 1.0)) throw ValidationError("targets must lie in [0, 1]");
    double p = clip_prob(predictions.data[i]);
    sum -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return sum / (static_cast<double>(predictions.rows) * predictions.cols);
}

TrainHistory train(Network& net, const Matrix& x, const Matrix& y, const TrainConfig& config,
                   const Matrix* x_val, const Matrix* y_val) {
  config.validate();
  if (x.rows != y.rows) {
    throw ValidationError("feature batch has " + std::to_string(x.rows) + " rows, targets have " +
                          std::to_string(y.rows));
  }
  if (x.rows < 1) throw ValidationError("empty training set");
  if (y.cols != net.num_outputs()) {
    throw ValidationError("targets have " + std::to_string(y.cols) + " columns, network has " +
                          std::to_string(net.num_outputs()) + " outputs");
  }
  if ((x_val == nullptr) != (y_val == nullptr)) {
    throw ValidationError("validation features and targets must be supplied together");
  }

  Optimizer opt(net.parameters(), config);
  Rng shuffle_rng(mix_seed(config.seed, 8001));
  std::vector<int> order(x.rows);
  std::iota(order.begin(), order.end(), 0);

  TrainHistory history;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    int batches = 0;
    for (int start = 0; start < x.rows; start += config.batch_size) {
      int end = std::min(x.rows, start + config.batch_size);
      Matrix xb = gather_rows(x, order, start, end);
      Matrix yb = gather_rows(y, order, start, end);
      Matrix p = net.forward_train(xb);
      double loss = bce_loss_value(p, yb);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batches));
      }
      // Sigmoid/BCE fused gradient with respect to the logits.
      Matrix dz(p.rows, p.cols);
      const double denom = static_cast<double>(p.rows) * p.cols;
      for (std::size_t i = 0; i < p.data.size(); ++i) {
        dz.data[i] = (p.data[i] - yb.data[i]) / denom;
      }
      net.backward(dz);
      opt.step();
      loss_sum += loss;
      ++batches;
    }
    history.train_loss.push_back(loss_sum / batches);
    if (x_val != nullptr) {
      Matrix pv = predict(net, *x_val);
      history.val_loss.push_back(bce_loss_value(pv, *y_val));
    }
  }
  return history;
}

Matrix predict(const Network& net, const Matrix& x) {
  if (x.rows < 1) throw ValidationError("empty batch");
  Matrix out(x.rows, net.num_outputs());
  for (int start = 0; start < x.rows; start += kPredictChunk) {
    int end = std::min(x.rows, start + kPredictChunk);
    Matrix chunk(end - start, x.cols);
    std::memcpy(chunk.data.data(), x.row(start), sizeof(double) * chunk.data.size());
    Matrix p = net.infer(chunk);
    std::memcpy(out.row(start), p.data.data(), sizeof(double) * p.data.size());
  }
  return out;
}

}  // namespace ordmtl
