#ifndef ORDMTL_CORE_NN_HPP
#define ORDMTL_CORE_NN_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core/dataset.hpp"
#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace ordmtl {

// Layer vocabulary of the reference architecture. Dense/Conv widths are
// nominal and get multiplied by NetworkConfig::width_scale at build time.
struct LayerSpec {
  enum class Kind { Dense, Conv2D, MaxPool2x2, Dropout, BatchNorm, ReLU, Flatten };
  Kind kind = Kind::Dense;
  int units = 0;     // Dense
  int filters = 0;   // Conv2D (3x3 kernel, same padding, stride 1)
  double rate = 0.0; // Dropout

  static LayerSpec dense(int units) { return {Kind::Dense, units, 0, 0.0}; }
  static LayerSpec conv(int filters) { return {Kind::Conv2D, 0, filters, 0.0}; }
  static LayerSpec maxpool() { return {Kind::MaxPool2x2, 0, 0, 0.0}; }
  static LayerSpec dropout(double rate) { return {Kind::Dropout, 0, 0, rate}; }
  static LayerSpec batchnorm() { return {Kind::BatchNorm, 0, 0, 0.0}; }
  static LayerSpec relu() { return {Kind::ReLU, 0, 0, 0.0}; }
  static LayerSpec flatten() { return {Kind::Flatten, 0, 0, 0.0}; }

  std::string to_string() const;            // "dense:320", "dropout:0.5", ...
  static LayerSpec parse(const std::string& text);
};

struct InputShape {
  FeatureMode mode = FeatureMode::Vector;
  int dim = 32;      // vector length, or image side
  int channels = 1;  // image mode

  int count() const { return mode == FeatureMode::Vector ? dim : dim * dim * channels; }
  std::string to_string() const;            // "vector:32" or "image:16x1"
  static InputShape parse(const std::string& text);
};

struct HeadSpec {
  int num_outputs = 1;  // sigmoid activation
};

struct NetworkConfig {
  InputShape input;
  std::vector<LayerSpec> layers;
  HeadSpec head;
  double width_scale = 1.0;

  int scaled_width(int nominal) const;
};

// The published conv stack: three conv blocks (80/160/320 nominal filters)
// with dropout, batch norm and 2x2 pooling, then a 320-unit dense layer and
// the sigmoid head. ReLU follows every conv/dense.
NetworkConfig reference_image_config(int side, double width_scale = 0.1, int head_outputs = 1);

// Dense-only stack for vector-mode features, mirroring the 80/160/320 width
// progression.
NetworkConfig default_vector_config(int dim, double width_scale = 0.1, int head_outputs = 1);

struct TrainConfig {
  enum class Optimizer { SGD, Adam };
  int epochs = 30;
  int batch_size = 32;
  Optimizer optimizer = Optimizer::Adam;
  double learning_rate = 1e-3;
  double momentum = 0.0;  // SGD only; Adam uses the standard 0.9/0.999/1e-8
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;  // empty when no validation set is supplied
};

class LayerBase;

// Feed-forward network built from a NetworkConfig. Single-writer: training
// mutates parameters and layer caches exclusively; `infer` is const and safe
// to call concurrently on a network nobody is training.
class Network {
 public:
  Network(const NetworkConfig& config, std::uint64_t seed);
  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;
  ~Network();

  // Train-mode forward: dropout samples fresh masks, batch norm uses batch
  // statistics and updates running statistics.
  Matrix forward_train(const Matrix& batch);
  // Train-mode forward with frozen stochasticity: dropout reuses its cached
  // masks (sampling them on first use), running statistics are not touched.
  Matrix forward_frozen(const Matrix& batch);
  // Eval-mode forward; no state is read through non-const paths.
  Matrix infer(const Matrix& batch) const;

  // Backward from d(loss)/d(logits) of the head; fills parameter gradients.
  void backward(const Matrix& dlogits);

  std::vector<struct ParamTensor*> parameters();
  std::vector<const struct ParamTensor*> parameters() const;
  std::int64_t trainable_parameter_count() const;

  const NetworkConfig& config() const { return config_; }
  int num_outputs() const { return config_.head.num_outputs; }
  std::uint64_t seed() const { return seed_; }

  void save(const std::string& path) const;
  static Network load(const std::string& path);

 private:
  NetworkConfig config_;
  std::uint64_t seed_;
  std::vector<std::unique_ptr<LayerBase>> layers_;  // includes the head (last)
  Rng rng_;
};

struct ParamTensor {
  std::string name;
  std::vector<double> value;
  std::vector<double> grad;
  bool trainable = true;
};

struct BceResult {
  double loss;
  Matrix dloss_dpred;
};

// Mean over batch and outputs of binary cross-entropy on predictions clipped
// to [1e-7, 1 - 1e-7]; gradient is taken at the clipped values.
BceResult bce_multi_loss(const Matrix& predictions, const Matrix& targets);
double bce_loss_value(const Matrix& predictions, const Matrix& targets);

TrainHistory train(Network& net, const Matrix& x, const Matrix& y, const TrainConfig& config,
                   const Matrix* x_val = nullptr, const Matrix* y_val = nullptr);

// Eval-mode scores, processed in fixed-size chunks.
Matrix predict(const Network& net, const Matrix& x);

struct GradCheckEntry {
  std::string tensor;
  double max_rel_error;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> tensors;
  double max_rel_error = 0.0;
  std::string to_text() const;
};

// Central-difference verification of the backward pass on a small network
// (at most 5000 trainable parameters). Dropout masks are frozen, batch norm
// runs on batch statistics.
GradCheckReport grad_check(const NetworkConfig& config, std::uint64_t seed,
                           double relative_step = 1e-5, int batch_size = 4);

// Networks covering every layer kind, used by the gradcheck CLI and tests.
std::vector<std::pair<std::string, NetworkConfig>> grad_check_suite();

}  // namespace ordmtl

#endif
