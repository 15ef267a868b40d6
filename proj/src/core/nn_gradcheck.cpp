#include <cmath>
#include <cstdio>
#include <sstream>

#include "core/errors.hpp"
#include "core/nn.hpp"

namespace ordmtl {

namespace {

constexpr std::int64_t kMaxCheckedParams = 5000;

double loss_at(Network& net, const Matrix& x, const Matrix& y) {
  Matrix p = net.forward_frozen(x);
  return bce_loss_value(p, y);
}

}  // namespace

std::string GradCheckReport::to_text() const {
  std::ostringstream out;
  char buf[64];
  for (const GradCheckEntry& e : tensors) {
    std::snprintf(buf, sizeof(buf), "%.3e", e.max_rel_error);
    out << e.tensor << "  max_rel_error=" << buf << "\n";
  }
  std::snprintf(buf, sizeof(buf), "%.3e", max_rel_error);
  out << "overall  max_rel_error=" << buf << "\n";
  return out.str();
}

GradCheckReport grad_check(const NetworkConfig& config, std::uint64_t seed, double relative_step,
                           int batch_size) {
  if (!(relative_step > 0.0)) throw ConfigError("relative_step must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  Network net(config, seed);
  if (net.trainable_parameter_count() > kMaxCheckedParams) {
    throw ConfigError("gradient check is limited to " + std::to_string(kMaxCheckedParams) +
                      " trainable parameters, this network has " +
                      std::to_string(net.trainable_parameter_count()));
  }

  Rng rng(mix_seed(seed, 9101));
  Matrix x(batch_size, config.input.count());
  for (double& v : x.data) v = rng.normal(0.0, 1.0);
  Matrix y(batch_size, config.head.num_outputs);
  for (double& v : y.data) v = rng.bernoulli(0.5) ? 1.0 : 0.0;

  // First frozen pass samples the dropout masks that every later evaluation
  // reuses, so the loss is a deterministic function of the parameters.
  Matrix p = net.forward_frozen(x);
  const double denom = static_cast<double>(p.rows) * p.cols;
  Matrix dz(p.rows, p.cols);
  for (std::size_t i = 0; i < p.data.size(); ++i) dz.data[i] = (p.data[i] - y.data[i]) / denom;
  net.backward(dz);

  GradCheckReport report;
  for (ParamTensor* t : net.parameters()) {
    if (!t->trainable) continue;
    std::vector<double> bp = t->grad;
    double tensor_max = 0.0;
    for (std::size_t j = 0; j < t->value.size(); ++j) {
      double saved = t->value[j];
      double h = relative_step * std::max(std::abs(saved), 1.0);
      t->value[j] = saved + h;
      double up = loss_at(net, x, y);
      t->value[j] = saved - h;
      double down = loss_at(net, x, y);
      t->value[j] = saved;
      double fd = (up - down) / (2.0 * h);
      double rel = std::abs(bp[j] - fd) / std::max({std::abs(bp[j]), std::abs(fd), 1e-8});
      tensor_max = std::max(tensor_max, rel);
    }
    report.tensors.push_back({t->name, tensor_max});
    report.max_rel_error = std::max(report.max_rel_error, tensor_max);
  }
  return report;
}

std::vector<std::pair<std::string, NetworkConfig>> grad_check_suite() {
  using L = LayerSpec;
  std::vector<std::pair<std::string, NetworkConfig>> suite;

  {
    NetworkConfig cfg;
    cfg.input = {FeatureMode::Vector, 6, 1};
    cfg.head.num_outputs = 2;
    suite.emplace_back("head_only", cfg);
  }
  {
    NetworkConfig cfg;
    cfg.input = {FeatureMode::Vector, 8, 1};
    cfg.layers = {L::dense(12), L::relu(), L::dense(8), L::relu()};
    cfg.head.num_outputs = 3;
    suite.emplace_back("dense_relu", cfg);
  }
  {
    NetworkConfig cfg;
    cfg.input = {FeatureMode::Vector, 8, 1};
    cfg.layers = {L::dense(16), L::relu(), L::dropout(0.5)};
    cfg.head.num_outputs = 2;
    suite.emplace_back("dense_dropout", cfg);
  }
  {
    NetworkConfig cfg;
    cfg.input = {FeatureMode::Vector, 7, 1};
    cfg.layers = {L::dense(10), L::batchnorm(), L::relu()};
    cfg.head.num_outputs = 2;
    suite.emplace_back("dense_batchnorm", cfg);
  }
  {
    NetworkConfig cfg;
    cfg.input = {FeatureMode::Image, 6, 1};
    cfg.layers = {L::conv(4), L::relu(), L::maxpool(), L::flatten()};
    cfg.head.num_outputs = 2;
    suite.emplace_back("conv_pool", cfg);
  }
  {
    NetworkConfig cfg;
    cfg.input = {FeatureMode::Image, 6, 1};
    cfg.layers = {L::conv(3),       L::relu(),    L::batchnorm(), L::maxpool(),
                  L::dropout(0.25), L::flatten(), L::dense(8),    L::relu()};
    cfg.head.num_outputs = 1;
    suite.emplace_back("conv_batchnorm_dropout", cfg);
  }
  {
    // One block of the reference stack. The full-depth stack is out of reach
    // for central differences in double precision: its deepest conv gradients
    // are small enough that the difference quotient is dominated by rounding
    // of the loss (observed error grows as 1/h), so depth is capped here.
    NetworkConfig cfg;
    cfg.input = {FeatureMode::Image, 6, 1};
    cfg.layers = {L::conv(4),      L::relu(),    L::dropout(0.5), L::conv(4),
                  L::relu(),       L::batchnorm(), L::maxpool(),  L::dropout(0.5),
                  L::flatten(),    L::dense(16), L::relu()};
    cfg.head.num_outputs = 3;
    suite.emplace_back("reference_block", cfg);
  }
  return suite;
}

}  // namespace ordmtl
