#ifndef ORDMTL_CORE_DATASET_HPP
#define ORDMTL_CORE_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "core/labels.hpp"

namespace ordmtl {

enum class FeatureMode { Vector, Image };

// Synthetic-generator parameters. Defaults reproduce the reference class
// counts (2700, 1113, 359, 732 of 4904) exactly.
struct GeneratorConfig {
  std::int64_t n_samples = 4904;
  std::vector<double> proportions = {2700.0 / 4904.0, 1113.0 / 4904.0,
                                     359.0 / 4904.0, 732.0 / 4904.0};
  int images_per_patient_min = 1;
  int images_per_patient_max = 4;
  FeatureMode feature_mode = FeatureMode::Vector;
  int feature_dim = 32;   // vector mode
  int image_side = 16;    // image mode
  double patient_latent_sd = 1.0;
  double image_latent_sd = 0.25;
  double feature_noise_sd = 1.0;
  double adjacent_noise_prob = 0.15;
  std::uint64_t seed = 0;

  int num_ranks() const { return static_cast<int>(proportions.size()); }
  // Per-sample feature count.
  int feature_count() const {
    return feature_mode == FeatureMode::Vector ? feature_dim : image_side * image_side;
  }
  void validate() const;
};

struct Sample {
  std::int64_t sample_id = 0;
  std::int64_t patient_id = 0;
  std::vector<double> features;
  int rank = 1;        // post-noise label, what training sees
  int clean_rank = 1;  // pre-noise label, diagnostics only
};

struct Dataset {
  OrdinalScale scale;
  FeatureMode mode = FeatureMode::Vector;
  int feature_dim = 0;  // vector length, or image side in image mode
  std::vector<Sample> samples;

  std::int64_t size() const { return static_cast<std::int64_t>(samples.size()); }
  int feature_count() const {
    return mode == FeatureMode::Vector ? feature_dim : feature_dim * feature_dim;
  }
  std::int64_t patient_count() const;
};

// Deterministic per config; clean-rank counts equal largest-remainder rounding
// of n * proportions exactly.
Dataset generate(const GeneratorConfig& config);

// Independently per sample, with probability p move the label to a uniformly
// chosen adjacent rank (boundary ranks have a single neighbor). clean_rank is
// preserved.
Dataset apply_adjacent_noise(const Dataset& dataset, double p, std::uint64_t seed);

// Per-rank counts divided by n (post-noise labels).
std::vector<double> class_proportions(const Dataset& dataset);

// Largest-remainder rounding of n * proportions; exposed for tests.
std::vector<std::int64_t> largest_remainder_counts(std::int64_t n,
                                                   const std::vector<double>& proportions);

// Projection of a sample's features onto the signal direction used by the
// vector-mode generator (diagnostics).
double signal_projection(const Dataset& dataset, const Sample& sample);

void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace ordmtl

#endif
