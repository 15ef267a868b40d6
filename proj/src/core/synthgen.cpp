#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"

namespace ordmtl {

namespace {

// Stream ids for deriving phase seeds from the config seed.
constexpr std::uint64_t kStreamStructure = 1;
constexpr std::uint64_t kStreamLatents = 2;
constexpr std::uint64_t kStreamFeatures = 3;
constexpr std::uint64_t kStreamNoise = 4;

}  // namespace

void GeneratorConfig::validate() const {
  int k = num_ranks();
  if (k < 2) throw ConfigError("need at least 2 class proportions");
  double sum = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0)) throw ConfigError("proportions must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("proportions sum to " + std::to_string(sum) + ", expected 1");
  }
  if (n_samples < 10 * k) {
    throw ConfigError("n_samples must be at least 10*K = " + std::to_string(10 * k));
  }
  if (images_per_patient_min < 1 || images_per_patient_max < images_per_patient_min) {
    throw ConfigError("images_per_patient range is invalid");
  }
  if (feature_mode == FeatureMode::Vector && feature_dim < 1) {
    throw ConfigError("feature_dim must be positive");
  }
  if (feature_mode == FeatureMode::Image && image_side < 1) {
    throw ConfigError("image_side must be positive");
  }
  if (!(patient_latent_sd > 0.0) || !(image_latent_sd > 0.0) || !(feature_noise_sd > 0.0)) {
    throw ConfigError("latent/noise standard deviations must be positive");
  }
  if (!(adjacent_noise_prob >= 0.0 && adjacent_noise_prob < 1.0)) {
    throw ConfigError("adjacent_noise_prob must lie in [0, 1)");
  }
}

std::int64_t Dataset::patient_count() const {
  std::set<std::int64_t> ids;
  for (const Sample& s : samples) ids.insert(s.patient_id);
  return static_cast<std::int64_t>(ids.size());
}

std::vector<std::int64_t> largest_remainder_counts(std::int64_t n,
                                                   const std::vector<double>& proportions) {
  std::size_t k = proportions.size();
  std::vector<std::int64_t> counts(k);
  std::vector<double> remainders(k);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double exact = static_cast<double>(n) * proportions[i];
    counts[i] = static_cast<std::int64_t>(std::floor(exact));
    remainders[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainders[a] > remainders[b];
  });
  for (std::int64_t i = 0; i < n - assigned; ++i) ++counts[order[i % k]];
  return counts;
}

Dataset generate(const GeneratorConfig& config) {
  config.validate();
  const int k = config.num_ranks();
  const std::int64_t n = config.n_samples;

  std::vector<std::int64_t> rank_counts = largest_remainder_counts(n, config.proportions);
  for (int r = 0; r < k; ++r) {
    if (rank_counts[r] == 0) {
      throw ConfigError("class " + std::to_string(r + 1) +
                        " rounds to zero samples; increase n_samples or its proportion");
    }
  }

  // Patients: sizes drawn first so the structure is independent of the
  // latent/feature draws.
  Rng structure_rng(mix_seed(config.seed, kStreamStructure));
  std::vector<std::int64_t> patient_of(n);
  std::int64_t remaining = n;
  std::int64_t pid = 0;
  std::int64_t idx = 0;
  while (remaining > 0) {
    std::int64_t count = structure_rng.uniform_int(config.images_per_patient_min,
                                                   config.images_per_patient_max);
    count = std::min(count, remaining);
    for (std::int64_t j = 0; j < count; ++j) patient_of[idx++] = pid;
    remaining -= count;
    ++pid;
  }

  // Latents: shared patient latent plus per-image offset.
  Rng latent_rng(mix_seed(config.seed, kStreamLatents));
  std::vector<double> latent(n);
  std::int64_t i = 0;
  while (i < n) {
    double z_p = latent_rng.normal(0.0, config.patient_latent_sd);
    std::int64_t p = patient_of[i];
    while (i < n && patient_of[i] == p) {
      latent[i] = z_p + latent_rng.normal(0.0, config.image_latent_sd);
      ++i;
    }
  }

  // Clean ranks: cut the empirical latent distribution at its own quantiles so
  // the class counts hit the rounded targets exactly.
  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return latent[a] < latent[b];
  });
  std::vector<int> clean_rank(n);
  std::int64_t pos = 0;
  for (int r = 0; r < k; ++r) {
    for (std::int64_t j = 0; j < rank_counts[r]; ++j) clean_rank[order[pos++]] = r + 1;
  }

  Dataset ds;
  ds.scale = k == 4 ? OrdinalScale{} : OrdinalScale::make(k);
  ds.mode = config.feature_mode;
  ds.feature_dim =
      config.feature_mode == FeatureMode::Vector ? config.feature_dim : config.image_side;
  ds.samples.resize(n);

  Rng feature_rng(mix_seed(config.seed, kStreamFeatures));
  const int d = config.feature_count();
  if (config.feature_mode == FeatureMode::Vector) {
    // Signal lives in a fixed unit direction over the first ceil(d/4) coords.
    const int m = (config.feature_dim + 3) / 4;
    const double u = 1.0 / std::sqrt(static_cast<double>(m));
    for (std::int64_t s = 0; s < n; ++s) {
      auto& f = ds.samples[s].features;
      f.resize(d);
      for (int j = 0; j < d; ++j) {
        double signal = j < m ? latent[s] * u : 0.0;
        f[j] = signal + feature_rng.normal(0.0, config.feature_noise_sd);
      }
    }
  } else {
    // Centered Gaussian blob, peak amplitude affine in the latent, on a noise
    // background.
    const int side = config.image_side;
    const double center = (side - 1) / 2.0;
    const double sigma = side / 4.0;
    for (std::int64_t s = 0; s < n; ++s) {
      auto& f = ds.samples[s].features;
      f.resize(d);
      double amplitude = 1.0 + latent[s];
      for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
          double dy = y - center, dx = x - center;
          double blob = amplitude * std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
          f[y * side + x] = blob + feature_rng.normal(0.0, config.feature_noise_sd);
        }
      }
    }
  }

  for (std::int64_t s = 0; s < n; ++s) {
    ds.samples[s].sample_id = s;
    ds.samples[s].patient_id = patient_of[s];
    ds.samples[s].rank = clean_rank[s];
    ds.samples[s].clean_rank = clean_rank[s];
  }

  return apply_adjacent_noise(ds, config.adjacent_noise_prob,
                              mix_seed(config.seed, kStreamNoise));
}

Dataset apply_adjacent_noise(const Dataset& dataset, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("noise probability must lie in [0, 1)");
  Dataset out = dataset;
  const int k = dataset.scale.num_ranks;
  Rng rng(seed);
  for (Sample& s : out.samples) {
    if (!rng.bernoulli(p)) continue;
    if (s.rank == 1) {
      s.rank = 2;
    } else if (s.rank == k) {
      s.rank = k - 1;
    } else {
      s.rank += rng.bernoulli(0.5) ? 1 : -1;
    }
  }
  return out;
}

std::vector<double> class_proportions(const Dataset& dataset) {
  if (dataset.samples.empty()) throw ValidationError("empty dataset");
  std::vector<double> props(dataset.scale.num_ranks, 0.0);
  for (const Sample& s : dataset.samples) props[s.rank - 1] += 1.0;
  for (double& p : props) p /= static_cast<double>(dataset.size());
  return props;
}

double signal_projection(const Dataset& dataset, const Sample& sample) {
  if (dataset.mode != FeatureMode::Vector) {
    throw ValidationError("signal projection is defined for vector-mode datasets");
  }
  const int m = (dataset.feature_dim + 3) / 4;
  const double u = 1.0 / std::sqrt(static_cast<double>(m));
  double dot = 0.0;
  for (int j = 0; j < m; ++j) dot += sample.features[j] * u;
  return dot;
}

}  // namespace ordmtl
