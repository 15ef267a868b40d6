#include "core/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "core/errors.hpp"
#include "core/metrics.hpp"

namespace ordmtl {

const char* classifier_name(ClassifierType type) {
  switch (type) {
    case ClassifierType::SingleT1:
      return "single_t1";
    case ClassifierType::SingleT2:
      return "single_t2";
    case ClassifierType::SingleT3:
      return "single_t3";
    case ClassifierType::MultiTask3:
      return "multitask3";
    case ClassifierType::OneHot4:
      return "onehot4";
  }
  return "?";
}

ClassifierType classifier_from_name(const std::string& name) {
  for (ClassifierType type : kAllClassifiers) {
    if (name == classifier_name(type)) return type;
  }
  throw ConfigError("unknown classifier '" + name + "'");
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  cfg.network = default_vector_config(cfg.generator.feature_dim);
  cfg.seeds = {1, 2, 3, 4, 5};
  cfg.tasks = ThresholdSet::full(OrdinalScale::make(cfg.generator.num_ranks()));
  return cfg;
}

void ExperimentConfig::validate() const {
  generator.validate();
  training.validate();
  tasks.validate();
  if (tasks.num_ranks != generator.num_ranks()) {
    throw ConfigError("tasks are defined over " + std::to_string(tasks.num_ranks) +
                      " ranks, generator produces " + std::to_string(generator.num_ranks()));
  }
  if (generator.num_ranks() < 4) {
    throw ConfigError("the classifier roster needs at least 4 ranks");
  }
  if (k_folds < 2) throw ConfigError("k_folds must be at least 2");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (!(min_tpr > 0.0 && min_tpr <= 1.0)) throw ConfigError("min_tpr must lie in (0, 1]");
  if (network.input.mode != generator.feature_mode) {
    throw ConfigError("network input mode does not match the generator feature mode");
  }
  int expected = generator.feature_mode == FeatureMode::Vector ? generator.feature_dim
                                                               : generator.image_side;
  if (network.input.dim != expected || network.input.channels != 1) {
    throw ConfigError("network input " + network.input.to_string() + " does not match generator (" +
                      std::to_string(expected) + ")");
  }
  if (!(network.width_scale > 0.0)) throw ConfigError("width_scale must be positive");
}

namespace {

int classifier_index(ClassifierType type) {
  for (int i = 0; i < 5; ++i) {
    if (kAllClassifiers[i] == type) return i;
  }
  return -1;
}

int head_width(ClassifierType type, const ExperimentConfig& config) {
  switch (type) {
    case ClassifierType::SingleT1:
    case ClassifierType::SingleT2:
    case ClassifierType::SingleT3:
      return 1;
    case ClassifierType::MultiTask3:
      return config.tasks.size();
    case ClassifierType::OneHot4:
      return config.generator.num_ranks();
  }
  return 1;
}

int single_task_threshold(ClassifierType type) {
  switch (type) {
    case ClassifierType::SingleT1:
      return 1;
    case ClassifierType::SingleT2:
      return 2;
    case ClassifierType::SingleT3:
      return 3;
    default:
      return 0;
  }
}

Matrix gather_features(const Dataset& ds, const std::vector<std::int64_t>& idx) {
  Matrix x(static_cast<int>(idx.size()), ds.feature_count());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Sample& s = ds.samples[idx[i]];
    std::memcpy(x.row(static_cast<int>(i)), s.features.data(), sizeof(double) * s.features.size());
  }
  return x;
}

Matrix build_targets(const Dataset& ds, const std::vector<std::int64_t>& idx, ClassifierType type,
                     const ExperimentConfig& config) {
  Matrix y(static_cast<int>(idx.size()), head_width(type, config));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    int rank = ds.samples[idx[i]].rank;
    double* row = y.row(static_cast<int>(i));
    switch (type) {
      case ClassifierType::SingleT1:
      case ClassifierType::SingleT2:
      case ClassifierType::SingleT3:
        row[0] = binarize_for_task(rank, single_task_threshold(type), ds.scale);
        break;
      case ClassifierType::MultiTask3: {
        MultiHotTarget t = decompose(rank, config.tasks);
        for (std::size_t j = 0; j < t.bits.size(); ++j) row[j] = t.bits[j];
        break;
      }
      case ClassifierType::OneHot4: {
        OneHotTarget t = one_hot(rank, ds.scale);
        for (std::size_t j = 0; j < t.bits.size(); ++j) row[j] = t.bits[j];
        break;
      }
    }
  }
  return y;
}

// Tasks a trained classifier is scored on: its own for SingleTk, the full
// task set otherwise.
std::vector<int> evaluated_tasks(ClassifierType type, const ExperimentConfig& config) {
  int own = single_task_threshold(type);
  if (own > 0) return {own};
  return config.tasks.thresholds;
}

double task_score(ClassifierType type, const ExperimentConfig& config, const double* outputs,
                  int threshold) {
  switch (type) {
    case ClassifierType::SingleT1:
    case ClassifierType::SingleT2:
    case ClassifierType::SingleT3:
      return outputs[0];
    case ClassifierType::MultiTask3: {
      const std::vector<int>& ts = config.tasks.thresholds;
      auto it = std::find(ts.begin(), ts.end(), threshold);
      return outputs[it - ts.begin()];
    }
    case ClassifierType::OneHot4:
      return task_score_from_onehot(
          std::span<const double>(outputs, config.generator.num_ranks()), threshold);
  }
  return 0.0;
}

struct PerSeed {
  std::uint64_t seed = 0;
  Dataset dataset;
  FoldPlan plan;
  std::vector<SplitIndices> splits;
};

struct Job {
  int seed_idx = 0;
  int classifier_idx = 0;
  int fold = 0;
};

std::vector<ReportRow> run_job(const ExperimentConfig& config, const PerSeed& ps, const Job& job) {
  ClassifierType type = kAllClassifiers[job.classifier_idx];
  const SplitIndices& si = ps.splits[job.fold];

  Matrix x = gather_features(ps.dataset, si.train);
  Matrix y = build_targets(ps.dataset, si.train, type, config);

  std::uint64_t job_seed = mix_seed(mix_seed(mix_seed(ps.seed, config.training.seed),
                                             0x10 + static_cast<std::uint64_t>(job.classifier_idx)),
                                    static_cast<std::uint64_t>(job.fold));
  NetworkConfig ncfg = config.network;
  ncfg.head.num_outputs = head_width(type, config);
  Network net(ncfg, job_seed);
  TrainConfig tcfg = config.training;
  tcfg.seed = job_seed;
  train(net, x, y, tcfg);

  Matrix xv = gather_features(ps.dataset, si.validation);
  Matrix scores = predict(net, xv);

  std::vector<ReportRow> rows;
  for (int threshold : evaluated_tasks(type, config)) {
    ReportRow row;
    row.seed = ps.seed;
    row.classifier_type = type;
    row.task_threshold = threshold;
    row.fold = job.fold;

    std::vector<double> s(scores.rows);
    std::vector<std::uint8_t> labels(scores.rows);
    for (int n = 0; n < scores.rows; ++n) {
      s[n] = task_score(type, config, scores.row(n), threshold);
      labels[n] = static_cast<std::uint8_t>(
          binarize_for_task(ps.dataset.samples[si.validation[n]].rank, threshold,
                            ps.dataset.scale));
      row.n_val_pos += labels[n];
    }
    row.n_val_neg = scores.rows - row.n_val_pos;

    if (row.n_val_pos == 0 || row.n_val_neg == 0) {
      row.defined = false;
    } else {
      RocCurve curve = roc_curve(s, labels);
      OperatingPoint op = tnr_at_tpr(curve, config.min_tpr);
      row.tnr_at_tpr95 = op.tnr;
      row.cutoff = op.cutoff;
      row.auc = auc(curve);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, int n_threads,
                                const ProgressFn& progress) {
  config.validate();

  std::vector<PerSeed> seeds(config.seeds.size());
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    PerSeed& ps = seeds[i];
    ps.seed = config.seeds[i];
    GeneratorConfig g = config.generator;
    g.seed = ps.seed;
    ps.dataset = generate(g);
    ps.plan = make_folds(ps.dataset, config.k_folds, ps.seed);
    for (int f = 0; f < config.k_folds; ++f) {
      ps.splits.push_back(split(ps.dataset, ps.plan, f));
    }
  }

  std::vector<Job> jobs;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    for (int c = 0; c < 5; ++c) {
      for (int f = 0; f < config.k_folds; ++f) {
        jobs.push_back({static_cast<int>(s), c, f});
      }
    }
  }

  std::vector<std::vector<ReportRow>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> completed{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (failure) return;
      }
      try {
        results[j] = run_job(config, seeds[jobs[j].seed_idx], jobs[j]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
      int done = completed.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        RunProgress p;
        p.completed = done;
        p.total = static_cast<int>(jobs.size());
        p.job = "seed=" + std::to_string(seeds[jobs[j].seed_idx].seed) +
                " classifier=" + classifier_name(kAllClassifiers[jobs[j].classifier_idx]) +
                " fold=" + std::to_string(jobs[j].fold);
        progress(p);
      }
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  std::size_t pool = n_threads > 0 ? static_cast<std::size_t>(n_threads) : (hw ? hw : 1);
  pool = std::min(pool, jobs.size());
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentReport report;
  for (const std::vector<ReportRow>& rows : results) {
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.seed != b.seed) return a.seed < b.seed;
    int ca = classifier_index(a.classifier_type), cb = classifier_index(b.classifier_type);
    if (ca != cb) return ca < cb;
    if (a.task_threshold != b.task_threshold) return a.task_threshold < b.task_threshold;
    return a.fold < b.fold;
  });

  for (ClassifierType type : kAllClassifiers) {
    for (int threshold : evaluated_tasks(type, config)) {
      SummaryEntry e;
      e.classifier_type = type;
      e.task_threshold = threshold;
      double sum = 0.0;
      for (const ReportRow& row : report.rows) {
        if (row.classifier_type == type && row.task_threshold == threshold && row.defined) {
          sum += row.tnr_at_tpr95;
          ++e.n_rows;
        }
      }
      if (e.n_rows > 0) {
        e.mean_tnr = sum / e.n_rows;
        report.summary.push_back(e);
      }
    }
  }

  if (!config.output_dir.empty()) {
    std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + config.output_dir + "'");
    write_report_csv(report, (dir / "report.csv").string());
    write_report_json(report, (dir / "report.json").string());
    render_bar_chart(report, (dir / "chart.svg").string());
    for (const PerSeed& ps : seeds) {
      write_text_file((dir / ("foldplan_seed" + std::to_string(ps.seed) + ".csv")).string(),
                      ps.plan.to_csv());
    }
  }
  return report;
}

}  // namespace ordmtl
