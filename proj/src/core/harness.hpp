#ifndef ORDMTL_CORE_HARNESS_HPP
#define ORDMTL_CORE_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/folds.hpp"
#include "core/labels.hpp"
#include "core/nn.hpp"

namespace ordmtl {

// The five compared variants. SingleTk trains one sigmoid output on task k
// alone; MultiTask3 trains one output per threshold task; OneHot4 trains one
// output per rank against one-hot targets.
enum class ClassifierType { SingleT1, SingleT2, SingleT3, MultiTask3, OneHot4 };

constexpr ClassifierType kAllClassifiers[] = {ClassifierType::SingleT1, ClassifierType::SingleT2,
                                              ClassifierType::SingleT3, ClassifierType::MultiTask3,
                                              ClassifierType::OneHot4};

const char* classifier_name(ClassifierType type);  // "single_t1", ..., "onehot4"
ClassifierType classifier_from_name(const std::string& name);

struct ExperimentConfig {
  GeneratorConfig generator;
  NetworkConfig network;  // head width is replaced per classifier
  TrainConfig training;
  int k_folds = 5;
  std::vector<std::uint64_t> seeds;
  ThresholdSet tasks;
  double min_tpr = 0.95;
  std::string output_dir;  // when set, run_experiment writes its artifacts here

  static ExperimentConfig defaults();
  void validate() const;

  // Flat JSON object whose keys mirror the field names; unknown keys are
  // rejected, missing keys keep their defaults.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json_text() const;
};

// Standalone generator config document; same schema as the "generator"
// sub-object of the experiment config.
GeneratorConfig generator_config_from_json_text(const std::string& text);
GeneratorConfig generator_config_from_json_file(const std::string& path);
std::string generator_config_to_json_text(const GeneratorConfig& config);

struct ReportRow {
  std::uint64_t seed = 0;
  ClassifierType classifier_type = ClassifierType::SingleT1;
  int task_threshold = 0;
  int fold = 0;
  bool defined = true;  // false when the validation fold lacked a class
  double tnr_at_tpr95 = 0.0;
  double auc = 0.0;
  double cutoff = 0.0;
  std::int64_t n_val_pos = 0;
  std::int64_t n_val_neg = 0;
};

struct SummaryEntry {
  ClassifierType classifier_type = ClassifierType::SingleT1;
  int task_threshold = 0;
  double mean_tnr = 0.0;
  int n_rows = 0;  // defined rows behind the mean
};

struct ExperimentReport {
  std::vector<ReportRow> rows;        // sorted by (seed, type, task, fold)
  std::vector<SummaryEntry> summary;  // sorted by (type, task); defined rows only
};

struct RunProgress {
  int completed = 0;
  int total = 0;
  std::string job;  // "seed=1 classifier=multitask3 fold=2"
};
using ProgressFn = std::function<void(const RunProgress&)>;

// Trains every classifier on every fold of every seed and scores the three
// threshold tasks on the validation splits. Deterministic per config; jobs run
// on n_threads workers (0 = hardware concurrency). When config.output_dir is
// set, writes report.csv, report.json, chart.svg and one fold-plan CSV per
// seed into it.
ExperimentReport run_experiment(const ExperimentConfig& config, int n_threads = 0,
                                const ProgressFn& progress = nullptr);

std::string report_csv_text(const ExperimentReport& report);
void write_report_csv(const ExperimentReport& report, const std::string& path);
std::string report_json_text(const ExperimentReport& report);
void write_report_json(const ExperimentReport& report, const std::string& path);
ExperimentReport report_from_json_text(const std::string& text);
ExperimentReport report_from_json_file(const std::string& path);

// Grouped bar chart of the summary (one group per task, one bar per
// classifier family), as standalone SVG 1.1 text.
std::string render_bar_chart_svg(const ExperimentReport& report);
void render_bar_chart(const ExperimentReport& report, const std::string& path);

// Console digest: per-task mean TNR table plus the multi-task/single-task
// TNR ratio on every task past the first.
std::string summary_text(const ExperimentReport& report);

}  // namespace ordmtl

#endif
