#include "ordmtl/ordmtl.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <string>

#include "core/errors.hpp"
#include "core/harness.hpp"

using namespace ordmtl;

struct ordmtl_dataset {
  Dataset value;
};

struct ordmtl_report {
  ExperimentReport value;
};

namespace {

thread_local std::string g_last_error;

ordmtl_status fail(ordmtl_status code, const char* message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
ordmtl_status guarded(Fn&& fn) {
  try {
    fn();
    return ORDMTL_OK;
  } catch (const ConfigError& e) {
    return fail(ORDMTL_CONFIG_ERROR, e.what());
  } catch (const ParseError& e) {
    return fail(ORDMTL_PARSE_ERROR, e.what());
  } catch (const IoError& e) {
    return fail(ORDMTL_IO_ERROR, e.what());
  } catch (const NumericError& e) {
    return fail(ORDMTL_NUMERIC_ERROR, e.what());
  } catch (const MetricError& e) {
    return fail(ORDMTL_METRIC_ERROR, e.what());
  } catch (const ValidationError& e) {
    return fail(ORDMTL_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(ORDMTL_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(ORDMTL_INTERNAL_ERROR, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* ordmtl_version(void) { return "0.1.0"; }

const char* ordmtl_last_error(void) { return g_last_error.c_str(); }

void ordmtl_string_free(char* s) { std::free(s); }

ordmtl_status ordmtl_dataset_generate(const char* config_json, ordmtl_dataset** out) {
  if (out == nullptr) return fail(ORDMTL_INVALID_ARGUMENT, "out must not be NULL");
  return guarded([&] {
    std::string text = config_json == nullptr ? "{}" : config_json;
    GeneratorConfig config = generator_config_from_json_text(text);
    auto* handle = new ordmtl_dataset{generate(config)};
    *out = handle;
  });
}

ordmtl_status ordmtl_dataset_load(const char* path, ordmtl_dataset** out) {
  if (path == nullptr || out == nullptr) {
    return fail(ORDMTL_INVALID_ARGUMENT, "path and out must not be NULL");
  }
  return guarded([&] { *out = new ordmtl_dataset{load_dataset(path)}; });
}

ordmtl_status ordmtl_dataset_save(const ordmtl_dataset* dataset, const char* path) {
  if (dataset == nullptr || path == nullptr) {
    return fail(ORDMTL_INVALID_ARGUMENT, "dataset and path must not be NULL");
  }
  return guarded([&] { save_dataset(dataset->value, path); });
}

void ordmtl_dataset_free(ordmtl_dataset* dataset) { delete dataset; }

ordmtl_status ordmtl_dataset_info(const ordmtl_dataset* dataset, int64_t* n_samples,
                                  int64_t* n_patients, int* num_ranks, int* feature_count,
                                  int* is_image) {
  if (dataset == nullptr) return fail(ORDMTL_INVALID_ARGUMENT, "dataset must not be NULL");
  if (n_samples) *n_samples = dataset->value.size();
  if (n_patients) *n_patients = dataset->value.patient_count();
  if (num_ranks) *num_ranks = dataset->value.scale.num_ranks;
  if (feature_count) *feature_count = dataset->value.feature_count();
  if (is_image) *is_image = dataset->value.mode == FeatureMode::Image ? 1 : 0;
  return ORDMTL_OK;
}

ordmtl_status ordmtl_dataset_class_proportions(const ordmtl_dataset* dataset, double* out,
                                               int len) {
  if (dataset == nullptr || out == nullptr) {
    return fail(ORDMTL_INVALID_ARGUMENT, "dataset and out must not be NULL");
  }
  if (len != dataset->value.scale.num_ranks) {
    return fail(ORDMTL_INVALID_ARGUMENT, "len must equal the number of ranks");
  }
  return guarded([&] {
    std::vector<double> props = class_proportions(dataset->value);
    for (int i = 0; i < len; ++i) out[i] = props[i];
  });
}

ordmtl_status ordmtl_experiment_run(const char* config_json, int n_threads,
                                    ordmtl_progress_fn progress, void* user,
                                    ordmtl_report** out) {
  if (out == nullptr) return fail(ORDMTL_INVALID_ARGUMENT, "out must not be NULL");
  return guarded([&] {
    std::string text = config_json == nullptr ? "{}" : config_json;
    ExperimentConfig config = ExperimentConfig::from_json_text(text);
    ProgressFn cb;
    if (progress != nullptr) {
      cb = [progress, user](const RunProgress& p) {
        progress(p.completed, p.total, p.job.c_str(), user);
      };
    }
    *out = new ordmtl_report{run_experiment(config, n_threads, cb)};
  });
}

ordmtl_status ordmtl_report_load_json(const char* path, ordmtl_report** out) {
  if (path == nullptr || out == nullptr) {
    return fail(ORDMTL_INVALID_ARGUMENT, "path and out must not be NULL");
  }
  return guarded([&] { *out = new ordmtl_report{report_from_json_file(path)}; });
}

void ordmtl_report_free(ordmtl_report* report) { delete report; }

ordmtl_status ordmtl_report_csv(const ordmtl_report* report, char** out) {
  if (report == nullptr || out == nullptr) {
    return fail(ORDMTL_INVALID_ARGUMENT, "report and out must not be NULL");
  }
  return guarded([&] { *out = dup_string(report_csv_text(report->value)); });
}

ordmtl_status ordmtl_report_json(const ordmtl_report* report, char** out) {
  if (report == nullptr || out == nullptr) {
    return fail(ORDMTL_INVALID_ARGUMENT, "report and out must not be NULL");
  }
  return guarded([&] { *out = dup_string(report_json_text(report->value)); });
}

ordmtl_status ordmtl_report_svg(const ordmtl_report* report, char** out) {
  if (report == nullptr || out == nullptr) {
    return fail(ORDMTL_INVALID_ARGUMENT, "report and out must not be NULL");
  }
  return guarded([&] { *out = dup_string(render_bar_chart_svg(report->value)); });
}

ordmtl_status ordmtl_report_summary(const ordmtl_report* report, char** out) {
  if (report == nullptr || out == nullptr) {
    return fail(ORDMTL_INVALID_ARGUMENT, "report and out must not be NULL");
  }
  return guarded([&] { *out = dup_string(summary_text(report->value)); });
}

ordmtl_status ordmtl_gradcheck(uint64_t seed, double* max_rel_error, char** report_text) {
  if (max_rel_error == nullptr) {
    return fail(ORDMTL_INVALID_ARGUMENT, "max_rel_error must not be NULL");
  }
  return guarded([&] {
    double worst = 0.0;
    std::string text;
    for (const auto& [name, config] : grad_check_suite()) {
      GradCheckReport report = grad_check(config, seed);
      worst = std::max(worst, report.max_rel_error);
      text += name + ":\n" + report.to_text();
    }
    *max_rel_error = worst;
    if (report_text != nullptr) *report_text = dup_string(text);
  });
}

}  // extern "C"
