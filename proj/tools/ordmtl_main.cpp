#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ordmtl/ordmtl.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(ordmtl_status status) {
  switch (status) {
    case ORDMTL_OK:
      return kExitOk;
    case ORDMTL_CONFIG_ERROR:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

int report_failure(ordmtl_status status) {
  std::cerr << "error: " << ordmtl_last_error() << "\n";
  return exit_code_for(status);
}

// Reads a config file into a JSON object string; "" means defaults. Errors
// mirror the library's config classification (exit 2).
bool load_config_text(const std::string& path, std::string* text) {
  if (path.empty()) {
    *text = "{}";
    return true;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config file '" << path << "'\n";
    return false;
  }
  std::ostringstream slurp;
  slurp << in.rdbuf();
  *text = slurp.str();
  return true;
}

bool write_file(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot open '" << path << "' for writing\n";
    return false;
  }
  out << text;
  if (!out) {
    std::cerr << "error: write to '" << path << "' failed\n";
    return false;
  }
  return true;
}

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  bool has_seed = false;
  int threads = 0;
  bool quiet = false;
};

void print_progress(int completed, int total, const char* job, void*) {
  std::fprintf(stderr, "[%d/%d] %s\n", completed, total, job);
}

int cmd_gen(const std::string& config_path, const std::string& out_path) {
  std::string text;
  if (!load_config_text(config_path, &text)) return kExitConfig;
  ordmtl_dataset* dataset = nullptr;
  ordmtl_status status = ordmtl_dataset_generate(text.c_str(), &dataset);
  if (status != ORDMTL_OK) return report_failure(status);
  status = ordmtl_dataset_save(dataset, out_path.c_str());
  if (status != ORDMTL_OK) {
    ordmtl_dataset_free(dataset);
    return report_failure(status);
  }
  int64_t n_samples = 0, n_patients = 0;
  int num_ranks = 0;
  ordmtl_dataset_info(dataset, &n_samples, &n_patients, &num_ranks, nullptr, nullptr);
  std::cout << "wrote " << out_path << ": " << n_samples << " samples, " << n_patients
            << " patients, " << num_ranks << " ranks\n";
  ordmtl_dataset_free(dataset);
  return kExitOk;
}

int cmd_run(const RunOptions& opts) {
  std::string text;
  if (!load_config_text(opts.config_path, &text)) return kExitConfig;

  if (!opts.out_dir.empty() || opts.has_seed) {
    nlohmann::json obj = nlohmann::json::parse(text, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      std::cerr << "error: config is not a JSON object\n";
      return kExitConfig;
    }
    if (!opts.out_dir.empty()) obj["output_dir"] = opts.out_dir;
    if (opts.has_seed) obj["seeds"] = {static_cast<std::uint64_t>(opts.seed)};
    text = obj.dump();
  }

  ordmtl_report* report = nullptr;
  ordmtl_status status = ordmtl_experiment_run(text.c_str(), opts.threads,
                                               opts.quiet ? nullptr : print_progress, nullptr,
                                               &report);
  if (status != ORDMTL_OK) return report_failure(status);

  char* summary = nullptr;
  status = ordmtl_report_summary(report, &summary);
  if (status != ORDMTL_OK) {
    ordmtl_report_free(report);
    return report_failure(status);
  }
  std::cout << summary;
  ordmtl_string_free(summary);
  ordmtl_report_free(report);
  return kExitOk;
}

int cmd_gradcheck(double tolerance, std::uint64_t seed, bool verbose) {
  double worst = 0.0;
  char* text = nullptr;
  ordmtl_status status = ordmtl_gradcheck(seed, &worst, verbose ? &text : nullptr);
  if (status != ORDMTL_OK) return report_failure(status);
  if (text != nullptr) {
    std::cout << text;
    ordmtl_string_free(text);
  }
  std::printf("max relative error %.3e (tolerance %.3e)\n", worst, tolerance);
  if (worst >= tolerance) {
    std::cerr << "error: gradient check tolerance breached\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_plot(const std::string& report_path, const std::string& out_path) {
  ordmtl_report* report = nullptr;
  ordmtl_status status = ordmtl_report_load_json(report_path.c_str(), &report);
  if (status != ORDMTL_OK) return report_failure(status);
  char* svg = nullptr;
  status = ordmtl_report_svg(report, &svg);
  ordmtl_report_free(report);
  if (status != ORDMTL_OK) return report_failure(status);
  bool ok = write_file(out_path, svg);
  ordmtl_string_free(svg);
  if (!ok) return kExitRuntime;
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordinal multi-task classification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ordmtl_version()));

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset file");
  std::string gen_config, gen_out;
  gen->add_option("--config", gen_config, "Generator config JSON (defaults when omitted)");
  gen->add_option("--out", gen_out, "Dataset file to write")->required();

  auto* run = app.add_subcommand("run", "Run the cross-validated classifier comparison");
  RunOptions run_opts;
  run->add_option("--config", run_opts.config_path,
                  "Experiment config JSON (defaults when omitted)");
  run->add_option("--out", run_opts.out_dir, "Directory for report.csv/report.json/chart.svg");
  auto* seed_opt = run->add_option("--seed", run_opts.seed, "Replace the seed list with one seed")
                       ->check(CLI::NonNegativeNumber);
  run->add_option("--threads", run_opts.threads, "Worker threads (0 = hardware)");
  run->add_flag("--quiet", run_opts.quiet, "Suppress progress output");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the backward pass");
  double tolerance = 1e-4;
  std::uint64_t gc_seed = 1;
  bool gc_verbose = false;
  gradcheck->add_option("--tolerance", tolerance, "Failure threshold on the relative error");
  gradcheck->add_option("--seed", gc_seed, "Initialization seed");
  gradcheck->add_flag("--verbose", gc_verbose, "Per-tensor breakdown");

  auto* plot = app.add_subcommand("plot", "Render the bar chart for a report file");
  std::string plot_report, plot_out;
  plot->add_option("--report", plot_report, "Report JSON file")->required();
  plot->add_option("--out", plot_out, "SVG file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (gen->parsed()) return cmd_gen(gen_config, gen_out);
  if (run->parsed()) {
    run_opts.has_seed = seed_opt->count() > 0;
    return cmd_run(run_opts);
  }
  if (gradcheck->parsed()) return cmd_gradcheck(tolerance, gc_seed, gc_verbose);
  if (plot->parsed()) return cmd_plot(plot_report, plot_out);
  return kExitUsage;
}
