#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/harness.hpp"

namespace ordmtl {

namespace {

using nlohmann::json;

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream slurp;
  slurp << in.rdbuf();
  if (in.bad()) throw IoError("read from '" + path + "' failed");
  return slurp.str();
}

}  // namespace

std::string report_csv_text(const ExperimentReport& report) {
  if (report.rows.empty()) throw ValidationError("empty report");
  std::string out = "seed,classifier_type,task_threshold,fold,tnr_at_tpr95,auc,cutoff,"
                    "n_val_pos,n_val_neg\n";
  for (const ReportRow& r : report.rows) {
    out += std::to_string(r.seed);
    out += ',';
    out += classifier_name(r.classifier_type);
    out += ',';
    out += std::to_string(r.task_threshold);
    out += ',';
    out += std::to_string(r.fold);
    out += ',';
    if (r.defined) {
      out += fmt9(r.tnr_at_tpr95);
      out += ',';
      out += fmt9(r.auc);
      out += ',';
      out += fmt9(r.cutoff);
    } else {
      out += "NA,NA,NA";
    }
    out += ',';
    out += std::to_string(r.n_val_pos);
    out += ',';
    out += std::to_string(r.n_val_neg);
    out += '\n';
  }
  return out;
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
  write_text_file(path, report_csv_text(report));
}

std::string report_json_text(const ExperimentReport& report) {
  if (report.rows.empty()) throw ValidationError("empty report");
  json doc;
  doc["rows"] = json::array();
  for (const ReportRow& r : report.rows) {
    json j;
    j["seed"] = r.seed;
    j["classifier_type"] = classifier_name(r.classifier_type);
    j["task_threshold"] = r.task_threshold;
    j["fold"] = r.fold;
    if (r.defined) {
      j["tnr_at_tpr95"] = r.tnr_at_tpr95;
      j["auc"] = r.auc;
      j["cutoff"] = r.cutoff;
    } else {
      j["tnr_at_tpr95"] = nullptr;
      j["auc"] = nullptr;
      j["cutoff"] = nullptr;
    }
    j["n_val_pos"] = r.n_val_pos;
    j["n_val_neg"] = r.n_val_neg;
    doc["rows"].push_back(std::move(j));
  }
  doc["summary"] = json::array();
  for (const SummaryEntry& e : report.summary) {
    json j;
    j["classifier_type"] = classifier_name(e.classifier_type);
    j["task_threshold"] = e.task_threshold;
    j["mean_tnr"] = e.mean_tnr;
    j["n_rows"] = e.n_rows;
    doc["summary"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

void write_report_json(const ExperimentReport& report, const std::string& path) {
  write_text_file(path, report_json_text(report));
}

namespace {

double metric_field(const json& j, const char* key, bool* defined) {
  const json& v = j.at(key);
  if (v.is_null()) {
    *defined = false;
    return 0.0;
  }
  if (!v.is_number()) throw ParseError(std::string("'") + key + "' must be a number or null", 0);
  return v.get<double>();
}

}  // namespace

ExperimentReport report_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  ExperimentReport report;
  try {
    for (const json& j : doc.at("rows")) {
      ReportRow r;
      r.seed = j.at("seed").get<std::uint64_t>();
      r.classifier_type = classifier_from_name(j.at("classifier_type").get<std::string>());
      r.task_threshold = j.at("task_threshold").get<int>();
      r.fold = j.at("fold").get<int>();
      bool defined = true;
      r.tnr_at_tpr95 = metric_field(j, "tnr_at_tpr95", &defined);
      r.auc = metric_field(j, "auc", &defined);
      r.cutoff = metric_field(j, "cutoff", &defined);
      r.defined = defined;
      r.n_val_pos = j.at("n_val_pos").get<std::int64_t>();
      r.n_val_neg = j.at("n_val_neg").get<std::int64_t>();
      report.rows.push_back(r);
    }
    for (const json& j : doc.at("summary")) {
      SummaryEntry e;
      e.classifier_type = classifier_from_name(j.at("classifier_type").get<std::string>());
      e.task_threshold = j.at("task_threshold").get<int>();
      e.mean_tnr = j.at("mean_tnr").get<double>();
      e.n_rows = j.at("n_rows").get<int>();
      report.summary.push_back(e);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what(), 0);
  }
  if (report.rows.empty()) throw ParseError("report holds no rows", 0);
  return report;
}

ExperimentReport report_from_json_file(const std::string& path) {
  return report_from_json_text(read_text_file(path));
}

namespace {

struct BarFamily {
  const char* label;
  const char* color;
};

// Family order and palette mirror the reference figure: yellow single-task,
// blue multi-task, green one-hot.
constexpr BarFamily kFamilies[] = {
    {"single task", "#e8c229"},
    {"multi-task", "#3b6fb6"},
    {"one-hot", "#4caf50"},
};

const SummaryEntry* find_entry(const ExperimentReport& report, ClassifierType type,
                               int threshold) {
  for (const SummaryEntry& e : report.summary) {
    if (e.classifier_type == type && e.task_threshold == threshold) return &e;
  }
  return nullptr;
}

const SummaryEntry* family_entry(const ExperimentReport& report, int family, int threshold) {
  switch (family) {
    case 0: {
      ClassifierType single[] = {ClassifierType::SingleT1, ClassifierType::SingleT2,
                                 ClassifierType::SingleT3};
      if (threshold >= 1 && threshold <= 3) return find_entry(report, single[threshold - 1], threshold);
      return nullptr;
    }
    case 1:
      return find_entry(report, ClassifierType::MultiTask3, threshold);
    default:
      return find_entry(report, ClassifierType::OneHot4, threshold);
  }
}

}  // namespace

std::string render_bar_chart_svg(const ExperimentReport& report) {
  if (report.summary.empty()) throw ValidationError("nothing to plot");

  std::vector<int> tasks;
  for (const SummaryEntry& e : report.summary) {
    if (std::find(tasks.begin(), tasks.end(), e.task_threshold) == tasks.end()) {
      tasks.push_back(e.task_threshold);
    }
  }
  std::sort(tasks.begin(), tasks.end());

  const double width = 720, height = 480;
  const double left = 64, right = 700, top = 56, bottom = 420;
  const double plot_w = right - left, plot_h = bottom - top;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << (left + plot_w / 2)
      << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"17\">"
      << "Mean TNR at TPR &#8805; 0.95</text>\n";

  char buf[64];
  for (int i = 0; i <= 5; ++i) {
    double v = i / 5.0;
    double y = bottom - v * plot_h;
    svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << right << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    svg << "<text x=\"" << (left - 8) << "\" y=\"" << (y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << buf
        << "</text>\n";
  }
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  const double group_w = plot_w / tasks.size();
  const double bar_w = std::min(48.0, group_w / 4.5);
  const double gap = bar_w / 5.0;

  for (std::size_t g = 0; g < tasks.size(); ++g) {
    double group_left = left + g * group_w;
    double center = group_left + group_w / 2;
    double bars_w = 3 * bar_w + 2 * gap;
    for (int family = 0; family < 3; ++family) {
      const SummaryEntry* e = family_entry(report, family, tasks[g]);
      if (e == nullptr) continue;
      double x = center - bars_w / 2 + family * (bar_w + gap);
      double h = std::max(0.0, std::min(1.0, e->mean_tnr)) * plot_h;
      svg << "<rect x=\"" << x << "\" y=\"" << (bottom - h) << "\" width=\"" << bar_w
          << "\" height=\"" << h << "\" fill=\"" << kFamilies[family].color << "\"/>\n";
      std::snprintf(buf, sizeof(buf), "%.3f", e->mean_tnr);
      svg << "<text x=\"" << (x + bar_w / 2) << "\" y=\"" << (bottom - h - 6)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << buf
          << "</text>\n";
    }
    svg << "<text x=\"" << center << "\" y=\"" << (bottom + 22)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">task "
        << tasks[g] << " (rank &gt; " << tasks[g] << ")</text>\n";
  }

  double lx = left + 10, ly = top + 8;
  for (int family = 0; family < 3; ++family) {
    svg << "<rect x=\"" << lx << "\" y=\"" << (ly + family * 20) << "\" width=\"14\" height=\"14\""
        << " fill=\"" << kFamilies[family].color << "\"/>\n";
    svg << "<text x=\"" << (lx + 20) << "\" y=\"" << (ly + family * 20 + 12)
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << kFamilies[family].label
        << "</text>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

void render_bar_chart(const ExperimentReport& report, const std::string& path) {
  write_text_file(path, render_bar_chart_svg(report));
}

std::string summary_text(const ExperimentReport& report) {
  std::ostringstream out;
  char buf[96];
  out << "classifier   task  mean_tnr@tpr  folds*seeds\n";
  for (const SummaryEntry& e : report.summary) {
    std::snprintf(buf, sizeof(buf), "%-12s %4d  %12.4f  %11d\n", classifier_name(e.classifier_type),
                  e.task_threshold, e.mean_tnr, e.n_rows);
    out << buf;
  }
  for (const SummaryEntry& e : report.summary) {
    if (e.classifier_type != ClassifierType::MultiTask3 || e.task_threshold < 2) continue;
    const SummaryEntry* single = family_entry(report, 0, e.task_threshold);
    if (single == nullptr) continue;
    if (single->mean_tnr > 0.0) {
      std::snprintf(buf, sizeof(buf),
                    "task %d multitask/single TNR ratio: %.2f (%.4f vs %.4f)\n", e.task_threshold,
                    e.mean_tnr / single->mean_tnr, e.mean_tnr, single->mean_tnr);
    } else {
      std::snprintf(buf, sizeof(buf),
                    "task %d multitask/single TNR ratio: n/a (%.4f vs 0)\n", e.task_threshold,
                    e.mean_tnr);
    }
    out << buf;
  }
  return out.str();
}

}  // namespace ordmtl
