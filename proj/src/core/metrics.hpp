#ifndef ORDMTL_CORE_METRICS_HPP
#define ORDMTL_CORE_METRICS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace ordmtl {

struct RocPoint {
  double cutoff;
  double tpr;
  double tnr;
};

// One point per distinct score value, sorted by descending cutoff. A sample is
// predicted positive iff score >= cutoff, so the last point (cutoff = min
// score) is the accept-all point with tpr 1, tnr 0.
struct RocCurve {
  std::vector<RocPoint> points;
  std::int64_t n_pos = 0;
  std::int64_t n_neg = 0;
};

struct OperatingPoint {
  double cutoff;
  double tpr;
  double tnr;
};

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Among points with tpr >= min_tpr, the one with maximum tnr (ties -> highest
// cutoff). The accept-all point always qualifies.
OperatingPoint tnr_at_tpr(const RocCurve& curve, double min_tpr = 0.95);

// Trapezoidal area over (fpr, tpr) including the (0,0) and (1,1) endpoints.
double auc(const RocCurve& curve);

double mean_operating_tnr(std::span<const OperatingPoint> points);

}  // namespace ordmtl

#endif
