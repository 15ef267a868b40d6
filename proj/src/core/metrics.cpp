#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace ordmtl {

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("scores and labels differ in length");
  }
  if (scores.empty()) throw ValidationError("empty score vector");

  RocCurve curve;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw ValidationError("non-finite score at index " + std::to_string(i));
    }
    if (labels[i]) ++curve.n_pos; else ++curve.n_neg;
  }
  if (curve.n_pos == 0 || curve.n_neg == 0) {
    throw MetricError("ROC undefined without both classes");
  }

  // Sort (score, label) descending; sweep accumulates counts above each cutoff.
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    double cutoff = scores[order[i]];
    // Consume the whole tie group: all samples with this score are accepted at
    // this cutoff (prediction rule is score >= cutoff).
    while (i < order.size() && scores[order[i]] == cutoff) {
      if (labels[order[i]]) ++tp; else ++fp;
      ++i;
    }
    RocPoint p;
    p.cutoff = cutoff;
    p.tpr = static_cast<double>(tp) / static_cast<double>(curve.n_pos);
    p.tnr = static_cast<double>(curve.n_neg - fp) / static_cast<double>(curve.n_neg);
    curve.points.push_back(p);
  }
  return curve;
}

OperatingPoint tnr_at_tpr(const RocCurve& curve, double min_tpr) {
  if (curve.points.empty()) throw ValidationError("empty ROC curve");
  if (!(min_tpr > 0.0 && min_tpr <= 1.0)) {
    throw ValidationError("min_tpr must lie in (0, 1]");
  }
  const RocPoint* best = nullptr;
  for (const RocPoint& p : curve.points) {
    if (p.tpr < min_tpr) continue;
    if (best == nullptr || p.tnr > best->tnr ||
        (p.tnr == best->tnr && p.cutoff > best->cutoff)) {
      best = &p;
    }
  }
  // The accept-all point has tpr 1, so a qualifier always exists.
  return OperatingPoint{best->cutoff, best->tpr, best->tnr};
}

double auc(const RocCurve& curve) {
  if (curve.points.empty()) throw ValidationError("empty ROC curve");
  double area = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;  // conceptual reject-all endpoint
  for (const RocPoint& p : curve.points) {
    double fpr = 1.0 - p.tnr;
    area += (fpr - prev_fpr) * (p.tpr + prev_tpr) / 2.0;
    prev_fpr = fpr;
    prev_tpr = p.tpr;
  }
  // Last stored point is accept-all: (fpr 1, tpr 1), so the (1,1) endpoint is
  // already included.
  return area;
}

double mean_operating_tnr(std::span<const OperatingPoint> points) {
  if (points.empty()) throw ValidationError("empty operating-point list");
  double sum = 0.0;
  for (const OperatingPoint& p : points) sum += p.tnr;
  return sum / static_cast<double>(points.size());
}

}  // namespace ordmtl
