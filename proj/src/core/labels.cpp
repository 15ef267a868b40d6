#include "core/labels.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace ordmtl {

namespace {

void check_rank(int rank, int num_ranks) {
  if (rank < 1 || rank > num_ranks) {
    throw ValidationError("rank " + std::to_string(rank) + " out of range [1, " +
                          std::to_string(num_ranks) + "]");
  }
}

}  // namespace

OrdinalScale OrdinalScale::make(int k) {
  OrdinalScale s;
  s.num_ranks = k;
  s.rank_names.clear();
  for (int r = 1; r <= k; ++r) s.rank_names.push_back(std::to_string(r));
  s.validate();
  return s;
}

void OrdinalScale::validate() const {
  if (num_ranks < 2) {
    throw ValidationError("ordinal scale needs at least 2 ranks, got " +
                          std::to_string(num_ranks));
  }
  if (static_cast<int>(rank_names.size()) != num_ranks) {
    throw ValidationError("rank_names has " + std::to_string(rank_names.size()) +
                          " entries, expected " + std::to_string(num_ranks));
  }
}

ThresholdSet ThresholdSet::full(const OrdinalScale& scale) {
  ThresholdSet ts;
  ts.num_ranks = scale.num_ranks;
  ts.thresholds.clear();
  for (int t = 1; t <= scale.num_ranks - 1; ++t) ts.thresholds.push_back(t);
  ts.validate();
  return ts;
}

void ThresholdSet::validate() const {
  if (thresholds.empty()) throw ValidationError("threshold set is empty");
  int prev = 0;
  for (int t : thresholds) {
    if (t < 1 || t > num_ranks - 1) {
      throw ValidationError("threshold " + std::to_string(t) + " outside [1, " +
                            std::to_string(num_ranks - 1) + "]");
    }
    if (t <= prev) throw ValidationError("thresholds must be strictly increasing");
    prev = t;
  }
}

MultiHotTarget decompose(int rank, const ThresholdSet& tasks) {
  tasks.validate();
  check_rank(rank, tasks.num_ranks);
  MultiHotTarget out;
  out.bits.reserve(tasks.thresholds.size());
  for (int t : tasks.thresholds) out.bits.push_back(rank > t ? 1 : 0);
  return out;
}

int binarize_for_task(int rank, int t, const OrdinalScale& scale) {
  if (t < 1 || t > scale.num_ranks - 1) {
    throw ValidationError("threshold " + std::to_string(t) + " outside [1, " +
                          std::to_string(scale.num_ranks - 1) + "]");
  }
  check_rank(rank, scale.num_ranks);
  return rank > t ? 1 : 0;
}

OneHotTarget one_hot(int rank, const OrdinalScale& scale) {
  scale.validate();
  check_rank(rank, scale.num_ranks);
  OneHotTarget out;
  out.bits.assign(scale.num_ranks, 0);
  out.bits[rank - 1] = 1;
  return out;
}

int rank_from_onehot_scores(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("empty score vector");
  int best = 0;
  for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
    if (!std::isfinite(scores[i])) {
      throw ValidationError("non-finite score at index " + std::to_string(i));
    }
    if (scores[i] > scores[best]) best = i;  // strict: ties stay at the lower rank
  }
  return best + 1;
}

double task_score_from_onehot(std::span<const double> scores, int t) {
  if (scores.empty()) throw ValidationError("empty score vector");
  int k = static_cast<int>(scores.size());
  if (t < 1 || t > k - 1) {
    throw ValidationError("threshold " + std::to_string(t) + " outside [1, " +
                          std::to_string(k - 1) + "]");
  }
  double total = 0.0, above = 0.0;
  for (int i = 0; i < k; ++i) {
    double s = scores[i];
    if (!std::isfinite(s) || s < 0.0) {
      throw ValidationError("scores must be finite and non-negative (index " +
                            std::to_string(i) + ")");
    }
    total += s;
    if (i + 1 > t) above += s;  // index i holds the score of rank i+1
  }
  if (total <= 0.0) throw ValidationError("all-zero score vector");
  return above / total;
}

int rank_from_multihot_scores(std::span<const double> scores, double cutoff) {
  if (scores.empty()) throw ValidationError("empty score vector");
  if (!(cutoff > 0.0 && cutoff < 1.0)) {
    throw ValidationError("cutoff must lie in (0, 1)");
  }
  int count = 0;
  for (double s : scores) {
    if (s >= cutoff) ++count;
  }
  return 1 + count;
}

}  // namespace ordmtl
