#ifndef ORDMTL_CORE_LABELS_HPP
#define ORDMTL_CORE_LABELS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ordmtl {

// Ordinal rating scale with ranks 1..K. Default is the 4-level risk scale
// with the top two levels merged ("1", "2", "3", "4-5").
struct OrdinalScale {
  int num_ranks = 4;
  std::vector<std::string> rank_names = {"1", "2", "3", "4-5"};

  static OrdinalScale make(int k);
  void validate() const;
};

// Strictly increasing task thresholds, each in [1, K-1]. Task t is the binary
// problem "rank <= t vs rank > t".
struct ThresholdSet {
  std::vector<int> thresholds;
  int num_ranks = 4;

  static ThresholdSet full(const OrdinalScale& scale);  // {1, ..., K-1}
  void validate() const;
  int size() const { return static_cast<int>(thresholds.size()); }
};

// Per-task binary target vector; cumulative decomposition yields a prefix of
// 1s followed by 0s.
struct MultiHotTarget {
  std::vector<std::uint8_t> bits;
};

// Exactly one bit set, length K.
struct OneHotTarget {
  std::vector<std::uint8_t> bits;
};

// bit i = 1 iff rank > thresholds[i].
MultiHotTarget decompose(int rank, const ThresholdSet& tasks);

// 1 iff rank > t.
int binarize_for_task(int rank, int t, const OrdinalScale& scale);

OneHotTarget one_hot(int rank, const OrdinalScale& scale);

// argmax + 1; ties toward the lower rank.
int rank_from_onehot_scores(std::span<const double> scores);

// Normalized score mass above threshold t: sum_{r>t} s[r] / sum_r s[r].
double task_score_from_onehot(std::span<const double> scores, int t);

// rank = 1 + count of scores >= cutoff; well-defined for non-monotone scores.
int rank_from_multihot_scores(std::span<const double> scores, double cutoff = 0.5);

}  // namespace ordmtl

#endif
