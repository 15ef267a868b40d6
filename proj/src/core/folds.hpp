#ifndef ORDMTL_CORE_FOLDS_HPP
#define ORDMTL_CORE_FOLDS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/dataset.hpp"

namespace ordmtl {

// Patient-to-fold assignment; all of a patient's samples share a fold.
struct FoldPlan {
  int k = 5;
  std::map<std::int64_t, int> assignments;  // patient_id -> fold in [0, k)

  void validate(const Dataset& dataset) const;
  // Audit export: "patient_id,fold" with header, sorted by patient_id.
  std::string to_csv() const;
};

// Greedy balanced assignment: patients in descending sample-count order
// (patient_id breaks ties), each placed on the fold that minimizes the
// resulting total squared deviation, over folds and ranks, of per-rank counts
// from the global counts / k. Equal-cost folds resolve to the first in a
// seed-derived rotation of the fold order.
FoldPlan make_folds(const Dataset& dataset, int k, std::uint64_t seed);

struct SplitIndices {
  std::vector<std::int64_t> train;       // indices into dataset.samples
  std::vector<std::int64_t> validation;
};

// Validation = samples of patients assigned to fold_index; order preserved.
SplitIndices split(const Dataset& dataset, const FoldPlan& plan, int fold_index);

Dataset subset(const Dataset& dataset, const std::vector<std::int64_t>& indices);

}  // namespace ordmtl

#endif
