#include "core/folds.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace ordmtl {

void FoldPlan::validate(const Dataset& dataset) const {
  std::set<std::int64_t> seen;
  for (const Sample& s : dataset.samples) {
    auto it = assignments.find(s.patient_id);
    if (it == assignments.end()) {
      throw ValidationError("patient " + std::to_string(s.patient_id) + " has no fold");
    }
    if (it->second < 0 || it->second >= k) {
      throw ValidationError("fold index out of range for patient " +
                            std::to_string(s.patient_id));
    }
    seen.insert(s.patient_id);
  }
  if (seen.size() != assignments.size()) {
    throw ValidationError("fold plan covers patients absent from the dataset");
  }
}

std::string FoldPlan::to_csv() const {
  std::ostringstream out;
  out << "patient_id,fold\n";
  for (const auto& [patient, fold] : assignments) out << patient << ',' << fold << '\n';
  return out.str();
}

FoldPlan make_folds(const Dataset& dataset, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("fold count must be at least 2");
  if (dataset.samples.empty()) throw ValidationError("empty dataset");
  const int num_ranks = dataset.scale.num_ranks;

  struct PatientInfo {
    std::int64_t id;
    std::int64_t n_samples = 0;
    std::vector<std::int64_t> rank_counts;
  };
  std::map<std::int64_t, PatientInfo> by_patient;
  std::vector<std::int64_t> global_counts(num_ranks, 0);
  for (const Sample& s : dataset.samples) {
    PatientInfo& info = by_patient[s.patient_id];
    if (info.rank_counts.empty()) {
      info.id = s.patient_id;
      info.rank_counts.assign(num_ranks, 0);
    }
    ++info.n_samples;
    ++info.rank_counts[s.rank - 1];
    ++global_counts[s.rank - 1];
  }
  if (static_cast<int>(by_patient.size()) < k) {
    throw ConfigError("only " + std::to_string(by_patient.size()) + " patients for " +
                      std::to_string(k) + " folds");
  }

  std::vector<const PatientInfo*> patients;
  patients.reserve(by_patient.size());
  for (const auto& [id, info] : by_patient) patients.push_back(&info);
  std::sort(patients.begin(), patients.end(), [](const PatientInfo* a, const PatientInfo* b) {
    if (a->n_samples != b->n_samples) return a->n_samples > b->n_samples;
    return a->id < b->id;
  });

  std::vector<double> target(num_ranks);
  for (int r = 0; r < num_ranks; ++r) {
    target[r] = static_cast<double>(global_counts[r]) / static_cast<double>(k);
  }

  int rotation = static_cast<int>(mix_seed(seed, 0) % static_cast<std::uint64_t>(k));
  std::vector<std::vector<std::int64_t>> fold_counts(k, std::vector<std::int64_t>(num_ranks, 0));

  FoldPlan plan;
  plan.k = k;
  for (const PatientInfo* p : patients) {
    int best_fold = -1;
    double best_cost = 0.0;
    for (int i = 0; i < k; ++i) {
      int f = (rotation + i) % k;
      // Change in the total squared deviation (over all folds and ranks) if
      // the patient lands on fold f; untouched folds contribute zero.
      double cost = 0.0;
      for (int r = 0; r < num_ranks; ++r) {
        double before = static_cast<double>(fold_counts[f][r]) - target[r];
        double after = before + static_cast<double>(p->rank_counts[r]);
        cost += after * after - before * before;
      }
      if (best_fold < 0 || cost < best_cost) {
        best_fold = f;
        best_cost = cost;
      }
    }
    plan.assignments[p->id] = best_fold;
    for (int r = 0; r < num_ranks; ++r) fold_counts[best_fold][r] += p->rank_counts[r];
  }
  return plan;
}

SplitIndices split(const Dataset& dataset, const FoldPlan& plan, int fold_index) {
  if (fold_index < 0 || fold_index >= plan.k) {
    throw ValidationError("fold index " + std::to_string(fold_index) + " outside [0, " +
                          std::to_string(plan.k) + ")");
  }
  plan.validate(dataset);
  SplitIndices out;
  for (std::int64_t i = 0; i < dataset.size(); ++i) {
    const Sample& s = dataset.samples[i];
    if (plan.assignments.at(s.patient_id) == fold_index) {
      out.validation.push_back(i);
    } else {
      out.train.push_back(i);
    }
  }
  return out;
}

Dataset subset(const Dataset& dataset, const std::vector<std::int64_t>& indices) {
  Dataset out;
  out.scale = dataset.scale;
  out.mode = dataset.mode;
  out.feature_dim = dataset.feature_dim;
  out.samples.reserve(indices.size());
  for (std::int64_t i : indices) out.samples.push_back(dataset.samples[i]);
  return out;
}

}  // namespace ordmtl
