#pragma once

#include "agitrack/learners.hpp"

namespace agitrack {

// Stratified fold assignment: positives and negatives are shuffled
// independently (seeded) and dealt round-robin, so per-fold class counts
// differ by at most one.
struct FoldPlan {
  int k = 0;
  std::vector<int> assignment;  // fold index per sample
  std::uint64_t seed = 0;

  std::vector<std::size_t> fold_indices(int fold) const;
  std::vector<std::size_t> complement_indices(int fold) const;
};

FoldPlan stratified_folds(const std::vector<int>& labels, int k, std::uint64_t seed);

// Rank-statistic AUC: P(score+ > score-) + 0.5 * P(tie). Both classes must
// be present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Monotone staircase from (0,0) to (1,1) with one point per distinct score;
// its trapezoidal area equals roc_auc.
std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels);
double roc_curve_area(const std::vector<RocPoint>& curve);

struct CvResult {
  std::vector<double> concatenated_scores;  // one per sample, from its held-out fold
  std::vector<int> labels;
  double auc = 0.0;
  FoldPlan outer_plan;
  std::vector<GridCell> fold_choices;
  std::vector<CostMatrix> fold_costs;
  // train-fold standardization statistics (empty for RF), kept so leak checks
  // can recompute and compare
  std::vector<std::vector<double>> fold_feature_means;
  std::vector<std::vector<double>> fold_feature_stds;
  std::vector<std::string> fold_notes;
};

// Nested stratified cross-validation: an inner k_inner-fold grid search on
// each outer-training split picks the cell with the best mean inner AUC (ties
// keep the first cell in declared order); the model is refit on the full
// outer-training split with a cost matrix computed from that split only, and
// held-out scores are concatenated into one vector scored by roc_auc.
CvResult nested_cv(const Matrix& X, const std::vector<int>& y, const LearnerSpec& spec,
                   int k_outer, int k_inner, std::uint64_t seed, int workers = 1);

struct ShiftKeyRef {
  std::string participant_id;
  std::string date;
  std::string kind;
};

void write_cv_result(const CvResult& result, const LearnerSpec& spec,
                     const std::vector<ShiftKeyRef>& keys, const std::filesystem::path& path,
                     bool with_timestamp);

}  // namespace agitrack
