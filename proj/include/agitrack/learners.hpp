#pragma once

#include <variant>

#include "agitrack/features.hpp"

namespace agitrack {

// Off-diagonal misclassification penalties; diagonal fixed at zero. Without
// cost weighting both penalties are 1.
struct CostMatrix {
  double c_fn = 1.0;  // predicting 0 when truth is 1
  double c_fp = 1.0;  // predicting 1 when truth is 0
};

// w = positives/total; c_fn = 1/w, c_fp = 1/(1-w). Single-class labels are an
// error (w would be 0 or 1).
CostMatrix compute_cost_matrix(const std::vector<int>& labels);

enum class LearnerKind { LR, RF, SVM };
std::string_view learner_name(LearnerKind k);
LearnerKind learner_from_name(std::string_view name);

// One grid cell. LR uses p1 = lambda; RF p1 = trees, p2 = predictors per
// split; SVM p1 = box constraint, p2 = kernel scale.
struct GridCell {
  double p1 = 0.0;
  double p2 = 0.0;
};
std::string grid_cell_to_string(LearnerKind kind, const GridCell& cell);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::LR;
  bool cost_enabled = false;
  std::vector<GridCell> grid;  // declared order; grid-search ties keep the first

  // Default hyperparameter grids; the RF predictor grid is
  // [f/5, 2f/5, 3f/5, 4f/5] floored, clamped to at least 1.
  static LearnerSpec make(LearnerKind kind, bool cost_enabled, std::size_t n_features);
};

// Per-feature z-score parameters fitted on training data only.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // train std; zero-variance features use 1

  void fit(const Matrix& X);
  Matrix apply(const Matrix& X) const;
};

struct LrModel {
  std::vector<double> weights;
  double intercept = 0.0;
  Standardizer norm;
  bool converged = true;
  int iterations = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // weighted positive fraction at leaves
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  double predict(const double* x) const;
};

struct RfModel {
  std::vector<DecisionTree> trees;
};

struct SvmModel {
  Matrix support_x;
  std::vector<double> dual_coef;  // alpha_i * y_i
  double bias = 0.0;
  double kernel_scale = 1.0;
  Standardizer norm;
  long pair_updates = 0;
};

struct TrainedModel {
  LearnerKind kind = LearnerKind::LR;
  std::variant<LrModel, RfModel, SvmModel> impl;
};

// Weighted L2-regularized logistic regression, damped Newton. Instance weight
// is c_fn for positives and c_fp for negatives; the intercept is not
// regularized. Stops when the gradient max-norm drops below 1e-8.
TrainedModel train_lr(const Matrix& X, const std::vector<int>& y, double lambda,
                      const CostMatrix& cost);

// Bootstrap forest of CART trees split by weighted Gini over `n_predictors`
// features drawn per split; leaves store the weighted positive fraction.
TrainedModel train_rf(const Matrix& X, const std::vector<int>& y, int n_trees,
                      int n_predictors, const CostMatrix& cost, std::uint64_t seed);

// RBF-kernel soft-margin SVM solved by sequential pairwise optimization with
// per-class boxes C_pos = box_c*c_fn, C_neg = box_c*c_fp, KKT tolerance 1e-3.
TrainedModel train_svm(const Matrix& X, const std::vector<int>& y, double box_c,
                       double kernel_scale, const CostMatrix& cost);

TrainedModel train(const LearnerSpec& spec, const GridCell& cell, const Matrix& X,
                   const std::vector<int>& y, const CostMatrix& cost, std::uint64_t seed);

// One finite score per row, higher = more agitation-like. LR scores are
// probabilities, RF scores weighted leaf means, SVM scores raw margins.
std::vector<double> predict_scores(const TrainedModel& model, const Matrix& X);

// Objective and analytic gradient of the LR training loss at (w, b) on
// already-standardized data; used by the finite-difference checks.
double lr_objective(const Matrix& X, const std::vector<int>& y,
                    const std::vector<double>& w, double b, double lambda,
                    const CostMatrix& cost, std::vector<double>* grad_w = nullptr,
                    double* grad_b = nullptr);

// Training entry with explicit start point; exposed for convexity checks.
LrModel fit_lr(const Matrix& X_raw, const std::vector<int>& y, double lambda,
               const CostMatrix& cost, const std::vector<double>* init_w = nullptr,
               double init_b = 0.0);

std::string model_summary(const TrainedModel& model);

}  // namespace agitrack
