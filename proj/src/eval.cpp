#include "agitrack/eval.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <numeric>

namespace agitrack {

std::vector<std::size_t> FoldPlan::fold_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::complement_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != fold) out.push_back(i);
  return out;
}

FoldPlan stratified_folds(const std::vector<int>& labels, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("fold count must be at least 2");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("labels must be 0 or 1");
    (labels[i] == 1 ? pos : neg).push_back(i);
  }
  if (pos.size() < static_cast<std::size_t>(k) || neg.size() < static_cast<std::size_t>(k))
    throw ValidationError("each class needs at least k=" + std::to_string(k) +
                          " members (got " + std::to_string(pos.size()) + " positive, " +
                          std::to_string(neg.size()) + " negative)");

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.assign(labels.size(), 0);
  Rng pos_rng(child_seed(seed, {0xf01d5ULL, 1}));
  Rng neg_rng(child_seed(seed, {0xf01d5ULL, 0}));
  pos_rng.shuffle(pos);
  neg_rng.shuffle(neg);
  for (std::size_t j = 0; j < pos.size(); ++j)
    plan.assignment[pos[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  for (std::size_t j = 0; j < neg.size(); ++j)
    plan.assignment[neg[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  return plan;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw ValidationError("scores/labels size mismatch");
  std::size_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(y);
  }
  const std::size_t n = scores.size();
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("AUC needs both classes present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney rank sum with average ranks for ties
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) rank_sum_pos += avg_rank;
    i = j;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                                      static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw ValidationError("scores/labels size mismatch");
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += static_cast<std::size_t>(y == 1);
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("ROC needs both classes present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1)
        ++tp;
      else
        ++fp;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                     static_cast<double>(tp) / static_cast<double>(n_pos)});
    i = j;
  }
  return curve;
}

double roc_curve_area(const std::vector<RocPoint>& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += 0.5 * (curve[i].tpr + curve[i - 1].tpr) * (curve[i].fpr - curve[i - 1].fpr);
  return area;
}

namespace {

std::vector<int> take_labels(const std::vector<int>& y, const std::vector<std::size_t>& idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
  return out;
}

}  // namespace

CvResult nested_cv(const Matrix& X, const std::vector<int>& y, const LearnerSpec& spec,
                   int k_outer, int k_inner, std::uint64_t seed, int workers) {
  if (X.rows != y.size()) throw ValidationError("row/label count mismatch");
  if (spec.grid.empty()) throw ValidationError("hyperparameter grid is empty");

  CvResult result;
  result.labels = y;
  result.outer_plan = stratified_folds(y, k_outer, seed);
  result.concatenated_scores.assign(y.size(), 0.0);
  result.fold_choices.resize(static_cast<std::size_t>(k_outer));
  result.fold_costs.resize(static_cast<std::size_t>(k_outer));
  result.fold_feature_means.resize(static_cast<std::size_t>(k_outer));
  result.fold_feature_stds.resize(static_cast<std::size_t>(k_outer));
  result.fold_notes.resize(static_cast<std::size_t>(k_outer));

  parallel_for(static_cast<std::size_t>(k_outer), workers, [&](std::size_t fold) {
    const int f = static_cast<int>(fold);
    const auto train_idx = result.outer_plan.complement_indices(f);
    const auto test_idx = result.outer_plan.fold_indices(f);
    const Matrix X_train = X.take_rows(train_idx);
    const std::vector<int> y_train = take_labels(y, train_idx);

    FoldPlan inner_plan;
    try {
      inner_plan = stratified_folds(y_train, k_inner,
                                    child_seed(seed, {0x1aaeeULL, fold}));
    } catch (const ValidationError& e) {
      throw ValidationError("outer fold " + std::to_string(f) + ": " + e.what());
    }

    // cache the inner split matrices; every grid cell reuses them
    std::vector<Matrix> inner_train_x(static_cast<std::size_t>(k_inner));
    std::vector<Matrix> inner_val_x(static_cast<std::size_t>(k_inner));
    std::vector<std::vector<int>> inner_train_y(static_cast<std::size_t>(k_inner));
    std::vector<std::vector<int>> inner_val_y(static_cast<std::size_t>(k_inner));
    std::vector<CostMatrix> inner_costs(static_cast<std::size_t>(k_inner));
    for (std::size_t g = 0; g < static_cast<std::size_t>(k_inner); ++g) {
      const auto tr = inner_plan.complement_indices(static_cast<int>(g));
      const auto va = inner_plan.fold_indices(static_cast<int>(g));
      inner_train_x[g] = X_train.take_rows(tr);
      inner_val_x[g] = X_train.take_rows(va);
      inner_train_y[g] = take_labels(y_train, tr);
      inner_val_y[g] = take_labels(y_train, va);
      inner_costs[g] =
          spec.cost_enabled ? compute_cost_matrix(inner_train_y[g]) : CostMatrix{};
    }

    double best_auc = -1.0;
    std::size_t best_cell = 0;
    for (std::size_t c = 0; c < spec.grid.size(); ++c) {
      double auc_sum = 0.0;
      for (std::size_t g = 0; g < static_cast<std::size_t>(k_inner); ++g) {
        const TrainedModel model =
            train(spec, spec.grid[c], inner_train_x[g], inner_train_y[g], inner_costs[g],
                  child_seed(seed, {0x77a14ULL, fold, c, g}));
        auc_sum += roc_auc(predict_scores(model, inner_val_x[g]), inner_val_y[g]);
      }
      const double mean_auc = auc_sum / static_cast<double>(k_inner);
      if (mean_auc > best_auc) {  // strict: ties keep the first declared cell
        best_auc = mean_auc;
        best_cell = c;
      }
    }

    const CostMatrix cost =
        spec.cost_enabled ? compute_cost_matrix(y_train) : CostMatrix{};
    const TrainedModel model = train(spec, spec.grid[best_cell], X_train, y_train, cost,
                                     child_seed(seed, {0xef1ULL, fold}));
    const std::vector<double> scores = predict_scores(model, X.take_rows(test_idx));
    for (std::size_t t = 0; t < test_idx.size(); ++t)
      result.concatenated_scores[test_idx[t]] = scores[t];

    result.fold_choices[fold] = spec.grid[best_cell];
    result.fold_costs[fold] = cost;
    if (const auto* lr = std::get_if<LrModel>(&model.impl)) {
      result.fold_feature_means[fold] = lr->norm.mean;
      result.fold_feature_stds[fold] = lr->norm.scale;
    } else if (const auto* svm = std::get_if<SvmModel>(&model.impl)) {
      result.fold_feature_means[fold] = svm->norm.mean;
      result.fold_feature_stds[fold] = svm->norm.scale;
    }
    if (const auto* lr = std::get_if<LrModel>(&model.impl); lr && !lr->converged)
      result.fold_notes[fold] = "lr did not reach gradient tolerance";
  });

  result.auc = roc_auc(result.concatenated_scores, result.labels);
  return result;
}

void write_cv_result(const CvResult& result, const LearnerSpec& spec,
                     const std::vector<ShiftKeyRef>& keys, const std::filesystem::path& path,
                     bool with_timestamp) {
  if (!keys.empty() && keys.size() != result.labels.size())
    throw ValidationError("key count does not match result size");
  std::ofstream out(path, std::ios::binary);
  if (with_timestamp) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&now));
    out << "# generated " << buf << "\n";
  }
  out << "# summary learner=" << learner_name(spec.kind)
      << " cost=" << (spec.cost_enabled ? "on" : "off") << " auc=" << format_double(result.auc)
      << "\n";
  out << "participant_id,date,shift_kind,label,score,outer_fold,hyperparameters\n";
  for (std::size_t i = 0; i < result.labels.size(); ++i) {
    const int fold = result.outer_plan.assignment[i];
    if (keys.empty())
      out << "sample" << i << ",,";
    else
      out << keys[i].participant_id << "," << keys[i].date << "," << keys[i].kind;
    out << "," << result.labels[i] << "," << format_double(result.concatenated_scores[i]) << ","
        << fold << "," << grid_cell_to_string(spec.kind, result.fold_choices[fold]) << "\n";
  }
}

}  // namespace agitrack
