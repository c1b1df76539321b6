#include "agitrack/learners.hpp"

#include <algorithm>
#include <sstream>

namespace agitrack {

CostMatrix compute_cost_matrix(const std::vector<int>& labels) {
  if (labels.empty()) throw ValidationError("cost matrix needs labels");
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == labels.size())
    throw ValidationError("cost matrix needs both classes present");
  const double w = static_cast<double>(positives) / static_cast<double>(labels.size());
  return CostMatrix{1.0 / w, 1.0 / (1.0 - w)};
}

std::string_view learner_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::LR: return "lr";
    case LearnerKind::RF: return "rf";
    case LearnerKind::SVM: return "svm";
  }
  return "?";
}

LearnerKind learner_from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "lr") return LearnerKind::LR;
  if (lower == "rf") return LearnerKind::RF;
  if (lower == "svm") return LearnerKind::SVM;
  throw ValidationError("unknown learner: " + std::string(name));
}

std::string grid_cell_to_string(LearnerKind kind, const GridCell& cell) {
  switch (kind) {
    case LearnerKind::LR: return "lambda=" + format_double(cell.p1);
    case LearnerKind::RF:
      return "trees=" + format_double(cell.p1) + " predictors=" + format_double(cell.p2);
    case LearnerKind::SVM:
      return "box=" + format_double(cell.p1) + " scale=" + format_double(cell.p2);
  }
  return "";
}

LearnerSpec LearnerSpec::make(LearnerKind kind, bool cost_enabled, std::size_t n_features) {
  LearnerSpec spec;
  spec.kind = kind;
  spec.cost_enabled = cost_enabled;
  switch (kind) {
    case LearnerKind::LR:
      for (double lambda : {0.01, 0.05, 0.1, 1.0, 10.0, 100.0}) spec.grid.push_back({lambda, 0.0});
      break;
    case LearnerKind::RF:
      for (int trees : {10, 30, 50, 70, 90})
        for (int k = 1; k <= 4; ++k) {
          const auto predictors =
              std::max<std::size_t>(1, k * n_features / 5);  // floor(k*f/5)
          spec.grid.push_back({static_cast<double>(trees), static_cast<double>(predictors)});
        }
      break;
    case LearnerKind::SVM:
      for (double box : {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0})
        for (double scale : {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0})
          spec.grid.push_back({box, scale});
      break;
  }
  return spec;
}

void Standardizer::fit(const Matrix& X) {
  mean.assign(X.cols, 0.0);
  scale.assign(X.cols, 1.0);
  if (X.rows == 0) return;
  for (std::size_t i = 0; i < X.rows; ++i)
    for (std::size_t j = 0; j < X.cols; ++j) mean[j] += X.at(i, j);
  for (std::size_t j = 0; j < X.cols; ++j) mean[j] /= static_cast<double>(X.rows);
  if (X.rows < 2) return;
  std::vector<double> ss(X.cols, 0.0);
  for (std::size_t i = 0; i < X.rows; ++i)
    for (std::size_t j = 0; j < X.cols; ++j) {
      const double d = X.at(i, j) - mean[j];
      ss[j] += d * d;
    }
  for (std::size_t j = 0; j < X.cols; ++j) {
    const double sd = std::sqrt(ss[j] / static_cast<double>(X.rows - 1));
    scale[j] = sd > 0.0 ? sd : 1.0;
  }
}

Matrix Standardizer::apply(const Matrix& X) const {
  if (X.cols != mean.size())
    throw ValidationError("feature width mismatch: model expects " +
                          std::to_string(mean.size()) + ", got " + std::to_string(X.cols));
  Matrix Z = X;
  for (std::size_t i = 0; i < Z.rows; ++i)
    for (std::size_t j = 0; j < Z.cols; ++j) Z.at(i, j) = (Z.at(i, j) - mean[j]) / scale[j];
  return Z;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + exp(z)) without overflow
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_finite(const Matrix& X) {
  for (double v : X.data)
    if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
}

// Solves A x = rhs for SPD A in place; A is n x n row-major.
std::vector<double> cholesky_solve(std::vector<double> A, std::vector<double> rhs,
                                   std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = A[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= A[j * n + k] * A[j * n + k];
    if (d <= 0.0) throw ConvergenceError("Newton system not positive definite");
    const double root = std::sqrt(d);
    A[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = A[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= A[i * n + k] * A[j * n + k];
      A[i * n + j] = v / root;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double v = rhs[i];
    for (std::size_t k = 0; k < i; ++k) v -= A[i * n + k] * rhs[k];
    rhs[i] = v / A[i * n + i];
  }
  for (std::size_t ii = n; ii > 0; --ii) {
    const std::size_t i = ii - 1;
    double v = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) v -= A[k * n + i] * rhs[k];
    rhs[i] = v / A[i * n + i];
  }
  return rhs;
}

}  // namespace

double lr_objective(const Matrix& X, const std::vector<int>& y, const std::vector<double>& w,
                    double b, double lambda, const CostMatrix& cost,
                    std::vector<double>* grad_w, double* grad_b) {
  const std::size_t n = X.rows;
  const std::size_t f = X.cols;
  double loss = 0.0;
  if (grad_w) grad_w->assign(f, 0.0);
  if (grad_b) *grad_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = X.row(i);
    double z = b;
    for (std::size_t j = 0; j < f; ++j) z += w[j] * xi[j];
    const double omega = y[i] == 1 ? cost.c_fn : cost.c_fp;
    loss += omega * (softplus(z) - static_cast<double>(y[i]) * z);
    if (grad_w || grad_b) {
      const double residual = omega * (sigmoid(z) - static_cast<double>(y[i]));
      if (grad_w)
        for (std::size_t j = 0; j < f; ++j) (*grad_w)[j] += residual * xi[j];
      if (grad_b) *grad_b += residual;
    }
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < f; ++j) {
    reg += w[j] * w[j];
    if (grad_w) (*grad_w)[j] += lambda * w[j];
  }
  return loss + 0.5 * lambda * reg;
}

LrModel fit_lr(const Matrix& X_raw, const std::vector<int>& y, double lambda,
               const CostMatrix& cost, const std::vector<double>* init_w, double init_b) {
  if (X_raw.rows != y.size()) throw ValidationError("row/label count mismatch");
  check_finite(X_raw);
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");

  LrModel model;
  model.norm.fit(X_raw);
  const Matrix X = model.norm.apply(X_raw);
  const std::size_t f = X.cols;
  std::vector<double> w = init_w ? *init_w : std::vector<double>(f, 0.0);
  double b = init_b;

  constexpr double kGradTol = 1e-8;
  constexpr int kMaxIters = 10000;
  std::vector<double> grad_w(f);
  double grad_b = 0.0;
  double loss = lr_objective(X, y, w, b, lambda, cost, &grad_w, &grad_b);
  int iter = 0;
  for (; iter < kMaxIters; ++iter) {
    double gmax = std::abs(grad_b);
    for (double g : grad_w) gmax = std::max(gmax, std::abs(g));
    if (gmax < kGradTol) break;

    // Newton direction on the (w, b) block; intercept unregularized
    const std::size_t dim = f + 1;
    std::vector<double> H(dim * dim, 0.0);
    for (std::size_t i = 0; i < X.rows; ++i) {
      const double* xi = X.row(i);
      double z = b;
      for (std::size_t j = 0; j < f; ++j) z += w[j] * xi[j];
      const double p = sigmoid(z);
      const double omega = y[i] == 1 ? cost.c_fn : cost.c_fp;
      const double curv = std::max(omega * p * (1.0 - p), 1e-12);
      for (std::size_t a = 0; a < f; ++a) {
        const double ca = curv * xi[a];
        for (std::size_t c = a; c < f; ++c) H[a * dim + c] += ca * xi[c];
        H[a * dim + f] += ca;
      }
      H[f * dim + f] += curv;
    }
    for (std::size_t a = 0; a < f; ++a) H[a * dim + a] += lambda;
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t c = a + 1; c < dim; ++c) H[c * dim + a] = H[a * dim + c];

    std::vector<double> g(dim);
    std::copy(grad_w.begin(), grad_w.end(), g.begin());
    g[f] = grad_b;
    const std::vector<double> step = cholesky_solve(std::move(H), std::move(g), dim);

    // backtracking keeps the convex objective monotone
    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 60; ++half) {
      std::vector<double> w_try = w;
      for (std::size_t j = 0; j < f; ++j) w_try[j] -= scale * step[j];
      const double b_try = b - scale * step[f];
      const double loss_try = lr_objective(X, y, w_try, b_try, lambda, cost, nullptr, nullptr);
      if (loss_try <= loss) {
        w = std::move(w_try);
        b = b_try;
        loss = loss_try;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;  // at numerical floor
    loss = lr_objective(X, y, w, b, lambda, cost, &grad_w, &grad_b);
  }

  double gmax = std::abs(grad_b);
  for (double g : grad_w) gmax = std::max(gmax, std::abs(g));
  model.weights = std::move(w);
  model.intercept = b;
  model.iterations = iter;
  model.converged = gmax < kGradTol;  // warning flag only; the model is still usable
  return model;
}

TrainedModel train_lr(const Matrix& X, const std::vector<int>& y, double lambda,
                      const CostMatrix& cost) {
  TrainedModel model;
  model.kind = LearnerKind::LR;
  model.impl = fit_lr(X, y, lambda, cost);
  return model;
}

TrainedModel train(const LearnerSpec& spec, const GridCell& cell, const Matrix& X,
                   const std::vector<int>& y, const CostMatrix& cost, std::uint64_t seed) {
  switch (spec.kind) {
    case LearnerKind::LR: return train_lr(X, y, cell.p1, cost);
    case LearnerKind::RF:
      return train_rf(X, y, static_cast<int>(cell.p1), static_cast<int>(cell.p2), cost, seed);
    case LearnerKind::SVM: return train_svm(X, y, cell.p1, cell.p2, cost);
  }
  throw ValidationError("unknown learner kind");
}

double DecisionTree::predict(const double* x) const {
  int node = 0;
  for (;;) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    if (n.feature < 0) return n.value;
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
}

std::vector<double> predict_scores(const TrainedModel& model, const Matrix& X) {
  std::vector<double> scores(X.rows);
  if (const auto* lr = std::get_if<LrModel>(&model.impl)) {
    const Matrix Z = lr->norm.apply(X);
    for (std::size_t i = 0; i < Z.rows; ++i) {
      double z = lr->intercept;
      const double* xi = Z.row(i);
      for (std::size_t j = 0; j < Z.cols; ++j) z += lr->weights[j] * xi[j];
      scores[i] = sigmoid(z);
    }
  } else if (const auto* rf = std::get_if<RfModel>(&model.impl)) {
    for (std::size_t i = 0; i < X.rows; ++i) {
      double sum = 0.0;
      for (const auto& tree : rf->trees) sum += tree.predict(X.row(i));
      scores[i] = sum / static_cast<double>(rf->trees.size());
    }
  } else {
    const auto& svm = std::get<SvmModel>(model.impl);
    const Matrix Z = svm.norm.apply(X);
    const double gamma = 1.0 / (2.0 * svm.kernel_scale * svm.kernel_scale);
    for (std::size_t i = 0; i < Z.rows; ++i) {
      const double* xi = Z.row(i);
      double sum = svm.bias;
      for (std::size_t s = 0; s < svm.support_x.rows; ++s) {
        const double* xs = svm.support_x.row(s);
        double d2 = 0.0;
        for (std::size_t j = 0; j < Z.cols; ++j) {
          const double d = xi[j] - xs[j];
          d2 += d * d;
        }
        sum += svm.dual_coef[s] * std::exp(-gamma * d2);
      }
      scores[i] = sum;
    }
  }
  for (double s : scores)
    if (!std::isfinite(s)) throw ValidationError("non-finite prediction score");
  return scores;
}

std::string model_summary(const TrainedModel& model) {
  std::ostringstream os;
  os << learner_name(model.kind);
  if (const auto* lr = std::get_if<LrModel>(&model.impl)) {
    double norm = 0.0;
    for (double w : lr->weights) norm += w * w;
    os << " iterations=" << lr->iterations << " converged=" << (lr->converged ? "yes" : "no")
       << " weight_norm=" << format_double(std::sqrt(norm));
  } else if (const auto* rf = std::get_if<RfModel>(&model.impl)) {
    std::size_t nodes = 0;
    for (const auto& t : rf->trees) nodes += t.nodes.size();
    os << " trees=" << rf->trees.size() << " total_nodes=" << nodes;
  } else {
    const auto& svm = std::get<SvmModel>(model.impl);
    os << " support_vectors=" << svm.support_x.rows << " pair_updates=" << svm.pair_updates
       << " bias=" << format_double(svm.bias);
  }
  return os.str();
}

}  // namespace agitrack
