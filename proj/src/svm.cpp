#include <algorithm>

#include "agitrack/learners.hpp"

namespace agitrack {

namespace {

// Sequential minimal optimization on the RBF soft-margin dual with a
// per-sample box (class-dependent when cost weighting is on). Deterministic:
// pass order is fixed and the partner index is the maximal |E1 - E2| with the
// smallest index winning ties.
class SmoSolver {
 public:
  SmoSolver(const Matrix& X, const std::vector<double>& y, const std::vector<double>& box,
            double kernel_scale)
      : x_(X), y_(y), box_(box), n_(X.rows) {
    const double gamma = 1.0 / (2.0 * kernel_scale * kernel_scale);
    kernel_.assign(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      kernel_[i * n_ + i] = 1.0;
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double* a = x_.row(i);
        const double* b = x_.row(j);
        double d2 = 0.0;
        for (std::size_t c = 0; c < x_.cols; ++c) {
          const double d = a[c] - b[c];
          d2 += d * d;
        }
        const double k = std::exp(-gamma * d2);
        kernel_[i * n_ + j] = k;
        kernel_[j * n_ + i] = k;
      }
    }
    alpha_.assign(n_, 0.0);
    error_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) error_[i] = -y_[i];  // f = 0 initially
  }

  void solve() {
    bool examine_all = true;
    for (;;) {
      std::size_t changed = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (!examine_all && !is_free(i)) continue;
        changed += examine(i) ? 1 : 0;
      }
      if (examine_all) {
        if (changed == 0) return;
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }

  long pair_updates() const { return pair_updates_; }
  const std::vector<double>& alpha() const { return alpha_; }
  double bias() const { return bias_; }

 private:
  static constexpr double kTol = 1e-3;   // KKT tolerance
  static constexpr double kEps = 1e-12;  // step significance floor

  bool is_free(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < box_[i]; }

  bool examine(std::size_t i2) {
    const double e2 = error_[i2];
    const double r2 = e2 * y_[i2];
    const bool violates =
        (r2 < -kTol && alpha_[i2] < box_[i2]) || (r2 > kTol && alpha_[i2] > 0.0);
    if (!violates) return false;

    // best partner by |E1 - E2| over free multipliers
    std::size_t best = n_;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (i == i2 || !is_free(i)) continue;
      const double gap = std::abs(error_[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < n_ && take_step(best, i2)) return true;
    for (std::size_t i = 0; i < n_; ++i)
      if (i != i2 && is_free(i) && take_step(i, i2)) return true;
    for (std::size_t i = 0; i < n_; ++i)
      if (i != i2 && !is_free(i) && take_step(i, i2)) return true;
    return false;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    const double a1_old = alpha_[i1];
    const double a2_old = alpha_[i2];
    const double y1 = y_[i1];
    const double y2 = y_[i2];
    const double e1 = error_[i1];
    const double e2 = error_[i2];
    const double s = y1 * y2;

    double lo;
    double hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2_old - a1_old);
      hi = std::min(box_[i2], box_[i1] + a2_old - a1_old);
    } else {
      lo = std::max(0.0, a1_old + a2_old - box_[i1]);
      hi = std::min(box_[i2], a1_old + a2_old);
    }
    if (lo >= hi) return false;

    const double k11 = kernel_[i1 * n_ + i1];
    const double k12 = kernel_[i1 * n_ + i2];
    const double k22 = kernel_[i2 * n_ + i2];
    const double eta = k11 + k22 - 2.0 * k12;
    double a2;
    if (eta > 1e-12) {
      a2 = std::clamp(a2_old + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // flat direction: pick the better endpoint of the feasible segment
      const double f1 = y1 * (e1 + bias_) - a1_old * k11 - s * a2_old * k12;
      const double f2 = y2 * (e2 + bias_) - a2_old * k22 - s * a1_old * k12;
      const double l1 = a1_old + s * (a2_old - lo);
      const double h1 = a1_old + s * (a2_old - hi);
      const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                            s * lo * l1 * k12;
      const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                            s * hi * h1 * k12;
      if (obj_lo < obj_hi - kEps)
        a2 = lo;
      else if (obj_lo > obj_hi + kEps)
        a2 = hi;
      else
        a2 = a2_old;
    }
    if (std::abs(a2 - a2_old) < kEps * (a2 + a2_old + kEps)) return false;
    if (++pair_updates_ > 1000000)
      throw ConvergenceError("SMO exceeded 1e6 pair updates (n=" + std::to_string(n_) +
                             ", free=" + std::to_string(free_count()) + ")");
    const double a1 = a1_old + s * (a2_old - a2);

    // bias from the KKT conditions of whichever multiplier ends up free
    const double b_old = bias_;
    const double b1 = e1 + y1 * (a1 - a1_old) * k11 + y2 * (a2 - a2_old) * k12 + b_old;
    const double b2 = e2 + y1 * (a1 - a1_old) * k12 + y2 * (a2 - a2_old) * k22 + b_old;
    if (a1 > 0.0 && a1 < box_[i1])
      bias_ = b1;
    else if (a2 > 0.0 && a2 < box_[i2])
      bias_ = b2;
    else
      bias_ = 0.5 * (b1 + b2);

    alpha_[i1] = a1;
    alpha_[i2] = a2;
    const double d1 = y1 * (a1 - a1_old);
    const double d2 = y2 * (a2 - a2_old);
    const double db = bias_ - b_old;
    for (std::size_t i = 0; i < n_; ++i)
      error_[i] += d1 * kernel_[i1 * n_ + i] + d2 * kernel_[i2 * n_ + i] - db;
    return true;
  }

  std::size_t free_count() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n_; ++i) c += is_free(i) ? 1 : 0;
    return c;
  }

  const Matrix& x_;
  const std::vector<double>& y_;
  const std::vector<double>& box_;
  std::size_t n_;
  std::vector<double> kernel_;
  std::vector<double> alpha_;
  std::vector<double> error_;  // f(x_i) - y_i
  double bias_ = 0.0;          // decision function uses -bias_ internally, see below
  long pair_updates_ = 0;
};

}  // namespace

TrainedModel train_svm(const Matrix& X_raw, const std::vector<int>& y_raw, double box_c,
                       double kernel_scale, const CostMatrix& cost) {
  if (X_raw.rows != y_raw.size() || X_raw.rows == 0)
    throw ValidationError("row/label count mismatch");
  if (!(box_c > 0.0) || !(kernel_scale > 0.0))
    throw ValidationError("box constraint and kernel scale must be positive");
  for (double v : X_raw.data)
    if (!std::isfinite(v)) throw ValidationError("non-finite feature value");

  SvmModel model;
  model.kernel_scale = kernel_scale;
  model.norm.fit(X_raw);
  const Matrix X = model.norm.apply(X_raw);

  std::vector<double> y(X.rows);
  std::vector<double> box(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) {
    y[i] = y_raw[i] == 1 ? 1.0 : -1.0;
    box[i] = box_c * (y_raw[i] == 1 ? cost.c_fn : cost.c_fp);
  }

  SmoSolver solver(X, y, box, kernel_scale);
  solver.solve();

  // keep support vectors only; decision f(x) = sum coef_i K(x_i, x) - b
  const auto& alpha = solver.alpha();
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < X.rows; ++i)
    if (alpha[i] > 0.0) support.push_back(i);
  model.support_x = X.take_rows(support);
  model.dual_coef.resize(support.size());
  for (std::size_t s = 0; s < support.size(); ++s)
    model.dual_coef[s] = alpha[support[s]] * y[support[s]];
  model.bias = -solver.bias();
  model.pair_updates = solver.pair_updates();

  TrainedModel out;
  out.kind = LearnerKind::SVM;
  out.impl = std::move(model);
  return out;
}

}  // namespace agitrack
