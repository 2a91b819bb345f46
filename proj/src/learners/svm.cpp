#include <algorithm>
#include <tuple>
#include <cmath>
#include <limits>

#include "recallkit/error.hpp"
#include "recallkit/log.hpp"
#include "recallkit/metrics.hpp"
#include "recallkit/svm.hpp"
#include "recallkit/text.hpp"

namespace recallkit {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::exp(-gamma * sq);
}

double SvmModel::decision(std::span<const double> x) const {
  if (x.size() != support_vectors.cols()) {
    throw ValidationError("SVM expects " + std::to_string(support_vectors.cols()) +
                          " features, got " + std::to_string(x.size()));
  }
  double sum = bias;
  for (std::size_t i = 0; i < support_vectors.rows(); ++i) {
    sum += dual_coef[i] * rbf_kernel(support_vectors.row(i), x, gamma);
  }
  return sum;
}

Richness SvmModel::predict(std::span<const double> x) const {
  return decision(x) >= 0.0 ? Richness::rich : Richness::nonrich;
}

Richness svm_predict(const SvmModel& model, std::span<const double> x) { return model.predict(x); }

namespace {

// Kernel rows, either from a precomputed Gram matrix or computed on demand.
class KernelRows {
 public:
  KernelRows(const Matrix& x, double gamma) : x_(x), gamma_(gamma), n_(x.rows()) {
    if (n_ <= kMaxCached) {
      gram_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i) {
        gram_[i * n_ + i] = 1.0;
        for (std::size_t j = i + 1; j < n_; ++j) {
          const double k = rbf_kernel(x.row(i), x.row(j), gamma);
          gram_[i * n_ + j] = k;
          gram_[j * n_ + i] = k;
        }
      }
    } else {
      scratch_a_.resize(n_);
      scratch_b_.resize(n_);
    }
  }

  // Valid until the next call with the same `slot`.
  std::span<const double> row(std::size_t i, int slot) {
    if (!gram_.empty()) return {gram_.data() + i * n_, n_};
    auto& buf = slot == 0 ? scratch_a_ : scratch_b_;
    for (std::size_t j = 0; j < n_; ++j) buf[j] = rbf_kernel(x_.row(i), x_.row(j), gamma_);
    return buf;
  }

 private:
  static constexpr std::size_t kMaxCached = 4000;
  const Matrix& x_;
  double gamma_;
  std::size_t n_;
  std::vector<double> gram_;
  std::vector<double> scratch_a_, scratch_b_;
};

constexpr double kTau = 1e-12;

}  // namespace

SvmModel fit_svm(const Matrix& x, std::span<const int> labels, double C, double gamma,
                 const SvmOptions& options) {
  const std::size_t n = x.rows();
  if (n == 0 || x.cols() == 0) throw ArgumentError("fit_svm: empty training set");
  if (labels.size() != n) throw ArgumentError("fit_svm: X rows and y length differ");
  if (!(C > 0.0) || !(gamma > 0.0)) throw ArgumentError("fit_svm: C and gamma must be positive");

  std::vector<double> y(n);
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ArgumentError("fit_svm: labels must be 0 or 1");
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
    (labels[i] == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw ValidationError("fit_svm: training set needs both classes");

  KernelRows kernel(x, gamma);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a at a = 0

  auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };

  const std::size_t max_iter = std::max<std::size_t>(options.max_passes, 1) * n;
  std::size_t iter = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (;; ++iter) {
    // Maximal violating i, then second-order choice of j.
    double g_max = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] > g_max) {
        g_max = -y[t] * grad[t];
        i = t;
      }
    }
    double g_max2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best_obj = std::numeric_limits<double>::infinity();
    const auto k_i = i < n ? kernel.row(i, 0) : std::span<const double>{};
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      g_max2 = std::max(g_max2, y[t] * grad[t]);
      if (i == n) continue;
      const double b = g_max + y[t] * grad[t];
      if (b > 0.0) {
        double a = k_i[i] + 1.0 - 2.0 * k_i[t];  // K(t,t) = 1 for RBF
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    gap = g_max + g_max2;
    if (i == n || j == n || gap < options.tolerance) break;
    if (iter >= max_iter) {
      throw ConvergenceError("fit_svm: no convergence after " + std::to_string(max_iter) +
                                 " iterations (KKT gap " + text::format_double(gap) + ")",
                             gap);
    }

    const auto k_j = kernel.row(j, 1);
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = k_i[i] + k_j[j] - 2.0 * k_i[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = k_i[i] + k_j[j] - 2.0 * k_i[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_ai;
    const double dj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * k_i[t] * di + y[j] * k_j[t] * dj);
    }
  }

  // Offset from free vectors, or the midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (upper + lower) / 2.0;

  SvmModel model;
  model.C = C;
  model.gamma = gamma;
  model.bias = -rho;
  model.iterations = iter;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.append_row(x.row(t));
      model.alphas.push_back(alpha[t]);
      model.dual_coef.push_back(alpha[t] * y[t]);
    }
  }
  if (model.alphas.empty()) throw ValidationError("fit_svm: solution has no support vectors");
  return model;
}

const std::vector<double>& default_c_grid() {
  static const std::vector<double> grid{0.1, 1.0, 10.0, 100.0};
  return grid;
}

const std::vector<double>& default_gamma_grid() {
  static const std::vector<double> grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  return grid;
}

GridSearchResult grid_search_svm(const Matrix& x_train, std::span<const int> y_train,
                                 const Matrix& x_val, std::span<const int> y_val,
                                 std::span<const double> c_grid, std::span<const double> gamma_grid,
                                 const SvmOptions& options) {
  if (c_grid.empty() || gamma_grid.empty()) throw ArgumentError("grid_search_svm: empty grid");
  if (x_val.rows() != y_val.size() || x_val.rows() == 0) {
    throw ArgumentError("grid_search_svm: bad validation set");
  }
  GridSearchResult result;
  bool found = false;
  constexpr double eps = 1e-12;
  for (double C : c_grid) {
    for (double gamma : gamma_grid) {
      GridCell cell{C, gamma, std::nullopt, {}};
      try {
        const auto model = fit_svm(x_train, y_train, C, gamma, options);
        std::vector<int> pred(x_val.rows());
        for (std::size_t r = 0; r < x_val.rows(); ++r) {
          pred[r] = model.predict(x_val.row(r)) == Richness::rich ? 1 : 0;
        }
        cell.val_f1 = confusion(y_val, pred).f1();
      } catch (const Error& e) {
        cell.error = e.what();
        log::warn("grid cell C=" + text::format_double(C) + " gamma=" + text::format_double(gamma) +
                  " skipped: " + e.what());
      }
      if (cell.val_f1) {
        const double f = *cell.val_f1;
        const bool wins = !found || f > result.best_f1 + eps ||
                          (f >= result.best_f1 - eps &&
                           std::tie(C, gamma) < std::tie(result.best_C, result.best_gamma));
        if (wins) {
          found = true;
          result.best_C = C;
          result.best_gamma = gamma;
          result.best_f1 = f;
        }
      }
      result.cells.push_back(std::move(cell));
    }
  }
  if (!found) throw Error("grid_search_svm: every grid cell failed to train");
  return result;
}

nlohmann::json to_json(const SvmModel& m) {
  auto svs = nlohmann::json::array();
  for (std::size_t i = 0; i < m.support_vectors.rows(); ++i) {
    const auto row = m.support_vectors.row(i);
    svs.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"kernel", "rbf"},          {"C", m.C},
          {"gamma", m.gamma},         {"bias", m.bias},
          {"alphas", m.alphas},       {"dual_coef", m.dual_coef},
          {"support_vectors", svs},   {"iterations", m.iterations}};
}

SvmModel svm_from_json(const nlohmann::json& j) {
  if (j.at("kernel").get<std::string>() != "rbf") throw ValidationError("unsupported SVM kernel");
  SvmModel m;
  m.C = j.at("C").get<double>();
  m.gamma = j.at("gamma").get<double>();
  m.bias = j.at("bias").get<double>();
  m.alphas = j.at("alphas").get<std::vector<double>>();
  m.dual_coef = j.at("dual_coef").get<std::vector<double>>();
  m.iterations = j.at("iterations").get<std::size_t>();
  for (const auto& row : j.at("support_vectors")) {
    m.support_vectors.append_row(row.get<std::vector<double>>());
  }
  if (m.alphas.size() != m.support_vectors.rows() || m.dual_coef.size() != m.alphas.size() ||
      m.alphas.empty()) {
    throw ValidationError("SVM model: support vector arrays disagree");
  }
  return m;
}

}  // namespace recallkit
