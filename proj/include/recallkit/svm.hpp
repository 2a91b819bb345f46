#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "recallkit/corpus.hpp"
#include "recallkit/matrix.hpp"

namespace recallkit {

struct SvmOptions {
  double tolerance = 1e-3;      // KKT violation allowed at convergence
  std::size_t max_passes = 10000;  // iteration cap is max_passes * n_samples
};

/// Soft-margin binary SVM with an RBF kernel exp(-gamma |x - z|^2).
struct SvmModel {
  double C = 1.0;
  double gamma = 1.0;
  double bias = 0.0;
  Matrix support_vectors;
  std::vector<double> alphas;     // 0 < alpha <= C, one per support vector
  std::vector<double> dual_coef;  // alpha * y, y in {-1, +1}
  std::size_t iterations = 0;

  double decision(std::span<const double> x) const;
  /// Rich when the decision value is >= 0.
  Richness predict(std::span<const double> x) const;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// Sequential minimal optimization with second-order working-set selection.
/// Labels are 0/1 (1 = rich). Throws ValidationError when only one class is present and
/// ConvergenceError (carrying the final KKT gap) if the iteration cap is hit.
SvmModel fit_svm(const Matrix& x, std::span<const int> y, double C, double gamma,
                 const SvmOptions& options = {});

Richness svm_predict(const SvmModel& model, std::span<const double> x);

const std::vector<double>& default_c_grid();
const std::vector<double>& default_gamma_grid();

struct GridCell {
  double C = 0.0;
  double gamma = 0.0;
  std::optional<double> val_f1;  // empty when training failed
  std::string error;
};

struct GridSearchResult {
  double best_C = 0.0;
  double best_gamma = 0.0;
  double best_f1 = 0.0;
  std::vector<GridCell> cells;  // C-major, in grid order
};

/// Trains every (C, gamma) pair on the training set and keeps the best validation F1
/// (positive class rich). Equal F1 goes to the smaller C, then the smaller gamma.
/// Failed cells are skipped with a warning; throws Error if every cell fails.
GridSearchResult grid_search_svm(const Matrix& x_train, std::span<const int> y_train,
                                 const Matrix& x_val, std::span<const int> y_val,
                                 std::span<const double> c_grid, std::span<const double> gamma_grid,
                                 const SvmOptions& options = {});

nlohmann::json to_json(const SvmModel& model);
SvmModel svm_from_json(const nlohmann::json& j);

}  // namespace recallkit
