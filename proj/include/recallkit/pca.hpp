#pragma once

#include <span>
#include <vector>

#include "json.hpp"

#include "recallkit/matrix.hpp"

namespace recallkit {

/// Principal axes of a sample matrix, largest variance first.
struct PcaBasis {
  std::vector<double> mean;
  Matrix components;  // n_components x input_dim, orthonormal rows
  std::vector<double> explained_variance_ratio;

  std::size_t input_dim() const { return mean.size(); }
  std::size_t output_dim() const { return components.rows(); }
};

/// Eigendecomposition of the sample covariance of `x` (rows are samples).
/// Each component is signed so that its largest-magnitude entry is positive.
/// Throws ArgumentError when n_components exceeds min(rows, cols).
PcaBasis fit_pca(const Matrix& x, std::size_t n_components);

/// components * (v - mean)
std::vector<double> pca_transform(const PcaBasis& basis, std::span<const double> v);

/// mean + components^T * z
std::vector<double> pca_reconstruct(const PcaBasis& basis, std::span<const double> z);

nlohmann::json to_json(const PcaBasis& basis);
PcaBasis pca_from_json(const nlohmann::json& j);

}  // namespace recallkit
