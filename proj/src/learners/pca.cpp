#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "recallkit/error.hpp"
#include "recallkit/pca.hpp"

namespace recallkit {

PcaBasis fit_pca(const Matrix& x, std::size_t n_components) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n == 0 || d == 0) throw ArgumentError("fit_pca: empty input");
  if (n_components == 0 || n_components > std::min(n, d)) {
    throw ArgumentError("fit_pca: n_components " + std::to_string(n_components) +
                        " must be in [1, min(rows, cols) = " + std::to_string(std::min(n, d)) + "]");
  }

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> data(x.data().data(), static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(d));
  const Eigen::VectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean.transpose();
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("fit_pca: eigendecomposition failed");
  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd values = solver.eigenvalues().reverse().cwiseMax(0.0);
  const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  const double total = values.sum();

  PcaBasis basis;
  basis.mean.assign(mean.data(), mean.data() + d);
  basis.components = Matrix(n_components, d);
  for (std::size_t k = 0; k < n_components; ++k) {
    const auto col = vectors.col(static_cast<Eigen::Index>(k));
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    const double sign = col(arg) < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) basis.components(k, j) = sign * col(static_cast<Eigen::Index>(j));
    basis.explained_variance_ratio.push_back(total > 0.0 ? values(static_cast<Eigen::Index>(k)) / total : 0.0);
  }
  return basis;
}

std::vector<double> pca_transform(const PcaBasis& basis, std::span<const double> v) {
  if (v.size() != basis.input_dim()) {
    throw ArgumentError("pca_transform: expected " + std::to_string(basis.input_dim()) +
                        " values, got " + std::to_string(v.size()));
  }
  std::vector<double> out(basis.output_dim(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto row = basis.components.row(k);
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += row[j] * (v[j] - basis.mean[j]);
    out[k] = s;
  }
  return out;
}

std::vector<double> pca_reconstruct(const PcaBasis& basis, std::span<const double> z) {
  if (z.size() != basis.output_dim()) throw ArgumentError("pca_reconstruct: wrong code length");
  std::vector<double> out = basis.mean;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const auto row = basis.components.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += row[j] * z[k];
  }
  return out;
}

nlohmann::json to_json(const PcaBasis& basis) {
  auto rows = nlohmann::json::array();
  for (std::size_t k = 0; k < basis.output_dim(); ++k) {
    const auto r = basis.components.row(k);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"mean", basis.mean},
          {"components", std::move(rows)},
          {"explained_variance_ratio", basis.explained_variance_ratio}};
}

PcaBasis pca_from_json(const nlohmann::json& j) {
  PcaBasis basis;
  basis.mean = j.at("mean").get<std::vector<double>>();
  for (const auto& row : j.at("components")) basis.components.append_row(row.get<std::vector<double>>());
  basis.explained_variance_ratio = j.at("explained_variance_ratio").get<std::vector<double>>();
  if (basis.components.cols() != basis.mean.size() ||
      basis.explained_variance_ratio.size() != basis.components.rows()) {
    throw ValidationError("PCA basis: inconsistent shapes");
  }
  return basis;
}

}  // namespace recallkit
