#include <cmath>

#include "doctest.h"
#include "oracles/cart_oracle.hpp"
#include "oracles/pca_oracle.hpp"
#include "recallkit/metrics.hpp"
#include "recallkit/pca.hpp"
#include "recallkit/random.hpp"
#include "recallkit/tree.hpp"

using namespace recallkit;

namespace {

bool tree_matches_oracle(const std::vector<std::vector<double>>& rows, const std::vector<int>& y) {
  const Matrix x = Matrix::from_rows(rows);
  const auto tree = fit_tree(x, y, 0, 0);
  std::vector<std::size_t> idx(rows.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto oracle_tree = oracle::build_cart(rows, y, idx);
  // Training points plus every corner of the binary cube.
  for (int corner = 0; corner < (1 << rows.front().size()); ++corner) {
    std::vector<double> v(rows.front().size());
    for (std::size_t f = 0; f < v.size(); ++f) v[f] = (corner >> f) & 1;
    if (tree.predict(v) != oracle::cart_predict(*oracle_tree, v)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("oracles") {
  TEST_CASE("tree matches the CART oracle on every subset of the binary cube with both labels") {
    // Each of the 8 corners is absent, labeled 0 or labeled 1: 3^8 = 6561 datasets.
    std::size_t checked = 0;
    for (int code = 0; code < 6561; ++code) {
      std::vector<std::vector<double>> rows;
      std::vector<int> y;
      int c = code;
      for (int corner = 0; corner < 8; ++corner, c /= 3) {
        if (c % 3 == 0) continue;
        rows.push_back({double(corner & 1), double((corner >> 1) & 1), double((corner >> 2) & 1)});
        y.push_back(c % 3 - 1);
      }
      if (rows.empty()) continue;
      REQUIRE(tree_matches_oracle(rows, y));
      ++checked;
    }
    CHECK(checked == 6560);
  }

  TEST_CASE("tree matches the oracle on random continuous data") {
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 2 + rng.index(20), d = 1 + rng.index(4);
      std::vector<std::vector<double>> rows(n, std::vector<double>(d));
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        // Coarse grid values produce ties in both features and impurity.
        for (auto& v : rows[i]) v = double(rng.index(5)) / 4.0;
        y[i] = int(rng.index(2));
      }
      const auto tree = fit_tree(Matrix::from_rows(rows), y, 0, trial);
      std::vector<std::size_t> idx(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
      const auto ref = oracle::build_cart(rows, y, idx);
      for (int probe = 0; probe < 50; ++probe) {
        std::vector<double> v(d);
        for (auto& x : v) x = double(rng.index(9)) / 8.0;
        REQUIRE(tree.predict(v) == oracle::cart_predict(*ref, v));
      }
    }
  }

  TEST_CASE("pca matches power iteration") {
    Rng rng(5);
    const std::size_t n = 40, d = 6;
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    // Distinct spreads per axis keep the eigengaps wide enough for power iteration.
    for (auto& r : rows)
      for (std::size_t j = 0; j < d; ++j) r[j] = rng.normal() * double(d - j) + (j == 1 ? 0.5 * r[0] : 0.0);
    const auto basis = fit_pca(Matrix::from_rows(rows), 4);
    const auto ref = oracle::power_pca(rows, 4);
    for (std::size_t j = 0; j < d; ++j) CHECK(basis.mean[j] == doctest::Approx(ref.mean[j]).epsilon(1e-12));
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::size_t j = 0; j < d; ++j) CHECK(std::abs(basis.components(c, j) - ref.components[c][j]) < 1e-6);
      CHECK(basis.explained_variance_ratio[c] ==
            doctest::Approx(ref.eigenvalues[c] / ref.total_variance).epsilon(1e-8));
    }
  }

  TEST_CASE("f1 symmetry and bounds") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
      const double p = rng.uniform(1e-6, 1), r = rng.uniform(1e-6, 1);
      CHECK(f1(p, r) == doctest::Approx(f1(r, p)));
      CHECK(f1(p, r) >= std::min(p, r) - 1e-15);
      CHECK(f1(p, r) <= std::max(p, r) + 1e-15);
    }
  }
}
