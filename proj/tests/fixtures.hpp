// Seeded synthetic estimation problems shared by the unit and acceptance
// tests. Gaussian designs keep every instrument block full rank almost
// surely, so oracle and library never disagree about skipping.
#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

#include "csa/dataframe.hpp"

namespace fixtures {

inline csa::ModelFrame random_frame(std::uint64_t seed, int N, int K, int d1,
                                    int d2, bool constant = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto mat = [&](int r, int c) {
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) M(i, j) = nd(rng);
    return M;
  };

  const Eigen::MatrixXd Z = mat(N, K);
  const Eigen::MatrixXd Pi = 0.4 * mat(K, d1);
  const Eigen::VectorXd common = mat(N, 1);  // shared shock -> endogeneity
  const Eigen::MatrixXd U =
      0.6 * common.replicate(1, d1) + 0.8 * mat(N, d1);
  const Eigen::VectorXd eps = common + 0.5 * mat(N, 1);
  const Eigen::MatrixXd X1 = Z * Pi + U;
  const Eigen::MatrixXd X2 = mat(N, d2);

  csa::ModelFrame f;
  f.N = N;
  f.d1 = d1;
  f.d2 = d2;
  f.K = K;
  f.has_constant = constant;
  const int d = f.d();

  f.X.resize(N, d);
  f.X.leftCols(d1) = X1;
  f.X.middleCols(d1, d2) = X2;
  if (constant) f.X.col(d - 1) = Eigen::VectorXd::Ones(N);
  f.Z_excl = Z;

  Eigen::VectorXd beta(d);
  for (int j = 0; j < d; ++j) beta(j) = 0.3 + 0.1 * j;
  f.y = f.X * beta + eps;

  f.y_name = "y";
  for (int j = 0; j < d1; ++j) {
    f.endo_names.push_back("x" + std::to_string(j + 1));
  }
  for (int j = 0; j < d2; ++j) {
    f.exog_names.push_back("w" + std::to_string(j + 1));
  }
  f.x_names = f.endo_names;
  f.x_names.insert(f.x_names.end(), f.exog_names.begin(), f.exog_names.end());
  if (constant) f.x_names.push_back("_cons");
  for (int j = 0; j < K; ++j) {
    f.z_names.push_back("z" + std::to_string(j + 1));
  }
  return f;
}

}  // namespace fixtures
