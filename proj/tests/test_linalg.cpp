#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <random>

#include "csa/error.hpp"
#include "csa/linalg.hpp"

namespace {

Eigen::MatrixXd random_matrix(std::uint64_t seed, int n, int p) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd A(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) A(i, j) = nd(rng);
  return A;
}

}  // namespace

TEST_CASE("thin_qr reconstructs A with orthonormal Q and triangular R") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Eigen::MatrixXd A = random_matrix(seed, 40, 7);
    const csa::QrFactor qr = csa::thin_qr(A);

    CHECK(qr.Q.rows() == 40);
    CHECK(qr.Q.cols() == 7);
    CHECK(qr.R.rows() == 7);
    CHECK(qr.R.cols() == 7);
    CHECK(qr.rank == 7);
    CHECK(qr.full_rank());

    CHECK((qr.Q * qr.R - A).norm() < 1e-12 * A.norm());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(7, 7);
    CHECK((qr.Q.transpose() * qr.Q - I).norm() < 1e-12);
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < i; ++j) CHECK(qr.R(i, j) == 0.0);
  }
}

TEST_CASE("thin_qr detects rank deficiency from duplicated columns") {
  Eigen::MatrixXd A = random_matrix(11, 30, 5);
  A.col(3) = 2.0 * A.col(0);
  const csa::QrFactor qr = csa::thin_qr(A);
  CHECK(qr.rank == 4);
  CHECK_FALSE(qr.full_rank());

  // near-duplicate within tolerance still counts as deficient
  Eigen::MatrixXd B = A;
  B.col(3) = 2.0 * B.col(0) + 1e-14 * random_matrix(12, 30, 1);
  CHECK_FALSE(csa::thin_qr(B).full_rank());
}

TEST_CASE("thin_qr rejects underdetermined and non-finite input") {
  CHECK_THROWS_AS(csa::thin_qr(random_matrix(4, 3, 5)), csa::Error);
  Eigen::MatrixXd A = random_matrix(5, 10, 2);
  A(4, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(csa::thin_qr(A), csa::Error);
}

TEST_CASE("qr_solve matches the full-pivot LU least-squares solution") {
  const Eigen::MatrixXd A = random_matrix(21, 50, 6);
  const Eigen::MatrixXd B = random_matrix(22, 50, 3);
  const csa::QrFactor qr = csa::thin_qr(A);
  const Eigen::MatrixXd X = csa::qr_solve(qr, B);

  const Eigen::MatrixXd AtA = A.transpose() * A;
  const Eigen::MatrixXd X_lu = AtA.fullPivLu().solve(A.transpose() * B);
  CHECK((X - X_lu).norm() < 1e-10 * (1.0 + X_lu.norm()));
}

TEST_CASE("qr_solve refuses rank-deficient factorizations") {
  Eigen::MatrixXd A = random_matrix(31, 25, 4);
  A.col(2) = A.col(1);
  const csa::QrFactor qr = csa::thin_qr(A);
  CHECK_THROWS_AS(csa::qr_solve(qr, random_matrix(32, 25, 1)), csa::SingularError);
}

TEST_CASE("r_solve performs exact back substitution") {
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(3, 3);
  R << 2.0, 1.0, -1.0,
       0.0, 3.0,  0.5,
       0.0, 0.0,  4.0;
  Eigen::VectorXd x_true(3);
  x_true << 1.0, -2.0, 0.5;
  const Eigen::MatrixXd x = csa::r_solve(R, R * x_true);
  CHECK((x - x_true).norm() < 1e-14);
}

TEST_CASE("spd_solve matches LU on well-conditioned SPD systems") {
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    const Eigen::MatrixXd B = random_matrix(seed, 20, 6);
    const Eigen::MatrixXd A =
        B.transpose() * B + Eigen::MatrixXd::Identity(6, 6);
    const Eigen::MatrixXd rhs = random_matrix(seed + 50, 6, 2);
    const Eigen::MatrixXd X = csa::spd_solve(A, rhs);
    const Eigen::MatrixXd X_lu = A.fullPivLu().solve(rhs);
    CHECK((X - X_lu).norm() < 1e-10 * (1.0 + X_lu.norm()));
    CHECK((A * X - rhs).norm() < 1e-10 * rhs.norm());
  }
}

TEST_CASE("spd_solve raises SingularError naming the failing pivot") {
  // rank-1 PSD: the second pivot collapses
  Eigen::VectorXd v(3);
  v << 1.0, 2.0, 3.0;
  const Eigen::MatrixXd A = v * v.transpose();
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(3);
  try {
    csa::spd_solve(A, b);
    FAIL("expected SingularError");
  } catch (const csa::SingularError& e) {
    CHECK(e.index() == 1);
  }

  // indefinite matrix fails at the first pivot
  Eigen::MatrixXd N = -Eigen::MatrixXd::Identity(2, 2);
  try {
    csa::spd_solve(N, Eigen::VectorXd::Ones(2));
    FAIL("expected SingularError");
  } catch (const csa::SingularError& e) {
    CHECK(e.index() == 0);
  }
}

TEST_CASE("spd_solve rejects asymmetric input") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
  A(0, 2) = 0.5;  // not mirrored
  CHECK_THROWS_AS(csa::spd_solve(A, Eigen::VectorXd::Ones(3)), csa::Error);
}
