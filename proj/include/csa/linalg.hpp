#pragma once

#include <Eigen/Dense>

namespace csa {

/// Thin QR factorization A = Q R with a diagonal-threshold numerical rank.
struct QrFactor {
  Eigen::MatrixXd Q;  // N x p, orthonormal columns
  Eigen::MatrixXd R;  // p x p, upper triangular
  int rank = 0;       // count of |R_jj| above col_tol * max_j |R_jj|
  double col_tol = 0.0;

  bool full_rank() const { return rank == R.cols(); }
};

inline constexpr double kRankTol = 1e-10;

/// Householder thin QR. Rank is the number of diagonal entries of R whose
/// magnitude exceeds rel_tol times the largest diagonal magnitude, which
/// counts the columns that are not (numerically) spanned by earlier ones.
/// Throws on N < p or non-finite input.
QrFactor thin_qr(const Eigen::MatrixXd& A, double rel_tol = kRankTol);

/// Solves R x = b by back substitution (R from a full-rank QrFactor).
Eigen::MatrixXd r_solve(const Eigen::MatrixXd& R, const Eigen::MatrixXd& B);

/// Least-squares solve through an existing factorization: R^{-1} (Q' B).
/// Requires full rank.
Eigen::MatrixXd qr_solve(const QrFactor& qr, const Eigen::MatrixXd& B);

/// Solves A X = B for symmetric positive definite A via Cholesky.
/// No regularization: a non-PD pivot raises SingularError carrying the
/// pivot index. A must be symmetric to 1e-10 relative.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

}  // namespace csa
