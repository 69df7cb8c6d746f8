#include "csa/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "csa/error.hpp"

namespace csa {

QrFactor thin_qr(const Eigen::MatrixXd& A, double rel_tol) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = A.cols();
  if (p < 1 || n < p) {
    throw Error("thin_qr: need N >= p >= 1, got " + std::to_string(n) + "x" +
                std::to_string(p));
  }
  if (!A.allFinite()) throw Error("thin_qr: non-finite entries in input");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  QrFactor f;
  f.col_tol = rel_tol;
  f.R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  f.Q = Eigen::MatrixXd::Identity(n, p);
  f.Q.applyOnTheLeft(qr.householderQ());

  const double dmax = f.R.diagonal().cwiseAbs().maxCoeff();
  const double thresh = rel_tol * dmax;
  f.rank = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (std::abs(f.R(j, j)) > thresh) ++f.rank;
  }
  return f;
}

Eigen::MatrixXd r_solve(const Eigen::MatrixXd& R, const Eigen::MatrixXd& B) {
  return R.triangularView<Eigen::Upper>().solve(B);
}

Eigen::MatrixXd qr_solve(const QrFactor& qr, const Eigen::MatrixXd& B) {
  if (!qr.full_rank()) {
    // first column whose diagonal entry fell under the threshold
    const double thresh = qr.col_tol * qr.R.diagonal().cwiseAbs().maxCoeff();
    int offending = 0;
    for (Eigen::Index j = 0; j < qr.R.cols(); ++j) {
      if (std::abs(qr.R(j, j)) <= thresh) {
        offending = static_cast<int>(j);
        break;
      }
    }
    throw SingularError(
        "qr_solve: rank-deficient matrix (column " + std::to_string(offending) + ")",
        offending);
  }
  return r_solve(qr.R, qr.Q.transpose() * B);
}

Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::Index p = A.rows();
  if (A.cols() != p) throw Error("spd_solve: A must be square");
  if (B.rows() != p) throw Error("spd_solve: dimension mismatch");
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  const double scale = A.cwiseAbs().maxCoeff();
  if (scale > 0 && asym > 1e-10 * scale) {
    throw Error("spd_solve: A is not symmetric");
  }

  // Plain lower Cholesky so a failing pivot index can be reported exactly.
  const double diag_scale = A.diagonal().cwiseAbs().maxCoeff();
  const double pivot_floor =
      static_cast<double>(p) * std::numeric_limits<double>::epsilon() * diag_scale;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double d = A(j, j) - L.row(j).head(j).squaredNorm();
    if (!(d > pivot_floor) || !std::isfinite(d)) {
      throw SingularError("spd_solve: matrix not positive definite at pivot " +
                              std::to_string(j),
                          static_cast<int>(j));
    }
    L(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      L(i, j) = (A(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
    }
  }
  Eigen::MatrixXd Y = L.triangularView<Eigen::Lower>().solve(B);
  return L.transpose().triangularView<Eigen::Upper>().solve(Y);
}

}  // namespace csa
