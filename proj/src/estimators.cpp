#include "csa/estimators.hpp"

#include <cmath>
#include <string>

#include "csa/error.hpp"
#include "csa/linalg.hpp"

namespace csa {

ProjectionMode resolve_mode(ProjectionMode mode, Eigen::Index N) {
  if (mode != ProjectionMode::Auto) return mode;
  return N > kDenseLimit ? ProjectionMode::Streaming : ProjectionMode::Dense;
}

const char* projection_mode_name(ProjectionMode mode) {
  switch (mode) {
    case ProjectionMode::Dense:
      return "dense";
    case ProjectionMode::Streaming:
      return "streaming";
    default:
      return "auto";
  }
}

namespace {

double normal_two_sided_p(double z) {
  if (!std::isfinite(z)) return std::isnan(z) ? z : 0.0;
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

void attach_inference(EstimationResult& out, const Eigen::VectorXd& b,
                      const Eigen::MatrixXd& V, double rmse) {
  const Eigen::Index d = b.size();
  out.b = b;
  out.V = 0.5 * (V + V.transpose());  // kill factorization roundoff
  out.rmse = rmse;
  out.se.resize(d);
  out.z.resize(d);
  out.p.resize(d);
  out.ci_low.resize(d);
  out.ci_high.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    out.se(j) = std::sqrt(std::max(0.0, out.V(j, j)));
    out.z(j) = b(j) / out.se(j);
    out.p(j) = normal_two_sided_p(out.z(j));
    out.ci_low(j) = b(j) - kZCrit95 * out.se(j);
    out.ci_high(j) = b(j) + kZCrit95 * out.se(j);
  }
}

}  // namespace

EstimationResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::Index N = X.rows();
  const Eigen::Index d = X.cols();
  if (N < d) throw Error("ols: fewer observations than regressors");

  QrFactor qr = thin_qr(X);
  Eigen::VectorXd b = qr_solve(qr, y);  // throws with the offending column index
  Eigen::VectorXd resid = y - X * b;
  const double sigma2 = resid.squaredNorm() / static_cast<double>(N);

  // (X'X)^{-1} = R^{-1} R^{-T}
  Eigen::MatrixXd Rinv = r_solve(qr.R, Eigen::MatrixXd::Identity(d, d));
  Eigen::MatrixXd V = sigma2 * (Rinv * Rinv.transpose());

  EstimationResult out;
  out.N = N;
  out.K = 0;
  out.estimator = "ols";
  attach_inference(out, b, V, std::sqrt(sigma2));
  return out;
}

Eigen::MatrixXd instrument_block(const ModelFrame& frame, const std::vector<int>& subset) {
  const int p = static_cast<int>(subset.size()) + frame.d2 + frame.n_const();
  Eigen::MatrixXd Z(frame.N, p);
  int c = 0;
  for (int j : subset) Z.col(c++) = frame.Z_excl.col(j);
  // exogenous regressors and the constant enter every instrument set
  Z.middleCols(c, frame.d2) = frame.X.middleCols(frame.d1, frame.d2);
  c += frame.d2;
  if (frame.has_constant) Z.col(c) = Eigen::VectorXd::Ones(frame.N);
  return Z;
}

Eigen::MatrixXd full_instrument_matrix(const ModelFrame& frame) {
  std::vector<int> all(static_cast<std::size_t>(frame.K));
  for (int j = 0; j < frame.K; ++j) all[static_cast<std::size_t>(j)] = j;
  return instrument_block(frame, all);
}

std::pair<Eigen::MatrixXd, bool> first_stage_fit(const Eigen::MatrixXd& Z_m,
                                                 const Eigen::MatrixXd& X) {
  QrFactor qr = thin_qr(Z_m);
  if (!qr.full_rank()) {
    return {Eigen::MatrixXd(), false};
  }
  return {r_solve(qr.R, qr.Q.transpose() * X), true};
}

namespace {

void check_plan(const ModelFrame& frame, const SubsetPlan& plan) {
  for (const auto& s : plan.subsets) {
    for (int j : s) {
      if (j < 0 || j >= frame.K) {
        throw Error("accumulate_projection_stats: subset index out of range");
      }
    }
  }
  const Eigen::Index p = plan.k + frame.d2 + frame.n_const();
  if (p > frame.N) {
    throw EstimationError(
        "accumulate_projection_stats: first-stage block wider than the sample (k=" +
        std::to_string(plan.k) + ")");
  }
}

ProjectionStats accumulate_dense(const ModelFrame& frame, const SubsetPlan& plan) {
  const Eigen::Index N = frame.N;
  ProjectionStats st;
  st.k = plan.k;

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N, N);
  for (const auto& subset : plan.subsets) {
    QrFactor qr = thin_qr(instrument_block(frame, subset));
    if (!qr.full_rank()) {
      ++st.M_skipped;
      continue;
    }
    P.selfadjointView<Eigen::Lower>().rankUpdate(qr.Q);  // P += Q Q'
    ++st.M_used;
  }
  if (st.M_used == 0) {
    throw EstimationError(
        "all first-stage models are rank-deficient at k=" + std::to_string(plan.k));
  }
  Eigen::MatrixXd Pfull = P.selfadjointView<Eigen::Lower>();
  Pfull /= static_cast<double>(st.M_used);
  const Eigen::MatrixXd& Pavg = Pfull;

  st.Xhat = Pavg * frame.X;
  st.XtPX = frame.X.transpose() * st.Xhat;
  st.XtPX = 0.5 * (st.XtPX + st.XtPX.transpose()).eval();
  st.XhatTXhat = st.Xhat.transpose() * st.Xhat;
  st.XtPy = st.Xhat.transpose() * frame.y;  // X'P y, P symmetric
  st.trP2 = Pavg.squaredNorm();             // tr(P^2) = ||P||_F^2
  return st;
}

ProjectionStats accumulate_streaming(const ModelFrame& frame, const SubsetPlan& plan) {
  const Eigen::Index N = frame.N;
  const int d = frame.d();
  ProjectionStats st;
  st.k = plan.k;

  Eigen::MatrixXd Xhat_sum = Eigen::MatrixXd::Zero(N, d);
  Eigen::MatrixXd XtPX_sum = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd XtPy_sum = Eigen::VectorXd::Zero(d);
  std::vector<Eigen::MatrixXd> bases;  // thin orthonormal basis per model
  bases.reserve(plan.subsets.size());

  for (const auto& subset : plan.subsets) {
    QrFactor qr = thin_qr(instrument_block(frame, subset));
    if (!qr.full_rank()) {
      ++st.M_skipped;
      continue;
    }
    const Eigen::MatrixXd QtX = qr.Q.transpose() * frame.X;  // p x d
    Xhat_sum.noalias() += qr.Q * QtX;
    XtPX_sum.noalias() += QtX.transpose() * QtX;  // X'P_m X
    XtPy_sum.noalias() += QtX.transpose() * (qr.Q.transpose() * frame.y);
    bases.push_back(std::move(qr.Q));
    ++st.M_used;
  }
  if (st.M_used == 0) {
    throw EstimationError(
        "all first-stage models are rank-deficient at k=" + std::to_string(plan.k));
  }
  const double M = static_cast<double>(st.M_used);

  st.Xhat = Xhat_sum / M;
  st.XtPX = XtPX_sum / M;
  st.XtPX = 0.5 * (st.XtPX + st.XtPX.transpose()).eval();
  st.XhatTXhat = st.Xhat.transpose() * st.Xhat;
  st.XtPy = XtPy_sum / M;

  // tr((P^k)^2) = (1/M^2) sum_{m,l} ||Q_m' Q_l||_F^2, never forming N x N
  double acc = 0.0;
  for (std::size_t m = 0; m < bases.size(); ++m) {
    acc += static_cast<double>(bases[m].cols());  // ||Q_m'Q_m||_F^2 = p
    for (std::size_t l = m + 1; l < bases.size(); ++l) {
      acc += 2.0 * (bases[m].transpose() * bases[l]).squaredNorm();
    }
  }
  st.trP2 = acc / (M * M);
  return st;
}

}  // namespace

ProjectionStats accumulate_projection_stats(const ModelFrame& frame,
                                            const SubsetPlan& plan,
                                            ProjectionMode mode) {
  check_plan(frame, plan);
  switch (resolve_mode(mode, frame.N)) {
    case ProjectionMode::Dense:
      return accumulate_dense(frame, plan);
    default:
      return accumulate_streaming(frame, plan);
  }
}

Eigen::VectorXd solve_coefficients(const ProjectionStats& stats) {
  try {
    return spd_solve(stats.XtPX, stats.XtPy);
  } catch (const SingularError& e) {
    throw SingularError(
        "averaged instruments too weak: X'P^k X is singular (k=" +
            std::to_string(stats.k) + "): " + e.what(),
        e.index());
  }
}

void inference_stats(const ModelFrame& frame, const ProjectionStats& stats,
                     const Eigen::VectorXd& b, EstimationResult& out) {
  if (!b.allFinite()) throw Error("inference_stats: non-finite coefficients");
  const double N = static_cast<double>(frame.N);
  Eigen::VectorXd resid = frame.y - frame.X * b;
  const double sigma2 = resid.squaredNorm() / N;

  // V = sigma2 G^{-1} (Xhat'Xhat) G^{-T}, G = X'P^k X
  Eigen::MatrixXd GinvA = spd_solve(stats.XtPX, stats.XhatTXhat);
  Eigen::MatrixXd V = sigma2 * spd_solve(stats.XtPX, GinvA.transpose());
  attach_inference(out, b, V, std::sqrt(sigma2));
}

namespace {

EstimationResult estimate_from_stats(const ModelFrame& frame,
                                     const ProjectionStats& stats,
                                     const std::string& tag) {
  EstimationResult out;
  out.N = frame.N;
  out.K = frame.K;
  out.estimator = tag;
  out.m_skipped_total = stats.M_skipped;
  Eigen::VectorXd b = solve_coefficients(stats);
  inference_stats(frame, stats, b, out);
  return out;
}

void check_estimable(const ModelFrame& frame) {
  if (frame.N < frame.d()) {
    throw EstimationError("not enough observations: N < d");
  }
  if (frame.K + frame.d2 + frame.n_const() < frame.d()) {
    throw EstimationError("order condition violated: K + d2 + const < d");
  }
}

}  // namespace

EstimationResult tsls(const ModelFrame& frame) {
  check_estimable(frame);
  SubsetPlan plan;
  plan.k = frame.K;
  plan.subsets = enumerate_k_subsets(frame.K, frame.K);  // the single full subset
  plan.M_exact_capped = 1;
  ProjectionStats stats = accumulate_projection_stats(frame, plan, ProjectionMode::Auto);
  return estimate_from_stats(frame, stats, "tsls");
}

EstimationResult csa2sls_fixed_k(const ModelFrame& frame, int k, std::uint64_t r,
                                 std::uint64_t seed, ProjectionMode mode) {
  check_estimable(frame);
  if (k < frame.d1 || k > frame.K) {
    throw Error("csa2sls_fixed_k: k must lie in [d1, K], got k=" + std::to_string(k));
  }
  SubsetPlan plan = build_subset_plan(frame.K, k, r, seed);
  ProjectionStats stats = accumulate_projection_stats(frame, plan, mode);
  EstimationResult out = estimate_from_stats(frame, stats, "csa2sls");
  out.k_opt = k;
  return out;
}

}  // namespace csa
