#include "csa/amse.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "csa/error.hpp"
#include "csa/linalg.hpp"
#include "csa/subsets.hpp"

namespace csa {

const char* prelim_mode_name(PrelimMode mode) {
  return mode == PrelimMode::Mallows ? "mallows" : "onestep";
}

namespace {

void check_prelim_frame(const ModelFrame& frame) {
  if (frame.N < frame.d()) {
    throw EstimationError("not enough observations: N < d");
  }
  if (frame.K < frame.d1) {
    throw EstimationError(
        "order condition violated: fewer excluded instruments than endogenous "
        "regressors");
  }
}

std::vector<int> nested_subset(int j) {
  std::vector<int> s(static_cast<std::size_t>(j));
  std::iota(s.begin(), s.end(), 0);
  return s;
}

QrFactor prelim_design_qr(const ModelFrame& frame, int j) {
  QrFactor qr = thin_qr(instrument_block(frame, nested_subset(j)));
  if (!qr.full_rank()) {
    throw SingularError(
        "singular preliminary design: instrument block is rank-deficient at " +
        std::to_string(j) + " instruments");
  }
  return qr;
}

/// Nested Mallows-Cp choice of the pilot instrument count: fit the
/// endogenous block on [z_1..z_j | exog | const] in the user-given
/// instrument order and charge every first-stage regressor twice the
/// full-model residual variance, once per endogenous equation.
int mallows_ivcount(const ModelFrame& frame) {
  const int K = frame.K;
  const double N = static_cast<double>(frame.N);
  const Eigen::MatrixXd X1 = frame.X.leftCols(frame.d1);

  std::vector<double> rss(static_cast<std::size_t>(K) + 1, 0.0);
  for (int j = frame.d1; j <= K; ++j) {
    QrFactor qr = prelim_design_qr(frame, j);
    rss[static_cast<std::size_t>(j)] =
        (X1 - qr.Q * (qr.Q.transpose() * X1)).squaredNorm();
  }
  const double sigma2_full = rss[static_cast<std::size_t>(K)] / N;

  int jstar = frame.d1;
  double best = std::numeric_limits<double>::infinity();
  for (int j = frame.d1; j <= K; ++j) {
    const double penalty =
        2.0 * sigma2_full * (j + frame.d2 + frame.n_const()) * frame.d1;
    const double score = rss[static_cast<std::size_t>(j)] + penalty;
    if (score < best) {  // strict: ties resolve to the smaller count
      best = score;
      jstar = j;
    }
  }
  return jstar;
}

}  // namespace

PreliminaryFit preliminary_estimate(const ModelFrame& frame, PrelimMode mode,
                                    const std::optional<Eigen::VectorXd>& lambda) {
  check_prelim_frame(frame);
  const int d = frame.d();
  const double N = static_cast<double>(frame.N);

  const int jstar = mode == PrelimMode::OneStep ? frame.K : mallows_ivcount(frame);
  QrFactor qr = prelim_design_qr(frame, jstar);

  const Eigen::MatrixXd QtX = qr.Q.transpose() * frame.X;  // p x d
  const Eigen::VectorXd Qty = qr.Q.transpose() * frame.y;

  // X'P~X = (Q'X)'(Q'X); beta~ is 2SLS on the pilot instrument set
  Eigen::MatrixXd G = QtX.transpose() * QtX;
  G = 0.5 * (G + G.transpose()).eval();

  PreliminaryFit fit;
  fit.prelim_mode = mode;
  fit.prelim_ivcount = jstar;
  try {
    fit.beta_tilde = spd_solve(G, QtX.transpose() * Qty);
  } catch (const SingularError& e) {
    throw SingularError(std::string("singular preliminary design: ") + e.what(),
                        e.index());
  }
  fit.eps_tilde = frame.y - frame.X * fit.beta_tilde;
  fit.f_tilde = qr.Q * QtX;
  fit.u_tilde = frame.X - fit.f_tilde;
  fit.H = G / N;
  fit.sigma_eps2 = fit.eps_tilde.squaredNorm() / N;
  fit.sigma_ueps = fit.u_tilde.transpose() * fit.eps_tilde / N;
  fit.Sigma_u = fit.u_tilde.transpose() * fit.u_tilde / N;
  fit.Sigma_u = 0.5 * (fit.Sigma_u + fit.Sigma_u.transpose()).eval();

  if (lambda.has_value()) {
    if (lambda->size() != d || !lambda->allFinite()) {
      throw Error("lambda must be a finite vector of length d");
    }
    fit.lambda = *lambda;
  } else {
    // default weighting: the endogenous-coefficient block
    fit.lambda = Eigen::VectorXd::Zero(d);
    fit.lambda.head(frame.d1).setOnes();
  }
  return fit;
}

double amse_score(const ModelFrame& frame, const PreliminaryFit& prelim,
                  const ProjectionStats& stats) {
  const double N = static_cast<double>(frame.N);
  const double k = static_cast<double>(stats.k);
  if (prelim.lambda.size() != frame.d()) {
    throw Error("amse_score: lambda length does not match the frame");
  }

  Eigen::VectorXd w;  // H^{-1} lambda
  try {
    w = spd_solve(prelim.H, prelim.lambda);
  } catch (const SingularError& e) {
    throw SingularError(std::string("singular H in approximate-MSE score: ") +
                            e.what(),
                        e.index());
  }
  const double sigma_le = w.dot(prelim.sigma_ueps);  // lambda'H^{-1}sigma_ueps

  // A = X'(I - P^k)^2 X / N, assembled from the accumulated cross-products
  Eigen::MatrixXd A =
      (frame.X.transpose() * frame.X - 2.0 * stats.XtPX + stats.XhatTXhat) / N;
  A = 0.5 * (A + A.transpose()).eval();

  const Eigen::MatrixXd e_f = A + prelim.Sigma_u * ((2.0 * k - stats.trP2) / N);
  const Eigen::MatrixXd xi_f = A + prelim.Sigma_u * (k / N) - prelim.Sigma_u;

  const Eigen::VectorXd xw = xi_f * w;
  const Eigen::VectorXd Hinv_xw = spd_solve(prelim.H, xw);
  const double spread = w.dot(e_f * w) - xw.dot(Hinv_xw);
  return sigma_le * sigma_le * k * k / N + prelim.sigma_eps2 * spread;
}

namespace {

struct GridSearch {
  AmseTable table;
  ProjectionStats best;  // statistics at table.k_opt, reusable for estimation
  int m_skipped_total = 0;
};

GridSearch search_grid(const ModelFrame& frame, const PreliminaryFit& prelim,
                       const Csa2slsOptions& opts) {
  // Surface a singular H once, up front, rather than as K identical
  // per-candidate failures.
  (void)spd_solve(prelim.H, prelim.lambda);

  GridSearch gs;
  double best_S = std::numeric_limits<double>::infinity();
  int best_k = -1;
  for (int k = frame.d1; k <= frame.K; ++k) {
    SubsetPlan plan = build_subset_plan(frame.K, k, opts.r, opts.seed);
    AmseEntry entry;
    entry.k = k;
    try {
      ProjectionStats st = accumulate_projection_stats(frame, plan, opts.mode);
      entry.S = amse_score(frame, prelim, st);
      entry.M_used = st.M_used;
      entry.M_skipped = st.M_skipped;
      if (std::isfinite(entry.S) && entry.S < best_S) {  // ties keep smaller k
        best_S = entry.S;
        best_k = k;
        gs.best = std::move(st);
      }
    } catch (const EstimationError&) {
      // every model at this k was unusable; keep the row, exclude it from
      // the argmin
      entry.S = std::numeric_limits<double>::quiet_NaN();
      entry.M_used = 0;
      entry.M_skipped = static_cast<int>(plan.M());
    }
    gs.m_skipped_total += entry.M_skipped;
    gs.table.entries.push_back(entry);
  }
  if (best_k < 0) {
    throw EstimationError(
        "subset-size selection failed: no candidate k produced a usable model");
  }
  gs.table.k_opt = best_k;
  return gs;
}

}  // namespace

AmseTable select_optimal_k(const ModelFrame& frame, const Csa2slsOptions& opts) {
  PreliminaryFit prelim = preliminary_estimate(frame, opts.prelim, opts.lambda);
  return search_grid(frame, prelim, opts).table;
}

EstimationResult csa2sls(const ModelFrame& frame, const Csa2slsOptions& opts) {
  PreliminaryFit prelim = preliminary_estimate(frame, opts.prelim, opts.lambda);
  GridSearch gs = search_grid(frame, prelim, opts);

  EstimationResult out;
  out.N = frame.N;
  out.K = frame.K;
  out.estimator = "csa2sls";
  Eigen::VectorXd b = solve_coefficients(gs.best);
  inference_stats(frame, gs.best, b, out);
  out.k_opt = gs.table.k_opt;
  out.amse_table = std::move(gs.table.entries);
  out.m_skipped_total = gs.m_skipped_total;
  return out;
}

}  // namespace csa
