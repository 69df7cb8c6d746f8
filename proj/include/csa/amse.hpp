#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "csa/dataframe.hpp"
#include "csa/estimators.hpp"

namespace csa {

/// Preliminary estimation route used to form the dispersion statistics
/// behind the subset-size criterion. OneStep is 2SLS with every
/// instrument; Mallows first selects a nested instrument count by a
/// Cp-type first-stage criterion.
enum class PrelimMode { Mallows, OneStep };

const char* prelim_mode_name(PrelimMode mode);

/// Pilot fit and the dispersion statistics derived from it. Scaled by 1/N:
///   H = f~'f~/N, sigma_eps2 = eps~'eps~/N, sigma_ueps = u~'eps~/N,
///   Sigma_u = u~'u~/N, with f~ the projection of X onto the preliminary
///   instrument span and u~ = X - f~.
/// The exogenous components of u~ are identically zero (those columns of X
/// lie inside every instrument span).
struct PreliminaryFit {
  Eigen::VectorXd beta_tilde;
  Eigen::VectorXd eps_tilde;   // y - X beta~
  Eigen::MatrixXd f_tilde;     // N x d fitted regressors
  Eigen::MatrixXd u_tilde;     // N x d first-stage residuals
  Eigen::MatrixXd H;           // d x d
  double sigma_eps2 = 0.0;
  Eigen::VectorXd sigma_ueps;  // d
  Eigen::MatrixXd Sigma_u;     // d x d
  Eigen::VectorXd lambda;      // d, weighting of the coefficient directions
  PrelimMode prelim_mode = PrelimMode::Mallows;
  int prelim_ivcount = 0;      // excluded instruments entering Z~
};

/// Selection table over the candidate grid k in {d1..K}. Entries whose
/// every model was skipped carry S = NaN and never win the argmin.
struct AmseTable {
  std::vector<AmseEntry> entries;
  int k_opt = 0;
};

/// Options shared by the selection-and-estimation pipeline.
struct Csa2slsOptions {
  PrelimMode prelim = PrelimMode::Mallows;
  std::uint64_t r = 100;
  std::uint64_t seed = kDefaultSeed;
  ProjectionMode mode = ProjectionMode::Auto;
  std::optional<Eigen::VectorXd> lambda;  // default: endogenous indicator
};

/// Computes the pilot coefficient and all dispersion statistics.
/// lambda defaults to the indicator of the endogenous coefficient block.
PreliminaryFit preliminary_estimate(const ModelFrame& frame, PrelimMode mode,
                                    const std::optional<Eigen::VectorXd>& lambda = {});

/// The sample approximate-MSE score at the plan behind `stats`:
///   S(k) = s2_le k^2/N + s2_e [ w' e_f w - (xi w)' H^{-1} (xi w) ]
/// with w = H^{-1} lambda, s_le = lambda'H^{-1} sigma_ueps, s2_le = s_le^2,
///   e_f  = A + Sigma_u (2k - tr((P^k)^2))/N
///   xi_f = A + Sigma_u k/N - Sigma_u
///   A    = X'(I - P^k)^2 X / N = (X'X - 2 X'P^kX + Xhat'Xhat)/N.
/// k counts excluded instruments only.
double amse_score(const ModelFrame& frame, const PreliminaryFit& prelim,
                  const ProjectionStats& stats);

/// Evaluates S over the full grid and picks the minimizer (smallest k on
/// ties). The grid always includes K, so plain 2SLS's subset is always a
/// candidate. Throws EstimationError when every k fails.
AmseTable select_optimal_k(const ModelFrame& frame, const Csa2slsOptions& opts);

/// Full pipeline: preliminary fit, grid search for k, and the final
/// subset-averaged estimate at the chosen k, with the selection table
/// attached to the result.
EstimationResult csa2sls(const ModelFrame& frame, const Csa2slsOptions& opts = {});

}  // namespace csa
