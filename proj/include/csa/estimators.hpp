#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csa/dataframe.hpp"
#include "csa/rng.hpp"
#include "csa/subsets.hpp"

namespace csa {

/// How the averaged projection statistics are computed. Dense materializes
/// the N x N averaged projector; Streaming never allocates N x N and is the
/// default for large samples. Auto resolves per sample size.
enum class ProjectionMode { Auto, Dense, Streaming };

/// Sample-size threshold above which Auto resolves to Streaming.
inline constexpr Eigen::Index kDenseLimit = 2000;

ProjectionMode resolve_mode(ProjectionMode mode, Eigen::Index N);

const char* projection_mode_name(ProjectionMode mode);

/// Averaged first-stage quantities for one subset size k. With
/// P^k = (1/M_used) sum_m P_m and Xhat = P^k X:
///   XtPX      = X' P^k X
///   XhatTXhat = Xhat' Xhat = X' (P^k)^2 X   (P^k is symmetric)
///   trP2      = tr((P^k)^2)
/// Rank-deficient models are skipped and the average renormalized over the
/// models actually used.
struct ProjectionStats {
  int k = 0;
  Eigen::MatrixXd Xhat;        // N x d
  Eigen::MatrixXd XtPX;        // d x d
  Eigen::MatrixXd XhatTXhat;   // d x d
  Eigen::VectorXd XtPy;        // d
  double trP2 = 0.0;
  int M_used = 0;
  int M_skipped = 0;
};

/// One row of the subset-size selection table: the approximate-MSE score
/// at a candidate k. S is NaN when every model at that k was skipped.
struct AmseEntry {
  int k = 0;
  double S = 0.0;
  int M_used = 0;
  int M_skipped = 0;
};

struct EstimationResult {
  Eigen::VectorXd b;
  Eigen::MatrixXd V;
  Eigen::VectorXd se, z, p, ci_low, ci_high;
  double rmse = 0.0;
  Eigen::Index N = 0;
  int K = 0;
  std::optional<int> k_opt;
  std::string estimator;  // "ols" | "tsls" | "csa2sls"
  std::vector<AmseEntry> amse_table;
  int m_skipped_total = 0;
};

/// 95% two-sided normal critical value used for all confidence intervals.
inline constexpr double kZCrit95 = 1.959964;

/// Ordinary least squares with classical covariance sigma2 (X'X)^{-1},
/// sigma2 = e'e/N. Rank-deficient X raises SingularError naming the column.
EstimationResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Two-stage least squares using the full instrument set
/// [Z_excl | exogenous | constant]. Identical to the subset-averaged
/// estimator at k = K by construction (single full subset).
EstimationResult tsls(const ModelFrame& frame);

/// [Z_excl columns in `subset` | exogenous | constant], the per-model
/// first-stage regressor block.
Eigen::MatrixXd instrument_block(const ModelFrame& frame, const std::vector<int>& subset);

/// The full instrument matrix [Z_excl | exogenous | constant].
Eigen::MatrixXd full_instrument_matrix(const ModelFrame& frame);

/// First-stage coefficients Pi = (Z'Z)^{-1} Z'X through rank-revealing QR.
/// ok=false flags a numerically rank-deficient block (model to be skipped).
std::pair<Eigen::MatrixXd, bool> first_stage_fit(const Eigen::MatrixXd& Z_m,
                                                 const Eigen::MatrixXd& X);

/// Accumulates the averaged-projection statistics over all models in the
/// plan. Dense and streaming modes agree to rounding; streaming trades the
/// N x N projector for stored thin orthonormal bases. Throws
/// EstimationError when every model is rank-deficient.
ProjectionStats accumulate_projection_stats(const ModelFrame& frame,
                                            const SubsetPlan& plan,
                                            ProjectionMode mode);

/// Fills V, se, z, p, ci and rmse for coefficients b estimated from the
/// given projection statistics. V = sigma2 G^{-1} (Xhat'Xhat) G^{-T} with
/// G = X'P^k X collapses to the classical 2SLS covariance when P^k is
/// idempotent (k = K).
void inference_stats(const ModelFrame& frame, const ProjectionStats& stats,
                     const Eigen::VectorXd& b, EstimationResult& out);

/// Subset-averaged 2SLS at a fixed subset size k (d1 <= k <= K).
EstimationResult csa2sls_fixed_k(const ModelFrame& frame, int k,
                                 std::uint64_t r = 100,
                                 std::uint64_t seed = kDefaultSeed,
                                 ProjectionMode mode = ProjectionMode::Auto);

/// Coefficients from already-accumulated statistics: (X'P^k X)^{-1} X'P^k y.
Eigen::VectorXd solve_coefficients(const ProjectionStats& stats);

}  // namespace csa
