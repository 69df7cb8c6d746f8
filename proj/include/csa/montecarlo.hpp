#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "csa/amse.hpp"
#include "csa/dataframe.hpp"
#include "csa/estimators.hpp"
#include "csa/rng.hpp"

namespace csa {

/// Simulation design: equicorrelated instruments, one endogenous regressor,
/// calibrated first-stage strength, OLS / 2SLS / subset-averaged 2SLS
/// compared over a (K, rho) grid.
struct McConfig {
  std::vector<int> K_grid = {5, 10, 15, 20};
  std::vector<double> rho_grid = {0.0, 0.5, 0.9};
  int n = 100;
  int reps = 1000;
  double beta0 = 0.0;
  double beta1 = 0.1;
  double cov_eps_u = 0.9;  // covariance of the structural and first-stage errors
  double r1sq = 0.1;       // population first-stage R^2 the design is held at
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t r = 100;   // subset-sampling cap passed to the estimator
  PrelimMode prelim_mode = PrelimMode::Mallows;
  ProjectionMode proj_mode = ProjectionMode::Auto;
  int threads = 0;         // 0 = one worker per hardware thread
};

/// Throws UsageError when a grid value or count is out of range
/// (rho outside [0,1), n <= K+2, reps < 1, r < 1, empty grids).
void validate_config(const McConfig& config);

/// The common value of every first-stage coefficient:
/// sqrt(r1sq / ((1 - r1sq) * (K + K(K-1) rho))). With Sigma_z equicorrelated
/// and unit-diagonal this makes pi'Sigma_z pi / (pi'Sigma_z pi + 1) = r1sq.
double pi_element(int K, double rho, double r1sq);

/// The population first-stage R^2 implied by pi_element; equals r1sq by
/// construction (closed-form check, kept for calibration tests).
double population_first_stage_r2(int K, double rho, double r1sq);

/// One simulated sample plus the latent errors (exposed so their joint
/// distribution is testable).
struct SampleDraw {
  ModelFrame frame;
  Eigen::VectorXd eps;
  Eigen::VectorXd u;
};

SampleDraw generate_sample_draw(int K, double rho, int n, std::mt19937_64& rng,
                                double beta0 = 0.0, double beta1 = 0.1,
                                double cov_eps_u = 0.9, double r1sq = 0.1);

/// y_i = beta0 + beta1 Y_i + eps_i, Y_i = pi'z_i + u_i, with z_i drawn by a
/// one-factor construction (exact equicorrelation) and (eps_i, u_i)
/// bivariate normal with unit variances. Frame shape: d1=1, d2=0, constant.
ModelFrame generate_sample(int K, double rho, int n, std::mt19937_64& rng,
                           double beta0 = 0.0, double beta1 = 0.1,
                           double cov_eps_u = 0.9, double r1sq = 0.1);

/// Aggregates for one estimator within one (K, rho) cell. Replications
/// where the estimator raised are excluded from its averages and counted.
struct McEstimatorCell {
  double mean_bias = 0.0;
  double mse = 0.0;
  int failures = 0;
};

struct McCellResult {
  int K = 0;
  double rho = 0.0;
  McEstimatorCell ols;
  McEstimatorCell tsls;
  McEstimatorCell csa2sls;
  double mean_k_opt = 0.0;  // over successful csa2sls replications
};

/// Runs all replications of one cell. Every replication owns an RNG stream
/// keyed by (seed, K, rho, rep), so results do not depend on the worker
/// count or on which other cells run.
McCellResult run_cell(const McConfig& config, int K, double rho);

/// All cells of the grid, K-major in the given order.
std::vector<McCellResult> run_grid(const McConfig& config);

/// TSV emission: one metadata comment line, a header, then one row per
/// (cell, estimator). Floats carry 17 significant digits; mean_k_opt is
/// NaN on ols/tsls rows. LF line endings.
void write_tsv(std::ostream& os, const McConfig& config,
               const std::vector<McCellResult>& cells);

/// run_grid + write_tsv to a file. Throws Error when the path is not
/// writable.
std::vector<McCellResult> run_grid_to_file(const McConfig& config,
                                           const std::string& path);

}  // namespace csa
