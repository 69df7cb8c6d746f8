#include "csa/montecarlo.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <thread>

#include "csa/error.hpp"

namespace csa {

void validate_config(const McConfig& config) {
  if (config.K_grid.empty() || config.rho_grid.empty()) {
    throw UsageError("montecarlo: empty (K, rho) grid");
  }
  for (int K : config.K_grid) {
    if (K < 1) throw UsageError("montecarlo: K must be positive");
    if (config.n <= K + 2) {
      throw UsageError("montecarlo: sample size must exceed K + 2 (K=" +
                       std::to_string(K) + ", n=" + std::to_string(config.n) + ")");
    }
  }
  for (double rho : config.rho_grid) {
    if (!(rho >= 0.0 && rho < 1.0)) {
      throw UsageError("montecarlo: rho must lie in [0, 1)");
    }
  }
  if (config.reps < 1) throw UsageError("montecarlo: reps must be at least 1");
  if (config.r < 1) throw UsageError("montecarlo: r must be at least 1");
  if (!(config.r1sq > 0.0 && config.r1sq < 1.0)) {
    throw UsageError("montecarlo: r1sq must lie in (0, 1)");
  }
  if (!(std::abs(config.cov_eps_u) < 1.0)) {
    throw UsageError("montecarlo: |cov_eps_u| must be below 1");
  }
}

double pi_element(int K, double rho, double r1sq) {
  const double quad = K + static_cast<double>(K) * (K - 1) * rho;  // 1'Sigma_z 1
  return std::sqrt(r1sq / ((1.0 - r1sq) * quad));
}

double population_first_stage_r2(int K, double rho, double r1sq) {
  const double p = pi_element(K, rho, r1sq);
  const double quad = K + static_cast<double>(K) * (K - 1) * rho;
  const double signal = p * p * quad;  // pi'Sigma_z pi
  return signal / (signal + 1.0);
}

SampleDraw generate_sample_draw(int K, double rho, int n, std::mt19937_64& rng,
                                double beta0, double beta1, double cov_eps_u,
                                double r1sq) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sf = std::sqrt(rho);        // factor loading
  const double se = std::sqrt(1.0 - rho);  // idiosyncratic loading
  const double su = std::sqrt(1.0 - cov_eps_u * cov_eps_u);

  SampleDraw out;
  out.frame.Z_excl.resize(n, K);
  out.eps.resize(n);
  out.u.resize(n);

  // Fixed draw order per observation: factor, K idiosyncratic terms, then
  // the error pair.
  for (int i = 0; i < n; ++i) {
    const double g = normal(rng);
    for (int j = 0; j < K; ++j) {
      out.frame.Z_excl(i, j) = sf * g + se * normal(rng);
    }
    const double a = normal(rng);
    const double b = normal(rng);
    out.eps(i) = a;
    out.u(i) = cov_eps_u * a + su * b;
  }

  const double pi = pi_element(K, rho, r1sq);
  Eigen::VectorXd Y = pi * out.frame.Z_excl.rowwise().sum() + out.u;

  ModelFrame& f = out.frame;
  f.y = beta0 * Eigen::VectorXd::Ones(n) + beta1 * Y + out.eps;
  f.X.resize(n, 2);
  f.X.col(0) = Y;
  f.X.col(1) = Eigen::VectorXd::Ones(n);
  f.y_name = "y";
  f.x_names = {"Y", "_cons"};
  f.endo_names = {"Y"};
  f.z_names.resize(static_cast<std::size_t>(K));
  for (int j = 0; j < K; ++j) {
    f.z_names[static_cast<std::size_t>(j)] = "z" + std::to_string(j + 1);
  }
  f.N = n;
  f.d1 = 1;
  f.d2 = 0;
  f.K = K;
  f.has_constant = true;
  return out;
}

ModelFrame generate_sample(int K, double rho, int n, std::mt19937_64& rng,
                           double beta0, double beta1, double cov_eps_u,
                           double r1sq) {
  return generate_sample_draw(K, rho, n, rng, beta0, beta1, cov_eps_u, r1sq)
      .frame;
}

namespace {

struct RepOutcome {
  bool ols_ok = false, tsls_ok = false, csa_ok = false;
  double ols_b1 = 0.0, tsls_b1 = 0.0, csa_b1 = 0.0;
  int csa_k = 0;
};

RepOutcome one_rep(const McConfig& config, int K, double rho, int rep) {
  const std::uint64_t stream =
      derive_seed(config.seed, {static_cast<std::uint64_t>(K),
                                std::bit_cast<std::uint64_t>(rho),
                                static_cast<std::uint64_t>(rep)});
  std::mt19937_64 rng = make_engine(stream);
  ModelFrame frame = generate_sample(K, rho, config.n, rng, config.beta0,
                                     config.beta1, config.cov_eps_u, config.r1sq);

  RepOutcome out;
  try {
    out.ols_b1 = ols(frame.X, frame.y).b(0);
    out.ols_ok = true;
  } catch (const Error&) {
  }
  try {
    out.tsls_b1 = tsls(frame).b(0);
    out.tsls_ok = true;
  } catch (const Error&) {
  }
  try {
    Csa2slsOptions opts;
    opts.prelim = config.prelim_mode;
    opts.r = config.r;
    opts.seed = stream;  // subset plans follow the replication's own stream
    opts.mode = config.proj_mode;
    EstimationResult res = csa2sls(frame, opts);
    out.csa_b1 = res.b(0);
    out.csa_k = res.k_opt.value_or(0);
    out.csa_ok = true;
  } catch (const Error&) {
  }
  return out;
}

int worker_count(const McConfig& config, int reps) {
  int w = config.threads;
  if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  return std::min(w, reps);
}

/// Fills one preallocated slot per replication; slot order, not completion
/// order, drives aggregation, so the worker count never changes results.
std::vector<RepOutcome> run_reps(const McConfig& config, int K, double rho) {
  const int reps = config.reps;
  std::vector<RepOutcome> slots(static_cast<std::size_t>(reps));
  const int workers = worker_count(config, reps);

  if (workers == 1) {
    for (int i = 0; i < reps; ++i) slots[static_cast<std::size_t>(i)] = one_rep(config, K, rho, i + 1);
    return slots;
  }

  std::atomic<int> next{0};
  auto drain = [&] {
    for (int i = next.fetch_add(1); i < reps; i = next.fetch_add(1)) {
      slots[static_cast<std::size_t>(i)] = one_rep(config, K, rho, i + 1);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (auto& t : pool) t.join();
  return slots;
}

/// Accumulates deviations b1 - beta1, so bias and mse come out as plain
/// means with no cancellation between the sums.
struct DevAcc {
  long n = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double dev) {
    ++n;
    sum += dev;
    sumsq += dev * dev;
  }
};

McEstimatorCell summarize(const DevAcc& acc, int reps) {
  McEstimatorCell cell;
  cell.failures = reps - static_cast<int>(acc.n);
  if (acc.n == 0) {
    cell.mean_bias = std::numeric_limits<double>::quiet_NaN();
    cell.mse = std::numeric_limits<double>::quiet_NaN();
    return cell;
  }
  const double n = static_cast<double>(acc.n);
  cell.mean_bias = acc.sum / n;
  cell.mse = acc.sumsq / n;
  return cell;
}

}  // namespace

McCellResult run_cell(const McConfig& config, int K, double rho) {
  validate_config(config);
  std::vector<RepOutcome> slots = run_reps(config, K, rho);

  DevAcc ols_acc, tsls_acc, csa_acc;
  long k_sum = 0;
  for (const RepOutcome& rep : slots) {
    if (rep.ols_ok) ols_acc.add(rep.ols_b1 - config.beta1);
    if (rep.tsls_ok) tsls_acc.add(rep.tsls_b1 - config.beta1);
    if (rep.csa_ok) {
      csa_acc.add(rep.csa_b1 - config.beta1);
      k_sum += rep.csa_k;
    }
  }

  McCellResult cell;
  cell.K = K;
  cell.rho = rho;
  cell.ols = summarize(ols_acc, config.reps);
  cell.tsls = summarize(tsls_acc, config.reps);
  cell.csa2sls = summarize(csa_acc, config.reps);
  cell.mean_k_opt = csa_acc.n > 0
                        ? static_cast<double>(k_sum) / static_cast<double>(csa_acc.n)
                        : std::numeric_limits<double>::quiet_NaN();
  return cell;
}

std::vector<McCellResult> run_grid(const McConfig& config) {
  validate_config(config);
  std::vector<McCellResult> cells;
  cells.reserve(config.K_grid.size() * config.rho_grid.size());
  for (int K : config.K_grid) {
    for (double rho : config.rho_grid) {
      cells.push_back(run_cell(config, K, rho));
    }
  }
  return cells;
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_row(std::ostream& os, const McCellResult& cell, const char* name,
               const McEstimatorCell& est, double mean_k_opt) {
  os << cell.K << '\t' << fmt17(cell.rho) << '\t' << name << '\t'
     << fmt17(est.mean_bias) << '\t' << fmt17(est.mse) << '\t' << est.failures
     << '\t' << fmt17(mean_k_opt) << '\n';
}

}  // namespace

void write_tsv(std::ostream& os, const McConfig& config,
               const std::vector<McCellResult>& cells) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  os << "# n=" << config.n << " reps=" << config.reps << " seed=" << config.seed
     << " r=" << config.r << " prelim=" << prelim_mode_name(config.prelim_mode)
     << " proj=" << projection_mode_name(config.proj_mode)
     << " beta0=" << fmt17(config.beta0) << " beta1=" << fmt17(config.beta1)
     << " cov_eps_u=" << fmt17(config.cov_eps_u)
     << " r1sq=" << fmt17(config.r1sq) << '\n';
  os << "K\trho\testimator\tbias\tmse\tfailures\tmean_k_opt\n";
  for (const McCellResult& cell : cells) {
    write_row(os, cell, "ols", cell.ols, nan);
    write_row(os, cell, "tsls", cell.tsls, nan);
    write_row(os, cell, "csa2sls", cell.csa2sls, cell.mean_k_opt);
  }
}

std::vector<McCellResult> run_grid_to_file(const McConfig& config,
                                           const std::string& path) {
  std::vector<McCellResult> cells = run_grid(config);
  std::ofstream out(path, std::ios::binary);  // binary: keep LF endings as-is
  if (!out) throw Error("cannot write output file: " + path);
  write_tsv(out, config, cells);
  out.flush();
  if (!out) throw Error("cannot write output file: " + path);
  return cells;
}

}  // namespace csa
