#include "csa/cli.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "csa/error.hpp"

namespace csa {

namespace {

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

CliSpec parse_args(const std::vector<std::string>& argv) {
  CliSpec spec;
  spec.cmdline = join(argv, ' ');

  CLI::App app{"Complete subset averaging two-stage least squares"};
  app.require_subcommand(1);

  // varlists may arrive as several tokens or as one quoted/comma string;
  // both are joined here and expanded later against the file header
  std::vector<std::string> dep, exog, endo, iv;
  std::string json_path;

  CLI::App* est = app.add_subcommand(
      "estimate", "Fit the subset-averaged 2SLS estimator on a CSV data set");
  est->add_option("--data", spec.data_path, "CSV file with a header row")
      ->required();
  est->add_option("--dep", dep, "dependent variable")->required();
  est->add_option("--endo", endo, "endogenous regressors (varlist)")->required();
  est->add_option("--iv", iv, "excluded instruments (varlist, ranges like z1-z14)")
      ->required();
  est->add_option("--exog", exog, "included exogenous regressors (varlist)");
  est->add_flag("--noconstant", spec.noconstant, "suppress the intercept");
  est->add_flag("--large", spec.large,
                "streaming projections (never materialize the N x N matrix)");
  est->add_flag("--onestep", spec.onestep,
                "one-step preliminary estimator (default: Mallows)");
  est->add_flag("--quiet", spec.quiet, "suppress the printed report");
  est->add_option("--r", spec.r, "subset cap per k; sampled beyond it (default 100)")
      ->check(CLI::PositiveNumber);
  est->add_option("--seed", spec.seed, "RNG seed (default 2022)");
  est->add_option("--json", json_path, "write stored results to this JSON file");

  CLI::App* mc = app.add_subcommand(
      "montecarlo", "Bias/MSE simulation of OLS, 2SLS and CSA2SLS over a (K, rho) grid");
  mc->add_option("--K", spec.mc.K_grid, "instrument counts (default 5 10 15 20)");
  mc->add_option("--rho", spec.mc.rho_grid,
                 "instrument correlations in [0,1) (default 0 0.5 0.9)");
  mc->add_option("--n", spec.mc.n, "sample size (default 100)");
  mc->add_option("--reps", spec.mc.reps, "replications per cell (default 1000)")
      ->check(CLI::PositiveNumber);
  mc->add_option("--beta0", spec.mc.beta0, "true intercept (default 0)");
  mc->add_option("--beta1", spec.mc.beta1, "true slope (default 0.1)");
  mc->add_option("--cov", spec.mc.cov_eps_u,
                 "covariance of the structural and first-stage errors (default 0.9)");
  mc->add_option("--r1sq", spec.mc.r1sq,
                 "population first-stage R^2 the design is held at (default 0.1)");
  mc->add_option("--threads", spec.mc.threads,
                 "worker threads (default: one per hardware thread)");
  mc->add_option("--out", spec.mc_out, "TSV output path (default montecarlo.tsv)");
  mc->add_option("--r", spec.r, "subset cap per k (default 100)")
      ->check(CLI::PositiveNumber);
  mc->add_option("--seed", spec.seed, "RNG seed (default 2022)");
  mc->add_flag("--onestep", spec.onestep,
               "one-step preliminary estimator (default: Mallows)");
  mc->add_flag("--large", spec.large, "streaming projections");
  mc->add_flag("--quiet", spec.quiet, "suppress per-cell summaries");

  std::vector<const char*> cargv;
  cargv.reserve(argv.size());
  for (const std::string& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    auto parsed = app.get_subcommands();
    spec.help = parsed.empty() ? app.help() : parsed.front()->help();
    return spec;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  spec.subcommand = mc->parsed() ? Subcommand::Montecarlo : Subcommand::Estimate;
  spec.dep = join(dep, ' ');
  spec.exog = join(exog, ' ');
  spec.endo = join(endo, ' ');
  spec.iv = join(iv, ' ');
  if (!json_path.empty()) spec.json_out = json_path;

  // shared estimator options feed the simulation config too
  spec.mc.seed = spec.seed;
  spec.mc.r = spec.r;
  spec.mc.prelim_mode = spec.onestep ? PrelimMode::OneStep : PrelimMode::Mallows;
  spec.mc.proj_mode = spec.large ? ProjectionMode::Streaming : ProjectionMode::Auto;
  return spec;
}

namespace {

StoredResults make_stored(const EstimationResult& result, const ModelFrame& frame,
                          const CliSpec& spec) {
  StoredResults st;
  st.N = result.N;
  st.K = result.K;
  st.rmse = result.rmse;
  st.estimator =
      prelim_mode_name(spec.onestep ? PrelimMode::OneStep : PrelimMode::Mallows);
  st.depvar = frame.y_name;
  st.cmdline = spec.cmdline;
  st.k_opt = result.k_opt.value_or(0);
  st.names = frame.x_names;
  st.b = result.b;
  st.V = result.V;
  return st;
}

std::string g4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::pair<EstimationResult, StoredResults> run_estimate(const CliSpec& spec,
                                                        std::ostream& out) {
  Table table = load_csv(spec.data_path);
  if (!spec.quiet) out << table_counts_line(table) << '\n';

  std::vector<std::string> dep = expand_varlist(spec.dep, table.column_names);
  if (dep.size() != 1) {
    throw UsageError("exactly one dependent variable is required, got " +
                     std::to_string(dep.size()));
  }
  std::vector<std::string> exog =
      spec.exog.empty() ? std::vector<std::string>{}
                        : expand_varlist(spec.exog, table.column_names);
  std::vector<std::string> endo = expand_varlist(spec.endo, table.column_names);
  std::vector<std::string> iv = expand_varlist(spec.iv, table.column_names);

  ModelFrame frame =
      build_model_frame(table, dep.front(), exog, endo, iv, !spec.noconstant);
  if (!spec.quiet && frame.n_dropped > 0) {
    out << "(" << frame.n_dropped << " obs dropped due to missing values)\n";
  }

  Csa2slsOptions opts;
  opts.prelim = spec.onestep ? PrelimMode::OneStep : PrelimMode::Mallows;
  opts.r = spec.r;
  opts.seed = spec.seed;
  opts.mode = spec.large ? ProjectionMode::Streaming : ProjectionMode::Auto;

  EstimationResult result = csa2sls(frame, opts);
  if (!spec.quiet) out << render_report(result, frame);

  StoredResults stored = make_stored(result, frame, spec);
  if (spec.json_out) emit_json(stored, *spec.json_out);
  return {result, stored};
}

std::vector<McCellResult> run_montecarlo(const CliSpec& spec, std::ostream& out) {
  const McConfig& config = spec.mc;
  validate_config(config);

  std::vector<McCellResult> cells;
  cells.reserve(config.K_grid.size() * config.rho_grid.size());
  for (int K : config.K_grid) {
    for (double rho : config.rho_grid) {
      McCellResult cell = run_cell(config, K, rho);
      if (!spec.quiet) {
        out << "K=" << cell.K << " rho=" << g4(cell.rho)
            << " | ols bias=" << g4(cell.ols.mean_bias)
            << " mse=" << g4(cell.ols.mse)
            << " | tsls bias=" << g4(cell.tsls.mean_bias)
            << " mse=" << g4(cell.tsls.mse)
            << " | csa2sls bias=" << g4(cell.csa2sls.mean_bias)
            << " mse=" << g4(cell.csa2sls.mse)
            << " mean_k=" << g4(cell.mean_k_opt);
        const int failures =
            cell.ols.failures + cell.tsls.failures + cell.csa2sls.failures;
        if (failures > 0) {
          out << " failures=" << cell.ols.failures << '/' << cell.tsls.failures
              << '/' << cell.csa2sls.failures;
        }
        out << '\n';
      }
      cells.push_back(cell);
    }
  }

  std::ofstream file(spec.mc_out, std::ios::binary);
  if (!file) throw Error("cannot write output file: " + spec.mc_out);
  write_tsv(file, config, cells);
  file.flush();
  if (!file) throw Error("cannot write output file: " + spec.mc_out);
  if (!spec.quiet) out << "wrote " << spec.mc_out << '\n';
  return cells;
}

int cli_main(const std::vector<std::string>& argv, std::ostream& out,
             std::ostream& err) {
  CliSpec spec;
  try {
    spec = parse_args(argv);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  if (spec.help) {
    out << *spec.help;
    return 0;
  }
  try {
    if (spec.subcommand == Subcommand::Estimate) {
      run_estimate(spec, out);
    } else {
      run_montecarlo(spec, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace csa
