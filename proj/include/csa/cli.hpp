#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csa/amse.hpp"
#include "csa/dataframe.hpp"
#include "csa/estimators.hpp"
#include "csa/montecarlo.hpp"

namespace csa {

enum class Subcommand { Estimate, Montecarlo };

/// Parsed command line. Keyword flags throughout: the positional
/// `(endo = iv)` grammar invites silent misreads, so every component is
/// named explicitly.
struct CliSpec {
  Subcommand subcommand = Subcommand::Estimate;

  // estimate
  std::string data_path;
  std::string dep, exog, endo, iv;  // varlist strings, resolved against the header
  bool noconstant = false;
  bool large = false;    // force streaming projections
  bool onestep = false;  // one-step preliminary estimator (default Mallows)
  bool quiet = false;
  std::uint64_t r = 100;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::string> json_out;

  // montecarlo (seed/r/onestep/large above are folded in after parsing)
  McConfig mc;
  std::string mc_out = "montecarlo.tsv";

  std::string cmdline;               // the argv, joined by single spaces
  std::optional<std::string> help;   // set instead of fields when --help ran
};

/// Parses argv (argv[0] = program name). Throws UsageError on unknown
/// flags, missing required components, or out-of-range values; a help
/// request returns a spec with only `help` and `cmdline` set.
CliSpec parse_args(const std::vector<std::string>& argv);

/// The machine-readable mirror of a fit, serialized by emit_json.
struct StoredResults {
  Eigen::Index N = 0;
  int K = 0;
  double rmse = 0.0;
  std::string estimator;  // preliminary route: "mallows" | "onestep"
  std::string cmd = "csa2sls";
  std::string depvar;
  std::string cmdline;
  int k_opt = 0;
  std::vector<std::string> names;  // [endo..., exog..., _cons]
  Eigen::VectorXd b;
  Eigen::MatrixXd V;
};

/// General numeric display with at most `width` characters, one of which
/// is reserved for the sign: significant digits are chosen to fill the
/// budget and a leading "0." collapses to ".".
std::string stata_g(double v, int width);

/// Fixed-width coefficient table plus footer (instrumented/instruments
/// lists and the chosen subset size).
std::string render_report(const EstimationResult& result, const ModelFrame& frame);

/// Writes the stored results as one JSON object with fixed key order:
/// N, K, rmse, estimator, cmd, depvar, cmdline, k_opt, b, V.
void emit_json(const StoredResults& stored, const std::string& path);

/// Loads the data, builds the frame, selects k, estimates, prints the
/// report (unless quiet) and writes JSON when configured.
std::pair<EstimationResult, StoredResults> run_estimate(const CliSpec& spec,
                                                        std::ostream& out);

/// Runs the simulation grid with the parsed overrides, printing one
/// summary line per cell unless quiet, and writes the TSV.
std::vector<McCellResult> run_montecarlo(const CliSpec& spec, std::ostream& out);

/// Full entry point. Exit status: 0 on success, 2 for usage errors,
/// 1 for data or estimation failures.
int cli_main(const std::vector<std::string>& argv, std::ostream& out,
             std::ostream& err);

}  // namespace csa
