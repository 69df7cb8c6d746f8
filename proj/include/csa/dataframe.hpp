#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace csa {

/// Rectangular numeric data set read from CSV. Missing cells are NaN.
struct Table {
  std::vector<std::string> column_names;
  std::vector<Eigen::VectorXd> columns;  // all length n_rows
  Eigen::Index n_rows = 0;

  int column_index(const std::string& name) const;
  const Eigen::VectorXd& column(const std::string& name) const;
};

/// Reads a comma-separated file: header row of names, then numeric rows.
/// Empty cells become NaN (missing). Ragged rows and non-numeric cells
/// raise ParseError naming the data row and column.
Table load_csv(const std::string& path);

/// "(12 vars, 206 obs)" counts line, thousands-separated observations.
std::string table_counts_line(const Table& table);

/// Expands a whitespace/comma separated variable list. Supports numeric
/// range forms like "z1-z14" (identical prefixes, ascending). The result
/// keeps first-appearance order, drops duplicates, and every name must
/// exist in `available`.
std::vector<std::string> expand_varlist(const std::string& spec,
                                        const std::vector<std::string>& available);

/// Data arranged for estimation. X columns are ordered
/// [endogenous | included exogenous | constant]; Z_excl holds only the K
/// excluded instruments. Exogenous columns and the constant are appended
/// to every first-stage instrument set downstream.
struct ModelFrame {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;       // N x d
  Eigen::MatrixXd Z_excl;  // N x K

  std::string y_name;
  std::vector<std::string> x_names;  // endo..., exog..., "_cons"
  std::vector<std::string> endo_names;
  std::vector<std::string> exog_names;
  std::vector<std::string> z_names;

  Eigen::Index N = 0;
  int d1 = 0;  // endogenous regressors
  int d2 = 0;  // included exogenous regressors
  int K = 0;   // excluded instruments
  bool has_constant = true;
  Eigen::Index n_dropped = 0;  // rows removed by listwise deletion

  int n_const() const { return has_constant ? 1 : 0; }
  int d() const { return d1 + d2 + n_const(); }
};

/// Assembles the frame with listwise deletion over all used columns.
/// Errors: overlapping roles, unknown names, zero rows after deletion,
/// or a constant user column colliding with the requested intercept.
ModelFrame build_model_frame(const Table& table, const std::string& dep,
                             const std::vector<std::string>& exog,
                             const std::vector<std::string>& endo,
                             const std::vector<std::string>& iv,
                             bool constant);

}  // namespace csa
