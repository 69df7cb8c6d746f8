#include "csa/dataframe.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "csa/error.hpp"

namespace csa {

namespace {

const double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& raw, Eigen::Index row, const std::string& col) {
  const std::string s = trim(raw);
  if (s.empty()) return kMissing;
  double v;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("load_csv: non-numeric cell at row " + std::to_string(row + 1) +
                     ", column " + col + ": '" + s + "'");
  }
  return v;
}

}  // namespace

int Table::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < column_names.size(); ++j) {
    if (column_names[j] == name) return static_cast<int>(j);
  }
  return -1;
}

const Eigen::VectorXd& Table::column(const std::string& name) const {
  int j = column_index(name);
  if (j < 0) throw Error("unknown variable: " + name);
  return columns[static_cast<std::size_t>(j)];
}

Table load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_csv: cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("load_csv: empty file: " + path);

  Table t;
  for (const auto& name : split_commas(line)) {
    std::string n = trim(name);
    if (n.empty()) throw ParseError("load_csv: empty column name in header");
    if (std::find(t.column_names.begin(), t.column_names.end(), n) !=
        t.column_names.end()) {
      throw ParseError("load_csv: duplicate column name: " + n);
    }
    t.column_names.push_back(n);
  }
  const std::size_t ncol = t.column_names.size();

  std::vector<std::vector<double>> cols(ncol);
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty() && in.peek() == EOF) break;  // trailing newline
    auto cells = split_commas(line);
    if (cells.size() != ncol) {
      throw ParseError("load_csv: row " + std::to_string(row + 1) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(ncol));
    }
    for (std::size_t j = 0; j < ncol; ++j) {
      cols[j].push_back(parse_cell(cells[j], row, t.column_names[j]));
    }
    ++row;
  }

  t.n_rows = row;
  t.columns.reserve(ncol);
  for (auto& c : cols) {
    t.columns.emplace_back(
        Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
  }
  return t;
}

namespace {

std::string with_commas(long long v) {
  std::string digits = std::to_string(v);
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count > 0 && count % 3 == 0) out.push_back(',');
    out.push_back(*it);
    ++count;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

std::string table_counts_line(const Table& table) {
  std::ostringstream os;
  os << "(" << table.column_names.size() << " vars, " << with_commas(table.n_rows)
     << " obs)";
  return os.str();
}

namespace {

// Splits "prefixN" into (prefix, N); returns false when the name does not
// end in digits.
bool split_numeric_suffix(const std::string& name, std::string& prefix, long& num) {
  std::size_t i = name.size();
  while (i > 0 && std::isdigit(static_cast<unsigned char>(name[i - 1]))) --i;
  if (i == name.size()) return false;
  prefix = name.substr(0, i);
  num = std::stol(name.substr(i));
  return true;
}

void push_name(std::vector<std::string>& out, std::set<std::string>& seen,
               const std::string& name, const std::vector<std::string>& available) {
  if (std::find(available.begin(), available.end(), name) == available.end()) {
    throw Error("unknown variable: " + name);
  }
  if (seen.insert(name).second) out.push_back(name);
}

}  // namespace

std::vector<std::string> expand_varlist(const std::string& spec,
                                        const std::vector<std::string>& available) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : spec) {
    if (c == ' ' || c == '\t' || c == ',' || c == '\n') {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(cur);

  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& tok : tokens) {
    auto dash = tok.find('-');
    if (dash == std::string::npos) {
      push_name(out, seen, tok, available);
      continue;
    }
    const std::string lhs = tok.substr(0, dash);
    const std::string rhs = tok.substr(dash + 1);
    std::string pa, pb;
    long na = 0, nb = 0;
    if (lhs.empty() || rhs.empty() || !split_numeric_suffix(lhs, pa, na) ||
        !split_numeric_suffix(rhs, pb, nb)) {
      throw Error("malformed range: " + tok);
    }
    if (pa != pb) {
      throw Error("mismatched prefixes in range: " + tok);
    }
    if (na > nb) {
      throw Error("range bounds out of order: " + tok);
    }
    for (long i = na; i <= nb; ++i) {
      push_name(out, seen, pa + std::to_string(i), available);
    }
  }
  return out;
}

ModelFrame build_model_frame(const Table& table, const std::string& dep,
                             const std::vector<std::string>& exog,
                             const std::vector<std::string>& endo,
                             const std::vector<std::string>& iv,
                             bool constant) {
  if (endo.empty()) throw Error("build_model_frame: no endogenous variable given");
  if (iv.empty()) throw Error("build_model_frame: no excluded instruments given");

  std::set<std::string> roles;
  auto claim = [&roles](const std::vector<std::string>& names, const char* role) {
    for (const auto& n : names) {
      if (!roles.insert(n).second) {
        throw Error(std::string("variable appears in more than one role: ") + n +
                    " (" + role + ")");
      }
    }
  };
  claim({dep}, "depvar");
  claim(endo, "endogenous");
  claim(exog, "exogenous");
  claim(iv, "instrument");

  std::vector<std::string> used;
  used.push_back(dep);
  used.insert(used.end(), endo.begin(), endo.end());
  used.insert(used.end(), exog.begin(), exog.end());
  used.insert(used.end(), iv.begin(), iv.end());

  std::vector<const Eigen::VectorXd*> cols;
  cols.reserve(used.size());
  for (const auto& n : used) cols.push_back(&table.column(n));

  // listwise deletion over the union of used columns
  std::vector<Eigen::Index> keep;
  keep.reserve(table.n_rows);
  for (Eigen::Index i = 0; i < table.n_rows; ++i) {
    bool ok = true;
    for (const auto* c : cols) {
      if (std::isnan((*c)(i))) {
        ok = false;
        break;
      }
    }
    if (ok) keep.push_back(i);
  }
  const Eigen::Index N = static_cast<Eigen::Index>(keep.size());
  if (N == 0) throw Error("build_model_frame: no observations left after listwise deletion");

  ModelFrame f;
  f.N = N;
  f.n_dropped = table.n_rows - N;
  f.d1 = static_cast<int>(endo.size());
  f.d2 = static_cast<int>(exog.size());
  f.K = static_cast<int>(iv.size());
  f.has_constant = constant;
  f.y_name = dep;
  f.endo_names = endo;
  f.exog_names = exog;
  f.z_names = iv;

  auto gather = [&keep, N](const Eigen::VectorXd& src) {
    Eigen::VectorXd out(N);
    for (Eigen::Index i = 0; i < N; ++i) out(i) = src(keep[i]);
    return out;
  };

  f.y = gather(table.column(dep));
  f.X.resize(N, f.d());
  f.Z_excl.resize(N, f.K);

  int xc = 0;
  for (const auto& n : endo) f.X.col(xc++) = gather(table.column(n));
  for (const auto& n : exog) f.X.col(xc++) = gather(table.column(n));
  if (constant) f.X.col(xc++) = Eigen::VectorXd::Ones(N);
  for (int j = 0; j < f.K; ++j) f.Z_excl.col(j) = gather(table.column(iv[j]));

  f.x_names = endo;
  f.x_names.insert(f.x_names.end(), exog.begin(), exog.end());
  if (constant) f.x_names.push_back("_cons");

  if (constant) {
    // a constant user column would be collinear with the intercept
    std::vector<std::string> user = endo;
    user.insert(user.end(), exog.begin(), exog.end());
    user.insert(user.end(), iv.begin(), iv.end());
    for (const auto& n : user) {
      const Eigen::VectorXd v = gather(table.column(n));
      if ((v.array() - v(0)).abs().maxCoeff() == 0.0) {
        throw Error("build_model_frame: variable " + n +
                    " is constant and collides with the intercept (use noconstant)");
      }
    }
  }
  return f;
}

}  // namespace csa
