#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "csa/cli.hpp"
#include "csa/error.hpp"
#include "json.hpp"

namespace csa {

namespace {

std::string rjust(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// "0.123" -> ".123", "-0.123" -> "-.123"
std::string strip_leading_zero(std::string s) {
  if (s.rfind("0.", 0) == 0) {
    s.erase(0, 1);
  } else if (s.rfind("-0.", 0) == 0) {
    s.erase(1, 1);
  }
  return s;
}

}  // namespace

std::string stata_g(double v, int width) {
  if (std::isnan(v)) return ".";
  if (v == 0.0) return "0";
  const int budget = width - (v >= 0.0 ? 1 : 0);  // sign slot always reserved
  for (int digits = 8; digits >= 1; --digits) {
    char spec[8];
    std::snprintf(spec, sizeof spec, "%%.%dg", digits);
    std::string s = strip_leading_zero(fmt(spec, v));
    if (static_cast<int>(s.size()) <= budget) return s;
  }
  // nothing fits in plain notation; use the shortest exponent form
  for (int digits = 6; digits >= 0; --digits) {
    char spec[8];
    std::snprintf(spec, sizeof spec, "%%.%de", digits);
    std::string s = fmt(spec, v);
    if (static_cast<int>(s.size()) <= budget) return s;
  }
  return fmt("%.0e", v);
}

namespace {

std::string header_field(const std::string& label, const std::string& value) {
  return label + std::string(14 - label.size(), ' ') + "= " + value;
}

void footer_list(std::ostream& os, const std::string& label,
                 const std::vector<std::string>& names) {
  std::string line = label + std::string(13 - label.size(), ' ') + ": ";
  for (const std::string& name : names) {
    if (line.size() + name.size() + 1 > 78) {
      os << line << '\n';
      line.clear();
    }
    line += name + ' ';
  }
  os << line << '\n';
}

}  // namespace

std::string render_report(const EstimationResult& result, const ModelFrame& frame) {
  static const std::string kRule(78, '-');
  static const std::string kMidRule = std::string(13, '-') + "+" + std::string(64, '-');
  const Eigen::Index d = result.b.size();

  std::ostringstream os;
  os << '\n';
  os << '\n';
  os << "Complete Subset Model Averaging 2SLS Regression      "
     << header_field("Number of obs", std::to_string(result.N)) << '\n';
  os << std::string(53, ' ')
     << header_field("Number of IVs", std::to_string(result.K)) << '\n';
  os << std::string(53, ' ')
     << header_field("Root MSE", stata_g(result.rmse, 10)) << '\n';
  os << '\n';
  os << '\n';
  os << kRule << '\n';
  os << rjust(frame.y_name, 12)
     << " |      Coef.   Std. Err.      z    P>|z|     [95% Conf. Interval]\n";
  os << kMidRule << '\n';
  for (Eigen::Index j = 0; j < d; ++j) {
    os << rjust(frame.x_names[static_cast<std::size_t>(j)], 12) << " |"
       << rjust(stata_g(result.b(j), 9), 11)
       << rjust(stata_g(result.se(j), 9), 11)
       << rjust(fmt("%.2f", result.z(j)), 9)
       << rjust(fmt("%.3f", result.p(j)), 8)
       << rjust(stata_g(result.ci_low(j), 9), 13)
       << rjust(stata_g(result.ci_high(j), 9), 12) << '\n';
  }
  os << kRule << '\n';
  footer_list(os, "Instrumented", frame.endo_names);
  footer_list(os, "Instruments", frame.z_names);
  os << "optimal k    : "
     << (result.k_opt.has_value() ? std::to_string(*result.k_opt) : ".") << '\n';
  os << kRule << '\n';
  return os.str();
}

void emit_json(const StoredResults& stored, const std::string& path) {
  nlohmann::ordered_json j;
  j["N"] = stored.N;
  j["K"] = stored.K;
  j["rmse"] = stored.rmse;
  j["estimator"] = stored.estimator;
  j["cmd"] = stored.cmd;
  j["depvar"] = stored.depvar;
  j["cmdline"] = stored.cmdline;
  j["k_opt"] = stored.k_opt;

  nlohmann::ordered_json jb = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < stored.names.size(); ++i) {
    jb[stored.names[i]] = stored.b(static_cast<Eigen::Index>(i));
  }
  j["b"] = std::move(jb);

  nlohmann::ordered_json jV = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < stored.names.size(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (std::size_t l = 0; l < stored.names.size(); ++l) {
      row[stored.names[l]] = stored.V(static_cast<Eigen::Index>(i),
                                      static_cast<Eigen::Index>(l));
    }
    jV[stored.names[i]] = std::move(row);
  }
  j["V"] = std::move(jV);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write output file: " + path);
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw Error("cannot write output file: " + path);
}

}  // namespace csa
