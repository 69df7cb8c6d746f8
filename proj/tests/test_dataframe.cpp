#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "csa/dataframe.hpp"
#include "csa/error.hpp"

namespace {

// Writes `text` to a scratch file and removes it on scope exit.
struct ScratchCsv {
  std::string path;
  explicit ScratchCsv(const std::string& text, const char* name) : path(name) {
    std::ofstream out(path, std::ios::binary);
    out << text;
  }
  ~ScratchCsv() { std::remove(path.c_str()); }
};

const std::vector<std::string> kNames = {"y", "x", "w", "z1", "z2", "z3"};

}  // namespace

TEST_CASE("load_csv parses numbers, names and missing cells") {
  ScratchCsv f(
      "y,x,z1\n"
      "1.5,2,3\n"
      "-0.25,,1e3\n"
      " 4 ,5,6\n",
      "df_ok.csv");
  const csa::Table t = csa::load_csv(f.path);

  CHECK(t.column_names == std::vector<std::string>{"y", "x", "z1"});
  CHECK(t.n_rows == 3);
  CHECK(t.column("y")(0) == 1.5);
  CHECK(t.column("y")(1) == -0.25);
  CHECK(t.column("y")(2) == 4.0);      // padded cells are trimmed
  CHECK(std::isnan(t.column("x")(1)));  // empty -> missing
  CHECK(t.column("z1")(1) == 1000.0);
  CHECK(t.column_index("z1") == 2);
  CHECK(t.column_index("nope") == -1);
  CHECK_THROWS_AS(t.column("nope"), csa::Error);
}

TEST_CASE("load_csv rejects malformed input with located messages") {
  ScratchCsv bad("y,x\n1,2\n3,oops\n", "df_bad.csv");
  CHECK_THROWS_WITH_AS(csa::load_csv(bad.path),
                       "load_csv: non-numeric cell at row 2, column x: 'oops'",
                       csa::ParseError);

  ScratchCsv ragged("y,x\n1,2\n3\n", "df_ragged.csv");
  CHECK_THROWS_AS(csa::load_csv(ragged.path), csa::ParseError);

  ScratchCsv dup("y,x,y\n1,2,3\n", "df_dup.csv");
  CHECK_THROWS_AS(csa::load_csv(dup.path), csa::ParseError);

  ScratchCsv blank("y,,x\n1,2,3\n", "df_blank.csv");
  CHECK_THROWS_AS(csa::load_csv(blank.path), csa::ParseError);

  CHECK_THROWS_AS(csa::load_csv("no_such_file.csv"), csa::ParseError);
}

TEST_CASE("table_counts_line uses thousands separators") {
  csa::Table t;
  t.column_names.assign(54, "");
  t.n_rows = 2217;
  CHECK(csa::table_counts_line(t) == "(54 vars, 2,217 obs)");
  t.column_names.assign(12, "");
  t.n_rows = 206;
  CHECK(csa::table_counts_line(t) == "(12 vars, 206 obs)");
  t.n_rows = 1234567;
  CHECK(csa::table_counts_line(t) == "(12 vars, 1,234,567 obs)");
}

TEST_CASE("expand_varlist handles names, ranges and separators") {
  CHECK(csa::expand_varlist("y x", kNames) == std::vector<std::string>{"y", "x"});
  CHECK(csa::expand_varlist("z1-z3", kNames) ==
        std::vector<std::string>{"z1", "z2", "z3"});
  CHECK(csa::expand_varlist("x, z1-z2,w", kNames) ==
        std::vector<std::string>{"x", "z1", "z2", "w"});
  // first-appearance dedup
  CHECK(csa::expand_varlist("z2 z1-z3", kNames) ==
        std::vector<std::string>{"z2", "z1", "z3"});
  CHECK(csa::expand_varlist("z2-z2", kNames) == std::vector<std::string>{"z2"});
}

TEST_CASE("expand_varlist rejects unknown names and malformed ranges") {
  CHECK_THROWS_AS(csa::expand_varlist("q", kNames), csa::Error);
  CHECK_THROWS_AS(csa::expand_varlist("z1-z9", kNames), csa::Error);   // z4 missing
  CHECK_THROWS_AS(csa::expand_varlist("z3-z1", kNames), csa::Error);   // descending
  CHECK_THROWS_AS(csa::expand_varlist("z1-w", kNames), csa::Error);    // no suffix
  CHECK_THROWS_AS(csa::expand_varlist("z1-x1", kNames), csa::Error);   // prefixes differ
  CHECK_THROWS_AS(csa::expand_varlist("-z1", kNames), csa::Error);
  CHECK_THROWS_AS(csa::expand_varlist("z1-", kNames), csa::Error);
}

TEST_CASE("build_model_frame lays out [endo | exog | const] and drops missing rows") {
  ScratchCsv f(
      "y,x,w,z1,z2\n"
      "1,2,3,4,5\n"
      "2,3,4,5,6\n"
      "3,,5,6,7\n"      // missing x -> dropped
      "4,5,6,7,8\n"
      "5,6,7,8,\n",     // missing z2 -> dropped
      "df_frame.csv");
  const csa::Table t = csa::load_csv(f.path);
  const csa::ModelFrame frame =
      csa::build_model_frame(t, "y", {"w"}, {"x"}, {"z1", "z2"}, true);

  CHECK(frame.N == 3);
  CHECK(frame.n_dropped == 2);
  CHECK(frame.d1 == 1);
  CHECK(frame.d2 == 1);
  CHECK(frame.K == 2);
  CHECK(frame.d() == 3);
  CHECK(frame.has_constant);
  CHECK(frame.y_name == "y");
  CHECK(frame.x_names == std::vector<std::string>{"x", "w", "_cons"});
  CHECK(frame.z_names == std::vector<std::string>{"z1", "z2"});

  // kept rows are 1, 2, 4 of the file
  Eigen::VectorXd y_want(3);
  y_want << 1, 2, 4;
  CHECK((frame.y - y_want).norm() == 0.0);
  CHECK(frame.X.col(0)(2) == 5.0);                       // endo first
  CHECK(frame.X.col(1)(0) == 3.0);                       // then exog
  CHECK((frame.X.col(2).array() == 1.0).all());          // intercept last
  CHECK(frame.Z_excl(2, 1) == 8.0);
}

TEST_CASE("build_model_frame without a constant") {
  ScratchCsv f("y,x,z1\n1,2,3\n2,4,5\n3,5,7\n", "df_nocons.csv");
  const csa::Table t = csa::load_csv(f.path);
  const csa::ModelFrame frame = csa::build_model_frame(t, "y", {}, {"x"}, {"z1"}, false);
  CHECK(frame.d() == 1);
  CHECK_FALSE(frame.has_constant);
  CHECK(frame.x_names == std::vector<std::string>{"x"});
  CHECK(frame.n_const() == 0);
}

TEST_CASE("build_model_frame rejects bad role assignments") {
  ScratchCsv f("y,x,w,z1\n1,2,3,4\n2,3,4,5\n", "df_roles.csv");
  const csa::Table t = csa::load_csv(f.path);

  // same variable in two roles
  CHECK_THROWS_AS(csa::build_model_frame(t, "y", {"x"}, {"x"}, {"z1"}, true),
                  csa::Error);
  CHECK_THROWS_AS(csa::build_model_frame(t, "y", {}, {"x"}, {"y"}, true), csa::Error);
  // no endogenous regressor / no instruments
  CHECK_THROWS_AS(csa::build_model_frame(t, "y", {"w"}, {}, {"z1"}, true), csa::Error);
  CHECK_THROWS_AS(csa::build_model_frame(t, "y", {"w"}, {"x"}, {}, true), csa::Error);
}

TEST_CASE("build_model_frame flags constant user columns against the intercept") {
  ScratchCsv f("y,x,w,z1\n1,2,7,4\n2,3,7,5\n3,4,7,6\n", "df_const.csv");
  const csa::Table t = csa::load_csv(f.path);
  CHECK_THROWS_AS(csa::build_model_frame(t, "y", {"w"}, {"x"}, {"z1"}, true),
                  csa::Error);
  // fine without the intercept
  const csa::ModelFrame frame = csa::build_model_frame(t, "y", {"w"}, {"x"}, {"z1"}, false);
  CHECK(frame.d() == 2);
}

TEST_CASE("build_model_frame errors when every row has a missing value") {
  ScratchCsv f("y,x,z1\n,2,3\n1,,3\n", "df_empty.csv");
  const csa::Table t = csa::load_csv(f.path);
  CHECK_THROWS_AS(csa::build_model_frame(t, "y", {}, {"x"}, {"z1"}, true), csa::Error);
}
