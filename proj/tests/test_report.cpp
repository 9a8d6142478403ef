#include "rmbf/report.hpp"
#include "rmbf/errors.hpp"

#include "doctest.h"

#include <algorithm>
#include <random>
#include <sstream>

using namespace rmbf;

TEST_CASE("wide CSV ingestion") {
  std::istringstream in("a,b,c\r\n1,2,3\r\n\r\n 4 , 5.5 ,-6e-1\r\n");
  const DataMatrix m = read_wide_csv(in);
  CHECK(m.subjects() == 2);
  CHECK(m.conditions() == 3);
  CHECK(m(1, 1) == 5.5);
  CHECK(m(1, 2) == -0.6);

  std::istringstream bom("\xEF\xBB\xBFx,y\n1,2\n3,4\n");
  CHECK(read_wide_csv(bom).subjects() == 2);
}

TEST_CASE("malformed CSV") {
  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS_AS(read_wide_csv(ragged), CsvFormatError);
  std::istringstream text("a,b\n1,2\n3,x\n");
  CHECK_THROWS_AS(read_wide_csv(text), CsvFormatError);
  std::istringstream nan_cell("a,b\n1,2\n3,nan\n");
  CHECK_THROWS_AS(read_wide_csv(nan_cell), CsvFormatError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_wide_csv(empty), CsvFormatError);
  std::istringstream one_row("a,b\n1,2\n");
  CHECK_THROWS_AS(read_wide_csv(one_row), DimensionError);
  std::istringstream one_col("a\n1\n2\n");
  CHECK_THROWS_AS(read_wide_csv(one_col), DimensionError);
  CHECK_THROWS_AS(read_wide_csv_file("/nonexistent/file.csv"), IoError);
}

TEST_CASE("CSV written by the library reads back exactly") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 1e3);
  for (int trial = 0; trial < 50; ++trial) {
    DataMatrix m(7, 4);
    for (double& v : m.values()) v = noise(rng);
    std::stringstream buf;
    write_wide_csv(buf, m);
    CHECK(read_wide_csv(buf) == m);
  }
}

TEST_CASE("number formatting") {
  CHECK(format_number(2.43512) == "2.435");
  CHECK(format_number(0.0) == "0.000");
  CHECK(format_number(4726.545) == "4726.545");
  CHECK(format_number(1.5e-5) == "1.500e-05");
  CHECK(format_number(3e9) == "3.000e+09");
}

TEST_CASE("evidence JSON carries every field") {
  const auto j = to_json(bf01_minimal_rm(1.336, DesignSpec{23, 2}));
  for (const char* key : {"method", "log_bf01", "bf01", "bf10", "delta_bic10", "prior_h0",
                          "posterior_h0", "posterior_h1", "saturated", "choice"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["method"] == "minimal_rm");
  CHECK(j["choice"] == "H0");
  // Round-trip-safe doubles.
  CHECK(j["log_bf01"].get<double>() == bf01_minimal_rm(1.336, DesignSpec{23, 2}).log_bf01);
}

TEST_CASE("ANOVA table rendering") {
  const AnovaTable t = rm_anova(DataMatrix{{1, 2}, {2, 4}, {3, 3}});
  const std::string s = render_anova_table(t);
  CHECK(s.find("Treatment") != std::string::npos);
  CHECK(s.find("3.000") != std::string::npos); // F
  CHECK(s.find("0.225") != std::string::npos); // p
}

TEST_CASE("grid tables") {
  GridSpec spec;
  spec.n_values = {20};
  spec.rho_values = {0.2, 0.8};
  spec.delta_values = {0.0};
  spec.reps = 5;
  const GridReport r = run_grid(spec);
  const std::string t2 = table2_csv(r);
  CHECK(t2.rfind("n,k,rho,delta,accuracy_min,accuracy_nm\n", 0) == 0);
  CHECK(std::count(t2.begin(), t2.end(), '\n') == 3);
  const std::string scatter = scatter_csv(r);
  CHECK(std::count(scatter.begin(), scatter.end(), '\n') == 11);
  const std::string per_rep = per_rep_csv(r);
  CHECK(per_rep.rfind("cell_id,rep,F,bf01_min,bf01_nm,post_min,post_nm,choice_min,choice_nm\n", 0) == 0);
  const std::string box = boxplot_csv(r);
  CHECK(std::count(box.begin(), box.end(), '\n') == 5);

  const auto j = to_json(r, make_manifest("simulate", {{"reps", 5}}, 0));
  CHECK(j["cells"].size() == 2);
  CHECK(j["manifest"]["master_seed"] == 0);
  CHECK(j["grid"]["spacing"] == "uniform-interior");
}
