#include "rmbf/anova.hpp"
#include "rmbf/errors.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace rmbf;

namespace {

bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

std::vector<std::vector<double>> to_rows(const DataMatrix& m) {
  std::vector<std::vector<double>> rows(m.subjects());
  for (std::size_t i = 0; i < m.subjects(); ++i) rows[i].assign(m.row(i).begin(), m.row(i).end());
  return rows;
}

// Visits every n x k matrix with entries in [0, levels).
template <typename Fn>
void for_each_matrix(std::size_t n, std::size_t k, int levels, Fn fn) {
  std::vector<int> digits(n * k, 0);
  while (true) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(k));
    for (std::size_t c = 0; c < n * k; ++c) rows[c / k][c % k] = digits[c];
    fn(rows);
    std::size_t pos = 0;
    while (pos < digits.size() && ++digits[pos] == levels) digits[pos++] = 0;
    if (pos == digits.size()) return;
  }
}

void check_against_oracle(const std::vector<std::vector<double>>& rows) {
  const auto expected = oracle::brute_force_ss(rows);
  const double tol = 1e-12 * std::max(1.0, expected.sst);
  const DataMatrix m = DataMatrix::from_rows(rows);
  const bool residual_zero = std::abs(expected.ssr) <= tol;
  const bool treatment_zero = std::abs(expected.ssa) <= tol;
  if (residual_zero && !treatment_zero) {
    CHECK_THROWS_AS(rm_anova(m), DegenerateResidualError);
    return;
  }
  const AnovaTable t = rm_anova(m);
  CHECK(std::abs(t.ss_treatment - expected.ssa) <= tol);
  CHECK(std::abs(t.ss_subjects - expected.ssb) <= tol);
  CHECK(std::abs(t.ss_total - expected.sst) <= tol);
  CHECK(std::abs(t.ss_residual - expected.ssr) <= tol);
  if (!residual_zero) {
    CHECK(close_rel(t.f_stat, expected.ssa / expected.ssr * static_cast<double>(rows.size() - 1),
                    1e-10, 1e-12));
  }
}

} // namespace

TEST_CASE("3x2 matrix matches the definitional sums") {
  const DataMatrix m{{1, 2}, {2, 4}, {3, 3}};
  const auto expected = oracle::brute_force_ss(to_rows(m));
  // Frozen from the oracle: grand mean 2.5, column means 2 and 3, row
  // means 1.5, 3, 3.
  CHECK(expected.ssa == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(expected.ssb == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(expected.sst == doctest::Approx(5.5).epsilon(1e-15));
  CHECK(expected.ssr == doctest::Approx(1.0).epsilon(1e-15));

  const AnovaTable t = rm_anova(m);
  CHECK(std::abs(t.ss_treatment - 1.5) < 1e-10);
  CHECK(std::abs(t.ss_subjects - 3.0) < 1e-10);
  CHECK(std::abs(t.ss_total - 5.5) < 1e-10);
  CHECK(std::abs(t.ss_residual - 1.0) < 1e-10);
  CHECK(t.df_treatment == 1);
  CHECK(t.df_subjects == 2);
  CHECK(t.df_residual == 2);
  CHECK(std::abs(t.f_stat - 3.0) < 1e-10);
  // F(1, 2) is the square of t with 2 df: P(|T| > sqrt 3) = 1 - sqrt(3/5).
  CHECK(std::abs(t.p_value - (1.0 - std::sqrt(0.6))) < 1e-10);
  CHECK(t.ms_treatment == doctest::Approx(1.5));
  CHECK(t.ms_residual == doctest::Approx(0.5));
}

TEST_CASE("no condition differences gives SSA = 0 and F = 0") {
  SUBCASE("rows constant per subject") {
    const AnovaTable t = rm_anova(DataMatrix{{1, 1, 1}, {4, 4, 4}, {-2, -2, -2}, {0.1, 0.1, 0.1}});
    CHECK(t.ss_treatment == doctest::Approx(0.0));
    CHECK(t.f_stat == 0.0);
    CHECK(t.p_value == 1.0);
    CHECK(t.ss_subjects > 0.0);
  }
  SUBCASE("columns equal but residual present") {
    const AnovaTable t = rm_anova(DataMatrix{{1, 2}, {2, 1}, {0, 0}});
    CHECK(t.ss_treatment == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(t.f_stat == doctest::Approx(0.0));
    CHECK(t.p_value == doctest::Approx(1.0));
  }
}

TEST_CASE("error paths") {
  CHECK_THROWS_AS(rm_anova(DataMatrix(1, 3)), DimensionError);
  CHECK_THROWS_AS(rm_anova(DataMatrix(3, 1)), DimensionError);
  // Pure treatment effect with no residual: F undefined.
  CHECK_THROWS_AS(rm_anova(DataMatrix{{0, 1}, {0, 1}, {0, 1}}), DegenerateResidualError);
  CHECK_THROWS_AS(DataMatrix::from_rows({{1, 2}, {3}}), DimensionError);
  CHECK_THROWS_AS(DataMatrix::from_rows({{1, 2}, {3, NAN}}), DomainError);
  DataMatrix m(2, 2, 1.0);
  m(0, 0) = INFINITY;
  CHECK_THROWS_AS(rm_anova(m), DomainError);
}

TEST_CASE("brute-force oracle equality over small integer matrices") {
  // Exhaustive where the space is small, sampled otherwise.
  for_each_matrix(2, 2, 4, check_against_oracle);
  for_each_matrix(2, 3, 3, check_against_oracle);
  for_each_matrix(3, 2, 3, check_against_oracle);
  for_each_matrix(3, 3, 2, check_against_oracle);
  for_each_matrix(2, 4, 2, check_against_oracle);
  for_each_matrix(4, 2, 2, check_against_oracle);

  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> value(-9, 9);
  for (std::size_t n = 2; n <= 4; ++n) {
    for (std::size_t k = 2; k <= 4; ++k) {
      for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::vector<double>> rows(n, std::vector<double>(k));
        for (auto& r : rows)
          for (auto& v : r) v = value(rng);
        check_against_oracle(rows);
      }
    }
  }
}

TEST_CASE("partition identity and df bookkeeping on random matrices") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> dim(2, 40);
  for (int trial = 0; trial < 500; ++trial) {
    DataMatrix m(static_cast<std::size_t>(dim(rng)), static_cast<std::size_t>(dim(rng)));
    const double offset = 100.0 * noise(rng);
    for (double& v : m.values()) v = offset + noise(rng);
    const AnovaTable t = rm_anova(m);
    CHECK(close_rel(t.ss_treatment + t.ss_subjects + t.ss_residual, t.ss_total, 1e-9));
    CHECK(t.df_treatment + t.df_subjects + t.df_residual ==
          static_cast<long>(m.subjects() * m.conditions()) - 1);
    CHECK(close_rel(t.f_stat, t.ss_treatment / t.ss_residual * static_cast<double>(t.df_subjects),
                    1e-12));
    CHECK(t.p_value >= 0.0);
    CHECK(t.p_value <= 1.0);
  }
}

TEST_CASE("partition identity holds on a large matrix") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 1.0);
  DataMatrix m(50000, 4);
  for (std::size_t i = 0; i < m.subjects(); ++i)
    for (std::size_t j = 0; j < 4; ++j) m(i, j) = 1000.0 + 0.1 * j + noise(rng);
  const AnovaTable t = rm_anova(m);
  CHECK(close_rel(t.ss_treatment + t.ss_subjects + t.ss_residual, t.ss_total, 1e-9));
}

TEST_CASE("F and p are invariant under affine maps") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> scale(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    DataMatrix m(12, 3);
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 3; ++j) m(i, j) = 0.3 * j + noise(rng);
    double a = scale(rng);
    if (std::abs(a) < 1e-3) a = 1.0;
    const double b = scale(rng);
    DataMatrix mapped = m;
    for (double& v : mapped.values()) v = a * v + b;
    const AnovaTable t0 = rm_anova(m);
    const AnovaTable t1 = rm_anova(mapped);
    CHECK(close_rel(t0.f_stat, t1.f_stat, 1e-9));
    CHECK(close_rel(t0.p_value, t1.p_value, 1e-9));
  }
}

TEST_CASE("error-sum aliases") {
  const AnovaTable t = rm_anova(DataMatrix{{1, 2}, {2, 4}, {3, 3}});
  CHECK(t.ss_error_alternative() == t.ss_residual);
  CHECK(t.ss_error_null() == doctest::Approx(t.ss_treatment + t.ss_residual));
}
