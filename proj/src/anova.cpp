#include "rmbf/anova.hpp"

#include "rmbf/errors.hpp"
#include "summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/core.h>

namespace rmbf {

void DesignSpec::validate() const {
  if (n < 2 || k < 2) {
    throw DimensionError(fmt::format(
        "repeated-measures design needs n >= 2 subjects and k >= 2 conditions (got n={}, k={})",
        n, k));
  }
}

DataMatrix::DataMatrix(std::size_t subjects, std::size_t conditions, double fill)
    : subjects_(subjects), conditions_(conditions), values_(subjects * conditions, fill) {}

DataMatrix::DataMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> copy;
  copy.reserve(rows.size());
  for (const auto& r : rows) {
    copy.emplace_back(r);
  }
  *this = from_rows(copy);
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) {
    throw DimensionError("data matrix has no rows");
  }
  const std::size_t k = rows.front().size();
  DataMatrix m(rows.size(), k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != k) {
      throw DimensionError(fmt::format("row {} has {} values, expected {}", i + 1,
                                       rows[i].size(), k));
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (!std::isfinite(rows[i][j])) {
        throw DomainError(fmt::format("non-finite value at row {}, column {}", i + 1, j + 1));
      }
      m(i, j) = rows[i][j];
    }
  }
  return m;
}

AnovaTable rm_anova(const DataMatrix& data) {
  const DesignSpec design = data.design();
  design.validate();
  const std::size_t n = data.subjects();
  const std::size_t k = data.conditions();

  double max_abs = 0.0;
  detail::CompensatedSum grand_sum;
  std::vector<double> row_means(n);
  std::vector<detail::CompensatedSum> col_sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    detail::CompensatedSum row_sum;
    for (std::size_t j = 0; j < k; ++j) {
      const double y = data(i, j);
      if (!std::isfinite(y)) {
        throw DomainError(fmt::format("non-finite value at row {}, column {}", i + 1, j + 1));
      }
      max_abs = std::max(max_abs, std::abs(y));
      row_sum.add(y);
      col_sums[j].add(y);
      grand_sum.add(y);
    }
    row_means[i] = row_sum.value() / static_cast<double>(k);
  }
  std::vector<double> col_means(k);
  for (std::size_t j = 0; j < k; ++j) {
    col_means[j] = col_sums[j].value() / static_cast<double>(n);
  }
  const double grand = grand_sum.value() / static_cast<double>(n * k);

  detail::CompensatedSum sst, ssa, ssb, ssr;
  for (std::size_t j = 0; j < k; ++j) {
    const double d = col_means[j] - grand;
    ssa.add(d * d);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double d = row_means[i] - grand;
    ssb.add(d * d);
    for (std::size_t j = 0; j < k; ++j) {
      const double t = data(i, j) - grand;
      sst.add(t * t);
      const double e = data(i, j) - row_means[i] - col_means[j] + grand;
      ssr.add(e * e);
    }
  }

  AnovaTable table;
  table.design = design;
  table.ss_total = sst.value();
  table.ss_treatment = static_cast<double>(n) * ssa.value();
  table.ss_subjects = static_cast<double>(k) * ssb.value();
  table.ss_residual = ssr.value();
  table.df_treatment = design.k - 1;
  table.df_subjects = design.n - 1;
  table.df_residual = (design.n - 1) * (design.k - 1);
  table.ms_treatment = table.ss_treatment / static_cast<double>(table.df_treatment);
  table.ms_subjects = table.ss_subjects / static_cast<double>(table.df_subjects);
  table.ms_residual = table.ss_residual / static_cast<double>(table.df_residual);

  // Round-off floor for a sum of n*k squared deviations of values bounded
  // by max_abs.
  const double eps_scale = 8.0 * std::numeric_limits<double>::epsilon() * max_abs;
  const double noise_floor = static_cast<double>(n * k) * eps_scale * eps_scale;
  const bool residual_zero = table.ss_residual <= noise_floor;
  const bool treatment_zero = table.ss_treatment <= noise_floor;

  if (residual_zero) {
    if (!treatment_zero) {
      throw DegenerateResidualError(
          "residual sum of squares is zero while the treatment effect is not; F is undefined");
    }
    table.f_stat = 0.0;
    table.p_value = 1.0;
    return table;
  }

  table.f_stat = table.ss_treatment / table.ss_residual * static_cast<double>(design.n - 1);
  table.p_value = f_sf(table.f_stat, static_cast<double>(table.df_treatment),
                       static_cast<double>(table.df_residual));
  return table;
}

} // namespace rmbf
