#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace rmbf {

// One-factor repeated-measures design: n subjects each measured under k
// conditions.
struct DesignSpec {
  long n = 0;
  long k = 0;

  long total_observations() const { return n * k; }
  // Independent observations after removing subject effects, n(k-1).
  long independent_observations() const { return n * (k - 1); }

  // Throws DimensionError unless n >= 2 and k >= 2.
  void validate() const;

  friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

// Row-major subjects x conditions matrix of measurements.
class DataMatrix {
public:
  DataMatrix() = default;
  DataMatrix(std::size_t subjects, std::size_t conditions, double fill = 0.0);
  DataMatrix(std::initializer_list<std::initializer_list<double>> rows);

  // Throws DimensionError on ragged or undersized input, DomainError on
  // non-finite entries.
  static DataMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t subjects() const { return subjects_; }
  std::size_t conditions() const { return conditions_; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * conditions_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * conditions_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * conditions_, conditions_};
  }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  DesignSpec design() const {
    return {static_cast<long>(subjects_), static_cast<long>(conditions_)};
  }

  friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

private:
  std::size_t subjects_ = 0;
  std::size_t conditions_ = 0;
  std::vector<double> values_;
};

// Sums-of-squares decomposition for the one-factor repeated-measures
// design. The residual is what remains of SST after the treatment (SSA)
// and subject (SSB) effects; ss_error_alternative() and ss_error_null()
// are the unexplained variation under H1 and H0 respectively.
struct AnovaTable {
  DesignSpec design;
  double ss_treatment = 0.0;
  double ss_subjects = 0.0;
  double ss_residual = 0.0;
  double ss_total = 0.0;
  long df_treatment = 0;
  long df_subjects = 0;
  long df_residual = 0;
  double ms_treatment = 0.0;
  double ms_subjects = 0.0;
  double ms_residual = 0.0;
  double f_stat = 0.0;
  double p_value = 1.0;

  double ss_error_alternative() const { return ss_residual; }
  double ss_error_null() const { return ss_treatment + ss_residual; }
};

// Full decomposition of `data`. Throws DimensionError for n < 2 or k < 2,
// DomainError for non-finite entries and DegenerateResidualError when the
// residual vanishes while the treatment sum of squares does not. A matrix
// with neither treatment nor residual variation (e.g. every subject
// constant across conditions) yields F = 0 and p = 1.
AnovaTable rm_anova(const DataMatrix& data);

// P(X <= x) for X ~ F(df1, df2). Throws DomainError for x < 0 or
// nonpositive degrees of freedom.
double f_cdf(double x, double df1, double df2);

// Upper tail P(X > x), evaluated directly rather than as 1 - f_cdf.
double f_sf(double x, double df1, double df2);

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double regularized_incomplete_beta(double x, double a, double b);

} // namespace rmbf
