#include "rmbf/anova.hpp"

#include "rmbf/errors.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace rmbf {
namespace {

// lgamma without touching the global signgam.
double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

// Continued fraction for I_x(a, b), modified Lentz evaluation.
double beta_continued_fraction(double x, double a, double b) {
  constexpr int max_iterations = 10000;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;

    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) {
      return h;
    }
  }
  return h;
}

void check_dfs(double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0) || !std::isfinite(df1) || !std::isfinite(df2)) {
    throw DomainError(fmt::format("F distribution needs positive degrees of freedom (got {}, {})",
                                  df1, df2));
  }
}

void check_quantile(double x) {
  if (!(x >= 0.0)) {
    throw DomainError(fmt::format("F distribution is supported on x >= 0 (got {})", x));
  }
}

} // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("incomplete beta needs a > 0 and b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError(fmt::format("incomplete beta argument must lie in [0, 1] (got {})", x));
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front = a * std::log(x) + b * std::log1p(-x) -
                           (log_gamma(a) + log_gamma(b) - log_gamma(a + b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_cdf(double x, double df1, double df2) {
  check_dfs(df1, df2);
  check_quantile(x);
  if (std::isinf(x)) return 1.0;
  const double scaled = df1 * x;
  return regularized_incomplete_beta(scaled / (scaled + df2), 0.5 * df1, 0.5 * df2);
}

double f_sf(double x, double df1, double df2) {
  check_dfs(df1, df2);
  check_quantile(x);
  if (std::isinf(x)) return 0.0;
  const double scaled = df1 * x;
  return regularized_incomplete_beta(df2 / (scaled + df2), 0.5 * df2, 0.5 * df1);
}

} // namespace rmbf
