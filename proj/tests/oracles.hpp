#pragma once

// Reference computations used only by the tests. They follow the textbook
// definitions literally and share no code with the library.

#include <cmath>
#include <functional>
#include <vector>

namespace rmbf::oracle {

struct SumsOfSquares {
  double ssa = 0.0;
  double ssb = 0.0;
  double sst = 0.0;
  double ssr = 0.0;
};

// SSA = n sum_j (ybar_.j - ybar)^2, SSB = k sum_i (ybar_i. - ybar)^2,
// SST = sum_ij (y_ij - ybar)^2, SSR = SST - SSA - SSB, in long double.
inline SumsOfSquares brute_force_ss(const std::vector<std::vector<double>>& y) {
  const std::size_t n = y.size();
  const std::size_t k = y.front().size();
  long double grand = 0.0L;
  for (const auto& row : y)
    for (double v : row) grand += v;
  grand /= static_cast<long double>(n * k);

  long double ssa = 0.0L, ssb = 0.0L, sst = 0.0L;
  for (std::size_t j = 0; j < k; ++j) {
    long double col = 0.0L;
    for (std::size_t i = 0; i < n; ++i) col += y[i][j];
    col /= static_cast<long double>(n);
    ssa += (col - grand) * (col - grand);
  }
  ssa *= static_cast<long double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double row = 0.0L;
    for (std::size_t j = 0; j < k; ++j) row += y[i][j];
    row /= static_cast<long double>(k);
    ssb += (row - grand) * (row - grand);
  }
  ssb *= static_cast<long double>(k);
  for (const auto& row : y)
    for (double v : row) sst += (v - grand) * (v - grand);
  return {static_cast<double>(ssa), static_cast<double>(ssb), static_cast<double>(sst),
          static_cast<double>(sst - ssa - ssb)};
}

// Adaptive Simpson quadrature with Richardson correction.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 60) {
  struct Rec {
    const std::function<double(double)>& f;
    double step(double a, double b, double fa, double fm, double fb, double whole, double tol,
                int depth) const {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
      }
      return step(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
             step(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  } rec{f};
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec.step(a, b, fa, fm, fb, whole, tol, depth);
}

// P(X <= x) for X ~ F(d1, d2) by integrating the density after the
// substitution x = t^2, which removes the x^(-1/2) singularity at d1 = 1.
inline double f_cdf_quadrature(double x, double d1, double d2, double tol = 1e-14) {
  const double log_beta = std::lgamma(0.5 * d1) + std::lgamma(0.5 * d2) - std::lgamma(0.5 * (d1 + d2));
  // g(t) = 2 t pdf(t^2); the power of t is d1 - 1.
  auto g = [=](double t) {
    const double log_t_term = d1 == 1.0 ? 0.0 : (d1 - 1.0) * std::log(t);
    if (t == 0.0 && d1 > 1.0) return 0.0;
    const double lg = std::log(2.0) + log_t_term +
                      0.5 * (d1 * std::log(d1) + d2 * std::log(d2) -
                             (d1 + d2) * std::log(d1 * t * t + d2)) -
                      log_beta;
    return std::exp(lg);
  };
  return adaptive_simpson(g, 0.0, std::sqrt(x), tol);
}

} // namespace rmbf::oracle
