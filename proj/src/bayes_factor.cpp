#include "rmbf/bayes_factor.hpp"

#include "rmbf/errors.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace rmbf {
namespace {

void check_prior(double prior_h0) {
  if (!(prior_h0 > 0.0 && prior_h0 < 1.0)) {
    throw DomainError(fmt::format("prior probability of H0 must lie in (0, 1) (got {})", prior_h0));
  }
}

void check_f(double f_stat) {
  if (!(f_stat >= 0.0) || !std::isfinite(f_stat)) {
    throw DomainError(fmt::format("F statistic must be finite and nonnegative (got {})", f_stat));
  }
}

// exp() clamped to [min normal, max finite].
double saturating_exp(double x, bool& saturated) {
  constexpr double max_log = 709.782712893384; // log(DBL_MAX)
  constexpr double min_log = -708.3964185322641; // log(DBL_MIN)
  if (x > max_log) {
    saturated = true;
    return std::numeric_limits<double>::max();
  }
  if (x < min_log) {
    saturated = true;
    return std::numeric_limits<double>::min();
  }
  return std::exp(x);
}

double logistic(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

} // namespace

std::string_view to_string(Method method) {
  switch (method) {
  case Method::minimal_rm: return "minimal_rm";
  case Method::between_subjects: return "between_subjects";
  case Method::nathoo_masson: return "nathoo_masson";
  }
  return "unknown";
}

std::string_view to_string(Model model) { return model == Model::H0 ? "H0" : "H1"; }

EvidenceResult make_evidence(Method method, double log_bf01, double prior_h0) {
  check_prior(prior_h0);
  if (std::isnan(log_bf01)) {
    throw DomainError("log Bayes factor is NaN");
  }
  EvidenceResult r;
  r.method = method;
  r.log_bf01 = log_bf01;
  r.delta_bic10 = 2.0 * log_bf01;
  r.bf01 = saturating_exp(log_bf01, r.saturated);
  r.bf10 = saturating_exp(-log_bf01, r.saturated);
  r.prior_h0 = prior_h0;
  const auto post = posterior_probs_log(log_bf01, prior_h0);
  r.posterior_h0 = post.h0;
  r.posterior_h1 = post.h1;
  return r;
}

EvidenceResult bf01_minimal_rm(double f_stat, const DesignSpec& design, double prior_h0) {
  check_f(f_stat);
  design.validate();
  const double n = static_cast<double>(design.n);
  const double k = static_cast<double>(design.k);
  const double log_bf01 =
      0.5 * ((k - 1.0) * std::log(n * k - n) + (n - n * k) * std::log1p(f_stat / (n - 1.0)));
  return make_evidence(Method::minimal_rm, log_bf01, prior_h0);
}

EvidenceResult bf01_between(double f_stat, long df1, long df2, long n_obs, double prior_h0) {
  check_f(f_stat);
  if (df1 < 1 || df2 < 1) {
    throw DomainError(fmt::format("degrees of freedom must be positive (got {}, {})", df1, df2));
  }
  if (n_obs < 2) {
    throw DomainError(fmt::format("need at least 2 observations (got {})", n_obs));
  }
  const double d1 = static_cast<double>(df1);
  const double d2 = static_cast<double>(df2);
  const double big_n = static_cast<double>(n_obs);
  const double log_bf01 = 0.5 * (d1 * std::log(big_n) - big_n * std::log1p(f_stat * d1 / d2));
  return make_evidence(Method::between_subjects, log_bf01, prior_h0);
}

EvidenceResult delta_bic_nathoo(const SummaryStats& stats, double prior_h0) {
  stats.design.validate();
  const double sst = stats.ss_total;
  const double ssa = stats.ss_treatment;
  const double ssb = stats.ss_subjects;
  if (!std::isfinite(sst) || !std::isfinite(ssa) || !std::isfinite(ssb)) {
    throw DomainError("sums of squares must be finite");
  }
  if (ssa < 0.0) {
    throw DomainError(fmt::format("SSA must be nonnegative (got {})", ssa));
  }
  if (!(ssb > 0.0)) {
    throw DomainError(fmt::format("SSB must be positive (got {})", ssb));
  }
  const double ssr = sst - ssa - ssb;
  if (!(ssr > 0.0)) {
    throw DomainError(fmt::format(
        "implied residual SST - SSA - SSB must be positive (got {})", ssr));
  }
  const double n = static_cast<double>(stats.design.n);
  const double k = static_cast<double>(stats.design.k);
  // ssr > 0 and ssa >= 0 imply SST > SSB, so every log argument is positive.
  const double delta = n * (k - 1.0) * std::log(ssr / (sst - ssb)) +
                       (k + 2.0) * std::log(n * (sst - ssa) / ssb) -
                       3.0 * std::log(n * sst / ssb);
  return make_evidence(Method::nathoo_masson, 0.5 * delta, prior_h0);
}

PosteriorProbs posterior_probs(double bf01, double prior_h0) {
  if (!(bf01 > 0.0)) {
    throw DomainError(fmt::format("Bayes factor must be positive (got {})", bf01));
  }
  return posterior_probs_log(std::log(bf01), prior_h0);
}

PosteriorProbs posterior_probs_log(double log_bf01, double prior_h0) {
  check_prior(prior_h0);
  // Posterior log odds = log BF01 + prior log odds.
  const double z = log_bf01 + std::log(prior_h0) - std::log1p(-prior_h0);
  return {logistic(z), logistic(-z)};
}

double effective_sample_size(const DesignSpec& design, double rho) {
  design.validate();
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw DomainError(fmt::format("intraclass correlation must lie in [0, 1] (got {})", rho));
  }
  const double nk = static_cast<double>(design.total_observations());
  return nk / (1.0 + rho * static_cast<double>(design.k - 1));
}

Model choose_model(const EvidenceResult& result) {
  return result.log_bf01 >= 0.0 ? Model::H0 : Model::H1;
}

} // namespace rmbf
