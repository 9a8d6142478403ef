#pragma once

#include "rmbf/anova.hpp"

#include <string_view>

namespace rmbf {

enum class Method { minimal_rm, between_subjects, nathoo_masson };

std::string_view to_string(Method method);

enum class Model { H0, H1 };

std::string_view to_string(Model model);

// Evidence for H0 versus H1. The log Bayes factor is authoritative; the
// linear bf01/bf10 are derived from it and clamp to the finite double range
// when exp() would overflow or underflow, in which case `saturated` is set.
struct EvidenceResult {
  Method method = Method::minimal_rm;
  double log_bf01 = 0.0;
  double bf01 = 1.0;
  double bf10 = 1.0;
  double delta_bic10 = 0.0;
  double prior_h0 = 0.5;
  double posterior_h0 = 0.5;
  double posterior_h1 = 0.5;
  bool saturated = false;
};

// Sums of squares when raw data is unavailable. SSR is implied as
// SST - SSA - SSB.
struct SummaryStats {
  double ss_treatment = 0.0;
  double ss_subjects = 0.0;
  double ss_total = 0.0;
  DesignSpec design;

  static SummaryStats from_table(const AnovaTable& table) {
    return {table.ss_treatment, table.ss_subjects, table.ss_total, table.design};
  }
};

struct PosteriorProbs {
  double h0 = 0.5;
  double h1 = 0.5;
};

// Assembles every EvidenceResult field from a natural-log BF01.
EvidenceResult make_evidence(Method method, double log_bf01, double prior_h0 = 0.5);

// BF01 for a one-factor repeated-measures design from F, n and k only:
//   BF01 = sqrt((nk - n)^(k-1) * (1 + F/(n-1))^(n - nk))
EvidenceResult bf01_minimal_rm(double f_stat, const DesignSpec& design, double prior_h0 = 0.5);

// BF01 for a between-subjects design with N independent observations:
//   BF01 = sqrt(N^df1 * (1 + F*df1/df2)^(-N))
EvidenceResult bf01_between(double f_stat, long df1, long df2, long n_obs,
                            double prior_h0 = 0.5);

// Nathoo-Masson sums-of-squares BIC difference, which accounts for the
// correlation between repeated measurements:
//   dBIC10 = n(k-1) ln((SST-SSA-SSB)/(SST-SSB))
//          + (k+2) ln(n(SST-SSA)/SSB) - 3 ln(n SST/SSB)
EvidenceResult delta_bic_nathoo(const SummaryStats& stats, double prior_h0 = 0.5);

// Posterior model probabilities from BF01 and the prior probability of H0.
PosteriorProbs posterior_probs(double bf01, double prior_h0);

// Same, from a log Bayes factor; stays accurate where bf01 overflows.
PosteriorProbs posterior_probs_log(double log_bf01, double prior_h0);

// nk / (1 + rho(k-1)). Informational; no Bayes factor route uses it.
double effective_sample_size(const DesignSpec& design, double rho);

// H0 when BF01 >= 1 (ties go to H0), otherwise H1.
Model choose_model(const EvidenceResult& result);

} // namespace rmbf
