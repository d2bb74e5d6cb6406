#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hssalt/params.hpp"

namespace hssalt {

/// Observed-data log-likelihood of the latent-subgroup model: stage-1 Weibull
/// terms, a pi-weighted mixture of left-truncated densities for every stage-2
/// failure, and the mixture survival at t_{r:n} for the n - r censored units.
/// This is the objective the EM iterations ascend.
///
/// Throws DegenerateDataError when no failure was observed after tau and the
/// model needs one (m > 1, or censored units remain).
double loglik_mixture(const MixtureParams& params, const CensoredSample& sample);

/// Aggregate-hazard log-likelihood l1 + l2 + l3. The stage-2 parameters enter
/// only through lambda_bar, so it is flat along any (pi, lambda2) ridge that
/// keeps lambda_bar fixed. Coincides with loglik_mixture when m = 1.
double loglik_eq8(const MixtureParams& params, const CensoredSample& sample);

/// Analytic gradient of loglik_eq8. d_pi has m - 1 entries: the proportions
/// pi_1..pi_{m-1} are free and pi_m = 1 - sum of the others.
struct Score {
  double d_alpha = 0.0;
  double d_lambda1 = 0.0;
  std::vector<double> d_lambda2;
  std::vector<double> d_pi;
};

Score score_eq8(const MixtureParams& params, const CensoredSample& sample);

/// Per-row, per-component log terms of the stage-2 mixture, row-major.
///
/// Rows 0..stage2_count-1 hold ln pi_j + ln f_trunc_j(t_i) for each observed
/// stage-2 failure. When censored units exist a final row holds
/// ln pi_j + ln S_trunc_j(t_{r:n}); it stands for all n - r of them.
struct ComponentLogTerms {
  std::size_t rows = 0;
  std::size_t m = 0;
  bool has_censored_row = false;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const { return std::span(values).subspan(i * m, m); }
  std::span<double> row(std::size_t i) { return std::span(values).subspan(i * m, m); }
};

ComponentLogTerms component_log_terms(const MixtureParams& params, const CensoredSample& sample);

/// Replaces every row of terms by its softmax (computed with max subtraction)
/// and returns the per-row log-sum-exp that was divided out.
std::vector<double> softmax_rows(ComponentLogTerms& terms);

/// Stage-1 part of loglik_mixture: n1 ln(alpha lambda1) + (alpha - 1) sum ln t
/// - lambda1 (sum t^alpha + (n - n1) tau^alpha) over failures at or before tau.
double stage1_loglik(const MixtureParams& params, const CensoredSample& sample);

/// Throws DegenerateDataError if the sample has no stage-2 failure while the
/// model requires one.
void require_stage2_failures(const CensoredSample& sample, std::size_t m);

}  // namespace hssalt
