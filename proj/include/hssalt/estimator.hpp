#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hssalt/likelihood.hpp"
#include "hssalt/params.hpp"

namespace hssalt {

/// Posterior subgroup probabilities. Same layout as ComponentLogTerms: one row
/// per observed stage-2 failure, then (if n > r) one row shared by all n - r
/// censored units. Each row sums to one.
using Responsibilities = ComponentLogTerms;

struct EmConfig {
  std::size_t m = 2;
  int max_iterations = 2000;
  /// Stop when the largest relative parameter change falls below this...
  double param_tol = 1e-6;
  /// ...or when the log-likelihood moves by less than this.
  double loglik_tol = 1e-8;
  int n_starts = 10;
  std::optional<double> alpha_fixed;
  std::pair<double, double> alpha_bracket{1e-3, 50.0};
  std::uint64_t seed = 0;
  /// Replaces the deterministic first start (warm starts for refits).
  std::optional<MixtureParams> initial;

  /// Throws ArgumentError on non-positive tolerances, m = 0, n_starts < 1,
  /// an empty bracket or a non-positive alpha_fixed.
  void validate() const;
};

/// Outcome of one EM start.
struct StartDiagnostic {
  int index = 0;
  /// converged, max_iterations, alpha_solve_failure, component_collapse,
  /// monotonicity_violation or invalid_iterate.
  std::string status;
  std::string message;
  int iterations = 0;
  std::optional<double> loglik;
};

struct EmFit {
  MixtureParams params;
  double loglik = 0.0;      ///< loglik_mixture at the returned parameters
  double loglik_eq8 = 0.0;
  Responsibilities responsibilities;
  int iterations = 0;
  bool converged = false;
  int starts_tried = 0;
  std::vector<double> loglik_trace;
  std::vector<StartDiagnostic> starts;
};

Responsibilities e_step(const MixtureParams& params, const CensoredSample& sample);

/// Derivative in alpha of the expected complete-data log-likelihood, with
/// lambda1, lambda2 taken from params_k and the subgroup weights from resp.
double alpha_score(const MixtureParams& params_k, const Responsibilities& resp,
                   const CensoredSample& sample, double alpha);

struct AlphaRoot {
  double alpha = 0.0;
  double score = 0.0;
  /// Final sign-change bracket.
  double lower = 0.0;
  double upper = 0.0;
  int expansions = 0;
};

/// Root of alpha_score. The bracket is doubled outward on whichever end has
/// the wrong sign (at most 40 times) and the root refined by Brent's method.
/// Throws AlphaSolveFailure when no sign change is found.
AlphaRoot solve_alpha_score(const MixtureParams& params_k, const Responsibilities& resp,
                            const CensoredSample& sample, std::pair<double, double> bracket);

/// One conditional-maximization cycle in the order pi, alpha, lambda1,
/// lambda2 (the last two use the new alpha). Columns of resp are permuted to
/// follow the canonical order of the result.
///
/// Throws ComponentCollapse when a component holds less than 1e-8 expected
/// observed failures and AlphaSolveFailure from the alpha step.
MixtureParams m_step(const MixtureParams& params_k, Responsibilities& resp, const CensoredSample& sample,
                     const EmConfig& cfg);

/// Runs EM from a single starting point. Failures surface as the exceptions
/// above; a run that hits max_iterations returns with converged = false.
EmFit run_em(const CensoredSample& sample, const MixtureParams& start, const EmConfig& cfg);

/// Multi-start EM; returns the start with the highest loglik_mixture,
/// preferring converged starts. Throws DegenerateDataError unless r >= 2,
/// n1 >= 1 and r - n1 >= m, and FitFailure when every start fails.
EmFit fit_em(const CensoredSample& sample, const EmConfig& cfg);

/// Homogeneous (m = 1) fit: alpha from the profile score, rates in closed
/// form. Throws DegenerateDataError unless r >= 2, n1 >= 1 and r > n1.
EmFit fit_homogeneous(const CensoredSample& sample, std::optional<double> alpha_fixed = std::nullopt,
                      std::pair<double, double> alpha_bracket = {1e-3, 50.0});

/// Deterministic first start: homogeneous fit with lambda2 spread
/// geometrically over [lambda2/4, 4 lambda2] and uniform pi.
MixtureParams default_start(const CensoredSample& sample, const EmConfig& cfg);

}  // namespace hssalt
