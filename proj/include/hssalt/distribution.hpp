#pragma once

#include "hssalt/params.hpp"

namespace hssalt {

/// Hazard-mixture quantities at one time point.
struct DistributionPoint {
  double hazard;
  double cum_hazard;
  double cdf;       ///< 1 - exp(-H(t))
  double pdf;       ///< hazard * survival
  double survival;  ///< exp(-H(t))
};

/// Evaluates the piecewise hazard, cumulative hazard and the resulting
/// compound CDF/PDF. Throws ArgumentError for t <= 0 and DomainError when a
/// result is not finite.
DistributionPoint distribution_at(const MixtureParams& params, double t);

/// Marginal CDF of a unit that follows stage 1 until tau and then one of the
/// subgroup hazards: 1 - exp(-lambda1 tau^a) sum_j pi_j exp(-lambda2_j (t^a - tau^a)).
/// Identical to the hazard-mixture CDF for t <= tau or m = 1.
double population_cdf(const MixtureParams& params, double t);

double cdf(const MixtureParams& params, double t, CdfFamily family);

/// Solves cdf(t) = q. Closed form for the hazard mixture and for any q at or
/// below the stage-1 probability G(tau); bracketed bisection on
/// population_cdf otherwise. Throws ArgumentError unless 0 < q < 1.
double quantile(const MixtureParams& params, double q, CdfFamily family);

struct TruncatedPoint {
  double pdf;
  double survival;
};

/// Left-truncated Weibull at tau with rate lambda: survival
/// exp(-lambda (t^a - tau^a)) and its density. Requires t > tau.
TruncatedPoint truncated_component(double alpha, double lambda, double tau, double t);

/// t^alpha computed as exp(alpha * ln t); throws DomainError if not finite.
double weibull_power(double t, double alpha);

}  // namespace hssalt
