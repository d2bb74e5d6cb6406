#include "hssalt/distribution.hpp"

#include <cmath>
#include <string>

#include "hssalt/error.hpp"

namespace hssalt {
namespace {

constexpr double kQuantileTolerance = 1e-10;
constexpr int kMaxBisections = 200;
constexpr int kMaxBracketDoublings = 2000;

void require_positive_time(double t) {
  if (!(t > 0.0) || std::isnan(t)) throw ArgumentError("time must be positive");
}

double finite_or_throw(double value, const char* what) {
  if (!std::isfinite(value)) throw DomainError(std::string(what) + " is not finite");
  return value;
}

}  // namespace

double weibull_power(double t, double alpha) {
  return finite_or_throw(std::exp(alpha * std::log(t)), "t^alpha");
}

DistributionPoint distribution_at(const MixtureParams& params, double t) {
  require_positive_time(t);
  const double alpha = params.alpha();
  const double t_pow = weibull_power(t, alpha);
  const double slope = alpha * std::exp((alpha - 1.0) * std::log(t));

  DistributionPoint out{};
  if (t <= params.tau()) {
    out.hazard = params.lambda1() * slope;
    out.cum_hazard = params.lambda1() * t_pow;
  } else {
    const double tau_pow = weibull_power(params.tau(), alpha);
    out.hazard = params.lambda_bar() * slope;
    out.cum_hazard = params.lambda1() * tau_pow + params.lambda_bar() * (t_pow - tau_pow);
  }
  out.survival = std::exp(-out.cum_hazard);
  out.cdf = -std::expm1(-out.cum_hazard);
  out.pdf = out.hazard * out.survival;
  finite_or_throw(out.hazard, "hazard");
  finite_or_throw(out.pdf, "density");
  return out;
}

double population_cdf(const MixtureParams& params, double t) {
  require_positive_time(t);
  const double alpha = params.alpha();
  const double t_pow = weibull_power(t, alpha);
  if (t <= params.tau()) return -std::expm1(-params.lambda1() * t_pow);

  const double tau_pow = weibull_power(params.tau(), alpha);
  const double excess = t_pow - tau_pow;
  double stage2_survival = 0.0;
  for (std::size_t j = 0; j < params.m(); ++j) {
    stage2_survival += params.pi(j) * std::exp(-params.lambda2(j) * excess);
  }
  return 1.0 - std::exp(-params.lambda1() * tau_pow) * stage2_survival;
}

double cdf(const MixtureParams& params, double t, CdfFamily family) {
  return family == CdfFamily::HazardMixture ? distribution_at(params, t).cdf
                                            : population_cdf(params, t);
}

double quantile(const MixtureParams& params, double q, CdfFamily family) {
  if (!(q > 0.0 && q < 1.0)) throw ArgumentError("quantile level must lie in (0, 1)");
  const double alpha = params.alpha();
  const double target_hazard = -std::log1p(-q);
  const double tau_hazard = params.lambda1() * weibull_power(params.tau(), alpha);

  // Both families share stage 1.
  if (target_hazard <= tau_hazard) {
    return finite_or_throw(std::pow(target_hazard / params.lambda1(), 1.0 / alpha), "quantile");
  }

  if (family == CdfFamily::HazardMixture) {
    const double tau_pow = weibull_power(params.tau(), alpha);
    const double t_pow = tau_pow + (target_hazard - tau_hazard) / params.lambda_bar();
    return finite_or_throw(std::pow(t_pow, 1.0 / alpha), "quantile");
  }

  // Population mixture: monotone CDF, so plain bisection on a doubling bracket.
  double lo = params.tau();
  double hi = params.tau() + 1.0;
  for (int k = 0; population_cdf(params, hi) < q; ++k) {
    if (k >= kMaxBracketDoublings || !std::isfinite(hi)) throw DomainError("quantile bracket overflow");
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < kMaxBisections && hi - lo > kQuantileTolerance; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (population_cdf(params, mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TruncatedPoint truncated_component(double alpha, double lambda, double tau, double t) {
  if (!(t > tau)) throw ArgumentError("truncated component requires t > tau");
  const double excess = weibull_power(t, alpha) - weibull_power(tau, alpha);
  const double survival = std::exp(-lambda * excess);
  const double pdf = alpha * lambda * std::exp((alpha - 1.0) * std::log(t)) * survival;
  return {finite_or_throw(pdf, "truncated density"), survival};
}

}  // namespace hssalt
