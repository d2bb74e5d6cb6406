#include "hssalt/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hssalt/distribution.hpp"
#include "hssalt/error.hpp"
#include "hssalt/kernels.hpp"

namespace hssalt {
namespace {

std::span<const double> ones(std::size_t size) {
  thread_local std::vector<double> buffer;
  if (buffer.size() < size) buffer.assign(size, 1.0);
  return std::span<const double>(buffer).first(size);
}

double sum_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

// Power sums over the two stages with unit weights.
struct StageSums {
  double tau_pow;
  double last_pow;            // t_{r:n}^alpha
  kernels::ExpMoments stage1; // sum t^a, sum t^a ln t over i <= n1
  kernels::ExpMoments stage2; // same over n1 < i <= r
};

StageSums stage_sums(const MixtureParams& params, const CensoredSample& sample) {
  const double alpha = params.alpha();
  const auto l1 = sample.stage1_log_times();
  const auto l2 = sample.stage2_log_times();
  return {weibull_power(sample.tau(), alpha), weibull_power(sample.last_time(), alpha),
          kernels::weighted_exp_moments(l1, ones(l1.size()), alpha),
          kernels::weighted_exp_moments(l2, ones(l2.size()), alpha)};
}

void require_matching_tau(const MixtureParams& params, const CensoredSample& sample) {
  if (params.tau() != sample.tau()) throw ArgumentError("parameter tau does not match the sample's tau");
}

}  // namespace

void require_stage2_failures(const CensoredSample& sample, std::size_t m) {
  if (sample.stage2_count() == 0 && (m > 1 || sample.censored_count() > 0)) {
    throw DegenerateDataError("no failures observed after the stress change");
  }
}

double stage1_loglik(const MixtureParams& params, const CensoredSample& sample) {
  const double alpha = params.alpha();
  const double lambda1 = params.lambda1();
  const auto l1 = sample.stage1_log_times();
  const double n1 = static_cast<double>(sample.n1());
  const double at_risk = static_cast<double>(sample.n() - sample.n1());
  const double power_sum = kernels::weighted_exp_moments(l1, ones(l1.size()), alpha).sum;
  return n1 * std::log(alpha * lambda1) + (alpha - 1.0) * sum_of(l1) -
         lambda1 * (power_sum + at_risk * weibull_power(sample.tau(), alpha));
}

ComponentLogTerms component_log_terms(const MixtureParams& params, const CensoredSample& sample) {
  require_matching_tau(params, sample);
  require_stage2_failures(sample, params.m());

  const std::size_t m = params.m();
  const double alpha = params.alpha();
  const double tau_pow = weibull_power(sample.tau(), alpha);
  const auto l2 = sample.stage2_log_times();

  ComponentLogTerms terms;
  terms.m = m;
  terms.has_censored_row = sample.censored_count() > 0;
  terms.rows = l2.size() + (terms.has_censored_row ? 1 : 0);
  terms.values.resize(terms.rows * m);

  std::vector<double> powers(l2.size());
  kernels::exp_affine(l2, alpha, 0.0, powers);

  std::vector<double> offset(m);
  for (std::size_t j = 0; j < m; ++j) {
    offset[j] = std::log(params.pi(j)) + std::log(alpha * params.lambda2(j)) + params.lambda2(j) * tau_pow;
  }
  for (std::size_t i = 0; i < l2.size(); ++i) {
    auto row = terms.row(i);
    const double shape_term = (alpha - 1.0) * l2[i];
    for (std::size_t j = 0; j < m; ++j) row[j] = offset[j] + shape_term - params.lambda2(j) * powers[i];
  }
  if (terms.has_censored_row) {
    auto row = terms.row(terms.rows - 1);
    const double exposure = (l2.empty() ? weibull_power(sample.last_time(), alpha) : powers.back()) - tau_pow;
    for (std::size_t j = 0; j < m; ++j) row[j] = std::log(params.pi(j)) - params.lambda2(j) * exposure;
  }
  return terms;
}

std::vector<double> softmax_rows(ComponentLogTerms& terms) {
  std::vector<double> log_norm(terms.rows);
  for (std::size_t i = 0; i < terms.rows; ++i) {
    auto row = terms.row(i);
    const double top = *std::max_element(row.begin(), row.end());
    if (!std::isfinite(top)) throw InternalError("component log terms are not finite");
    for (double& v : row) v -= top;
    log_norm[i] = top;
  }
  kernels::exp_affine(terms.values, 1.0, 0.0, terms.values);
  for (std::size_t i = 0; i < terms.rows; ++i) {
    auto row = terms.row(i);
    const double total = sum_of(row);
    // The max entry contributes exp(0) = 1, so total >= 1.
    for (double& v : row) v /= total;
    log_norm[i] += std::log(total);
  }
  return log_norm;
}

double loglik_mixture(const MixtureParams& params, const CensoredSample& sample) {
  auto terms = component_log_terms(params, sample);
  const auto log_norm = softmax_rows(terms);
  double total = stage1_loglik(params, sample);
  const std::size_t observed_rows = sample.stage2_count();
  for (std::size_t i = 0; i < observed_rows; ++i) total += log_norm[i];
  if (terms.has_censored_row) total += static_cast<double>(sample.censored_count()) * log_norm.back();
  return total;
}

double loglik_eq8(const MixtureParams& params, const CensoredSample& sample) {
  require_matching_tau(params, sample);
  require_stage2_failures(sample, params.m());

  const auto sums = stage_sums(params, sample);
  const double alpha = params.alpha();
  const double lambda1 = params.lambda1();
  const double lambda_bar = params.lambda_bar();
  const double n = static_cast<double>(sample.n());
  const double r = static_cast<double>(sample.r());
  const double n1 = static_cast<double>(sample.n1());

  const double l1 = n1 * std::log(lambda1) - lambda1 * (sums.stage1.sum + (n - n1) * sums.tau_pow);
  const double exposure2 = sums.stage2.sum + (n - r) * sums.last_pow - (n - n1) * sums.tau_pow;
  const double l2 = (r - n1) * std::log(lambda_bar) - lambda_bar * exposure2;
  const double l3 = r * std::log(alpha) + (alpha - 1.0) * sum_of(sample.log_times());
  return l1 + l2 + l3;
}

Score score_eq8(const MixtureParams& params, const CensoredSample& sample) {
  require_matching_tau(params, sample);
  require_stage2_failures(sample, params.m());

  const auto sums = stage_sums(params, sample);
  const double alpha = params.alpha();
  const double lambda1 = params.lambda1();
  const double lambda_bar = params.lambda_bar();
  const double n = static_cast<double>(sample.n());
  const double r = static_cast<double>(sample.r());
  const double n1 = static_cast<double>(sample.n1());
  const double log_tau = std::log(sample.tau());
  const double log_last = std::log(sample.last_time());

  const double exposure2 = sums.stage2.sum + (n - r) * sums.last_pow - (n - n1) * sums.tau_pow;
  const double common = (r - n1) / lambda_bar - exposure2;

  Score s;
  s.d_lambda1 = n1 / lambda1 - (sums.stage1.sum + (n - n1) * sums.tau_pow);
  s.d_alpha = sum_of(sample.stage1_log_times()) -
              lambda1 * (sums.stage1.sum_times_x + (n - n1) * sums.tau_pow * log_tau) + r / alpha +
              sum_of(sample.stage2_log_times()) -
              lambda_bar * (sums.stage2.sum_times_x + (n - r) * sums.last_pow * log_last -
                            (n - n1) * sums.tau_pow * log_tau);
  const std::size_t m = params.m();
  s.d_lambda2.resize(m);
  for (std::size_t j = 0; j < m; ++j) s.d_lambda2[j] = params.pi(j) * common;
  s.d_pi.resize(m - 1);
  for (std::size_t j = 0; j + 1 < m; ++j) s.d_pi[j] = (params.lambda2(j) - params.lambda2(m - 1)) * common;
  return s;
}

}  // namespace hssalt
