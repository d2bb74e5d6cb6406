#include "hssalt/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hssalt/distribution.hpp"
#include "hssalt/error.hpp"
#include "hssalt/kernels.hpp"
#include "hssalt/rng.hpp"
#include "hssalt/root_finding.hpp"

namespace hssalt {
namespace {

constexpr double kAscentSlack = 1e-8;
constexpr double kCollapseMass = 1e-8;
constexpr double kScoreTol = 1e-10;
constexpr int kMaxExpansions = 40;
constexpr std::uint64_t kStartSubstream = 0x5354;

double sum_of(std::span<const double> values) { return std::accumulate(values.begin(), values.end(), 0.0); }

struct Estep {
  Responsibilities resp;
  double loglik;
};

Estep e_step_with_loglik(const MixtureParams& params, const CensoredSample& sample) {
  Estep out{component_log_terms(params, sample), 0.0};
  const auto log_norm = softmax_rows(out.resp);
  double total = stage1_loglik(params, sample);
  for (std::size_t i = 0; i < sample.stage2_count(); ++i) total += log_norm[i];
  if (out.resp.has_censored_row) total += static_cast<double>(sample.censored_count()) * log_norm.back();
  out.loglik = total;
  return out;
}

void check_shape(const Responsibilities& resp, const CensoredSample& sample, std::size_t m) {
  const std::size_t rows = sample.stage2_count() + (sample.censored_count() > 0 ? 1 : 0);
  if (resp.m != m || resp.rows != rows || resp.values.size() != rows * m ||
      resp.has_censored_row != (sample.censored_count() > 0)) {
    throw ArgumentError("responsibilities do not match the sample");
  }
}

// Expands [lo, hi] outward until f changes sign, then refines by Brent.
template <typename F>
AlphaRoot bracketed_root(F&& f, std::pair<double, double> bracket) {
  auto [lo, hi] = bracket;
  if (!(lo > 0.0) || !(hi > lo)) throw ArgumentError("alpha bracket must satisfy 0 < lower < upper");
  double f_lo = f(lo);
  double f_hi = f(hi);
  int expansions = 0;
  while (!(f_lo >= 0.0 && f_hi <= 0.0) && !(f_lo <= 0.0 && f_hi >= 0.0)) {
    if (std::isnan(f_lo) || std::isnan(f_hi) || expansions == kMaxExpansions) {
      throw AlphaSolveFailure("no sign change of the shape score in [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    }
    ++expansions;
    // The score decreases through its root: positive below, negative above.
    if (f_lo < 0.0) {
      lo *= 0.5;
      f_lo = f(lo);
    } else {
      hi *= 2.0;
      f_hi = f(hi);
    }
  }
  const auto root = brent_root(f, lo, hi, f_lo, f_hi, 0.0, kScoreTol, 400);
  if (!std::isfinite(root.fx)) throw AlphaSolveFailure("shape score is not finite near its root");
  return {root.x, root.fx, lo, hi, expansions};
}

// Power sums shared by the homogeneous closed forms.
struct HomogeneousSums {
  double stage1_exposure;  // sum_{i<=n1} t^a + (n - n1) tau^a
  double stage2_exposure;  // sum_{i>n1} t^a + (n - r) t_r^a - (n - n1) tau^a
  double stage1_log_moment;
  double stage2_log_moment;  // includes the censored and tau terms
};

HomogeneousSums homogeneous_sums(const CensoredSample& sample, double alpha) {
  const auto l1 = sample.stage1_log_times();
  const auto l2 = sample.stage2_log_times();
  const std::vector<double> w1(l1.size(), 1.0), w2(l2.size(), 1.0);
  const auto m1 = kernels::weighted_exp_moments(l1, w1, alpha);
  const auto m2 = kernels::weighted_exp_moments(l2, w2, alpha);
  const double n = static_cast<double>(sample.n());
  const double r = static_cast<double>(sample.r());
  const double n1 = static_cast<double>(sample.n1());
  const double tau_pow = weibull_power(sample.tau(), alpha);
  const double last_pow = weibull_power(sample.last_time(), alpha);
  const double log_tau = std::log(sample.tau());
  const double log_last = std::log(sample.last_time());
  return {m1.sum + (n - n1) * tau_pow, m2.sum + (n - r) * last_pow - (n - n1) * tau_pow,
          m1.sum_times_x + (n - n1) * tau_pow * log_tau,
          m2.sum_times_x + (n - r) * last_pow * log_last - (n - n1) * tau_pow * log_tau};
}

void require_homogeneous_data(const CensoredSample& sample) {
  if (sample.r() < 2) throw DegenerateDataError("at least two failures are required");
  if (sample.n1() == 0) throw DegenerateDataError("no failures before the stress change; lambda1 is inestimable");
  if (sample.stage2_count() == 0) {
    throw DegenerateDataError("no failures after the stress change; lambda2 is inestimable");
  }
}

double max_relative_change(const MixtureParams& a, const MixtureParams& b) {
  const auto x = a.flatten();
  const auto y = b.flatten();
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    worst = std::max(worst, std::abs(y[k] - x[k]) / std::max(std::abs(x[k]), 1e-300));
  }
  return worst;
}

MixtureParams random_start(const MixtureParams& base, const EmConfig& cfg, int index) {
  auto stream = stream_for(cfg.seed, static_cast<std::uint64_t>(index), kStartSubstream);
  const double spread = 0.5;
  const double alpha = cfg.alpha_fixed ? *cfg.alpha_fixed : base.alpha() * std::exp(spread * stream.standard_normal());
  const double lambda1 = base.lambda1() * std::exp(spread * stream.standard_normal());
  std::vector<double> lambda2(base.m()), pi(base.m());
  for (std::size_t j = 0; j < base.m(); ++j) lambda2[j] = base.lambda2(j) * std::exp(spread * stream.standard_normal());
  for (double& p : pi) p = stream.standard_exponential();
  const double total = sum_of(pi);
  for (double& p : pi) p /= total;
  return MixtureParams(alpha, lambda1, std::move(lambda2), std::move(pi), base.tau());
}

}  // namespace

void EmConfig::validate() const {
  if (m < 1) throw ArgumentError("m must be at least 1");
  if (max_iterations < 0) throw ArgumentError("max_iterations must be non-negative");
  if (!(param_tol > 0.0) || !(loglik_tol > 0.0)) throw ArgumentError("tolerances must be positive");
  if (n_starts < 1) throw ArgumentError("n_starts must be at least 1");
  if (!(alpha_bracket.first > 0.0) || !(alpha_bracket.second > alpha_bracket.first)) {
    throw ArgumentError("alpha bracket must satisfy 0 < lower < upper");
  }
  if (alpha_fixed && !(*alpha_fixed > 0.0 && std::isfinite(*alpha_fixed))) {
    throw ArgumentError("alpha_fixed must be positive and finite");
  }
  if (initial && initial->m() != m) throw ArgumentError("initial parameters have the wrong number of components");
}

Responsibilities e_step(const MixtureParams& params, const CensoredSample& sample) {
  return e_step_with_loglik(params, sample).resp;
}

double alpha_score(const MixtureParams& params_k, const Responsibilities& resp, const CensoredSample& sample,
                   double alpha) {
  check_shape(resp, sample, params_k.m());
  const std::size_t m = params_k.m();
  const auto l1 = sample.stage1_log_times();
  const auto l2 = sample.stage2_log_times();
  const double n = static_cast<double>(sample.n());
  const double r = static_cast<double>(sample.r());
  const double n1 = static_cast<double>(sample.n1());
  const double censored = static_cast<double>(sample.censored_count());

  // One weighted moment call over (stage-1 times, stage-2 times, t_r).
  std::vector<double> x;
  std::vector<double> w;
  x.reserve(sample.r() + 1);
  w.reserve(sample.r() + 1);
  x.insert(x.end(), l1.begin(), l1.end());
  w.insert(w.end(), l1.size(), params_k.lambda1());
  double rate_mass = 0.0;
  for (std::size_t i = 0; i < l2.size(); ++i) {
    const auto row = resp.row(i);
    double c = 0.0;
    for (std::size_t j = 0; j < m; ++j) c += row[j] * params_k.lambda2(j);
    x.push_back(l2[i]);
    w.push_back(c);
    rate_mass += c;
  }
  if (resp.has_censored_row) {
    const auto row = resp.row(resp.rows - 1);
    double c = 0.0;
    for (std::size_t j = 0; j < m; ++j) c += row[j] * params_k.lambda2(j);
    x.push_back(std::log(sample.last_time()));
    w.push_back(censored * c);
    rate_mass += censored * c;
  }
  const auto moments = kernels::weighted_exp_moments(x, w, alpha);
  const double log_tau = std::log(sample.tau());
  const double tau_term = std::exp(alpha * log_tau) * log_tau * (rate_mass - params_k.lambda1() * (n - n1));
  return r / alpha + sum_of(sample.log_times()) - moments.sum_times_x + tau_term;
}

AlphaRoot solve_alpha_score(const MixtureParams& params_k, const Responsibilities& resp,
                            const CensoredSample& sample, std::pair<double, double> bracket) {
  check_shape(resp, sample, params_k.m());
  return bracketed_root([&](double a) { return alpha_score(params_k, resp, sample, a); }, bracket);
}

MixtureParams m_step(const MixtureParams& params_k, Responsibilities& resp, const CensoredSample& sample,
                     const EmConfig& cfg) {
  check_shape(resp, sample, params_k.m());
  const std::size_t m = params_k.m();
  const auto l2 = sample.stage2_log_times();
  const double n = static_cast<double>(sample.n());
  const double n1 = static_cast<double>(sample.n1());
  const double censored = static_cast<double>(sample.censored_count());

  std::vector<double> observed_mass(m, 0.0);
  for (std::size_t i = 0; i < l2.size(); ++i) {
    const auto row = resp.row(i);
    for (std::size_t j = 0; j < m; ++j) observed_mass[j] += row[j];
  }
  std::vector<double> censored_resp(m, 0.0);
  if (resp.has_censored_row) {
    const auto row = resp.row(resp.rows - 1);
    std::copy(row.begin(), row.end(), censored_resp.begin());
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (observed_mass[j] < kCollapseMass) {
      throw ComponentCollapse("component " + std::to_string(j + 1) + " holds no observed failures");
    }
  }

  std::vector<double> pi(m);
  for (std::size_t j = 0; j < m; ++j) pi[j] = (observed_mass[j] + censored * censored_resp[j]) / (n - n1);

  const double alpha = cfg.alpha_fixed ? *cfg.alpha_fixed
                                       : solve_alpha_score(params_k, resp, sample, cfg.alpha_bracket).alpha;

  const auto l1 = sample.stage1_log_times();
  const std::vector<double> unit(l1.size(), 1.0);
  const double tau_pow = weibull_power(sample.tau(), alpha);
  const double stage1_exposure = kernels::weighted_exp_moments(l1, unit, alpha).sum + (n - n1) * tau_pow;
  if (!(stage1_exposure > 0.0)) throw InternalError("stage-1 exposure is not positive");
  const double lambda1 = n1 / stage1_exposure;

  std::vector<double> excess(l2.size());
  kernels::exp_affine(l2, alpha, 0.0, excess);
  for (double& e : excess) e -= tau_pow;
  const double last_excess = weibull_power(sample.last_time(), alpha) - tau_pow;

  std::vector<double> lambda2(m);
  for (std::size_t j = 0; j < m; ++j) {
    double exposure = censored * censored_resp[j] * last_excess;
    for (std::size_t i = 0; i < l2.size(); ++i) exposure += resp.row(i)[j] * excess[i];
    if (!(exposure > 0.0)) throw InternalError("stage-2 exposure is not positive");
    lambda2[j] = observed_mass[j] / exposure;
  }

  const auto order = MixtureParams::canonical_order(lambda2, pi);
  std::vector<double> scratch(m);
  for (std::size_t i = 0; i < resp.rows; ++i) {
    auto row = resp.row(i);
    for (std::size_t k = 0; k < m; ++k) scratch[k] = row[order[k]];
    std::copy(scratch.begin(), scratch.end(), row.begin());
  }
  return MixtureParams(alpha, lambda1, std::move(lambda2), std::move(pi), sample.tau());
}

EmFit run_em(const CensoredSample& sample, const MixtureParams& start, const EmConfig& cfg) {
  if (start.m() != cfg.m) throw ArgumentError("start has the wrong number of components");
  const MixtureParams first = cfg.alpha_fixed ? start.with_alpha(*cfg.alpha_fixed) : start;
  auto current = e_step_with_loglik(first, sample);
  EmFit fit{first, current.loglik, 0.0, std::move(current.resp), 0, false, 1, {current.loglik}, {}};

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    MixtureParams next = m_step(fit.params, fit.responsibilities, sample, cfg);
    auto step = e_step_with_loglik(next, sample);
    if (step.loglik < fit.loglik - kAscentSlack) {
      throw MonotonicityViolation("log-likelihood fell from " + std::to_string(fit.loglik) + " to " +
                                  std::to_string(step.loglik) + " at iteration " + std::to_string(it));
    }
    const double change = max_relative_change(fit.params, next);
    const double gain = std::abs(step.loglik - fit.loglik);
    fit.params = std::move(next);
    fit.responsibilities = std::move(step.resp);
    fit.loglik = step.loglik;
    fit.loglik_trace.push_back(step.loglik);
    fit.iterations = it;
    if (change < cfg.param_tol || gain < cfg.loglik_tol) {
      fit.converged = true;
      break;
    }
  }
  fit.loglik_eq8 = loglik_eq8(fit.params, sample);
  return fit;
}

MixtureParams default_start(const CensoredSample& sample, const EmConfig& cfg) {
  double alpha, lambda1, lambda2;
  try {
    const auto base = fit_homogeneous(sample, cfg.alpha_fixed, cfg.alpha_bracket);
    alpha = base.params.alpha();
    lambda1 = base.params.lambda1();
    lambda2 = base.params.lambda2(0);
  } catch (const AlphaSolveFailure&) {
    const auto base = fit_homogeneous(sample, 1.0);
    alpha = 1.0;
    lambda1 = base.params.lambda1();
    lambda2 = base.params.lambda2(0);
  }
  const std::size_t m = cfg.m;
  std::vector<double> rates(m, lambda2);
  if (m > 1) {
    for (std::size_t j = 0; j < m; ++j) {
      rates[j] = lambda2 * std::pow(4.0, 2.0 * static_cast<double>(j) / static_cast<double>(m - 1) - 1.0);
    }
  }
  return MixtureParams(alpha, lambda1, std::move(rates), std::vector<double>(m, 1.0 / static_cast<double>(m)),
                       sample.tau());
}

EmFit fit_em(const CensoredSample& sample, const EmConfig& cfg) {
  cfg.validate();
  require_homogeneous_data(sample);
  if (sample.stage2_count() < cfg.m) {
    throw DegenerateDataError("fewer failures after the stress change than mixture components");
  }

  const MixtureParams base = cfg.initial ? *cfg.initial : default_start(sample, cfg);
  std::optional<EmFit> best;
  std::vector<StartDiagnostic> diagnostics;
  for (int s = 0; s < cfg.n_starts; ++s) {
    StartDiagnostic diag;
    diag.index = s;
    try {
      const MixtureParams start = s == 0 ? base : random_start(base, cfg, s);
      EmFit fit = run_em(sample, start, cfg);
      diag.status = fit.converged ? "converged" : "max_iterations";
      diag.iterations = fit.iterations;
      diag.loglik = fit.loglik;
      const bool better = !best || (fit.converged && !best->converged) ||
                          (fit.converged == best->converged && fit.loglik > best->loglik);
      if (better) best = std::move(fit);
    } catch (const AlphaSolveFailure& e) {
      diag.status = "alpha_solve_failure";
      diag.message = e.what();
    } catch (const ComponentCollapse& e) {
      diag.status = "component_collapse";
      diag.message = e.what();
    } catch (const MonotonicityViolation& e) {
      diag.status = "monotonicity_violation";
      diag.message = e.what();
    } catch (const DomainError& e) {
      diag.status = "invalid_iterate";
      diag.message = e.what();
    } catch (const ArgumentError& e) {
      // A random start or an iterate left the parameter space (overflow).
      diag.status = "invalid_iterate";
      diag.message = e.what();
    }
    diagnostics.push_back(std::move(diag));
  }
  if (!best) {
    std::string detail;
    for (const auto& d : diagnostics) {
      detail += "\n  start " + std::to_string(d.index) + ": " + d.status + (d.message.empty() ? "" : " (" + d.message + ")");
    }
    throw FitFailure("every EM start failed:" + detail);
  }
  best->starts_tried = cfg.n_starts;
  best->starts = std::move(diagnostics);
  return std::move(*best);
}

EmFit fit_homogeneous(const CensoredSample& sample, std::optional<double> alpha_fixed,
                      std::pair<double, double> alpha_bracket) {
  require_homogeneous_data(sample);
  const double r = static_cast<double>(sample.r());
  const double n1 = static_cast<double>(sample.n1());
  const double log_sum = sum_of(sample.log_times());

  double alpha;
  if (alpha_fixed) {
    if (!(*alpha_fixed > 0.0 && std::isfinite(*alpha_fixed))) throw ArgumentError("alpha_fixed must be positive and finite");
    alpha = *alpha_fixed;
  } else {
    auto profile_score = [&](double a) {
      const auto s = homogeneous_sums(sample, a);
      const double lambda1 = n1 / s.stage1_exposure;
      const double lambda2 = (r - n1) / s.stage2_exposure;
      return r / a + log_sum - lambda1 * s.stage1_log_moment - lambda2 * s.stage2_log_moment;
    };
    alpha = bracketed_root(profile_score, alpha_bracket).alpha;
  }
  const auto s = homogeneous_sums(sample, alpha);
  if (!(s.stage1_exposure > 0.0) || !(s.stage2_exposure > 0.0)) throw InternalError("exposure is not positive");
  const auto params = MixtureParams::homogeneous(alpha, n1 / s.stage1_exposure, (r - n1) / s.stage2_exposure, sample.tau());

  auto step = e_step_with_loglik(params, sample);
  EmFit fit{params, step.loglik, loglik_eq8(params, sample), std::move(step.resp), 0, true, 1, {step.loglik}, {}};
  fit.starts.push_back({0, "converged", "", 0, step.loglik});
  return fit;
}

}  // namespace hssalt
