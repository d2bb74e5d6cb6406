// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hssalt/bundled.hpp"
#include "hssalt/distribution.hpp"
#include "hssalt/estimator.hpp"
#include "hssalt/inference.hpp"
#include "hssalt/kernels.hpp"
#include "hssalt/likelihood.hpp"
#include "hssalt/parallel.hpp"
#include "hssalt/sampler.hpp"
#include "hssalt/study.hpp"
#include "test_support.hpp"

using namespace hssalt;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, double limit_seconds, const std::function<Verdict()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.require(elapsed < limit_seconds, fmt("runtime %.2f s < %.0f s", elapsed, limit_seconds));
  if (!v.pass) ++failures;
  std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, title, v.detail.c_str());
  std::fflush(stdout);
}

// Aggregate-hazard CDF written out independently of the library.
double hazard_cdf(const MixtureParams& p, double t) {
  const double a = p.alpha();
  double h = 0.0;
  if (t <= p.tau()) {
    h = p.lambda1() * std::pow(t, a);
  } else {
    double bar = 0.0;
    for (std::size_t j = 0; j < p.m(); ++j) bar += p.pi(j) * p.lambda2(j);
    h = p.lambda1() * std::pow(p.tau(), a) + bar * (std::pow(t, a) - std::pow(p.tau(), a));
  }
  return -std::expm1(-h);
}

double central_difference(const std::function<double(double)>& f, double x) {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

const std::vector<GridCell> kGrid = [] {
  std::vector<GridCell> g;
  const std::pair<std::size_t, std::size_t> sizes[] = {{15, 13}, {15, 15}, {25, 21},  {25, 25},  {35, 30},
                                                       {35, 35}, {50, 43}, {50, 50}, {100, 86}, {100, 100}};
  for (auto [n, r] : sizes) {
    for (double tau : {1.60, 1.70, 1.80}) g.push_back({n, r, tau});
  }
  return g;
}();

const ParameterSummary& param(const StudyRow& row, const std::string& name) {
  for (const auto& p : row.parameters) {
    if (p.name == name) return p;
  }
  throw std::runtime_error("missing parameter " + name);
}

const StudyRow& row_for(const StudyResult& result, std::size_t n, std::size_t r, const std::string& model) {
  for (const auto& row : result.rows) {
    if (row.cell.n == n && row.cell.r == r && row.model == model) return row;
  }
  throw std::runtime_error("missing study row " + model);
}

StudyConfig study(const MixtureParams& truth, std::vector<GridCell> grid, std::uint64_t seed) {
  return StudyConfig{.true_params = truth,
                     .grid = std::move(grid),
                     .replications = 1000,
                     .q_levels = {},
                     .seed = seed,
                     .em = {},
                     .workers = {}};
}

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

}  // namespace

int main() {
  std::printf("kernel backend: %s, workers: %zu\n", std::string(kernels::to_string(kernels::active_backend())).c_str(),
              resolve_workers());

  criterion(1, "closed-form vs numeric quantile", 1.0, [] {
    Verdict v;
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> unit(1e-3, 1.0 - 1e-3);
    double worst_cdf = 0.0, worst_bisect = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const auto p = testing::random_params(gen, 2 + k % 2);
      const double q = unit(gen);
      for (auto family : {CdfFamily::HazardMixture, CdfFamily::PopulationMixture}) {
        worst_cdf = std::max(worst_cdf, std::abs(cdf(p, quantile(p, q, family), family) - q));
      }
      const double t = quantile(p, q, CdfFamily::HazardMixture);
      double hi = 1.0;
      while (hazard_cdf(p, hi) < q) hi *= 2.0;
      const double b = testing::bisect([&](double x) { return hazard_cdf(p, x); }, 0.0, hi, q);
      worst_bisect = std::max(worst_bisect, std::abs(t - b) / std::max(1.0, b));
    }
    v.require(worst_cdf <= 1e-9, fmt("max |F(Q(q)) - q| = %.2e", worst_cdf));
    v.require(worst_bisect <= 1e-9, fmt("max closed form vs bisection = %.2e", worst_bisect));
    return v;
  });

  criterion(2, "score vs finite differences", 1.0, [] {
    Verdict v;
    std::mt19937_64 gen(202);
    double worst = 0.0;
    int draws = 0;
    for (std::uint64_t k = 0; draws < 100; ++k) {
      const auto p = testing::random_params(gen, 2 + k % 2);
      const auto d = generate_sample({p, 60, 50, 7, k, 0, false});
      if (d.discarded) continue;
      ++draws;
      const auto& s = d.sample;
      const auto score = score_eq8(p, s);
      std::vector<double> l2(p.lambda2().begin(), p.lambda2().end()), pi(p.pi().begin(), p.pi().end());
      auto ll = [&](double a, double l1, const std::vector<double>& r2, const std::vector<double>& w) {
        return loglik_eq8(MixtureParams(a, l1, r2, w, p.tau()), s);
      };
      worst = std::max(worst, testing::rel_diff(score.d_alpha, central_difference([&](double a) { return ll(a, p.lambda1(), l2, pi); }, p.alpha())));
      worst = std::max(worst, testing::rel_diff(score.d_lambda1, central_difference([&](double l) { return ll(p.alpha(), l, l2, pi); }, p.lambda1())));
      for (std::size_t j = 0; j < p.m(); ++j) {
        const double fd = central_difference([&](double x) {
          auto r2 = l2;
          r2[j] = x;
          return ll(p.alpha(), p.lambda1(), r2, pi);
        }, l2[j]);
        worst = std::max(worst, testing::rel_diff(score.d_lambda2[j], fd));
      }
      for (std::size_t j = 0; j + 1 < p.m(); ++j) {
        const double fd = central_difference([&](double x) {
          auto w = pi;
          w.back() -= x - w[j];
          w[j] = x;
          return ll(p.alpha(), p.lambda1(), l2, w);
        }, pi[j]);
        worst = std::max(worst, testing::rel_diff(score.d_pi[j], fd));
      }
    }
    v.require(worst <= 1e-5, fmt("max relative error %.2e over 100 draws", worst));
    return v;
  });

  criterion(3, "EM ascent and m=1 agreement", 30.0, [] {
    Verdict v;
    int violations = 0, monotonicity = 0;
    double worst_homog = 0.0;
    EmConfig cfg;
    EmConfig one;
    one.m = 1;
    one.n_starts = 1;
    one.param_tol = 1e-12;
    one.loglik_tol = 1e-14;
    one.max_iterations = 20000;
    for (std::uint64_t i = 0; i < 200; ++i) {
      const auto& cell = kGrid[i % kGrid.size()];
      const auto s = draw_fittable(testing::study_params(cell.tau), cell.n, cell.r, 303, i, 2).draw.sample;
      cfg.seed = i;
      const auto fit = fit_em(s, cfg);
      for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k) {
        if (fit.loglik_trace[k] < fit.loglik_trace[k - 1] - 1e-8) ++violations;
      }
      for (const auto& st : fit.starts) {
        if (st.status == "monotonicity_violation") ++monotonicity;
      }
      const auto em = fit_em(s, one).params.flatten();
      const auto h = fit_homogeneous(s).params.flatten();
      for (std::size_t k = 0; k < h.size(); ++k) worst_homog = std::max(worst_homog, std::abs(em[k] - h[k]) / std::abs(h[k]));
    }
    v.require(violations == 0, fmt("trace decreases beyond 1e-8: %.0f", violations));
    v.require(monotonicity == 0, fmt("starts aborted for descent: %.0f", monotonicity));
    v.require(worst_homog <= 1e-6, fmt("max relative m=1 EM vs closed form %.2e", worst_homog));
    return v;
  });

  criterion(4, "sampler matches the population mixture", 30.0, [] {
    Verdict v;
    const auto p = testing::study_params(1.6);
    const double tau_pow = std::pow(1.6, 1.2);
    int passing = 0, pop_pass = 0, hazard_fail = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto d = generate_sample({p, 10000, 10000, 404, seed, 0, true});
      std::vector<std::vector<double>> x(2);
      const auto t2 = d.sample.stage2_times();
      for (std::size_t i = 0; i < t2.size(); ++i) {
        const int j = (*d.labels)[i] - 1;
        x[j].push_back(p.lambda2(j) * (std::pow(t2[i], 1.2) - tau_pow));
      }
      bool ok = true;
      for (const auto& xs : x) {
        const double dstat = testing::ks_d(xs, [](double e) { return -std::expm1(-e); });
        ok = ok && testing::kolmogorov_p(dstat, xs.size()) > 0.01;
      }
      if (ok) ++passing;
      std::vector<double> all(d.sample.times().begin(), d.sample.times().end());
      const double dp = testing::ks_d(all, [&](double t) { return population_cdf(p, t); });
      const double dh = testing::ks_d(all, [&](double t) { return hazard_cdf(p, t); });
      if (testing::kolmogorov_p(dp, all.size()) > 0.01) ++pop_pass;
      if (testing::kolmogorov_p(dh, all.size()) < 0.01) ++hazard_fail;
    }
    v.require(passing >= 95, fmt("subgroup KS passes in %.0f/100 seeds", passing));
    v.require(pop_pass >= 95, fmt("population KS passes in %.0f/100", pop_pass));
    v.require(hazard_fail == 100, fmt("hazard KS rejects in %.0f/100", hazard_fail));
    return v;
  });

  criterion(5, "point-estimation study at (100, 100, 1.60)", 600.0, [] {
    Verdict v;
    StudyConfig cfg = study(testing::study_params(1.6), {{100, 100, 1.6}}, 505);
    const auto result = run_point_study(cfg);
    const auto& row = result.rows.at(0);
    const auto& a = param(row, "alpha").summary;
    const auto& pi = param(row, "pi_1").summary;
    const auto& l1 = param(row, "lambda1").summary;
    v.require(within(a.mean, 1.20, 1.31), fmt("AE(alpha) %.4f", a.mean));
    v.require(a.mse <= 0.06, fmt("MSE(alpha) %.4f", a.mse));
    v.require(within(pi.mean, 0.37, 0.44), fmt("AE(pi) %.4f", pi.mean));
    v.require(pi.mse <= 0.02, fmt("MSE(pi) %.4f", pi.mse));
    v.require(within(l1.mean, 0.19, 0.205), fmt("AE(lambda1) %.4f", l1.mean));
    v.require(true, fmt("used %.0f of %.0f", row.used, row.replications));
    return v;
  });

  criterion(6, "quantile comparison h-SSALT vs SSALT", 900.0, [] {
    Verdict v;
    StudyConfig cfg = study(testing::study_params(1.6), {{35, 30, 1.6}, {100, 86, 1.6}}, 606);
    cfg.q_levels = {0.01, 0.5};
    // Truth follows the aggregate-hazard CDF, as in the published comparison.
    cfg.quantile_family = CdfFamily::HazardMixture;
    const auto result = run_quantile_study(cfg);
    const auto& h35 = row_for(result, 35, 30, "h-SSALT");
    const auto& s35 = row_for(result, 35, 30, "SSALT");
    const double ratio = s35.quantiles.at(1).summary.rmse / h35.quantiles.at(1).summary.rmse;
    v.require(ratio >= 2.0, fmt("RMSE ratio at q=0.50: %.3f", ratio));
    const auto& h100 = row_for(result, 100, 86, "h-SSALT");
    const auto& s100 = row_for(result, 100, 86, "SSALT");
    const double truth = h100.quantiles.at(0).truth;
    const double s_ratio = s100.quantiles.at(0).summary.mean / truth;
    const double h_ratio = h100.quantiles.at(0).summary.mean / truth;
    v.require(s_ratio <= 0.6, fmt("SSALT mean t_0.01 / truth %.3f", s_ratio));
    v.require(within(h_ratio, 0.9, 1.4), fmt("h-SSALT mean t_0.01 / truth %.3f", h_ratio));
    return v;
  });

  criterion(7, "fixed-shape comparison at (100, 100, 8)", 600.0, [] {
    Verdict v;
    const MixtureParams truth(1.0, 0.03, {0.14, 1.22}, {0.6, 0.4}, 8.0);
    StudyConfig cfg = study(truth, {{100, 100, 8.0}}, 707);
    const auto result = run_fixed_alpha_comparison(cfg);
    const auto& frm = row_for(result, 100, 100, "FRM");
    const auto& cem = row_for(result, 100, 100, "CEM");
    const double ae = param(cem, "lambda1").summary.mean;
    v.require(within(ae, 0.028, 0.033), fmt("fixed-shape AE(lambda1) %.4f", ae));
    const double free_mse = param(frm, "lambda2_2").summary.mse;
    const double fixed_mse = param(cem, "lambda2_2").summary.mse;
    v.require(free_mse >= fixed_mse, fmt("MSE(rate 1.22) free %.4f vs fixed %.4f", free_mse, fixed_mse));
    return v;
  });

  criterion(8, "reference data analysis", 10.0, [] {
    Verdict v;
    const std::pair<const char*, MixtureParams> cases[] = {{"complete", testing::reference_complete_fit()},
                                                           {"censored", testing::reference_censored_fit()}};
    for (const auto& [name, ref] : cases) {
      const auto data = bundled_dataset(name).sample;
      const auto fit = fit_em(data, EmConfig{});
      const auto got = fit.params.flatten();
      const auto want = ref.flatten();
      double worst = 0.0;
      for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] - want[k]) / std::abs(want[k]));
      v.require(fit.converged && worst <= 0.02, std::string(name) + fmt(" max relative deviation %.4f", worst));
      const auto gof = ks_gof(data, fit.params, CdfFamily::PopulationMixture);
      if (std::string(name) == "complete") {
        v.require(std::abs(gof.ks_statistic - 0.0809) <= 0.005, fmt("complete D %.4f", gof.ks_statistic));
        v.require(std::abs(gof.p_value - 0.9370) <= 0.05, fmt("complete p %.4f", gof.p_value));
      } else {
        v.require(std::abs(gof.ks_statistic - 0.1306) <= 0.01, fmt("censored D %.4f", gof.ks_statistic));
      }
    }
    return v;
  });

  criterion(9, "bootstrap intervals", 1200.0, [] {
    Verdict v;
    const auto data = bundled_dataset("complete").sample;
    const auto fit = fit_em(data, EmConfig{});
    BootstrapConfig cfg;
    cfg.B = 1000;
    cfg.seed = 909;
    const auto boot = bootstrap_ci(data, fit, cfg);
    const auto& a = boot.intervals.at(0);
    v.require(std::abs(a.lower - 0.7437) <= 0.15 && std::abs(a.upper - 1.7310) <= 0.15,
              fmt("alpha interval (%.4f, %.4f)", a.lower, a.upper));

    const auto truth = testing::study_params(1.6);
    int covered = 0, outer = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      const auto s = draw_fittable(truth, 100, 100, 9090, i, 2).draw.sample;
      EmConfig em;
      em.seed = i;
      const auto f = fit_em(s, em);
      if (!f.converged) continue;
      BootstrapConfig inner;
      inner.B = 200;
      inner.seed = 10000 + i;
      const auto ci = bootstrap_ci(s, f, inner);
      const auto& pi = ci.intervals.at(4);
      ++outer;
      if (pi.lower <= 0.4 && 0.4 <= pi.upper) ++covered;
    }
    const double coverage = static_cast<double>(covered) / outer;
    v.require(within(coverage, 0.90, 0.98), fmt("pi coverage %.3f over %.0f outer samples", coverage, outer));
    return v;
  });

  criterion(10, "first-segment quantiles", 1.0, [] {
    Verdict v;
    const auto p = testing::study_params(1.6);
    const std::pair<double, double> expected[] = {{0.25, 1.3538}, {0.01, 0.0827}, {0.05, 0.3218}, {0.10, 0.5862}};
    for (auto [q, t] : expected) {
      for (auto family : {CdfFamily::HazardMixture, CdfFamily::PopulationMixture}) {
        const double got = quantile(p, q, family);
        v.require(std::abs(got - t) <= 5e-5, fmt("t_%.2f = %.6f", q, got));
      }
    }
    return v;
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
