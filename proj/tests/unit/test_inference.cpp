#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hssalt/bundled.hpp"
#include "hssalt/distribution.hpp"
#include "hssalt/error.hpp"
#include "hssalt/estimator.hpp"
#include "hssalt/inference.hpp"
#include "hssalt/kolmogorov.hpp"
#include "hssalt/sampler.hpp"
#include "test_support.hpp"

using namespace hssalt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EmFit injected(const MixtureParams& p) {
  EmFit fit{p, 0.0, 0.0, {}, 1, true, 1, {}, {}};
  return fit;
}

}  // namespace

TEST_CASE("quantile_from_fit", "[inference]") {
  const auto truth = injected(testing::study_params());
  const std::vector<double> q{0.01, 0.25, 0.5, 0.99};
  const auto hazard = quantile_from_fit(truth, q, CdfFamily::HazardMixture);
  const auto pop = quantile_from_fit(truth, q, CdfFamily::PopulationMixture);
  REQUIRE(hazard.size() == 4);
  CHECK(hazard[1].q == 0.25);
  CHECK_THAT(hazard[1].value, WithinAbs(1.3538, 5e-5));
  CHECK_THAT(pop[1].value, WithinAbs(1.3538, 5e-5));
  // Closed-form inversion by script; the value quoted for it is 5.8946.
  CHECK_THAT(hazard[3].value, WithinAbs(5.893927938554661, 1e-9));
  CHECK_THAT(hazard[3].value, WithinAbs(5.8946, 1e-3));

  const auto one = injected(MixtureParams::homogeneous(1.4, 0.3, 0.9, 1.2));
  for (double level : {0.01, 0.3, 0.6, 0.95}) {
    const std::vector<double> ql{level};
    CHECK_THAT(quantile_from_fit(one, ql, CdfFamily::HazardMixture)[0].value,
               WithinRel(quantile_from_fit(one, ql, CdfFamily::PopulationMixture)[0].value, 1e-10));
  }

  std::vector<double> grid;
  for (int i = 1; i < 100; ++i) grid.push_back(i / 100.0);
  for (auto family : {CdfFamily::HazardMixture, CdfFamily::PopulationMixture}) {
    const auto est = quantile_from_fit(truth, grid, family);
    for (std::size_t i = 1; i < est.size(); ++i) CHECK(est[i].value > est[i - 1].value);
  }

  auto stale = truth;
  stale.converged = false;
  CHECK_THROWS_AS(quantile_from_fit(stale, q, CdfFamily::HazardMixture), FitFailure);
  CHECK_NOTHROW(quantile_from_fit(stale, q, CdfFamily::HazardMixture, true));
  CHECK_THROWS_AS(quantile_from_fit(truth, std::vector<double>{1.0}, CdfFamily::HazardMixture), ArgumentError);
}

TEST_CASE("type-7 percentiles", "[inference]") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(percentile_sorted(v, 0.0) == 1.0);
  CHECK(percentile_sorted(v, 1.0) == 4.0);
  CHECK_THAT(percentile_sorted(v, 0.5), WithinAbs(2.5, 1e-15));
  CHECK_THAT(percentile_sorted(v, 0.025), WithinAbs(1.075, 1e-15));
  const std::vector<double> flat(250, 0.37);
  CHECK(percentile_sorted(flat, 0.025) == 0.37);
  CHECK(percentile_sorted(flat, 0.975) == 0.37);
  CHECK_THROWS_AS(percentile_sorted(std::vector<double>{}, 0.5), ArgumentError);
}

TEST_CASE("bootstrap intervals", "[inference]") {
  const auto data = bundled_dataset("complete").sample;
  const auto fit = fit_em(data, EmConfig{});
  BootstrapConfig cfg;
  cfg.B = 100;
  cfg.seed = 3;
  const auto a = bootstrap_ci(data, fit, cfg);
  CHECK(a.requested == 100);
  CHECK(a.used + a.dropped == 100);
  CHECK(a.replicates.size() == static_cast<std::size_t>(a.used));
  REQUIRE(a.intervals.size() == fit.params.flatten().size());
  CHECK(a.intervals[0].name == "alpha");
  for (std::size_t k = 0; k < a.intervals.size(); ++k) {
    const auto& iv = a.intervals[k];
    CHECK(iv.lower <= iv.upper);
    CHECK(iv.estimate == fit.params.flatten()[k]);
    std::vector<double> column;
    for (const auto& rep : a.replicates) column.push_back(rep[k]);
    std::sort(column.begin(), column.end());
    CHECK_THAT(iv.lower, WithinRel(percentile_sorted(column, 0.025), 1e-12));
    CHECK_THAT(iv.upper, WithinRel(percentile_sorted(column, 0.975), 1e-12));
  }
  CHECK(a.intervals[0].lower < fit.params.alpha());
  CHECK(a.intervals[0].upper > fit.params.alpha());

  cfg.workers = 1;
  const auto serial = bootstrap_ci(data, fit, cfg);
  cfg.workers = 4;
  const auto threaded = bootstrap_ci(data, fit, cfg);
  CHECK(serial.replicates == threaded.replicates);

  cfg.B = 99;
  CHECK_THROWS_AS(bootstrap_ci(data, fit, cfg), ArgumentError);
  cfg.B = 100;
  cfg.level = 1.0;
  CHECK_THROWS_AS(bootstrap_ci(data, fit, cfg), ArgumentError);
  auto stale = fit;
  stale.converged = false;
  cfg.level = 0.95;
  CHECK_THROWS_AS(bootstrap_ci(data, stale, cfg), FitFailure);
}

TEST_CASE("bootstrap intervals widen with the level", "[inference][property]") {
  const auto truth = testing::study_params();
  double w90 = 0.0, w99 = 0.0;
  int narrower = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto data = draw_fittable(truth, 40, 40, 900, seed, 2).draw.sample;
    EmConfig em;
    em.n_starts = 2;
    const auto fit = fit_em(data, em);
    if (!fit.converged) continue;
    BootstrapConfig cfg;
    cfg.B = 100;
    cfg.seed = seed;
    cfg.level = 0.90;
    const auto lo = bootstrap_ci(data, fit, cfg);
    cfg.level = 0.99;
    const auto hi = bootstrap_ci(data, fit, cfg);
    const double a = lo.intervals[0].upper - lo.intervals[0].lower;
    const double b = hi.intervals[0].upper - hi.intervals[0].lower;
    w90 += a;
    w99 += b;
    if (b < a) ++narrower;
  }
  CHECK(w99 >= w90);
  CHECK(narrower == 0);  // same seed, same replicates: intervals nest
}

TEST_CASE("Kolmogorov distribution", "[inference][ks]") {
  // scipy.special.kolmogorov / scipy.stats.kstwo.sf
  CHECK_THAT(kolmogorov_sf(std::sqrt(40.0) * 0.08106021163867533), WithinAbs(0.9552580258498148, 1e-12));
  CHECK_THAT(kolmogorov_sf(std::sqrt(35.0) * 0.1306), WithinAbs(0.5892269069879476, 1e-12));
  CHECK_THAT(ks_exact_sf(0.0809, 40), WithinAbs(0.9370257192330682, 1e-10));
  CHECK_THAT(ks_exact_sf(0.13611685863385337, 35), WithinAbs(0.4932727604531306, 1e-10));
  CHECK(kolmogorov_sf(0.0) == 1.0);
  CHECK(kolmogorov_sf(10.0) < 1e-80);

  for (double x = 0.05; x < 3.0; x += 0.05) {
    CHECK_THAT(kolmogorov_sf(x), WithinAbs(testing::kolmogorov_p(x, 1), 1e-12));
    CHECK(kolmogorov_sf(x + 0.05) <= kolmogorov_sf(x));
  }
  // The exact law approaches the limit as n grows.
  CHECK_THAT(ks_exact_sf(0.01, 10000), WithinAbs(kolmogorov_sf(1.0), 5e-3));
}

TEST_CASE("KS statistic on the reference data", "[inference][ks]") {
  const auto complete = bundled_dataset("complete").sample;
  const auto censored = bundled_dataset("censored").sample;
  const auto rc = ks_gof(complete, testing::reference_complete_fit(), CdfFamily::PopulationMixture);
  CHECK_THAT(rc.ks_statistic, WithinAbs(0.0809, 0.005));
  CHECK_THAT(rc.p_value, WithinAbs(0.9370, 0.05));
  CHECK(rc.points_used == 40);
  CHECK(rc.effective_size == 40);

  const auto rs = ks_gof(censored, testing::reference_censored_fit(), CdfFamily::PopulationMixture);
  CHECK_THAT(rs.ks_statistic, WithinAbs(0.1306, 0.01));
  // Against the aggregate-hazard CDF the same parameters fit visibly worse.
  CHECK(ks_statistic(complete, testing::reference_complete_fit(), CdfFamily::HazardMixture, KsConvention::Observed) > 0.2);
  CHECK(rs.effective_size == 35);

  // Independent recomputation against i/r steps.
  std::vector<double> t(censored.times().begin(), censored.times().end());
  const auto p = testing::reference_censored_fit();
  CHECK_THAT(rs.ks_statistic, WithinAbs(testing::ks_d(t, [&](double x) { return population_cdf(p, x); }), 1e-15));

  GofOptions exact;
  exact.method = GofMethod::ExactKolmogorov;
  CHECK_THAT(ks_gof(censored, p, CdfFamily::PopulationMixture, exact).p_value,
             WithinAbs(ks_exact_sf(rs.ks_statistic, 35), 1e-15));

  CHECK_THROWS_AS(ks_gof(CensoredSample({0.1, 0.2, 0.3, 0.4}, 10, 1.0), MixtureParams::homogeneous(1, 1, 1, 1.0),
                         CdfFamily::HazardMixture),
                  ArgumentError);
}

TEST_CASE("KS with the total-size convention", "[inference][ks][property]") {
  const auto truth = testing::study_params();
  const auto d = generate_sample({truth, 50, 30, 4, 0, 0, false}).sample;
  std::vector<double> times(d.times().begin(), d.times().end());
  for (std::size_t inflated : {50u, 80u, 500u}) {
    const CensoredSample s(times, inflated, d.tau());
    const double got = ks_statistic(s, truth, CdfFamily::PopulationMixture, KsConvention::Total);
    double expect = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double f = population_cdf(truth, times[i]);
      expect = std::max({expect, std::abs((i + 1.0) / inflated - f), std::abs(f - static_cast<double>(i) / inflated)});
    }
    CHECK_THAT(got, WithinAbs(expect, 1e-15));
    GofOptions total;
    total.convention = KsConvention::Total;
    CHECK(ks_gof(s, truth, CdfFamily::PopulationMixture, total).effective_size == inflated);
  }
  // Observed convention ignores n.
  CHECK(ks_statistic(CensoredSample(times, 50, d.tau()), truth, CdfFamily::PopulationMixture, KsConvention::Observed) ==
        ks_statistic(CensoredSample(times, 500, d.tau()), truth, CdfFamily::PopulationMixture, KsConvention::Observed));
}

TEST_CASE("KS accepts the generating model", "[inference][ks]") {
  const auto truth = testing::study_params();
  int passed = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto d = generate_sample({truth, 10000, 10000, seed, 0, 0, false}).sample;
    if (ks_gof(d, truth, CdfFamily::PopulationMixture).p_value > 0.01) ++passed;
  }
  CHECK(passed >= 99);
}

TEST_CASE("parametric bootstrap p-value", "[inference][ks]") {
  const auto data = bundled_dataset("complete").sample;
  const auto p = testing::reference_complete_fit();
  GofOptions opt;
  opt.method = GofMethod::ParametricBootstrap;
  opt.B = 200;
  opt.seed = 1;
  const auto r = ks_gof(data, p, CdfFamily::PopulationMixture, opt);
  CHECK(r.replicates_used == 200);
  CHECK(r.p_value > 0.0);
  CHECK(r.p_value <= 1.0);
  // Same answer from any schedule.
  opt.workers = 3;
  CHECK(ks_gof(data, p, CdfFamily::PopulationMixture, opt).p_value == r.p_value);
  CHECK_THAT(r.p_value * 201.0, WithinAbs(std::round(r.p_value * 201.0), 1e-9));
}

TEST_CASE("cdf export", "[inference]") {
  const auto data = bundled_dataset("censored").sample;
  const auto p = testing::reference_censored_fit();
  for (auto convention : {KsConvention::Observed, KsConvention::Total}) {
    const auto rows = cdf_export(data, p, CdfFamily::HazardMixture, convention);
    REQUIRE(rows.size() == data.r() + 200);
    const double size = convention == KsConvention::Observed ? 35.0 : 40.0;
    double prev = 0.0, worst = 0.0, worst_step = 0.0;
    for (std::size_t i = 0; i < data.r(); ++i) {
      REQUIRE(rows[i].empirical.has_value());
      CHECK(*rows[i].empirical >= prev);
      prev = *rows[i].empirical;
      CHECK(rows[i].t == data.times()[i]);
      const double gap = std::abs(*rows[i].empirical - rows[i].fitted);
      worst = std::max(worst, gap);
      worst_step = std::max({worst_step, gap, std::abs(rows[i].fitted - (*rows[i].empirical - 1.0 / size))});
    }
    CHECK_THAT(prev, WithinAbs(35.0 / size, 1e-15));
    const double d = ks_statistic(data, p, CdfFamily::HazardMixture, convention);
    CHECK(worst <= d);
    CHECK_THAT(worst_step, WithinAbs(d, 1e-15));

    CHECK(rows[data.r()].t == 0.0);
    CHECK(rows[data.r()].fitted == 0.0);
    const auto& last = rows.back();
    CHECK_FALSE(last.empirical.has_value());
    CHECK_THAT(last.t, WithinRel(1.05 * data.last_time(), 1e-14));
    CHECK(last.fitted > 0.0);
    CHECK(last.fitted < 1.0);
  }
}

TEST_CASE("method and convention names", "[inference]") {
  CHECK(parse_gof_method("exact") == GofMethod::ExactKolmogorov);
  CHECK(parse_gof_method("bootstrap") == GofMethod::ParametricBootstrap);
  CHECK(to_string(parse_gof_method("asymptotic")) == "AsymptoticKolmogorov");
  CHECK(parse_ks_convention("total") == KsConvention::Total);
  CHECK_THROWS_AS(parse_gof_method("ad"), ArgumentError);
  CHECK_THROWS_AS(parse_ks_convention("n"), ArgumentError);
}
