#include "hssalt/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hssalt/distribution.hpp"
#include "hssalt/error.hpp"
#include "hssalt/kolmogorov.hpp"
#include "hssalt/parallel.hpp"
#include "hssalt/sampler.hpp"

namespace hssalt {
namespace {

void require_converged(const EmFit& fit) {
  if (!fit.converged) throw FitFailure("the fit did not converge");
}

std::size_t ecdf_denominator(const CensoredSample& sample, KsConvention convention) {
  return convention == KsConvention::Observed ? sample.r() : sample.n();
}

// Refit seed for replicate b, kept apart from the generating stream.
std::uint64_t refit_seed(std::uint64_t seed, std::size_t b) {
  return seed ^ (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(b) + 1));
}

}  // namespace

std::vector<QuantileEstimate> quantile_from_fit(const EmFit& fit, std::span<const double> q_levels,
                                                CdfFamily family, bool force) {
  if (!force) require_converged(fit);
  std::vector<QuantileEstimate> out;
  out.reserve(q_levels.size());
  for (double q : q_levels) out.push_back({q, quantile(fit.params, q, family)});
  return out;
}

void BootstrapConfig::validate() const {
  if (B < 100) throw ArgumentError("bootstrap B must be at least 100");
  if (!(level > 0.0 && level < 1.0)) throw ArgumentError("level must lie in (0, 1)");
  refit.validate();
}

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ArgumentError("percentile of an empty set");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("percentile level must lie in [0, 1]");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BootstrapResult bootstrap_ci(const CensoredSample& sample, const EmFit& fit, const BootstrapConfig& cfg) {
  cfg.validate();
  require_converged(fit);
  const auto& params = fit.params;
  const std::size_t m = params.m();
  const std::size_t count = static_cast<std::size_t>(cfg.B);

  struct Slot {
    std::optional<std::vector<double>> estimate;
    int redraws = 0;
  };
  std::vector<Slot> slots(count);
  parallel_for(count, resolve_workers(cfg.workers), [&](std::size_t b) {
    EmConfig refit = cfg.refit;
    refit.m = m;
    refit.seed = refit_seed(cfg.seed, b);
    if (cfg.warm_start) refit.initial = params;
    try {
      auto draw = draw_fittable(params, sample.n(), sample.r(), cfg.seed, b, m);
      slots[b].redraws = draw.redraws;
      const auto replicate = fit_em(draw.draw.sample, refit);
      if (replicate.converged) slots[b].estimate = replicate.params.flatten();
    } catch (const FitFailure&) {
    } catch (const DegenerateDataError&) {
    }
  });

  BootstrapResult out;
  out.level = cfg.level;
  out.requested = cfg.B;
  for (auto& slot : slots) {
    out.redraws += slot.redraws;
    if (slot.estimate) {
      out.replicates.push_back(std::move(*slot.estimate));
    } else {
      ++out.dropped;
    }
  }
  out.used = static_cast<int>(out.replicates.size());
  if (out.used == 0) throw FitFailure("every bootstrap replicate failed to converge");
  if (out.dropped > cfg.B / 5) {
    std::ostringstream msg;
    msg << out.dropped << " of " << cfg.B << " replicates dropped; intervals may be unreliable";
    out.warning = msg.str();
  }

  const auto names = params.names();
  const auto estimate = params.flatten();
  const double tail = (1.0 - cfg.level) / 2.0;
  std::vector<double> column(out.replicates.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    for (std::size_t b = 0; b < out.replicates.size(); ++b) column[b] = out.replicates[b][k];
    std::sort(column.begin(), column.end());
    out.intervals.push_back(
        {names[k], estimate[k], percentile_sorted(column, tail), percentile_sorted(column, 1.0 - tail)});
  }
  return out;
}

std::string_view to_string(GofMethod method) {
  switch (method) {
    case GofMethod::AsymptoticKolmogorov: return "AsymptoticKolmogorov";
    case GofMethod::ExactKolmogorov: return "ExactKolmogorov";
    case GofMethod::ParametricBootstrap: return "ParametricBootstrap";
  }
  return "unknown";
}

GofMethod parse_gof_method(std::string_view text) {
  if (text == "asymptotic" || text == "AsymptoticKolmogorov") return GofMethod::AsymptoticKolmogorov;
  if (text == "exact" || text == "ExactKolmogorov") return GofMethod::ExactKolmogorov;
  if (text == "bootstrap" || text == "ParametricBootstrap") return GofMethod::ParametricBootstrap;
  throw ArgumentError("unknown p-value method '" + std::string(text) + "' (asymptotic, exact, bootstrap)");
}

std::string_view to_string(KsConvention convention) {
  return convention == KsConvention::Observed ? "observed" : "total";
}

KsConvention parse_ks_convention(std::string_view text) {
  if (text == "observed") return KsConvention::Observed;
  if (text == "total") return KsConvention::Total;
  throw ArgumentError("unknown KS convention '" + std::string(text) + "' (observed, total)");
}

double ks_statistic(const CensoredSample& sample, const MixtureParams& params, CdfFamily family,
                    KsConvention convention) {
  const double denom = static_cast<double>(ecdf_denominator(sample, convention));
  const auto times = sample.times();
  double d = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double f = cdf(params, times[i], family);
    const double above = static_cast<double>(i + 1) / denom - f;
    const double below = f - static_cast<double>(i) / denom;
    d = std::max({d, std::abs(above), std::abs(below)});
  }
  return d;
}

GofReport ks_gof(const CensoredSample& sample, const MixtureParams& params, CdfFamily family,
                 const GofOptions& options) {
  if (sample.r() < 5) throw ArgumentError("goodness of fit needs at least 5 observed failures");
  GofReport report;
  report.method = options.method;
  report.convention = options.convention;
  report.family = family;
  report.points_used = sample.r();
  report.effective_size = ecdf_denominator(sample, options.convention);
  report.ks_statistic = ks_statistic(sample, params, family, options.convention);
  const double d = report.ks_statistic;

  switch (options.method) {
    case GofMethod::AsymptoticKolmogorov:
      report.p_value = kolmogorov_sf(std::sqrt(static_cast<double>(report.effective_size)) * d);
      break;
    case GofMethod::ExactKolmogorov:
      report.p_value = ks_exact_sf(d, report.effective_size);
      break;
    case GofMethod::ParametricBootstrap: {
      if (options.B < 1) throw ArgumentError("bootstrap B must be positive");
      const std::size_t count = static_cast<std::size_t>(options.B);
      std::vector<std::optional<double>> stats(count);
      parallel_for(count, resolve_workers(options.workers), [&](std::size_t b) {
        if (!options.refit) {
          const auto draw = generate_sample({params, sample.n(), sample.r(), options.seed, b, 0, false});
          stats[b] = ks_statistic(draw.sample, params, family, options.convention);
          return;
        }
        EmConfig refit = *options.refit;
        refit.m = params.m();
        refit.seed = refit_seed(options.seed, b);
        try {
          const auto draw = draw_fittable(params, sample.n(), sample.r(), options.seed, b, params.m());
          const auto fit = fit_em(draw.draw.sample, refit);
          if (fit.converged) stats[b] = ks_statistic(draw.draw.sample, fit.params, family, options.convention);
        } catch (const FitFailure&) {
        } catch (const DegenerateDataError&) {
        }
      });
      int exceed = 0;
      for (const auto& s : stats) {
        if (!s) continue;
        ++report.replicates_used;
        if (*s >= d) ++exceed;
      }
      if (report.replicates_used == 0) throw FitFailure("every bootstrap replicate failed");
      report.p_value = (1.0 + exceed) / (1.0 + report.replicates_used);
      break;
    }
  }
  return report;
}

std::vector<CdfRow> cdf_export(const CensoredSample& sample, const MixtureParams& params, CdfFamily family,
                               KsConvention convention) {
  const double denom = static_cast<double>(ecdf_denominator(sample, convention));
  const auto times = sample.times();
  std::vector<CdfRow> rows;
  rows.reserve(times.size() + 200);
  for (std::size_t i = 0; i < times.size(); ++i) {
    rows.push_back({times[i], static_cast<double>(i + 1) / denom, cdf(params, times[i], family)});
  }
  const double end = 1.05 * sample.last_time();
  constexpr int kGrid = 200;
  for (int k = 0; k < kGrid; ++k) {
    const double t = end * static_cast<double>(k) / (kGrid - 1);
    rows.push_back({t, std::nullopt, k == 0 ? 0.0 : cdf(params, t, family)});
  }
  return rows;
}

}  // namespace hssalt
