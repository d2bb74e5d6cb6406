#include "hssalt/study.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "hssalt/distribution.hpp"
#include "hssalt/error.hpp"
#include "hssalt/parallel.hpp"
#include "hssalt/sampler.hpp"

namespace hssalt {
namespace {

struct ModelSpec {
  std::string name;
  std::function<EmFit(const CensoredSample&, std::uint64_t)> fit;
  /// Leading flattened parameters compared against the truth.
  std::size_t reported;
};

struct Outcome {
  std::string status = "failed";
  std::vector<double> params;
  std::vector<double> quantiles;
};

struct RepSlot {
  int redraws = 0;
  std::vector<Outcome> outcomes;
};

std::uint64_t em_seed(std::uint64_t seed, std::uint64_t index) {
  return seed ^ (0xd1b54a32d192ed03ull * (index + 1));
}

StudyResult run_study(const StudyConfig& cfg, const std::vector<ModelSpec>& models, bool with_quantiles) {
  cfg.validate();
  const std::size_t reps = static_cast<std::size_t>(cfg.replications);
  const std::size_t total = cfg.grid.size() * reps;
  const std::size_t m = cfg.true_params.m();

  std::vector<RepSlot> slots(total);
  parallel_for(total, resolve_workers(cfg.workers), [&](std::size_t k) {
    const std::size_t c = k / reps;
    const int rep = static_cast<int>(k % reps);
    const auto& cell = cfg.grid[c];
    const auto truth = cfg.true_params.with_tau(cell.tau);
    const std::uint64_t index = replication_stream_index(c, rep);
    auto& slot = slots[k];
    slot.outcomes.resize(models.size());

    std::optional<FittableDraw> draw;
    try {
      draw = draw_fittable(truth, cell.n, cell.r, cfg.seed, index, m);
    } catch (const DegenerateDataError&) {
      return;
    }
    slot.redraws = draw->redraws;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      auto& out = slot.outcomes[mi];
      try {
        const auto fit = models[mi].fit(draw->draw.sample, em_seed(cfg.em.seed, index));
        out.params = fit.params.flatten();
        out.params.resize(models[mi].reported);
        if (with_quantiles) {
          for (double q : cfg.q_levels) out.quantiles.push_back(quantile(fit.params, q, cfg.quantile_family));
        }
        out.status = fit.converged ? "ok" : "nonconverged";
      } catch (const FitFailure&) {
      } catch (const DegenerateDataError&) {
      } catch (const DomainError&) {
      }
    }
  });

  StudyResult result;
  result.parameter_names = cfg.true_params.names();
  result.q_levels = with_quantiles ? cfg.q_levels : std::vector<double>{};
  for (std::size_t c = 0; c < cfg.grid.size(); ++c) {
    const auto& cell = cfg.grid[c];
    const auto truth = cfg.true_params.with_tau(cell.tau);
    const auto truth_flat = truth.flatten();
    const auto names = truth.names();
    std::vector<double> q_truth;
    if (with_quantiles) {
      for (double q : cfg.q_levels) q_truth.push_back(quantile(truth, q, cfg.quantile_family));
    }
    int redraws = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) redraws += slots[c * reps + rep].redraws;

    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      StudyRow row;
      row.cell = cell;
      row.model = models[mi].name;
      row.replications = cfg.replications;
      row.redraws = redraws;
      std::vector<const Outcome*> kept;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const auto& slot = slots[c * reps + rep];
        const auto& out = slot.outcomes[mi];
        result.records.push_back({c, cell, static_cast<int>(rep), models[mi].name, out.status, out.params, out.quantiles});
        if (out.status == "ok") {
          kept.push_back(&out);
        } else if (out.status == "nonconverged") {
          ++row.nonconverged;
        } else {
          ++row.failed;
        }
      }
      row.used = static_cast<int>(kept.size());
      row.flagged = 10 * (row.replications - row.used) > row.replications;
      if (!kept.empty()) {
        std::vector<double> column(kept.size());
        for (std::size_t p = 0; p < models[mi].reported; ++p) {
          for (std::size_t i = 0; i < kept.size(); ++i) column[i] = kept[i]->params[p];
          row.parameters.push_back({names[p], truth_flat[p], summarize(column, truth_flat[p])});
        }
        for (std::size_t qi = 0; qi < q_truth.size(); ++qi) {
          for (std::size_t i = 0; i < kept.size(); ++i) column[i] = kept[i]->quantiles[qi];
          row.quantiles.push_back({cfg.q_levels[qi], q_truth[qi], summarize(column, q_truth[qi])});
        }
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

ModelSpec mixture_model(std::string name, const StudyConfig& cfg, std::optional<double> alpha_fixed) {
  EmConfig em = cfg.em;
  em.m = cfg.true_params.m();
  if (alpha_fixed) em.alpha_fixed = alpha_fixed;
  return {std::move(name),
          [em](const CensoredSample& sample, std::uint64_t seed) {
            EmConfig local = em;
            local.seed = seed;
            return fit_em(sample, local);
          },
          cfg.true_params.flatten().size()};
}

ModelSpec homogeneous_model(const StudyConfig& cfg) {
  const auto bracket = cfg.em.alpha_bracket;
  // alpha and lambda1 share their meaning with the mixture truth.
  return {"SSALT",
          [bracket](const CensoredSample& sample, std::uint64_t) { return fit_homogeneous(sample, std::nullopt, bracket); },
          2};
}

}  // namespace

void StudyConfig::validate() const {
  if (grid.empty()) throw ArgumentError("study grid is empty");
  if (replications < 1) throw ArgumentError("replications must be at least 1");
  for (const auto& cell : grid) {
    if (cell.n < 2) throw ArgumentError("n must be at least 2");
    if (cell.r < 2) throw ArgumentError("r must be at least 2");
    if (cell.r > cell.n) throw ArgumentError("r exceeds n");
    if (!(cell.tau > 0.0 && std::isfinite(cell.tau))) throw ArgumentError("tau must be positive and finite");
  }
  for (double q : q_levels) {
    if (!(q > 0.0 && q < 1.0)) throw ArgumentError("quantile levels must lie in (0, 1)");
  }
  EmConfig em_check = em;
  em_check.m = true_params.m();
  em_check.initial.reset();
  em_check.validate();
}

Summary summarize(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw ArgumentError("cannot summarize an empty set of estimates");
  Summary s;
  s.count = estimates.size();
  const double count = static_cast<double>(s.count);
  s.mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / count;
  double sq = 0.0, var = 0.0;
  for (double e : estimates) {
    sq += (e - truth) * (e - truth);
    var += (e - s.mean) * (e - s.mean);
  }
  s.mse = sq / count;
  s.variance = var / count;
  s.rmse = std::sqrt(s.mse);
  s.bias = s.mean - truth;
  return s;
}

std::uint64_t replication_stream_index(std::size_t cell_index, int replication) {
  return (static_cast<std::uint64_t>(cell_index) << 32) | static_cast<std::uint32_t>(replication);
}

StudyResult run_point_study(const StudyConfig& cfg) {
  std::vector<ModelSpec> models{mixture_model("h-SSALT", cfg, cfg.em.alpha_fixed)};
  if (cfg.baseline_alpha_fixed_1) models.push_back(mixture_model("CEM", cfg, 1.0));
  return run_study(cfg, models, !cfg.q_levels.empty());
}

StudyResult run_quantile_study(const StudyConfig& cfg) {
  if (cfg.q_levels.empty()) throw ArgumentError("the quantile study needs at least one q level");
  std::vector<ModelSpec> models{mixture_model("h-SSALT", cfg, cfg.em.alpha_fixed)};
  if (cfg.baseline_homogeneous) models.push_back(homogeneous_model(cfg));
  return run_study(cfg, models, true);
}

StudyResult run_fixed_alpha_comparison(const StudyConfig& cfg) {
  if (cfg.true_params.alpha() != 1.0) throw ArgumentError("the fixed-alpha comparison needs a true alpha of 1");
  std::vector<ModelSpec> models{mixture_model("FRM", cfg, std::nullopt), mixture_model("CEM", cfg, 1.0)};
  return run_study(cfg, models, !cfg.q_levels.empty());
}

}  // namespace hssalt
