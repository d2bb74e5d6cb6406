#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hssalt/estimator.hpp"
#include "hssalt/params.hpp"

namespace hssalt {

struct QuantileEstimate {
  double q = 0.0;
  double value = 0.0;
};

/// Plug-in quantiles of the fitted model. Throws FitFailure for a
/// non-converged fit unless force is set, ArgumentError for q outside (0, 1).
std::vector<QuantileEstimate> quantile_from_fit(const EmFit& fit, std::span<const double> q_levels,
                                                CdfFamily family, bool force = false);

struct BootstrapConfig {
  int B = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
  /// Refit settings. By default each replicate is refitted from a single
  /// start at the original estimate (see warm_start).
  EmConfig refit = [] {
    EmConfig c;
    c.n_starts = 1;
    return c;
  }();
  /// Seed every refit with the original estimate.
  bool warm_start = true;
  std::optional<std::size_t> workers;

  /// Throws ArgumentError unless B >= 100 and 0 < level < 1.
  void validate() const;
};

struct BootstrapInterval {
  std::string name;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapResult {
  std::vector<BootstrapInterval> intervals;
  double level = 0.0;
  int requested = 0;
  int used = 0;
  /// Replicates whose refit failed or did not converge.
  int dropped = 0;
  /// Degenerate generated samples that were redrawn.
  int redraws = 0;
  std::optional<std::string> warning;
  /// Flattened canonical parameters of each kept replicate, by replicate index.
  std::vector<std::vector<double>> replicates;
};

/// Type-7 (linear interpolation) sample quantile of sorted values.
double percentile_sorted(std::span<const double> sorted, double p);

/// Parametric bootstrap percentile intervals for every flattened parameter.
/// Throws FitFailure for a non-converged fit.
BootstrapResult bootstrap_ci(const CensoredSample& sample, const EmFit& fit, const BootstrapConfig& cfg);

enum class GofMethod { AsymptoticKolmogorov, ExactKolmogorov, ParametricBootstrap };
std::string_view to_string(GofMethod method);
/// Accepts asymptotic, exact, bootstrap.
GofMethod parse_gof_method(std::string_view text);

/// Empirical CDF steps at the observed order statistics: i/r (Observed) or
/// i/n (Total). They coincide for complete samples.
enum class KsConvention { Observed, Total };
std::string_view to_string(KsConvention convention);
/// Accepts observed, total.
KsConvention parse_ks_convention(std::string_view text);

struct GofOptions {
  GofMethod method = GofMethod::AsymptoticKolmogorov;
  KsConvention convention = KsConvention::Observed;
  int B = 1000;
  std::uint64_t seed = 0;
  /// If set, bootstrap replicates are refitted before D is computed, which
  /// accounts for the parameters having been estimated.
  std::optional<EmConfig> refit;
  std::optional<std::size_t> workers;
};

struct GofReport {
  double ks_statistic = 0.0;
  double p_value = 0.0;
  std::size_t points_used = 0;
  /// Denominator of the empirical CDF, also the size used by the p-value.
  std::size_t effective_size = 0;
  GofMethod method = GofMethod::AsymptoticKolmogorov;
  KsConvention convention = KsConvention::Observed;
  CdfFamily family = CdfFamily::PopulationMixture;
  int replicates_used = 0;
};

/// max_i max(|i/N - F(t_i)|, |F(t_i) - (i-1)/N|) over the r observed times.
double ks_statistic(const CensoredSample& sample, const MixtureParams& params, CdfFamily family,
                    KsConvention convention);

/// Throws ArgumentError when r < 5.
GofReport ks_gof(const CensoredSample& sample, const MixtureParams& params, CdfFamily family,
                 const GofOptions& options = {});

struct CdfRow {
  double t = 0.0;
  /// Empirical step at an observed time; absent on grid rows.
  std::optional<double> empirical;
  double fitted = 0.0;
};

/// Observed rows (empirical i/N, fitted F(t_i)) followed by a 200-point
/// fitted grid spaced evenly over [0, 1.05 t_r].
std::vector<CdfRow> cdf_export(const CensoredSample& sample, const MixtureParams& params, CdfFamily family,
                               KsConvention convention = KsConvention::Observed);

}  // namespace hssalt
