#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hssalt/estimator.hpp"
#include "hssalt/params.hpp"

namespace hssalt {

struct GridCell {
  std::size_t n = 0;
  std::size_t r = 0;
  double tau = 0.0;
};

struct StudyConfig {
  /// Generating parameters; tau is replaced by each grid cell's tau.
  MixtureParams true_params;
  std::vector<GridCell> grid;
  int replications = 1000;
  std::vector<double> q_levels;
  std::uint64_t seed = 0;
  EmConfig em;
  /// Fit the homogeneous model alongside in the quantile study.
  bool baseline_homogeneous = true;
  /// Fit with alpha fixed at 1 alongside in the point study.
  bool baseline_alpha_fixed_1 = false;
  CdfFamily quantile_family = CdfFamily::PopulationMixture;
  std::optional<std::size_t> workers = std::nullopt;

  /// Throws ArgumentError on an empty grid, replications < 1, an invalid
  /// cell (r > n, n < 2, tau <= 0) or q outside (0, 1).
  void validate() const;
};

struct Summary {
  double mean = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  double bias = 0.0;
  /// Population variance (divisor = count), so mse = bias^2 + variance.
  double variance = 0.0;
  std::size_t count = 0;
};

/// Mean, MSE about truth, RMSE, bias and variance. Throws ArgumentError for
/// an empty input.
Summary summarize(std::span<const double> estimates, double truth);

struct ParameterSummary {
  std::string name;
  double truth = 0.0;
  Summary summary;
};

struct QuantileSummary {
  double q = 0.0;
  double truth = 0.0;
  Summary summary;
};

struct StudyRow {
  GridCell cell;
  /// h-SSALT, SSALT, FRM or CEM.
  std::string model;
  std::vector<ParameterSummary> parameters;
  std::vector<QuantileSummary> quantiles;
  int replications = 0;
  int used = 0;
  int nonconverged = 0;
  int failed = 0;
  /// Degenerate samples redrawn across the cell.
  int redraws = 0;
  /// More than 10% of the replications were not usable.
  bool flagged = false;
};

struct ReplicationRecord {
  std::size_t cell_index = 0;
  GridCell cell;
  int replication = 0;
  std::string model;
  /// ok, nonconverged or failed.
  std::string status;
  std::vector<double> params;
  std::vector<double> quantiles;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<ReplicationRecord> records;
  /// Names of the flattened parameter vector.
  std::vector<std::string> parameter_names;
  std::vector<double> q_levels;
};

/// Fits the h-SSALT model to `replications` samples per grid cell and reports
/// AE/MSE per canonical parameter (and per q when q_levels is non-empty).
StudyResult run_point_study(const StudyConfig& cfg);

/// Fits h-SSALT and (if enabled) the homogeneous model to the same samples
/// and compares plug-in quantile estimates against the true quantiles.
StudyResult run_quantile_study(const StudyConfig& cfg);

/// Fits with alpha free (FRM) and with alpha fixed at 1 (CEM) on the same
/// samples. Throws ArgumentError unless the true alpha is 1.
StudyResult run_fixed_alpha_comparison(const StudyConfig& cfg);

/// Stream index of (cell, replication), shared by every study kind so the
/// same configuration always sees the same samples.
std::uint64_t replication_stream_index(std::size_t cell_index, int replication);

}  // namespace hssalt
