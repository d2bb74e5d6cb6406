#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hssalt/estimator.hpp"
#include "hssalt/inference.hpp"
#include "hssalt/params.hpp"
#include "hssalt/sampler.hpp"
#include "hssalt/study.hpp"

namespace hssalt::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// printf("%.10g"), the fixed text format of every number we write.
std::string format_number(double value);
/// value rounded to 10 significant digits, so JSON output matches the CSVs.
double round10(double value);

/// Writes to a temporary file in the same directory and renames it over path.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

/// Sampler CSV: header index,time,stage,label (label NA for stage 1 or
/// when labels were not requested).
std::string sample_csv(const CensoredSample& sample, const std::vector<std::optional<int>>& labels);
std::vector<std::optional<int>> labels_for(const LabeledSample& draw);

struct SampleMetadata {
  std::optional<std::size_t> n;
  std::optional<double> tau;
};

/// Sidecar written next to a sampler CSV (<csv>.json): n, r, tau, seed,
/// generating parameters.
json sample_sidecar(const SimRequest& request, const LabeledSample& draw);

struct LoadedSample {
  CensoredSample sample;
  std::vector<std::optional<int>> labels;
  std::string source;
};

/// Loads "bundled:complete", "bundled:censored", a sampler CSV or a bare
/// one-column file of times. n and tau come from the overrides, else from
/// the CSV's sidecar; a bare file needs both. r is the number of rows and
/// must match r_check when one is given. Throws ArgumentError on malformed input.
LoadedSample load_sample(std::string_view spec, const SampleMetadata& overrides = {},
                         std::optional<std::size_t> r_check = std::nullopt);

json params_to_json(const MixtureParams& params);
/// Reads {alpha, lambda1, lambda2: [...], pi: [...], tau}. A scalar lambda2
/// means m = 1; pi may be omitted when m = 1. tau_override replaces tau.
MixtureParams params_from_json(const json& j, std::optional<double> tau_override = std::nullopt);

json sample_summary_json(const CensoredSample& sample);
json fit_report(const EmFit& fit, const CensoredSample& sample, const std::string& source);
json gof_report(const GofReport& report, const MixtureParams& params);
json bootstrap_report(const BootstrapResult& result, const EmFit& fit);
json quantile_report(const std::vector<QuantileEstimate>& estimates, CdfFamily family, const MixtureParams& params,
                     bool converged);
std::string cdf_csv(const std::vector<CdfRow>& rows);

std::string point_study_csv(const StudyResult& result);
std::string quantile_study_csv(const StudyResult& result);
std::string per_replication_csv(const StudyResult& result);

/// Dumps JSON with two-space indentation and a trailing newline.
std::string dump(const json& j);

}  // namespace hssalt::io
