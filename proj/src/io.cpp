#include "hssalt/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hssalt/bundled.hpp"
#include "hssalt/error.hpp"
#include "hssalt/kernels.hpp"

namespace hssalt::io {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError(where + ": '" + text + "' is not a number");
  }
}

json number_array(std::span<const double> values) {
  json out = json::array();
  for (double v : values) out.push_back(round10(v));
  return out;
}

json with_schema(json body) {
  json out = {{"schema", kSchemaVersion}};
  out.update(body);
  return out;
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
  return out;
}

std::string cell_key(const GridCell& cell) {
  return std::to_string(cell.n) + "," + std::to_string(cell.r) + "," + format_number(cell.tau);
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

double round10(double value) {
  if (!std::isfinite(value)) return value;
  return std::stod(format_number(value));
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArgumentError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ArgumentError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ArgumentError("cannot replace " + path.string() + ": " + ec.message());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::optional<int>> labels_for(const LabeledSample& draw) {
  std::vector<std::optional<int>> out(draw.sample.r());
  if (draw.labels) {
    const std::size_t n1 = draw.sample.n1();
    for (std::size_t k = 0; k < draw.labels->size(); ++k) out[n1 + k] = (*draw.labels)[k];
  }
  return out;
}

std::string sample_csv(const CensoredSample& sample, const std::vector<std::optional<int>>& labels) {
  std::string out = "index,time,stage,label\n";
  const auto times = sample.times();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::string label = i < labels.size() && labels[i] ? std::to_string(*labels[i]) : "NA";
    out += csv_line({std::to_string(i + 1), format_number(times[i]), i < sample.n1() ? "1" : "2", label});
  }
  return out;
}

json sample_sidecar(const SimRequest& request, const LabeledSample& draw) {
  return with_schema({{"n", request.n},
                      {"r", draw.sample.r()},
                      {"tau", round10(request.params.tau())},
                      {"n1", draw.sample.n1()},
                      {"seed", request.seed},
                      {"replication_index", request.replication_index},
                      {"discarded", draw.discarded},
                      {"params", params_to_json(request.params)}});
}

LoadedSample load_sample(std::string_view spec, const SampleMetadata& overrides, std::optional<std::size_t> r_check) {
  constexpr std::string_view prefix = "bundled:";
  if (spec.substr(0, prefix.size()) == prefix) {
    auto data = bundled_dataset(spec.substr(prefix.size()));
    if ((overrides.n && *overrides.n != data.sample.n()) || (overrides.tau && *overrides.tau != data.sample.tau())) {
      throw ArgumentError("bundled datasets have fixed n and tau");
    }
    if (r_check && *r_check != data.sample.r()) throw ArgumentError("--r does not match the bundled dataset");
    return {std::move(data.sample), std::move(data.labels), std::string(spec)};
  }

  const std::filesystem::path path{std::string(spec)};
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.empty()) throw ArgumentError(path.string() + ": no data");

  std::vector<double> times;
  std::vector<std::optional<int>> labels;
  SampleMetadata meta = overrides;
  if (rows.front().rfind("index", 0) == 0) {
    const auto header = split(rows.front(), ',');
    const auto col = [&](std::string_view name) -> std::ptrdiff_t {
      const auto it = std::find(header.begin(), header.end(), name);
      return it == header.end() ? -1 : it - header.begin();
    };
    const auto time_col = col("time");
    const auto label_col = col("label");
    if (time_col < 0) throw ArgumentError(path.string() + ": missing time column");
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const auto cells = split(rows[k], ',');
      const std::string where = path.string() + ":" + std::to_string(k + 1);
      if (cells.size() != header.size()) throw ArgumentError(where + ": expected " + std::to_string(header.size()) + " columns");
      times.push_back(parse_double(cells[static_cast<std::size_t>(time_col)], where));
      std::optional<int> label;
      if (label_col >= 0 && cells[static_cast<std::size_t>(label_col)] != "NA") {
        label = static_cast<int>(parse_double(cells[static_cast<std::size_t>(label_col)], where));
      }
      labels.push_back(label);
    }
    auto sidecar = path;
    sidecar += ".json";
    if (std::filesystem::exists(sidecar)) {
      const auto side = json::parse(read_text(sidecar));
      if (!meta.n && side.contains("n")) meta.n = side.at("n").get<std::size_t>();
      if (!meta.tau && side.contains("tau")) meta.tau = side.at("tau").get<double>();
    }
  } else {
    std::size_t k = 0;
    for (const auto& row : rows) {
      ++k;
      if (k == 1 && row == "time") continue;
      times.push_back(parse_double(row, path.string() + ":" + std::to_string(k)));
    }
    std::sort(times.begin(), times.end());
    labels.assign(times.size(), std::nullopt);
  }
  if (!meta.n || !meta.tau) throw ArgumentError(path.string() + ": n and tau are required (--n, --tau)");
  if (times.empty()) throw ArgumentError(path.string() + ": no data");
  if (r_check && *r_check != times.size()) {
    throw ArgumentError("--r is " + std::to_string(*r_check) + " but the file holds " + std::to_string(times.size()) + " times");
  }
  return {CensoredSample(std::move(times), *meta.n, *meta.tau), std::move(labels), path.string()};
}

json params_to_json(const MixtureParams& params) {
  return {{"alpha", round10(params.alpha())},
          {"lambda1", round10(params.lambda1())},
          {"lambda2", number_array(params.lambda2())},
          {"pi", number_array(params.pi())},
          {"tau", round10(params.tau())},
          {"lambda_bar", round10(params.lambda_bar())}};
}

MixtureParams params_from_json(const json& j, std::optional<double> tau_override) {
  try {
    std::vector<double> lambda2, pi;
    if (j.at("lambda2").is_array()) {
      lambda2 = j.at("lambda2").get<std::vector<double>>();
    } else {
      lambda2 = {j.at("lambda2").get<double>()};
    }
    if (j.contains("pi")) {
      pi = j.at("pi").is_array() ? j.at("pi").get<std::vector<double>>() : std::vector<double>{j.at("pi").get<double>()};
    }
    if (pi.empty() && lambda2.size() == 1) pi = {1.0};
    // A single proportion for two components is pi_1.
    if (pi.size() == 1 && lambda2.size() == 2) pi.push_back(1.0 - pi[0]);
    const double tau = tau_override ? *tau_override : j.at("tau").get<double>();
    return MixtureParams(j.at("alpha").get<double>(), j.at("lambda1").get<double>(), std::move(lambda2), std::move(pi), tau);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("bad parameter JSON: ") + e.what());
  }
}

json sample_summary_json(const CensoredSample& sample) {
  return {{"n", sample.n()}, {"r", sample.r()}, {"n1", sample.n1()}, {"tau", round10(sample.tau())}};
}

json fit_report(const EmFit& fit, const CensoredSample& sample, const std::string& source) {
  json starts = json::array();
  for (const auto& s : fit.starts) {
    json row = {{"index", s.index}, {"status", s.status}, {"iterations", s.iterations}};
    row["loglik"] = s.loglik ? json(round10(*s.loglik)) : json(nullptr);
    if (!s.message.empty()) row["message"] = s.message;
    starts.push_back(std::move(row));
  }
  return with_schema({{"kind", "fit"},
                      {"source", source},
                      {"sample", sample_summary_json(sample)},
                      {"m", fit.params.m()},
                      {"params", params_to_json(fit.params)},
                      {"loglik", round10(fit.loglik)},
                      {"loglik_eq8", round10(fit.loglik_eq8)},
                      {"iterations", fit.iterations},
                      {"converged", fit.converged},
                      {"starts_tried", fit.starts_tried},
                      {"starts", std::move(starts)},
                      {"kernel_backend", std::string(kernels::to_string(kernels::active_backend()))}});
}

json gof_report(const GofReport& report, const MixtureParams& params) {
  return with_schema({{"kind", "gof"},
                      {"ks_statistic", round10(report.ks_statistic)},
                      {"p_value", round10(report.p_value)},
                      {"points_used", report.points_used},
                      {"effective_size", report.effective_size},
                      {"method", std::string(to_string(report.method))},
                      {"convention", std::string(to_string(report.convention))},
                      {"family", std::string(to_string(report.family))},
                      {"replicates_used", report.replicates_used},
                      {"params", params_to_json(params)}});
}

json bootstrap_report(const BootstrapResult& result, const EmFit& fit) {
  json intervals = json::array();
  for (const auto& iv : result.intervals) {
    intervals.push_back({{"name", iv.name},
                         {"estimate", round10(iv.estimate)},
                         {"lower", round10(iv.lower)},
                         {"upper", round10(iv.upper)}});
  }
  json out = with_schema({{"kind", "bootstrap"},
                          {"level", round10(result.level)},
                          {"B", result.requested},
                          {"used", result.used},
                          {"dropped", result.dropped},
                          {"redraws", result.redraws},
                          {"params", params_to_json(fit.params)},
                          {"intervals", std::move(intervals)}});
  out["warning"] = result.warning ? json(*result.warning) : json(nullptr);
  return out;
}

json quantile_report(const std::vector<QuantileEstimate>& estimates, CdfFamily family, const MixtureParams& params,
                     bool converged) {
  json rows = json::array();
  for (const auto& e : estimates) rows.push_back({{"q", round10(e.q)}, {"t_q", round10(e.value)}});
  return with_schema({{"kind", "quantile"},
                      {"family", std::string(to_string(family))},
                      {"converged", converged},
                      {"params", params_to_json(params)},
                      {"quantiles", std::move(rows)}});
}

std::string cdf_csv(const std::vector<CdfRow>& rows) {
  std::string out = "t,empirical,fitted\n";
  for (const auto& row : rows) {
    out += csv_line({format_number(row.t), row.empirical ? format_number(*row.empirical) : "NA", format_number(row.fitted)});
  }
  return out;
}

std::string point_study_csv(const StudyResult& result) {
  std::string out = "n,r,tau,model,parameter,truth,ae,mse,bias,variance,used,nonconverged,failed,redraws,flagged\n";
  for (const auto& row : result.rows) {
    for (const auto& p : row.parameters) {
      out += csv_line({cell_key(row.cell), row.model, p.name, format_number(p.truth), format_number(p.summary.mean),
                       format_number(p.summary.mse), format_number(p.summary.bias), format_number(p.summary.variance),
                       std::to_string(row.used), std::to_string(row.nonconverged), std::to_string(row.failed),
                       std::to_string(row.redraws), row.flagged ? "1" : "0"});
    }
  }
  return out;
}

std::string quantile_study_csv(const StudyResult& result) {
  std::string out = "n,r,tau,model,q,truth,mean,rmse,bias,used,nonconverged,failed,redraws,flagged\n";
  for (const auto& row : result.rows) {
    for (const auto& q : row.quantiles) {
      out += csv_line({cell_key(row.cell), row.model, format_number(q.q), format_number(q.truth),
                       format_number(q.summary.mean), format_number(q.summary.rmse), format_number(q.summary.bias),
                       std::to_string(row.used), std::to_string(row.nonconverged), std::to_string(row.failed),
                       std::to_string(row.redraws), row.flagged ? "1" : "0"});
    }
  }
  return out;
}

std::string per_replication_csv(const StudyResult& result) {
  std::string out = "n,r,tau,replication,model,status";
  for (const auto& name : result.parameter_names) out += "," + name;
  for (double q : result.q_levels) out += ",t_" + format_number(q);
  out += '\n';
  for (const auto& rec : result.records) {
    out += cell_key(rec.cell) + "," + std::to_string(rec.replication) + "," + rec.model + "," + rec.status;
    // Models with fewer parameters (the homogeneous fit) leave trailing cells empty.
    for (std::size_t k = 0; k < result.parameter_names.size(); ++k) {
      out += ",";
      if (k < rec.params.size()) out += format_number(rec.params[k]);
    }
    for (std::size_t k = 0; k < result.q_levels.size(); ++k) {
      out += ",";
      if (k < rec.quantiles.size()) out += format_number(rec.quantiles[k]);
    }
    out += '\n';
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace hssalt::io
