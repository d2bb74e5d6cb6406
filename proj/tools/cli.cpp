#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>

#include "hssalt/distribution.hpp"
#include "hssalt/error.hpp"
#include "hssalt/estimator.hpp"
#include "hssalt/inference.hpp"
#include "hssalt/io.hpp"
#include "hssalt/parallel.hpp"
#include "hssalt/sampler.hpp"
#include "hssalt/study.hpp"

namespace hssalt::cli {
namespace {

using io::json;

// Simulation-study parameters; the default for `simulate`.
MixtureParams default_sim_params() { return MixtureParams(1.2, 0.2, {0.1, 1.0}, {0.4, 0.6}, 1.6); }

struct ParamFlags {
  std::optional<std::string> file;
  std::optional<double> alpha;
  std::optional<double> lambda1;
  std::vector<double> lambda2;
  std::vector<double> pi;
  std::optional<double> tau;

  bool any() const { return file || alpha || lambda1 || !lambda2.empty() || !pi.empty() || tau; }
};

void add_param_flags(CLI::App* cmd, ParamFlags& f, bool with_tau = true) {
  cmd->add_option("--params", f.file, "JSON file with alpha, lambda1, lambda2, pi, tau (a fit report also works)");
  cmd->add_option("--alpha", f.alpha, "Weibull shape");
  cmd->add_option("--lambda1", f.lambda1, "Stage-1 rate");
  cmd->add_option("--lambda2", f.lambda2, "Stage-2 subgroup rates")->delimiter(',');
  cmd->add_option("--pi", f.pi, "Subgroup proportions (one value means pi_1 of two)")->delimiter(',');
  if (with_tau) cmd->add_option("--tau", f.tau, "Stress-change time");
}

json load_json(const std::string& path) {
  try {
    return json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ArgumentError(path + ": " + e.what());
  }
}

// Flags override the file, which overrides the base.
MixtureParams resolve_params(const ParamFlags& f, const MixtureParams& base) {
  json j = io::params_to_json(base);
  if (f.file) {
    json loaded = load_json(*f.file);
    if (loaded.contains("params")) loaded = loaded.at("params");
    // A file that only names some fields keeps the others from the base.
    if (loaded.contains("lambda2") && !loaded.contains("pi")) j.erase("pi");
    j.update(loaded);
  }
  if (f.alpha) j["alpha"] = *f.alpha;
  if (f.lambda1) j["lambda1"] = *f.lambda1;
  if (!f.lambda2.empty()) {
    j["lambda2"] = f.lambda2;
    if (f.pi.empty() && f.lambda2.size() != base.m()) j.erase("pi");
  }
  if (!f.pi.empty()) j["pi"] = f.pi;
  if (f.tau) j["tau"] = *f.tau;
  if (!j.contains("pi") && j.at("lambda2").size() > 1) throw ArgumentError("--pi is required with several --lambda2 values");
  return io::params_from_json(j);
}

struct DataFlags {
  std::string data;
  std::optional<std::size_t> n;
  std::optional<std::size_t> r;
  std::optional<double> tau;
};

void add_data_flags(CLI::App* cmd, DataFlags& d) {
  cmd->add_option("--data", d.data, "bundled:complete, bundled:censored, a sampler CSV or a one-column time file")->required();
  cmd->add_option("--n", d.n, "Units on test (needed for a bare time file)");
  cmd->add_option("--r", d.r, "Observed failures (checked against the file)");
  cmd->add_option("--tau", d.tau, "Stress-change time (needed for a bare time file)");
}

io::LoadedSample load_data(const DataFlags& d) { return io::load_sample(d.data, {d.n, d.tau}, d.r); }

struct FitFlags {
  std::size_t m = 2;
  std::optional<double> alpha_fixed;
  int starts = 10;
  std::uint64_t seed = 0;
  int max_iter = 2000;
  double tol = 1e-6;
  double loglik_tol = 1e-8;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--m", f.m, "Number of stage-2 subgroups")->capture_default_str();
  cmd->add_option("--alpha-fixed", f.alpha_fixed, "Hold the shape fixed (1 gives the exponential model)");
  cmd->add_option("--starts", f.starts, "EM starting points")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Seed for random starts")->capture_default_str();
  cmd->add_option("--max-iter", f.max_iter, "EM iteration cap")->capture_default_str();
  cmd->add_option("--tol", f.tol, "Relative parameter-change tolerance")->capture_default_str();
  cmd->add_option("--loglik-tol", f.loglik_tol, "Absolute log-likelihood change tolerance")->capture_default_str();
}

EmConfig em_config(const FitFlags& f) {
  EmConfig cfg;
  cfg.m = f.m;
  cfg.alpha_fixed = f.alpha_fixed;
  cfg.n_starts = f.starts;
  cfg.seed = f.seed;
  cfg.max_iterations = f.max_iter;
  cfg.param_tol = f.tol;
  cfg.loglik_tol = f.loglik_tol;
  return cfg;
}

void emit(const std::string& text, const std::optional<std::string>& path, std::ostream& out) {
  if (path) {
    io::write_atomic(*path, text);
  } else {
    out << text;
  }
}

void warn_if_unconverged(const EmFit& fit, std::ostream& err) {
  if (!fit.converged) {
    err << "warning: EM stopped after " << fit.iterations << " iterations without converging\n";
  }
}

StudyConfig study_from_json(const json& j) {
  try {
    auto params = io::params_from_json(j.at("true_params"));
    StudyConfig cfg{params, {}, 1000, {}, 0, EmConfig{}, true, false, CdfFamily::PopulationMixture, std::nullopt};
    for (const auto& cell : j.at("grid")) {
      if (cell.is_array()) {
        cfg.grid.push_back({cell.at(0).get<std::size_t>(), cell.at(1).get<std::size_t>(), cell.at(2).get<double>()});
      } else {
        cfg.grid.push_back({cell.at("n").get<std::size_t>(), cell.at("r").get<std::size_t>(), cell.at("tau").get<double>()});
      }
    }
    cfg.replications = j.value("replications", 1000);
    cfg.q_levels = j.value("q_levels", std::vector<double>{});
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.em.m = params.m();
    if (j.contains("em")) {
      const auto& e = j.at("em");
      cfg.em.n_starts = e.value("n_starts", cfg.em.n_starts);
      cfg.em.max_iterations = e.value("max_iterations", cfg.em.max_iterations);
      cfg.em.param_tol = e.value("param_tol", cfg.em.param_tol);
      cfg.em.loglik_tol = e.value("loglik_tol", cfg.em.loglik_tol);
      cfg.em.seed = e.value("seed", cfg.em.seed);
      if (e.contains("alpha_fixed") && !e.at("alpha_fixed").is_null()) cfg.em.alpha_fixed = e.at("alpha_fixed").get<double>();
      if (e.contains("alpha_bracket")) {
        const auto b = e.at("alpha_bracket").get<std::vector<double>>();
        if (b.size() != 2) throw ArgumentError("alpha_bracket needs two values");
        cfg.em.alpha_bracket = {b[0], b[1]};
      }
    }
    if (j.contains("baselines")) {
      cfg.baseline_homogeneous = j.at("baselines").value("homogeneous", cfg.baseline_homogeneous);
      cfg.baseline_alpha_fixed_1 = j.at("baselines").value("alpha_fixed_1", cfg.baseline_alpha_fixed_1);
    }
    if (j.contains("quantile_family")) cfg.quantile_family = parse_cdf_family(j.at("quantile_family").get<std::string>());
    return cfg;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("bad study configuration: ") + e.what());
  }
}

void report_error(std::ostream& err, bool as_json, std::string_view kind, const std::string& message, int code) {
  if (as_json) {
    err << json{{"schema", io::kSchemaVersion}, {"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump()
        << "\n";
  } else {
    err << "error: " << message << "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous step-stress Weibull life-test toolkit"};
  app.require_subcommand(1);
  bool json_errors = std::find(args.begin(), args.end(), "--json-errors") != args.end();
  app.add_flag("--json-errors", json_errors, "Print errors as a JSON object");
  std::optional<std::size_t> workers;
  app.add_option("--workers", workers, "Worker threads (default: HSSALT_WORKERS or all cores)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw a Type-II censored step-stress sample");
  ParamFlags sim_params;
  add_param_flags(sim, sim_params);
  std::size_t sim_n = 0, sim_r = 0;
  std::uint64_t sim_seed = 0, sim_index = 0;
  bool sim_labels = false;
  std::optional<std::string> sim_out;
  sim->add_option("--n", sim_n, "Units on test")->required();
  sim->add_option("--r", sim_r, "Failures observed before the test stops")->required();
  sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim->add_option("--replication", sim_index, "Replication index within the seed")->capture_default_str();
  sim->add_flag("--labels", sim_labels, "Record the subgroup of each stage-2 failure");
  sim->add_option("--out", sim_out, "CSV path (a .json sidecar is written next to it)");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit the mixture model by EM");
  DataFlags fit_data;
  FitFlags fit_flags;
  std::optional<std::string> fit_out;
  add_data_flags(fit_cmd, fit_data);
  add_fit_flags(fit_cmd, fit_flags);
  fit_cmd->add_option("--out", fit_out, "Report path (default: stdout)");

  // gof
  auto* gof_cmd = app.add_subcommand("gof", "Kolmogorov-Smirnov goodness of fit");
  DataFlags gof_data;
  FitFlags gof_fit;
  ParamFlags gof_params;
  std::string gof_family = "population", gof_method = "asymptotic", gof_convention = "observed";
  int gof_B = 1000;
  std::uint64_t gof_seed = 0;
  bool gof_refit = false;
  std::optional<std::string> gof_out, gof_cdf;
  add_data_flags(gof_cmd, gof_data);
  add_fit_flags(gof_cmd, gof_fit);
  add_param_flags(gof_cmd, gof_params, false);
  gof_cmd->add_option("--family", gof_family, "population or hazard")->capture_default_str();
  gof_cmd->add_option("--method", gof_method, "asymptotic, exact or bootstrap")->capture_default_str();
  gof_cmd->add_option("--convention", gof_convention, "observed (i/r) or total (i/n)")->capture_default_str();
  gof_cmd->add_option("--B", gof_B, "Bootstrap replicates")->capture_default_str();
  gof_cmd->add_option("--gof-seed", gof_seed, "Bootstrap seed")->capture_default_str();
  gof_cmd->add_flag("--refit", gof_refit, "Refit each bootstrap replicate");
  gof_cmd->add_option("--out", gof_out, "Report path (default: stdout)");
  gof_cmd->add_option("--cdf-out", gof_cdf, "CSV of empirical and fitted CDF (t,empirical,fitted)");

  // bootstrap
  auto* boot_cmd = app.add_subcommand("bootstrap", "Parametric bootstrap percentile intervals");
  DataFlags boot_data;
  FitFlags boot_fit;
  int boot_B = 1000, boot_refit_starts = 1;
  double boot_level = 0.95;
  std::uint64_t boot_seed = 0;
  bool boot_cold = false;
  std::optional<std::string> boot_out;
  add_data_flags(boot_cmd, boot_data);
  add_fit_flags(boot_cmd, boot_fit);
  boot_cmd->add_option("--B", boot_B, "Replicates")->capture_default_str();
  boot_cmd->add_option("--level", boot_level, "Interval level")->capture_default_str();
  boot_cmd->add_option("--boot-seed", boot_seed, "Seed for the generated samples")->capture_default_str();
  boot_cmd->add_option("--refit-starts", boot_refit_starts, "EM starts per replicate")->capture_default_str();
  boot_cmd->add_flag("--cold-start", boot_cold, "Do not seed refits with the original estimate");
  boot_cmd->add_option("--out", boot_out, "Report path (default: stdout)");

  // quantile
  auto* q_cmd = app.add_subcommand("quantile", "Plug-in lifetime quantiles");
  DataFlags q_data;
  FitFlags q_fit;
  ParamFlags q_params;
  std::vector<double> q_levels{0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.99};
  std::string q_family = "population";
  bool q_force = false;
  std::optional<std::string> q_out;
  q_cmd->add_option("--data", q_data.data, "Data to fit (omit when --params is given)");
  q_cmd->add_option("--n", q_data.n, "Units on test (bare time file)");
  q_cmd->add_option("--r", q_data.r, "Observed failures");
  add_fit_flags(q_cmd, q_fit);
  add_param_flags(q_cmd, q_params);
  q_cmd->add_option("--q", q_levels, "Quantile levels")->delimiter(',');
  q_cmd->add_option("--family", q_family, "population or hazard")->capture_default_str();
  q_cmd->add_flag("--force", q_force, "Report quantiles of a non-converged fit");
  q_cmd->add_option("--out", q_out, "Report path (default: stdout)");

  // mc-study
  auto* mc_cmd = app.add_subcommand("mc-study", "Monte Carlo study from a JSON configuration");
  std::string mc_config, mc_kind = "point";
  std::string mc_dir = ".";
  std::optional<int> mc_reps;
  std::optional<std::uint64_t> mc_seed;
  mc_cmd->add_option("--config", mc_config, "Study configuration JSON")->required();
  mc_cmd->add_option("--kind", mc_kind, "point, quantile or fixed-alpha (overrides the config)");
  mc_cmd->add_option("--out-dir", mc_dir, "Directory for the CSV tables")->capture_default_str();
  mc_cmd->add_option("--replications", mc_reps, "Override the replication count");
  mc_cmd->add_option("--seed", mc_seed, "Override the study seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, json_errors, "argument", e.what(), kArgumentError);
    return kArgumentError;
  }

  try {
    const auto pool = workers;
    if (sim->parsed()) {
      const SimRequest request{resolve_params(sim_params, default_sim_params()), sim_n, sim_r, sim_seed, sim_index, 0, sim_labels};
      const auto draw = generate_sample(request);
      if (draw.discarded) err << "warning: no failure after the stress change; the sample is degenerate\n";
      emit(io::sample_csv(draw.sample, io::labels_for(draw)), sim_out, out);
      if (sim_out) io::write_atomic(*sim_out + ".json", io::dump(io::sample_sidecar(request, draw)));
    } else if (fit_cmd->parsed()) {
      const auto loaded = load_data(fit_data);
      const auto fit = fit_em(loaded.sample, em_config(fit_flags));
      warn_if_unconverged(fit, err);
      emit(io::dump(io::fit_report(fit, loaded.sample, loaded.source)), fit_out, out);
    } else if (gof_cmd->parsed()) {
      const auto loaded = load_data(gof_data);
      const auto family = parse_cdf_family(gof_family);
      std::optional<MixtureParams> params;
      if (gof_params.any()) {
        params = resolve_params(gof_params, default_sim_params().with_tau(loaded.sample.tau()));
      } else {
        const auto fit = fit_em(loaded.sample, em_config(gof_fit));
        warn_if_unconverged(fit, err);
        params = fit.params;
      }
      GofOptions options;
      options.method = parse_gof_method(gof_method);
      options.convention = parse_ks_convention(gof_convention);
      options.B = gof_B;
      options.seed = gof_seed;
      options.workers = pool;
      if (gof_refit) {
        auto refit = em_config(gof_fit);
        refit.m = params->m();
        refit.initial = *params;
        refit.n_starts = 1;
        options.refit = refit;
      }
      const auto report = ks_gof(loaded.sample, *params, family, options);
      emit(io::dump(io::gof_report(report, *params)), gof_out, out);
      if (gof_cdf) io::write_atomic(*gof_cdf, io::cdf_csv(cdf_export(loaded.sample, *params, family, options.convention)));
    } else if (boot_cmd->parsed()) {
      const auto loaded = load_data(boot_data);
      const auto fit = fit_em(loaded.sample, em_config(boot_fit));
      BootstrapConfig cfg;
      cfg.B = boot_B;
      cfg.level = boot_level;
      cfg.seed = boot_seed;
      cfg.refit = em_config(boot_fit);
      cfg.refit.n_starts = boot_refit_starts;
      cfg.warm_start = !boot_cold;
      cfg.workers = pool;
      const auto result = bootstrap_ci(loaded.sample, fit, cfg);
      if (result.warning) err << "warning: " << *result.warning << "\n";
      emit(io::dump(io::bootstrap_report(result, fit)), boot_out, out);
    } else if (q_cmd->parsed()) {
      const auto family = parse_cdf_family(q_family);
      if (q_params.any()) {
        const auto params = resolve_params(q_params, default_sim_params());
        std::vector<QuantileEstimate> rows;
        for (double q : q_levels) rows.push_back({q, quantile(params, q, family)});
        emit(io::dump(io::quantile_report(rows, family, params, true)), q_out, out);
      } else {
        if (q_data.data.empty()) throw ArgumentError("quantile needs --data or parameters");
        const auto loaded = io::load_sample(q_data.data, {q_data.n, q_params.tau}, q_data.r);
        const auto fit = fit_em(loaded.sample, em_config(q_fit));
        warn_if_unconverged(fit, err);
        const auto rows = quantile_from_fit(fit, q_levels, family, q_force);
        emit(io::dump(io::quantile_report(rows, family, fit.params, fit.converged)), q_out, out);
      }
    } else if (mc_cmd->parsed()) {
      const json config = load_json(mc_config);
      auto cfg = study_from_json(config);
      if (mc_reps) cfg.replications = *mc_reps;
      if (mc_seed) cfg.seed = *mc_seed;
      cfg.workers = pool;
      std::string kind = config.value("kind", std::string("point"));
      if (mc_cmd->count("--kind") > 0) kind = mc_kind;
      StudyResult result = [&] {
        if (kind == "point") return run_point_study(cfg);
        if (kind == "quantile") return run_quantile_study(cfg);
        if (kind == "fixed-alpha" || kind == "fixed_alpha") return run_fixed_alpha_comparison(cfg);
        throw ArgumentError("unknown study kind '" + kind + "' (point, quantile, fixed-alpha)");
      }();
      const std::filesystem::path dir{mc_dir};
      std::filesystem::create_directories(dir);
      io::write_atomic(dir / "point_study.csv", io::point_study_csv(result));
      io::write_atomic(dir / "quantile_study.csv", io::quantile_study_csv(result));
      io::write_atomic(dir / "per_replication.csv", io::per_replication_csv(result));
      int flagged = 0;
      for (const auto& row : result.rows) {
        if (row.flagged) {
          ++flagged;
          err << "warning: cell (" << row.cell.n << ", " << row.cell.r << ", " << io::format_number(row.cell.tau) << ") "
              << row.model << ": " << (row.replications - row.used) << " of " << row.replications << " fits unusable\n";
        }
      }
      out << io::dump({{"schema", io::kSchemaVersion},
                       {"kind", "mc-study"},
                       {"study", kind},
                       {"rows", result.rows.size()},
                       {"flagged_rows", flagged},
                       {"files", {"point_study.csv", "quantile_study.csv", "per_replication.csv"}}});
    }
    return kSuccess;
  } catch (const ArgumentError& e) {
    report_error(err, json_errors, "argument", e.what(), kArgumentError);
    return kArgumentError;
  } catch (const DegenerateDataError& e) {
    report_error(err, json_errors, "degenerate_data", e.what(), kFitError);
    return kFitError;
  } catch (const FitFailure& e) {
    report_error(err, json_errors, "fit_failure", e.what(), kFitError);
    return kFitError;
  } catch (const AlphaSolveFailure& e) {
    report_error(err, json_errors, "fit_failure", e.what(), kFitError);
    return kFitError;
  } catch (const DomainError& e) {
    report_error(err, json_errors, "domain", e.what(), kFitError);
    return kFitError;
  } catch (const std::exception& e) {
    report_error(err, json_errors, "internal", e.what(), kRuntimeError);
    return kRuntimeError;
  }
}

}  // namespace hssalt::cli
