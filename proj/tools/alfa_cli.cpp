// alfa: command line front end for the Alfa experiment pipeline.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "alfa/error.hpp"
#include "alfa/harness.hpp"

using namespace alfa;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitIo = 4;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + cell + "' in list '" + text + "'");
    }
  }
  return out;
}

void put(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_text_file(path, content);
  }
}

Formula load_formula(const std::string& path) {
  std::vector<std::string> warnings;
  Formula f = read_dimacs_file(path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << path << ": " << w << '\n';
  return f;
}

struct SolverFlags {
  std::string name = "srwa";
  std::uint64_t period_factor = 3;
  double cb = 2.3;
  double eps = 0.9;
  std::string function = "polynomial";

  void add(CLI::App* app) {
    app->add_option("--solver", name, "srwa or probsat")->check(CLI::IsMember({"srwa", "probsat"}));
    app->add_option("--period-factor", period_factor, "SRWA re-draws every factor*n flips (0 = never)");
    app->add_option("--cb", cb, "probSAT break base/exponent");
    app->add_option("--eps", eps, "probSAT polynomial offset");
    app->add_option("--function", function, "probSAT break function")
        ->check(CLI::IsMember({"polynomial", "exponential"}));
  }

  SolverSpec spec() const {
    SolverSpec s;
    s.kind = parse_solver_kind(name);
    s.srwa.period_factor = period_factor;
    s.probsat = {cb, eps, function == "polynomial" ? BreakFunction::polynomial : BreakFunction::exponential};
    if (s.kind == SolverKind::probsat) s.probsat.validate();
    return s;
  }
};

Sample load_sample(const std::string& path, std::size_t runs) {
  Sample s = read_hardness_file(path);
  if (runs > 0) s.runs_per_value = runs;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alfa: resolution-modified SAT instances and their hardness distribution"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a base instance");
  std::string gen_kind;
  std::size_t gen_n = 0, gen_m = 0, gen_k = 3;
  double gen_ratio = 0.0;
  std::uint64_t gen_seed = 0;
  std::string gen_chances, gen_out, gen_manifest;
  bool gen_no_filter = false;
  gen->add_option("kind", gen_kind, "hidden or uniform")->required()->check(CLI::IsMember({"hidden", "uniform"}));
  gen->add_option("--n", gen_n, "variables")->required();
  auto* m_opt = gen->add_option("--m", gen_m, "clauses");
  gen->add_option("--ratio", gen_ratio, "clause/variable ratio (instead of --m)")->excludes(m_opt);
  gen->add_option("--k", gen_k, "clause width");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--chances", gen_chances, "hidden: comma-separated q_0..q_k");
  gen->add_flag("--no-sat-filter", gen_no_filter, "uniform: keep the first draw even if unsatisfiable");
  gen->add_option("--out", gen_out, "DIMACS output (default stdout)");
  gen->add_option("--manifest", gen_manifest, "JSON manifest path (default <out>.json)");

  // modify
  auto* modify = app.add_subcommand("modify", "add a random set of implied resolvents");
  std::string mod_in, mod_out;
  std::size_t mod_w = 4, mod_cap = kDefaultPoolCap;
  double mod_fraction = 0.1, mod_p = 0.0;
  std::uint64_t mod_seed = 0;
  bool mod_no_shuffle = false;
  modify->add_option("input", mod_in, "base DIMACS file")->required();
  modify->add_option("--w", mod_w, "width bound");
  auto* p_opt = modify->add_option("--p", mod_p, "inclusion probability");
  modify->add_option("--fraction", mod_fraction, "expected added clauses as a fraction of |F|")->excludes(p_opt);
  modify->add_option("--seed", mod_seed, "sampling seed");
  modify->add_flag("--no-shuffle", mod_no_shuffle, "keep the canonical pool order");
  modify->add_option("--pool-cap", mod_cap, "closure size limit");
  modify->add_option("--out", mod_out, "DIMACS output (default stdout)");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "run one SLS solver and count flips");
  std::string solve_in;
  std::uint64_t solve_seed = 0, solve_max = 10'000'000'000ULL, solve_cutoff = 0;
  bool solve_model = false;
  SolverFlags solve_flags;
  solve_cmd->add_option("input", solve_in, "DIMACS file")->required();
  solve_flags.add(solve_cmd);
  solve_cmd->add_option("--seed", solve_seed, "run seed");
  solve_cmd->add_option("--max-flips", solve_max, "flip budget");
  solve_cmd->add_option("--restart-cutoff", solve_cutoff, "restart every t flips (0 = never)");
  solve_cmd->add_flag("--model", solve_model, "print the model as a v-line");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run the full pipeline from a JSON config");
  std::string exp_config, exp_out;
  exp->add_option("config", exp_config, "experiment config (JSON)")->required();
  exp->add_option("--output-dir", exp_out, "overrides output_dir from the config");

  // fit
  auto* fit = app.add_subcommand("fit", "fit a three-parameter lognormal and test it");
  std::string fit_in, fit_out;
  std::size_t fit_rounds = 200, fit_runs = 0;
  double fit_alpha = 0.05;
  std::uint64_t fit_seed = 0;
  fit->add_option("hardness", fit_in, "hardness table (CSV)")->required();
  fit->add_option("--bootstrap", fit_rounds, "bootstrap rounds (0 = skip)");
  fit->add_option("--alpha", fit_alpha, "significance level");
  fit->add_option("--seed", fit_seed, "bootstrap seed");
  fit->add_option("--runs", fit_runs, "runs behind each value (overrides the table)");
  fit->add_option("--out", fit_out, "JSON output (default stdout)");

  // bootstrap
  auto* boot = app.add_subcommand("bootstrap", "bootstrap test for noisy hardness data");
  std::string boot_in;
  std::size_t boot_rounds = 200, boot_runs = 0;
  double boot_alpha = 0.05;
  std::uint64_t boot_seed = 0;
  boot->add_option("hardness", boot_in, "hardness table (CSV)")->required();
  boot->add_option("--rounds", boot_rounds, "bootstrap rounds");
  boot->add_option("--alpha", boot_alpha, "significance level");
  boot->add_option("--seed", boot_seed, "bootstrap seed");
  boot->add_option("--runs", boot_runs, "runs behind each value (overrides the table)");

  // restart-analyze
  auto* ra = app.add_subcommand("restart-analyze", "decide whether restarts help a fitted lognormal");
  std::string ra_in, ra_out, ra_curve;
  ra->add_option("fit", ra_in, "fit.json")->required();
  ra->add_option("--out", ra_out, "JSON output (default stdout)");
  ra->add_option("--curve", ra_curve, "CSV of (p, R, R - p)");

  // plot-data
  auto* plot = app.add_subcommand("plot-data", "write ecdf / survival plot tables");
  std::string plot_in, plot_fit, plot_dir = ".";
  plot->add_option("hardness", plot_in, "hardness table (CSV)")->required();
  plot->add_option("--fit", plot_fit, "fit.json (default: fit the data)");
  plot->add_option("--output-dir", plot_dir, "directory for the CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const std::size_t workers = workers_from_env(1);

    if (*gen) {
      GenSpec spec;
      spec.kind = gen_kind == "hidden" ? InstanceKind::hidden : InstanceKind::uniform;
      spec.n = gen_n;
      spec.k = gen_k;
      spec.seed = gen_seed;
      if (gen_ratio > 0.0) {
        spec.m = static_cast<std::size_t>(std::lround(gen_ratio * static_cast<double>(gen_n)));
      } else {
        spec.m = gen_m;
      }
      std::optional<ChanceVector> chances;
      if (!gen_chances.empty()) chances = ChanceVector{parse_list(gen_chances)};
      GeneratedInstance g;
      if (spec.kind == InstanceKind::uniform && gen_no_filter) {
        Rng rng(derive_seed(spec.seed, StreamDomain::generation, 0));
        g.formula = gen_uniform(spec, rng);
      } else {
        g = generate_instance(spec, chances);
      }
      put(gen_out, emit_dimacs(g.formula));
      json manifest{{"kind", gen_kind},      {"n", spec.n},
                    {"m", spec.m},           {"k", spec.k},
                    {"seed", spec.seed},     {"num_clauses", g.formula.size()},
                    {"attempts", g.attempts}};
      if (spec.kind == InstanceKind::hidden) {
        manifest["chances"] = chances.value_or(ChanceVector::default_for(spec.k)).q;
        manifest["planted"] = model_line(*g.planted);
      }
      const std::string manifest_path = !gen_manifest.empty() ? gen_manifest
                                        : !gen_out.empty()    ? gen_out + ".json"
                                                              : "";
      if (!manifest_path.empty()) write_text_file(manifest_path, manifest.dump(2) + "\n");
      return kExitOk;
    }

    if (*modify) {
      const Formula f = load_formula(mod_in);
      const ResolventPool pool = res_w_closure(f, mod_w, mod_cap);
      double p = mod_p;
      if (p <= 0.0) p = calibrate_p(f.size(), pool.size(), mod_fraction).value_or(1.0);
      Rng rng(mod_seed);
      const Formula g = pool.size() == 0 ? f : alfa_modify(pool, {mod_w, p, !mod_no_shuffle}, rng);
      put(mod_out, emit_dimacs(g));
      std::cerr << "c alfa-modify w=" << mod_w << " p=" << format_double(p) << " seed=" << mod_seed
                << " pool=" << pool.size() << " added=" << g.size() - f.size() << '\n';
      return kExitOk;
    }

    if (*solve_cmd) {
      const Formula f = load_formula(solve_in);
      const SolverSpec spec = solve_flags.spec();
      Rng rng(solve_seed);
      const SolveOutcome out = solve_cutoff > 0 ? run_with_restarts(spec, f, solve_cutoff, rng, solve_max)
                                                : solve(f, spec, rng, solve_max);
      std::cout << "c solver " << spec.name() << " seed " << solve_seed << '\n';
      std::cout << "c flips " << out.flips << '\n';
      if (!out.solved()) {
        std::cout << "s UNKNOWN\n";
        return kExitBudget;
      }
      std::cout << "s SATISFIABLE\n";
      if (solve_model) std::cout << model_line(*out.model) << '\n';
      return kExitOk;
    }

    if (*exp) {
      ExperimentConfig cfg = load_config(exp_config);
      if (!exp_out.empty()) cfg.output_dir = exp_out;
      if (cfg.output_dir.empty()) throw ConfigError("no output_dir in config or on the command line");
      const ExperimentResult r = run_experiment(cfg, workers);
      write_artifacts(r);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "instances " << cfg.M << ", runs " << cfg.M * cfg.N << ", total flips " << r.total_flips
                << ", pool " << r.pool_size << '\n';
      if (r.fit) {
        const auto& q = r.fit->fit.params;
        std::cout << "fit mu=" << format_double(q.mu) << " sigma=" << format_double(q.sigma)
                  << " gamma=" << format_double(q.gamma) << '\n';
        if (r.fit->chi2) std::cout << "chi2 p=" << format_double(r.fit->chi2->p_value) << '\n';
        if (r.fit->bootstrap) std::cout << "bootstrap " << to_string(r.fit->bootstrap->verdict) << '\n';
        if (r.restart) std::cout << "restarts useful: " << (r.restart->useful ? "yes" : "no") << '\n';
      }
      std::cout << "artifacts in " << cfg.output_dir << '\n';
      return kExitOk;
    }

    if (*fit) {
      const Sample s = load_sample(fit_in, fit_runs);
      FitOptions o;
      o.bootstrap = fit_rounds > 0;
      o.bootstrap_options = {std::max<std::size_t>(fit_rounds, 1), fit_alpha, fit_seed, workers};
      put(fit_out, to_json(make_fit_report(s, o)).dump(2) + "\n");
      return kExitOk;
    }

    if (*boot) {
      const Sample s = load_sample(boot_in, boot_runs);
      const BootstrapReport r = bootstrap_test(s, {boot_rounds, boot_alpha, boot_seed, workers});
      json j{{"N", boot_rounds},
             {"alpha", r.alpha},
             {"statistic", r.observed_statistic},
             {"p_boot", r.p_boot},
             {"verdict", to_string(r.verdict)},
             {"floored_fraction", r.floored_fraction},
             {"floored_warning", r.floored_warning},
             {"pooled_variance", r.pooled_variance},
             {"mu", r.fit.params.mu},
             {"sigma", r.fit.params.sigma},
             {"gamma", r.fit.params.gamma}};
      std::cout << j.dump(2) << '\n';
      return kExitOk;
    }

    if (*ra) {
      json j;
      try {
        j = json::parse(read_text_file(ra_in));
      } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + ra_in + ": " + e.what());
      }
      const LognormalModel model(fit_report_from_json(j).fit.params);
      const RestartAnalysis a = restarts_useful(model);
      std::optional<OptimalCutoff> best;
      if (a.useful && !a.infinite_mean) best = optimal_restart_cutoff(model);
      put(ra_out, to_json(a, best).dump(2) + "\n");
      if (!ra_curve.empty()) {
        std::ostringstream curve;
        write_restart_curve_csv(curve, a);
        write_text_file(ra_curve, curve.str());
      }
      return kExitOk;
    }

    if (*plot) {
      const Sample s = read_hardness_file(plot_in);
      Lognormal3 params;
      if (!plot_fit.empty()) {
        try {
          params = fit_report_from_json(json::parse(read_text_file(plot_fit))).fit.params;
        } catch (const json::exception& e) {
          throw ConfigError("cannot parse " + plot_fit + ": " + e.what());
        }
      } else {
        params = fit_lognormal3_mle(s.values).params;
      }
      for (const auto& path : emit_plot_data(s.values, params, plot_dir)) std::cout << path << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
