#include "alfa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include "alfa/error.hpp"

namespace alfa {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (!base_instance.path && !base_instance.generate)
    throw ConfigError("base_instance needs either a path or a generate spec");
  if (base_instance.path && base_instance.generate)
    throw ConfigError("base_instance takes a path or a generate spec, not both");
  if (base_instance.generate) base_instance.generate->validate();
  if (w == 0) throw ConfigError("w must be positive");
  if (!(resolvent_budget_fraction > 0.0)) throw ConfigError("resolvent_budget_fraction must be positive");
  if (M == 0 || N == 0) throw ConfigError("M and N must be at least 1");
  if (max_flips == 0) throw ConfigError("max_flips must be positive");
  if (M > 0xffffffffULL || N > 0xffffffffULL) throw ConfigError("M and N must fit in 32 bits");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (solver.kind == SolverKind::probsat) solver.probsat.validate();
}

namespace {

const std::vector<std::string> kConfigKeys{
    "base_instance", "solver",  "w",          "resolvent_budget_fraction",
    "shuffle",       "M",       "N",          "base_seed",
    "max_flips",     "output_dir", "bootstrap_rounds", "alpha",
    "pool_cap"};

GenSpec gen_spec_from_json(const json& g) {
  GenSpec s;
  const std::string kind = g.value("kind", std::string("hidden"));
  if (kind == "hidden") {
    s.kind = InstanceKind::hidden;
  } else if (kind == "uniform") {
    s.kind = InstanceKind::uniform;
  } else {
    throw ConfigError("unknown instance kind '" + kind + "'");
  }
  s.n = g.at("n").get<std::size_t>();
  s.k = g.value("k", std::size_t{3});
  if (g.contains("m")) {
    s.m = g.at("m").get<std::size_t>();
  } else if (g.contains("ratio")) {
    s.m = static_cast<std::size_t>(std::lround(g.at("ratio").get<double>() * static_cast<double>(s.n)));
  } else {
    throw ConfigError("generate spec needs m or ratio");
  }
  s.seed = g.value("seed", std::uint64_t{0});
  return s;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
      throw ConfigError("unknown config key '" + key + "'");
  ExperimentConfig c;
  try {
    const json& base = j.at("base_instance");
    if (base.is_string()) {
      c.base_instance.path = base.get<std::string>();
    } else {
      if (base.contains("path")) c.base_instance.path = base.at("path").get<std::string>();
      if (base.contains("generate")) {
        const json& g = base.at("generate");
        c.base_instance.generate = gen_spec_from_json(g);
        if (g.contains("chances")) c.base_instance.chances = ChanceVector{g.at("chances").get<std::vector<double>>()};
      }
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      c.solver.kind = parse_solver_kind(s.value("name", std::string("srwa")));
      c.solver.srwa.period_factor = s.value("period_factor", c.solver.srwa.period_factor);
      c.solver.probsat.cb = s.value("cb", c.solver.probsat.cb);
      c.solver.probsat.eps = s.value("eps", c.solver.probsat.eps);
      const std::string fn = s.value("function", std::string("polynomial"));
      if (fn == "polynomial") {
        c.solver.probsat.function = BreakFunction::polynomial;
      } else if (fn == "exponential") {
        c.solver.probsat.function = BreakFunction::exponential;
      } else {
        throw ConfigError("unknown probsat function '" + fn + "'");
      }
    }
    c.w = j.value("w", c.w);
    c.resolvent_budget_fraction = j.value("resolvent_budget_fraction", c.resolvent_budget_fraction);
    c.shuffle = j.value("shuffle", c.shuffle);
    c.M = j.value("M", c.M);
    c.N = j.value("N", c.N);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.max_flips = j.value("max_flips", c.max_flips);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.bootstrap_rounds = j.value("bootstrap_rounds", c.bootstrap_rounds);
    c.alpha = j.value("alpha", c.alpha);
    c.pool_cap = j.value("pool_cap", c.pool_cap);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  // Relative instance paths are resolved against the config file.
  if (c.base_instance.path && std::filesystem::path(*c.base_instance.path).is_relative())
    c.base_instance.path = (std::filesystem::path(path).parent_path() / *c.base_instance.path).string();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json base;
  if (c.base_instance.path) base["path"] = *c.base_instance.path;
  if (c.base_instance.generate) {
    const auto& g = *c.base_instance.generate;
    base["generate"] = {{"kind", g.kind == InstanceKind::hidden ? "hidden" : "uniform"},
                        {"n", g.n},
                        {"m", g.m},
                        {"k", g.k},
                        {"seed", g.seed}};
    if (c.base_instance.chances) base["generate"]["chances"] = c.base_instance.chances->q;
  }
  json solver{{"name", c.solver.name()}};
  if (c.solver.kind == SolverKind::srwa) {
    solver["period_factor"] = c.solver.srwa.period_factor;
  } else {
    solver["cb"] = c.solver.probsat.cb;
    solver["eps"] = c.solver.probsat.eps;
    solver["function"] = c.solver.probsat.function == BreakFunction::polynomial ? "polynomial" : "exponential";
  }
  return {{"base_instance", base},
          {"solver", solver},
          {"w", c.w},
          {"resolvent_budget_fraction", c.resolvent_budget_fraction},
          {"shuffle", c.shuffle},
          {"M", c.M},
          {"N", c.N},
          {"base_seed", c.base_seed},
          {"max_flips", c.max_flips},
          {"output_dir", c.output_dir},
          {"bootstrap_rounds", c.bootstrap_rounds},
          {"alpha", c.alpha},
          {"pool_cap", c.pool_cap}};
}

std::size_t workers_from_env(std::size_t fallback) {
  const char* v = std::getenv(kWorkersEnv);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError(std::string(kWorkersEnv) + " must be a positive integer");
  return static_cast<std::size_t>(n);
}

GeneratedInstance generate_instance(const GenSpec& spec, const std::optional<ChanceVector>& chances) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, StreamDomain::generation, 0));
  GeneratedInstance out;
  if (spec.kind == InstanceKind::hidden) {
    auto h = gen_hidden(spec, chances.value_or(ChanceVector::default_for(spec.k)), rng);
    out.formula = std::move(h.formula);
    out.planted = std::move(h.planted);
    return out;
  }
  for (out.attempts = 1; out.attempts <= 10'000; ++out.attempts) {
    Formula f = gen_uniform(spec, rng);
    if (dpll_sat(f)) {
      out.formula = std::move(f);
      return out;
    }
  }
  throw BudgetError("no satisfiable uniform formula within 10000 attempts");
}

std::optional<double> calibrate_p(std::size_t formula_size, std::size_t pool_size, double fraction) {
  if (!(fraction > 0.0)) throw ConfigError("resolvent budget fraction must be positive");
  if (pool_size == 0) return std::nullopt;
  return std::min(1.0, fraction * static_cast<double>(formula_size) / static_cast<double>(pool_size));
}

std::optional<double> calibrate_p(const Formula& f, std::size_t w, double fraction, std::size_t cap) {
  return calibrate_p(f.size(), res_w_closure(f, w, cap).size(), fraction);
}

std::uint64_t modification_seed(std::uint64_t base_seed, std::size_t instance_index) {
  return derive_seed(base_seed, StreamDomain::modification, instance_index);
}

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t instance_index, std::size_t run_index) {
  return derive_seed(base_seed, StreamDomain::run, instance_index, run_index);
}

Sample ExperimentResult::hardness_sample() const {
  Sample s;
  s.runs_per_value = config.N;
  for (const auto& h : hardness) {
    s.values.push_back(h.mean_flips);
    s.run_variance.push_back(h.run_variance);
  }
  return s;
}

namespace {

// Runs job(i) for i in [0, count) on `workers` threads. The first exception
// stops the remaining work and is rethrown.
template <class Job>
void parallel_for(std::size_t count, std::size_t workers, Job&& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mutex;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t workers) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  ExperimentResult r;
  r.config = cfg;
  r.workers = workers;

  std::optional<Assignment> planted;
  if (cfg.base_instance.path) {
    r.base = read_dimacs_file(*cfg.base_instance.path, &r.warnings);
  } else {
    auto g = generate_instance(*cfg.base_instance.generate, cfg.base_instance.chances);
    r.base = std::move(g.formula);
    planted = std::move(g.planted);
    if (r.base.size() < cfg.base_instance.generate->m)
      r.warnings.push_back("duplicate clauses merged: base has " + std::to_string(r.base.size()) +
                           " of " + std::to_string(cfg.base_instance.generate->m) + " requested clauses");
  }
  const bool sat = planted ? satisfies(r.base, *planted) : dpll_sat(r.base);
  if (!sat) throw ConfigError("base instance is not satisfiable");

  const ResolventPool pool = res_w_closure(r.base, cfg.w, cfg.pool_cap);
  r.pool_size = pool.size();
  r.closure_rounds = pool.rounds;
  r.p = calibrate_p(r.base.size(), pool.size(), cfg.resolvent_budget_fraction);
  if (!r.p) r.warnings.push_back("resolvent pool is empty; instances equal the base formula");

  std::vector<Formula> instances(cfg.M);
  r.added_clauses.assign(cfg.M, 0);
  parallel_for(cfg.M, workers, [&](std::size_t i) {
    if (!r.p) {
      instances[i] = r.base;
      return;
    }
    Rng rng(modification_seed(cfg.base_seed, i));
    ModificationParams params{cfg.w, *r.p, cfg.shuffle};
    instances[i] = alfa_modify(pool, params, rng);
    r.added_clauses[i] = instances[i].size() - r.base.size();
  });

  r.runs.resize(cfg.M * cfg.N);
  parallel_for(cfg.M * cfg.N, workers, [&](std::size_t item) {
    const std::size_t i = item / cfg.N;
    const std::size_t j = item % cfg.N;
    const std::uint64_t seed = run_seed(cfg.base_seed, i, j);
    Rng rng(seed);
    const SolveOutcome out = solve(instances[i], cfg.solver, rng, cfg.max_flips);
    if (!out.solved())
      throw BudgetError("run (instance " + std::to_string(i) + ", run " + std::to_string(j) +
                        ") exhausted max_flips = " + std::to_string(cfg.max_flips));
    if (!satisfies(instances[i], *out.model))
      throw NumericError("solver returned a non-satisfying model");
    r.runs[item] = {i, j, seed, out.flips, out.status};
  });

  r.hardness.resize(cfg.M);
  for (std::size_t i = 0; i < cfg.M; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < cfg.N; ++j) sum += static_cast<double>(r.runs[i * cfg.N + j].flips);
    const double mean = sum / static_cast<double>(cfg.N);
    double ss = 0.0;
    for (std::size_t j = 0; j < cfg.N; ++j) {
      const double d = static_cast<double>(r.runs[i * cfg.N + j].flips) - mean;
      ss += d * d;
    }
    r.hardness[i] = {i, mean, cfg.N > 1 ? ss / static_cast<double>(cfg.N - 1) : 0.0};
  }
  for (const auto& run : r.runs) r.total_flips += run.flips;

  try {
    FitOptions fo;
    fo.bootstrap = cfg.bootstrap_rounds > 0;
    fo.bootstrap_options = {cfg.bootstrap_rounds, cfg.alpha,
                            derive_seed(cfg.base_seed, StreamDomain::bootstrap, 0xffffffffULL), workers};
    Sample s = r.hardness_sample();
    // Zero means (instances solved by the initial assignment on every run)
    // cannot be fitted on a log scale.
    if (std::any_of(s.values.begin(), s.values.end(), [](double v) { return !(v > 0.0); }))
      throw NumericError("hardness sample contains zero means");
    r.fit = make_fit_report(s, fo);
    LognormalModel model(r.fit->fit.params);
    r.restart = restarts_useful(model);
    if (r.restart->useful) r.optimal_cutoff = optimal_restart_cutoff(model);
  } catch (const NumericError& e) {
    r.fit_error = e.what();
    r.warnings.push_back(std::string("fit skipped: ") + e.what());
  }

  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return r;
}

std::string runs_table(const ExperimentResult& r) {
  std::ostringstream out;
  out << "instance_index,run_index,seed,flips,status\n";
  for (const auto& run : r.runs)
    out << run.instance_index << ',' << run.run_index << ',' << run.seed << ',' << run.flips << ','
        << (run.status == SolveStatus::solved ? "solved" : "flip_budget_exhausted") << '\n';
  return out.str();
}

std::string hardness_table(const ExperimentResult& r) {
  std::ostringstream out;
  write_hardness_csv(out, r.hardness_sample());
  return out.str();
}

std::string instances_table(const ExperimentResult& r) {
  std::ostringstream out;
  out << "instance_index,seed,added_clauses,num_clauses\n";
  for (std::size_t i = 0; i < r.added_clauses.size(); ++i)
    out << i << ',' << modification_seed(r.config.base_seed, i) << ',' << r.added_clauses[i] << ','
        << r.base.size() + r.added_clauses[i] << '\n';
  return out.str();
}

json manifest_json(const ExperimentResult& r) {
  json j;
  j["version"] = kVersion;
  j["config"] = to_json(r.config);
  j["base"] = {{"num_vars", r.base.num_vars()}, {"num_clauses", r.base.size()}};
  j["resolution"] = {{"w", r.config.w},
                     {"pool_size", r.pool_size},
                     {"closure_rounds", r.closure_rounds},
                     {"p", r.p ? json(*r.p) : json(nullptr)},
                     {"shuffle", r.config.shuffle}};
  j["total_flips"] = r.total_flips;
  j["wall_clock_seconds"] = r.wall_seconds;
  j["workers"] = r.workers;
  j["warnings"] = r.warnings;
  j["fit_error"] = r.fit_error;
  return j;
}

std::vector<std::string> write_artifacts(const ExperimentResult& r) {
  namespace fs = std::filesystem;
  if (r.config.output_dir.empty()) throw ConfigError("output_dir is not set");
  const fs::path dir(r.config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const std::string& content) {
    const auto path = (dir / name).string();
    write_text_file(path, content);
    written.push_back(path);
  };
  put("base.cnf", emit_dimacs(r.base));
  put("runs.csv", runs_table(r));
  put("hardness.csv", hardness_table(r));
  put("instances.csv", instances_table(r));
  if (r.fit) {
    put("fit.json", to_json(*r.fit).dump(2) + "\n");
    auto plots = emit_plot_data(r.hardness_sample().values, r.fit->fit.params, dir.string());
    written.insert(written.end(), plots.begin(), plots.end());
  }
  if (r.restart) {
    put("restart.json", to_json(*r.restart, r.optimal_cutoff).dump(2) + "\n");
    std::ostringstream curve;
    write_restart_curve_csv(curve, *r.restart);
    put("restart_curve.csv", curve.str());
  }
  put("manifest.json", manifest_json(r).dump(2) + "\n");
  return written;
}

}  // namespace alfa
