#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alfa/formula.hpp"
#include "alfa/gen.hpp"
#include "alfa/report.hpp"
#include "alfa/resolve.hpp"
#include "alfa/restart.hpp"
#include "alfa/sls.hpp"
#include "alfa/stats.hpp"

namespace alfa {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kWorkersEnv = "ALFA_WORKERS";

// Where the base instance comes from: a DIMACS file or a generator spec.
struct BaseInstance {
  std::optional<std::string> path;
  std::optional<GenSpec> generate;
  std::optional<ChanceVector> chances;  // hidden instances only
};

struct ExperimentConfig {
  BaseInstance base_instance;
  SolverSpec solver;
  std::size_t w = 4;
  double resolvent_budget_fraction = 0.1;
  bool shuffle = true;
  std::size_t M = 200;
  std::size_t N = 25;
  std::uint64_t base_seed = 1;
  std::uint64_t max_flips = 10'000'000'000ULL;
  std::string output_dir;
  std::size_t bootstrap_rounds = 200;
  double alpha = 0.05;
  std::size_t pool_cap = kDefaultPoolCap;

  void validate() const;
};

// Parses the JSON config format; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& c);

// Worker count from ALFA_WORKERS, or `fallback` when unset.
std::size_t workers_from_env(std::size_t fallback = 1);

struct GeneratedInstance {
  Formula formula;
  std::optional<Assignment> planted;
  std::uint64_t attempts = 1;
};

// Hidden specs use gen_hidden; uniform specs redraw until dpll_sat accepts.
GeneratedInstance generate_instance(const GenSpec& spec, const std::optional<ChanceVector>& chances);

// p = min(1, fraction * |F| / |pool|); nullopt for an empty pool.
std::optional<double> calibrate_p(std::size_t formula_size, std::size_t pool_size, double fraction);
std::optional<double> calibrate_p(const Formula& f, std::size_t w, double fraction,
                                  std::size_t cap = kDefaultPoolCap);

struct RunRecord {
  std::size_t instance_index = 0;
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::uint64_t flips = 0;
  SolveStatus status = SolveStatus::solved;
};

struct HardnessRow {
  std::size_t instance_index = 0;
  double mean_flips = 0.0;
  double run_variance = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  Formula base;
  std::size_t pool_size = 0;
  std::size_t closure_rounds = 0;
  std::optional<double> p;
  std::vector<std::size_t> added_clauses;  // |F^(i)| - |F|
  std::vector<RunRecord> runs;             // instance-major, run-minor
  std::vector<HardnessRow> hardness;
  std::optional<FitReport> fit;
  std::string fit_error;
  std::optional<RestartAnalysis> restart;
  std::optional<OptimalCutoff> optimal_cutoff;
  std::vector<std::string> warnings;
  std::uint64_t total_flips = 0;
  double wall_seconds = 0.0;
  std::size_t workers = 1;

  Sample hardness_sample() const;
};

// Seeds used by the pipeline; exposed so callers can replay single runs.
std::uint64_t modification_seed(std::uint64_t base_seed, std::size_t instance_index);
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t instance_index, std::size_t run_index);

// Runs the whole pipeline in memory. The outcome is independent of `workers`.
// Throws BudgetError naming (instance, run) if a run exhausts max_flips.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t workers = 1);

std::string runs_table(const ExperimentResult& r);
std::string hardness_table(const ExperimentResult& r);
std::string instances_table(const ExperimentResult& r);
nlohmann::json manifest_json(const ExperimentResult& r);

// Writes every artifact into cfg.output_dir; returns the paths written.
std::vector<std::string> write_artifacts(const ExperimentResult& r);

}  // namespace alfa
