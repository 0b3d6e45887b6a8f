#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "alfa/formula.hpp"
#include "alfa/rng.hpp"

namespace alfa {

enum class SolveStatus { solved, flip_budget_exhausted };

struct SolveOutcome {
  SolveStatus status = SolveStatus::flip_budget_exhausted;
  std::uint64_t flips = 0;
  std::optional<Assignment> model;

  bool solved() const { return status == SolveStatus::solved; }
};

inline constexpr std::uint64_t kNoCutoff = std::numeric_limits<std::uint64_t>::max();

struct SrwaParams {
  // The walk re-draws a random assignment every period_factor * n flips
  // (0 disables). Re-initializations are not counted as flips.
  std::uint64_t period_factor = 3;

  std::uint64_t period(std::size_t num_vars) const { return period_factor * num_vars; }
};

enum class BreakFunction { polynomial, exponential };

struct ProbSatParams {
  double cb = 2.3;
  double eps = 0.9;
  BreakFunction function = BreakFunction::polynomial;

  void validate() const;
  // Unnormalized selection weight for a variable with the given break value.
  double weight(std::uint64_t break_count) const;
};

enum class SolverKind { srwa, probsat };

struct SolverSpec {
  SolverKind kind = SolverKind::srwa;
  SrwaParams srwa;
  ProbSatParams probsat;

  std::string name() const { return kind == SolverKind::srwa ? "srwa" : "probsat"; }
};

SolverKind parse_solver_kind(const std::string& name);

SolveOutcome srwa_solve(const Formula& f, Rng& rng, std::uint64_t max_flips,
                        const SrwaParams& params = {});

SolveOutcome probsat_solve(const Formula& f, const ProbSatParams& params, Rng& rng,
                           std::uint64_t max_flips);

SolveOutcome solve(const Formula& f, const SolverSpec& spec, Rng& rng,
                   std::uint64_t max_flips);

// Fixed-cutoff restarts: runs the solver with budget `cutoff` from fresh
// random assignments until solved. The returned flip count is the total over
// all attempts. Throws BudgetError once the total reaches safety_budget.
SolveOutcome run_with_restarts(const SolverSpec& spec, const Formula& f,
                               std::uint64_t cutoff, Rng& rng,
                               std::uint64_t safety_budget = kNoCutoff);

inline constexpr std::size_t kOracleMaxVars = 12;

// Exact expected flip count of one (unbounded) solver run, from the Markov
// chain over assignments (augmented by the walk phase when SRWA
// re-initializes). Throws ConfigError for more than kOracleMaxVars variables
// and NumericError if the formula is unsatisfiable.
double expected_flips_oracle(const Formula& f, const SolverSpec& spec);

}  // namespace alfa
