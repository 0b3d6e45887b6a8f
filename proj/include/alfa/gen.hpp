#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "alfa/formula.hpp"
#include "alfa/rng.hpp"

namespace alfa {

// Acceptance probability q_i for a candidate clause with i literals agreeing
// with the planted assignment, i = 0..k. q_0 must be 0.
struct ChanceVector {
  std::vector<double> q;

  static ChanceVector default_for(std::size_t k);
  void validate(std::size_t k) const;
};

enum class InstanceKind { hidden, uniform };

struct GenSpec {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 3;
  std::uint64_t seed = 0;
  InstanceKind kind = InstanceKind::hidden;

  void validate() const;
};

struct HiddenInstance {
  Formula formula;
  Assignment planted;
  // Per agreement count i: candidates drawn and candidates accepted.
  std::vector<std::uint64_t> candidates;
  std::vector<std::uint64_t> accepted;
  std::uint64_t duplicates_skipped = 0;
};

inline constexpr std::uint64_t kDefaultGenAttempts = 100'000'000;

// k distinct variables, independent uniform polarities.
Clause random_clause(std::size_t n, std::size_t k, Rng& rng);

// Planted-solution generator: exactly spec.m distinct clauses, each accepted
// with probability q_i. Throws BudgetError after max_attempts candidates.
HiddenInstance gen_hidden(const GenSpec& spec, const ChanceVector& chances, Rng& rng,
                          std::uint64_t max_attempts = kDefaultGenAttempts);

// spec.m random clauses; duplicates are merged so the result may be smaller.
Formula gen_uniform(const GenSpec& spec, Rng& rng);

inline constexpr std::uint64_t kDefaultDpllNodes = 50'000'000;

// Complete DPLL (unit propagation + branching). Throws BudgetError when the
// node budget is exhausted.
bool dpll_sat(const Formula& f, std::uint64_t node_budget = kDefaultDpllNodes);

struct UniformSatResult {
  Formula formula;
  std::size_t requested_m = 0;
  std::uint64_t attempts = 0;
};

// Draws uniform formulas with m = round(r*n) until one is satisfiable.
UniformSatResult gen_uniform_sat(std::size_t n, double ratio, std::size_t k, Rng& rng,
                                 std::uint64_t max_attempts = 10'000);

}  // namespace alfa
