#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "alfa/error.hpp"
#include "alfa/formula.hpp"
#include "alfa/rng.hpp"

namespace alfa {

// Thrown when resolution derives the empty clause, i.e. the input was not
// satisfiable after all.
class EmptyResolventError : public Error {
 public:
  EmptyResolventError() : Error("empty resolvent derived: formula is unsatisfiable", 2) {}
};

// All non-tautological resolvents of two clauses, one per clashing variable.
// Throws EmptyResolventError if the clauses are complementary units.
std::vector<Clause> resolve_pair(const Clause& a, const Clause& b);

// Resolvent on the clashing literal `pivot` (pivot in a, ~pivot in b), or
// nullopt if it is tautological or wider than max_width.
std::optional<Clause> resolve_on(const Clause& a, const Clause& b, Literal pivot,
                                 std::size_t max_width);

inline constexpr std::size_t kDefaultPoolCap = 10'000'000;

// Res*_w(F) \ F: the bounded-width resolution closure minus the input clauses.
struct ResolventPool {
  Formula base;
  std::size_t width_bound = 0;
  std::vector<Clause> pool;  // sorted by canonical clause order
  std::size_t rounds = 0;    // Res_w applications until the fixpoint

  std::size_t size() const { return pool.size(); }
};

// Semi-naive fixpoint: each round only resolves pairs in which at least one
// clause was produced by the previous round. Throws EmptyResolventError and
// BudgetError (pool larger than `cap`).
ResolventPool res_w_closure(const Formula& f, std::size_t width_bound,
                            std::size_t cap = kDefaultPoolCap);

struct ModificationParams {
  std::size_t width_bound = 4;
  double probability = 1.0;
  bool shuffle = true;

  void validate() const;
};

// Keeps each pool clause independently with probability p, then optionally
// shuffles the selection uniformly.
std::vector<Clause> sample_resolvent_set(const ResolventPool& pool,
                                         const ModificationParams& params, Rng& rng);

// F u L for a fresh random L drawn from `pool`.
Formula alfa_modify(const ResolventPool& pool, const ModificationParams& params, Rng& rng);

// Convenience: computes the closure first.
Formula alfa_modify(const Formula& f, const ModificationParams& params, Rng& rng,
                    std::size_t cap = kDefaultPoolCap);

}  // namespace alfa
