#include "alfa/sls.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <vector>

#include "alfa/error.hpp"

namespace alfa {

void ProbSatParams::validate() const {
  if (!(eps >= 0.0)) throw ConfigError("probsat eps must be non-negative");
  if (function == BreakFunction::exponential && !(cb > 1.0))
    throw ConfigError("exponential probsat needs cb > 1");
  if (function == BreakFunction::polynomial && !(cb > 0.0))
    throw ConfigError("polynomial probsat needs cb > 0");
}

double ProbSatParams::weight(std::uint64_t break_count) const {
  const auto b = static_cast<double>(break_count);
  if (function == BreakFunction::exponential) return std::pow(cb, -b);
  const double base = eps + b;
  // eps = 0: a break-free variable dominates every other candidate.
  if (base == 0.0) return 1e300;
  return std::pow(base, -cb);
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "srwa") return SolverKind::srwa;
  if (name == "probsat") return SolverKind::probsat;
  throw ConfigError("unknown solver '" + name + "' (expected srwa or probsat)");
}

namespace {

// Incremental walk state: per-clause true-literal counts, the XOR of the
// variables of true literals (identifies the sole true variable when the
// count is 1), the list of unsatisfied clauses, and optionally break counts.
template <bool TrackBreaks>
class Walker {
 public:
  explicit Walker(const Formula& f) : n_(f.num_vars()) {
    offsets_.reserve(f.size() + 1);
    offsets_.push_back(0);
    for (const auto& c : f.clauses()) {
      for (Literal l : c) lits_.push_back(l);
      offsets_.push_back(static_cast<std::uint32_t>(lits_.size()));
    }
    const std::size_t m = f.size();
    occ_offsets_.assign(2 * n_ + 1, 0);
    for (Literal l : lits_) ++occ_offsets_[l.code() + 1];
    for (std::size_t i = 1; i < occ_offsets_.size(); ++i) occ_offsets_[i] += occ_offsets_[i - 1];
    occ_.resize(lits_.size());
    std::vector<std::uint32_t> fill(occ_offsets_.begin(), occ_offsets_.end() - 1);
    for (std::uint32_t c = 0; c < m; ++c)
      for (std::uint32_t i = offsets_[c]; i < offsets_[c + 1]; ++i)
        occ_[fill[lits_[i].code()]++] = c;
    values_.resize(n_);
    true_count_.resize(m);
    true_xor_.resize(m);
    unsat_pos_.resize(m);
    if constexpr (TrackBreaks) breaks_.resize(n_);
  }

  void randomize(Rng& rng) {
    for (auto& v : values_) v = rng.coin() ? 1 : 0;
    recompute();
  }

  bool satisfied() const { return unsat_.empty(); }
  std::size_t num_unsat() const { return unsat_.size(); }
  std::uint32_t unsat_clause(std::size_t i) const { return unsat_[i]; }
  std::uint32_t clause_begin(std::uint32_t c) const { return offsets_[c]; }
  std::uint32_t clause_end(std::uint32_t c) const { return offsets_[c + 1]; }
  Literal literal(std::uint32_t i) const { return lits_[i]; }
  std::uint32_t break_count(Var v) const { return breaks_[v]; }

  void flip(Var v) {
    values_[v] ^= 1;
    const Literal now_true(v, values_[v] != 0);
    const Literal now_false = ~now_true;
    for (std::uint32_t i = occ_offsets_[now_true.code()]; i < occ_offsets_[now_true.code() + 1]; ++i) {
      const std::uint32_t c = occ_[i];
      const std::uint32_t count = ++true_count_[c];
      true_xor_[c] ^= v;
      if (count == 1) {
        remove_unsat(c);
        if constexpr (TrackBreaks) ++breaks_[v];
      } else if (count == 2) {
        if constexpr (TrackBreaks) --breaks_[true_xor_[c] ^ v];
      }
    }
    for (std::uint32_t i = occ_offsets_[now_false.code()]; i < occ_offsets_[now_false.code() + 1]; ++i) {
      const std::uint32_t c = occ_[i];
      const std::uint32_t count = --true_count_[c];
      true_xor_[c] ^= v;
      if (count == 0) {
        add_unsat(c);
        if constexpr (TrackBreaks) --breaks_[v];
      } else if (count == 1) {
        if constexpr (TrackBreaks) ++breaks_[true_xor_[c]];
      }
    }
  }

  Assignment assignment() const { return Assignment(values_); }

 private:
  std::size_t n_;
  std::vector<Literal> lits_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> occ_;
  std::vector<std::uint32_t> occ_offsets_;
  std::vector<std::uint8_t> values_;
  std::vector<std::uint32_t> true_count_;
  std::vector<std::uint32_t> true_xor_;
  std::vector<std::uint32_t> unsat_;
  std::vector<std::uint32_t> unsat_pos_;
  std::vector<std::uint32_t> breaks_;

  bool is_true(Literal l) const { return (values_[l.var()] != 0) == l.positive(); }

  void add_unsat(std::uint32_t c) {
    unsat_pos_[c] = static_cast<std::uint32_t>(unsat_.size());
    unsat_.push_back(c);
  }
  void remove_unsat(std::uint32_t c) {
    const std::uint32_t last = unsat_.back();
    unsat_[unsat_pos_[c]] = last;
    unsat_pos_[last] = unsat_pos_[c];
    unsat_.pop_back();
  }

  void recompute() {
    unsat_.clear();
    if constexpr (TrackBreaks) std::fill(breaks_.begin(), breaks_.end(), 0);
    for (std::uint32_t c = 0; c + 1 < offsets_.size(); ++c) {
      std::uint32_t count = 0, x = 0;
      for (std::uint32_t i = offsets_[c]; i < offsets_[c + 1]; ++i) {
        if (is_true(lits_[i])) {
          ++count;
          x ^= lits_[i].var();
        }
      }
      true_count_[c] = count;
      true_xor_[c] = x;
      if (count == 0) add_unsat(c);
      if constexpr (TrackBreaks)
        if (count == 1) ++breaks_[x];
    }
  }
};

template <bool B>
SolveOutcome finish(const Walker<B>& w, std::uint64_t flips) {
  SolveOutcome out;
  out.flips = flips;
  if (w.satisfied()) {
    out.status = SolveStatus::solved;
    out.model = w.assignment();
  }
  return out;
}

}  // namespace

SolveOutcome srwa_solve(const Formula& f, Rng& rng, std::uint64_t max_flips,
                        const SrwaParams& params) {
  Walker<false> w(f);
  w.randomize(rng);
  const std::uint64_t period = params.period(f.num_vars());
  std::uint64_t flips = 0;
  std::uint64_t since_reinit = 0;
  while (!w.satisfied() && flips < max_flips) {
    const std::uint32_t c = w.unsat_clause(rng.below(w.num_unsat()));
    const std::uint32_t begin = w.clause_begin(c);
    const std::uint32_t width = w.clause_end(c) - begin;
    w.flip(w.literal(begin + static_cast<std::uint32_t>(rng.below(width))).var());
    ++flips;
    if (period != 0 && ++since_reinit == period && !w.satisfied()) {
      w.randomize(rng);
      since_reinit = 0;
    }
  }
  return finish(w, flips);
}

SolveOutcome probsat_solve(const Formula& f, const ProbSatParams& params, Rng& rng,
                           std::uint64_t max_flips) {
  params.validate();
  Walker<true> w(f);
  w.randomize(rng);
  std::vector<double> table(f.size() + 1);
  for (std::size_t b = 0; b < table.size(); ++b) table[b] = params.weight(b);
  std::vector<double> cumulative;
  std::uint64_t flips = 0;
  while (!w.satisfied() && flips < max_flips) {
    const std::uint32_t c = w.unsat_clause(rng.below(w.num_unsat()));
    const std::uint32_t begin = w.clause_begin(c);
    const std::uint32_t end = w.clause_end(c);
    cumulative.clear();
    double total = 0.0;
    for (std::uint32_t i = begin; i < end; ++i) {
      total += table[w.break_count(w.literal(i).var())];
      cumulative.push_back(total);
    }
    const double target = rng.uniform() * total;
    std::uint32_t pick = 0;
    while (pick + 1 < cumulative.size() && !(target < cumulative[pick])) ++pick;
    w.flip(w.literal(begin + pick).var());
    ++flips;
  }
  return finish(w, flips);
}

SolveOutcome solve(const Formula& f, const SolverSpec& spec, Rng& rng,
                   std::uint64_t max_flips) {
  if (spec.kind == SolverKind::srwa) return srwa_solve(f, rng, max_flips, spec.srwa);
  return probsat_solve(f, spec.probsat, rng, max_flips);
}

SolveOutcome run_with_restarts(const SolverSpec& spec, const Formula& f,
                               std::uint64_t cutoff, Rng& rng,
                               std::uint64_t safety_budget) {
  if (cutoff == 0) throw ConfigError("restart cutoff must be at least 1");
  std::uint64_t total = 0;
  for (;;) {
    const std::uint64_t remaining = safety_budget - total;
    auto attempt = solve(f, spec, rng, std::min(cutoff, remaining));
    total += attempt.flips;
    if (attempt.solved()) {
      attempt.flips = total;
      return attempt;
    }
    if (total >= safety_budget)
      throw BudgetError("restart safety budget of " + std::to_string(safety_budget) +
                        " flips exhausted");
  }
}

namespace {

struct ChainModel {
  std::size_t n = 0;
  std::size_t states = 0;
  std::vector<std::uint8_t> sat;
  // Sparse transition rows: for unsatisfied state a, (target, probability).
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
};

bool state_satisfies(const Clause& c, std::uint32_t a) {
  for (Literal l : c)
    if (((a >> l.var()) & 1u) == (l.positive() ? 1u : 0u)) return true;
  return false;
}

ChainModel build_chain(const Formula& f, const SolverSpec& spec) {
  ChainModel m;
  m.n = f.num_vars();
  m.states = std::size_t{1} << m.n;
  m.sat.assign(m.states, 0);
  m.rows.resize(m.states);
  for (std::uint32_t a = 0; a < m.states; ++a) {
    std::vector<std::size_t> unsat;
    for (std::size_t c = 0; c < f.size(); ++c)
      if (!state_satisfies(f[c], a)) unsat.push_back(c);
    if (unsat.empty()) {
      m.sat[a] = 1;
      continue;
    }
    std::vector<double> to(m.n, 0.0);  // probability of flipping each variable
    for (std::size_t c : unsat) {
      const Clause& clause = f[c];
      std::vector<double> w(clause.width(), 1.0);
      if (spec.kind == SolverKind::probsat) {
        for (std::size_t i = 0; i < clause.width(); ++i) {
          const Var v = clause[i].var();
          const std::uint32_t flipped = a ^ (1u << v);
          std::uint64_t breaks = 0;
          for (const auto& other : f.clauses())
            if (state_satisfies(other, a) && !state_satisfies(other, flipped)) ++breaks;
          w[i] = spec.probsat.weight(breaks);
        }
      }
      double total = 0.0;
      for (double x : w) total += x;
      for (std::size_t i = 0; i < clause.width(); ++i)
        to[clause[i].var()] += (w[i] / total) / static_cast<double>(unsat.size());
    }
    for (Var v = 0; v < m.n; ++v)
      if (to[v] > 0.0) m.rows[a].emplace_back(a ^ (1u << v), to[v]);
  }
  return m;
}

// Plain absorbing chain: solve (I - T) E = 1 over the unsatisfied states.
double oracle_plain(const ChainModel& m) {
  std::vector<std::int64_t> index(m.states, -1);
  std::int64_t count = 0;
  for (std::size_t a = 0; a < m.states; ++a)
    if (!m.sat[a]) index[a] = count++;
  if (count == 0) return 0.0;
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t a = 0; a < m.states; ++a) {
    if (m.sat[a]) continue;
    triplets.emplace_back(index[a], index[a], 1.0);
    for (auto [b, p] : m.rows[a])
      if (!m.sat[b]) triplets.emplace_back(index[a], index[b], -p);
  }
  Eigen::SparseMatrix<double> system(count, count);
  system.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success)
    throw NumericError("expected-flips system is singular (formula unsatisfiable?)");
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(count);
  Eigen::VectorXd e = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !e.allFinite())
    throw NumericError("expected-flips solve failed");
  double sum = 0.0;
  for (std::size_t a = 0; a < m.states; ++a)
    if (!m.sat[a]) sum += e[index[a]];
  return sum / static_cast<double>(m.states);
}

// Chain with re-initialization every `period` flips. With c the expected
// flips from a fresh uniform start, every E[a, k] is affine in c; run the
// recursion backwards from phase period-1 and solve the scalar equation.
double oracle_periodic(const ChainModel& m, std::uint64_t period) {
  std::vector<double> a_next(m.states, 0.0), b_next(m.states, 0.0);
  std::vector<double> a_cur(m.states), b_cur(m.states);
  for (std::uint64_t k = period; k-- > 0;) {
    const bool last = (k + 1 == period);
    for (std::size_t s = 0; s < m.states; ++s) {
      if (m.sat[s]) {
        a_cur[s] = b_cur[s] = 0.0;
        continue;
      }
      double av = 1.0, bv = 0.0;
      for (auto [t, p] : m.rows[s]) {
        if (m.sat[t]) continue;
        if (last) {
          bv += p;
        } else {
          av += p * a_next[t];
          bv += p * b_next[t];
        }
      }
      a_cur[s] = av;
      b_cur[s] = bv;
    }
    std::swap(a_cur, a_next);
    std::swap(b_cur, b_next);
  }
  double sa = 0.0, sb = 0.0;
  for (std::size_t s = 0; s < m.states; ++s) {
    sa += a_next[s];
    sb += b_next[s];
  }
  const double denom = static_cast<double>(m.states) - sb;
  if (!(denom > 0.0)) throw NumericError("expected-flips recursion is degenerate");
  return sa / denom;
}

}  // namespace

double expected_flips_oracle(const Formula& f, const SolverSpec& spec) {
  if (f.num_vars() > kOracleMaxVars)
    throw ConfigError("expected-flips oracle supports at most " +
                      std::to_string(kOracleMaxVars) + " variables");
  if (spec.kind == SolverKind::probsat) spec.probsat.validate();
  const ChainModel chain = build_chain(f, spec);
  bool any_sat = false;
  for (auto s : chain.sat) any_sat = any_sat || s;
  if (!any_sat) throw NumericError("formula is unsatisfiable; expected flips are infinite");
  const std::uint64_t period =
      spec.kind == SolverKind::srwa ? spec.srwa.period(f.num_vars()) : 0;
  return period == 0 ? oracle_plain(chain) : oracle_periodic(chain, period);
}

}  // namespace alfa
