#include "alfa/gen.hpp"

#include <cmath>
#include <string>

#include "alfa/error.hpp"

namespace alfa {

ChanceVector ChanceVector::default_for(std::size_t k) {
  if (k == 3) return {{0.0, 0.05, 0.25, 0.70}};
  // No canonical values for other widths; weight linearly by agreement.
  ChanceVector c;
  c.q.resize(k + 1);
  for (std::size_t i = 0; i <= k; ++i) c.q[i] = static_cast<double>(i) / static_cast<double>(k);
  return c;
}

void ChanceVector::validate(std::size_t k) const {
  if (q.size() != k + 1)
    throw ConfigError("chance vector needs k+1 = " + std::to_string(k + 1) + " entries");
  if (q[0] != 0.0) throw ConfigError("q_0 must be 0 to keep the planted assignment");
  bool any = false;
  for (double v : q) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("chance values must lie in [0, 1]");
    any = any || v > 0.0;
  }
  if (!any) throw ConfigError("at least one chance q_i (i >= 1) must be positive");
}

void GenSpec::validate() const {
  if (n == 0) throw ConfigError("n must be positive");
  if (k == 0 || k > n) throw ConfigError("clause width k must satisfy 1 <= k <= n");
  if (m == 0) throw ConfigError("m must be positive");
}

Clause random_clause(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<Literal> lits;
  lits.reserve(k);
  while (lits.size() < k) {
    const auto v = static_cast<Var>(rng.below(n));
    bool fresh = true;
    for (Literal l : lits) fresh = fresh && l.var() != v;
    if (fresh) lits.emplace_back(v, rng.coin());
  }
  return Clause::make(std::move(lits));
}

HiddenInstance gen_hidden(const GenSpec& spec, const ChanceVector& chances, Rng& rng,
                          std::uint64_t max_attempts) {
  spec.validate();
  chances.validate(spec.k);
  HiddenInstance out;
  out.formula = Formula(spec.n);
  std::vector<std::uint8_t> planted(spec.n);
  for (auto& v : planted) v = rng.coin() ? 1 : 0;
  out.planted = Assignment(std::move(planted));
  out.candidates.assign(spec.k + 1, 0);
  out.accepted.assign(spec.k + 1, 0);

  std::uint64_t attempts = 0;
  while (out.formula.size() < spec.m) {
    if (attempts++ == max_attempts)
      throw BudgetError("hidden-solution generator exceeded " +
                        std::to_string(max_attempts) + " candidate clauses");
    Clause c = random_clause(spec.n, spec.k, rng);
    std::size_t agree = 0;
    for (Literal l : c) agree += out.planted.satisfies(l) ? 1 : 0;
    ++out.candidates[agree];
    if (!rng.bernoulli(chances.q[agree])) continue;
    ++out.accepted[agree];
    if (!out.formula.add(std::move(c))) ++out.duplicates_skipped;
  }
  return out;
}

Formula gen_uniform(const GenSpec& spec, Rng& rng) {
  spec.validate();
  Formula f(spec.n);
  for (std::size_t i = 0; i < spec.m; ++i) f.add(random_clause(spec.n, spec.k, rng));
  return f;
}

namespace {

class Dpll {
 public:
  Dpll(const Formula& f, std::uint64_t budget) : f_(f), budget_(budget) {}

  bool solve() {
    std::vector<std::int8_t> values(f_.num_vars(), -1);
    return search(values);
  }

 private:
  const Formula& f_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;

  bool lit_true(const std::vector<std::int8_t>& values, Literal l) const {
    return values[l.var()] == (l.positive() ? 1 : 0);
  }

  // Returns false on conflict. Sets `branch` to a literal from a shortest
  // open clause; `open_left` stays false when every clause is satisfied.
  bool propagate(std::vector<std::int8_t>& values, Literal& branch, bool& open_left) const {
    for (bool changed = true; changed;) {
      changed = false;
      open_left = false;
      std::size_t best = SIZE_MAX;
      for (const auto& c : f_.clauses()) {
        std::size_t open = 0;
        Literal last;
        bool sat = false;
        for (Literal l : c) {
          const auto v = values[l.var()];
          if (v < 0) {
            ++open;
            last = l;
          } else if (lit_true(values, l)) {
            sat = true;
            break;
          }
        }
        if (sat) continue;
        if (open == 0) return false;
        if (open == 1) {
          values[last.var()] = last.positive() ? 1 : 0;
          changed = true;
        } else if (open < best) {
          best = open;
          branch = last;
          open_left = true;
        }
      }
    }
    return true;
  }

  bool search(std::vector<std::int8_t>& values) {
    if (++nodes_ > budget_)
      throw BudgetError("dpll node budget of " + std::to_string(budget_) + " exhausted");
    Literal branch;
    bool open_left = false;
    if (!propagate(values, branch, open_left)) return false;
    if (!open_left) return true;
    const Var v = branch.var();
    const bool first = branch.positive();
    for (bool polarity : {first, !first}) {
      auto copy = values;
      copy[v] = polarity ? 1 : 0;
      if (search(copy)) return true;
    }
    return false;
  }
};

}  // namespace

bool dpll_sat(const Formula& f, std::uint64_t node_budget) {
  return Dpll(f, node_budget).solve();
}

UniformSatResult gen_uniform_sat(std::size_t n, double ratio, std::size_t k, Rng& rng,
                                 std::uint64_t max_attempts) {
  if (!(ratio > 0.0)) throw ConfigError("clause/variable ratio must be positive");
  GenSpec spec;
  spec.n = n;
  spec.k = k;
  spec.m = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(n)));
  spec.kind = InstanceKind::uniform;
  UniformSatResult out;
  out.requested_m = spec.m;
  while (out.attempts < max_attempts) {
    ++out.attempts;
    Formula f = gen_uniform(spec, rng);
    if (dpll_sat(f)) {
      out.formula = std::move(f);
      return out;
    }
  }
  throw BudgetError("no satisfiable uniform formula within " +
                    std::to_string(max_attempts) + " attempts");
}

}  // namespace alfa
