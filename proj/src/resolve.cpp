#include "alfa/resolve.hpp"

#include <algorithm>
#include <string>

namespace alfa {

std::optional<Clause> resolve_on(const Clause& a, const Clause& b, Literal pivot,
                                 std::size_t max_width) {
  const Var pv = pivot.var();
  std::vector<Literal> out;
  out.reserve(a.width() + b.width() - 2);
  auto ia = a.begin(), ea = a.end();
  auto ib = b.begin(), eb = b.end();
  auto push = [&](Literal l) -> bool {
    if (!out.empty()) {
      if (out.back() == l) return true;
      if (out.back().var() == l.var()) return false;  // tautology
    }
    if (out.size() == max_width) return false;
    out.push_back(l);
    return true;
  };
  while (ia != ea || ib != eb) {
    Literal next;
    if (ib == eb || (ia != ea && *ia < *ib)) {
      next = *ia++;
    } else {
      next = *ib++;
    }
    if (next.var() == pv) continue;
    if (!push(next)) return std::nullopt;
  }
  return Clause::from_sorted(std::move(out));
}

std::vector<Clause> resolve_pair(const Clause& a, const Clause& b) {
  std::vector<Clause> out;
  for (Literal l : a) {
    if (!b.contains(~l)) continue;
    if (a.width() == 1 && b.width() == 1) throw EmptyResolventError();
    if (auto r = resolve_on(a, b, l, a.width() + b.width())) {
      if (std::find(out.begin(), out.end(), *r) == out.end())
        out.push_back(std::move(*r));
    }
  }
  return out;
}

namespace {

// Variable and polarity bitmasks of every closure clause, words_ 64-bit
// words per clause in one flat array. Two clauses resolve to a usable
// clause exactly when they clash on one variable and their variable union,
// minus the pivot, fits the width bound; both tests are word operations.
class ClauseMasks {
 public:
  explicit ClauseMasks(std::size_t num_vars) : words_((num_vars + 63) / 64) {}
  void push(const Clause& c) {
    widths_.push_back(c.width());
    const std::size_t base = vars_.size();
    vars_.resize(base + words_, 0);
    pos_.resize(base + words_, 0);
    for (Literal l : c) {
      vars_[base + l.var() / 64] |= std::uint64_t{1} << (l.var() % 64);
      if (l.positive()) pos_[base + l.var() / 64] |= std::uint64_t{1} << (l.var() % 64);
    }
  }

  // Fills `out` with the resolvent of clauses i and j on `pivot`, or returns
  // false if it is tautological or wider than max_width.
  std::size_t width(std::size_t i) const { return widths_[i]; }

  bool resolve(std::size_t i, std::size_t j, Var pivot, std::size_t max_width,
               std::vector<Literal>& out) const {
    const std::uint64_t* vi = vars_.data() + i * words_;
    const std::uint64_t* vj = vars_.data() + j * words_;
    const std::uint64_t* pi = pos_.data() + i * words_;
    const std::uint64_t* pj = pos_.data() + j * words_;
    // |vars(i) u vars(j)| = wi + wj - shared; shared variables are few, so
    // they are counted bit by bit rather than with a library popcount.
    std::size_t shared = 0;
    for (std::size_t k = 0; k < words_; ++k) {
      std::uint64_t both = vi[k] & vj[k];
      std::uint64_t clash = both & (pi[k] ^ pj[k]);
      if (k == pivot / 64) clash &= ~(std::uint64_t{1} << (pivot % 64));
      if (clash != 0) return false;
      for (; both != 0; both &= both - 1) ++shared;
    }
    if (widths_[i] + widths_[j] - shared - 1 > max_width) return false;
    out.clear();
    for (std::size_t k = 0; k < words_; ++k) {
      std::uint64_t u = vi[k] | vj[k];
      const std::uint64_t p = pi[k] | pj[k];
      while (u != 0) {
        const int b = std::countr_zero(u);
        u &= u - 1;
        const auto v = static_cast<Var>(k * 64 + static_cast<std::size_t>(b));
        if (v != pivot) out.emplace_back(v, ((p >> b) & 1u) != 0);
      }
    }
    return true;
  }

 private:
  std::size_t words_;
  std::vector<std::size_t> widths_;
  std::vector<std::uint64_t> vars_;
  std::vector<std::uint64_t> pos_;
};

}  // namespace

ResolventPool res_w_closure(const Formula& f, std::size_t width_bound, std::size_t cap) {
  if (width_bound == 0) throw ConfigError("width bound must be positive");
  Formula closure(f.num_vars(), f.clauses());
  ClauseMasks masks(f.num_vars());
  std::vector<std::vector<std::uint32_t>> occ(2 * f.num_vars());
  auto index = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) {
      masks.push(closure[i]);
      for (Literal l : closure[i]) occ[l.code()].push_back(static_cast<std::uint32_t>(i));
    }
  };

  std::size_t lo = 0;
  std::size_t hi = closure.size();
  index(lo, hi);
  std::size_t rounds = 0;
  std::vector<Literal> scratch;
  while (lo < hi) {
    ++rounds;
    for (std::size_t i = lo; i < hi; ++i) {
      const Clause ci = closure[i];  // add() may reallocate
      for (Literal l : ci) {
        const auto& partners = occ[(~l).code()];
        for (std::uint32_t j : partners) {
          if (j >= hi) break;  // occurrence lists are in index order
          if (j >= lo && j >= i) continue;  // new-new pairs once
          if (masks.width(i) == 1 && masks.width(j) == 1) throw EmptyResolventError();
          if (!masks.resolve(i, j, l.var(), width_bound, scratch)) continue;
          if (closure.add(Clause::from_sorted(scratch)) && closure.size() - f.size() > cap)
            throw BudgetError("resolution closure exceeded cap of " +
                              std::to_string(cap) + " clauses");
        }
      }
    }
    lo = hi;
    hi = closure.size();
    index(lo, hi);
  }

  ResolventPool out;
  out.base = f;
  out.width_bound = width_bound;
  out.rounds = rounds;
  out.pool.assign(closure.clauses().begin() + static_cast<std::ptrdiff_t>(f.size()),
                  closure.clauses().end());
  std::sort(out.pool.begin(), out.pool.end());
  return out;
}

void ModificationParams::validate() const {
  if (width_bound == 0) throw ConfigError("width bound must be positive");
  if (!(probability > 0.0 && probability <= 1.0))
    throw ConfigError("resolvent probability must lie in (0, 1]");
}

std::vector<Clause> sample_resolvent_set(const ResolventPool& pool,
                                         const ModificationParams& params, Rng& rng) {
  params.validate();
  std::vector<Clause> out;
  for (const auto& c : pool.pool)
    if (params.probability >= 1.0 || rng.bernoulli(params.probability)) out.push_back(c);
  if (params.shuffle) {
    for (std::size_t i = out.size(); i > 1; --i)
      std::swap(out[i - 1], out[rng.below(i)]);
  }
  return out;
}

Formula alfa_modify(const ResolventPool& pool, const ModificationParams& params, Rng& rng) {
  Formula out = pool.base;
  for (auto& c : sample_resolvent_set(pool, params, rng)) out.add(std::move(c));
  return out;
}

Formula alfa_modify(const Formula& f, const ModificationParams& params, Rng& rng,
                    std::size_t cap) {
  params.validate();
  return alfa_modify(res_w_closure(f, params.width_bound, cap), params, rng);
}

}  // namespace alfa
