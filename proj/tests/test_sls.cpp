#include <doctest.h>

#include <cmath>
#include <functional>

#include "alfa/error.hpp"
#include "alfa/sls.hpp"
#include "oracles.hpp"

using namespace alfa;

namespace {

Formula unit_x1() { return Formula(1, {Clause::from_dimacs({1})}); }
Formula two_units() { return Formula(2, {Clause::from_dimacs({1}), Clause::from_dimacs({2})}); }

// Per-clause variable choice distribution of one solver step from state a.
using ChoiceLaw = std::function<std::vector<double>(const Formula&, std::uint64_t a, std::size_t clause)>;

std::vector<double> uniform_choice(const Formula& f, std::uint64_t, std::size_t c) {
  return std::vector<double>(f[c].width(), 1.0 / static_cast<double>(f[c].width()));
}

ChoiceLaw break_choice(ProbSatParams p) {
  return [p](const Formula& f, std::uint64_t a, std::size_t c) {
    std::vector<double> w;
    for (auto l : f[c]) {
      const std::uint64_t b = a ^ (std::uint64_t{1} << l.var());
      std::uint64_t breaks = 0;
      for (const auto& d : f.clauses())
        if (oracle::eval_clause(oracle::to_ints(d), a) && !oracle::eval_clause(oracle::to_ints(d), b)) ++breaks;
      const double g = p.function == BreakFunction::polynomial ? std::pow(p.eps + static_cast<double>(breaks), -p.cb)
                                                               : std::pow(p.cb, -static_cast<double>(breaks));
      w.push_back(g);
    }
    double s = 0;
    for (double x : w) s += x;
    for (double& x : w) x /= s;
    return w;
  };
}

// Expected flips by value iteration over (assignment, phase); phase counts
// flips since the last re-draw, and `period` = 0 means no re-draws.
double value_iteration(const Formula& f, const ChoiceLaw& law, std::uint64_t period) {
  const std::size_t n = f.num_vars();
  const std::uint64_t states = std::uint64_t{1} << n;
  const std::size_t phases = period == 0 ? 1 : period;
  std::vector<bool> sat(states);
  std::vector<std::vector<std::size_t>> unsat(states);
  for (std::uint64_t a = 0; a < states; ++a) {
    sat[a] = oracle::eval(f, a);
    for (std::size_t c = 0; c < f.size(); ++c)
      if (!oracle::eval_clause(oracle::to_ints(f[c]), a)) unsat[a].push_back(c);
  }
  // transitions[a] = (target, prob)
  std::vector<std::vector<std::pair<std::uint64_t, double>>> tr(states);
  for (std::uint64_t a = 0; a < states; ++a) {
    if (sat[a]) continue;
    for (auto c : unsat[a]) {
      const auto probs = law(f, a, c);
      for (std::size_t i = 0; i < f[c].width(); ++i)
        tr[a].push_back({a ^ (std::uint64_t{1} << f[c][i].var()),
                         probs[i] / static_cast<double>(unsat[a].size())});
    }
  }
  std::vector<double> e(states * phases, 0.0);
  auto value = [&](std::uint64_t a, std::size_t k) { return sat[a] ? 0.0 : e[a * phases + k]; };
  for (int it = 0; it < 200000; ++it) {
    double restart = 0.0;
    for (std::uint64_t a = 0; a < states; ++a) restart += value(a, 0);
    restart /= static_cast<double>(states);
    double delta = 0.0;
    for (std::uint64_t a = 0; a < states; ++a) {
      if (sat[a]) continue;
      for (std::size_t k = 0; k < phases; ++k) {
        double v = 1.0;
        for (auto [b, p] : tr[a]) {
          if (sat[b]) continue;
          const bool redraw = period != 0 && k + 1 == period;
          v += p * (redraw ? restart : value(b, period == 0 ? 0 : k + 1));
        }
        delta = std::max(delta, std::abs(v - e[a * phases + k]));
        e[a * phases + k] = v;
      }
    }
    if (delta < 1e-13) break;
  }
  double total = 0.0;
  for (std::uint64_t a = 0; a < states; ++a) total += value(a, 0);
  return total / static_cast<double>(states);
}

std::vector<Formula> tiny_corpus() {
  std::vector<Formula> out;
  out.push_back(Formula(3, {Clause::from_dimacs({1, 2}), Clause::from_dimacs({-1, 3}), Clause::from_dimacs({-2, -3})}));
  out.push_back(Formula(3, {Clause::from_dimacs({1, 2, 3}), Clause::from_dimacs({-1, -2}), Clause::from_dimacs({-2, -3}),
                            Clause::from_dimacs({-1, -3})}));
  out.push_back(Formula(4, {Clause::from_dimacs({1, -2}), Clause::from_dimacs({2, -3}), Clause::from_dimacs({3, -4}),
                            Clause::from_dimacs({4, 1, 2}), Clause::from_dimacs({-1, -4, 3})}));
  return out;
}

template <class Run>
std::pair<double, double> simulate(Run&& run, int runs, std::uint64_t seed) {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(runs));
  for (int i = 0; i < runs; ++i) {
    Rng rng(derive_seed(seed, StreamDomain::run, 0, static_cast<std::uint64_t>(i)));
    xs.push_back(static_cast<double>(run(rng)));
  }
  return {oracle::mean(xs), oracle::sample_sd(xs) / std::sqrt(static_cast<double>(runs))};
}

}  // namespace

TEST_SUITE("sls") {

TEST_CASE("probsat parameters") {
  ProbSatParams p;
  CHECK(p.cb == doctest::Approx(2.3));
  CHECK(p.eps == doctest::Approx(0.9));
  CHECK(p.weight(0) > p.weight(1));
  CHECK(p.weight(1) > p.weight(2));
  CHECK(p.weight(2) == doctest::Approx(std::pow(2.9, -2.3)));
  ProbSatParams e{2.5, 0.0, BreakFunction::exponential};
  CHECK(e.weight(3) == doctest::Approx(std::pow(2.5, -3.0)));
  CHECK_THROWS_AS((ProbSatParams{1.0, 0.0, BreakFunction::exponential}.validate()), ConfigError);
  CHECK_THROWS_AS((ProbSatParams{0.0, 0.9, BreakFunction::polynomial}.validate()), ConfigError);
  CHECK_THROWS_AS((ProbSatParams{2.3, -1.0, BreakFunction::polynomial}.validate()), ConfigError);
  CHECK(parse_solver_kind("probsat") == SolverKind::probsat);
  CHECK_THROWS_AS(parse_solver_kind("walksat"), ConfigError);
}

TEST_CASE("oracle on hand-solved chains") {
  for (auto kind : {SolverKind::srwa, SolverKind::probsat}) {
    SolverSpec spec;
    spec.kind = kind;
    CHECK(expected_flips_oracle(unit_x1(), spec) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(expected_flips_oracle(two_units(), spec) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("oracle errors") {
  SolverSpec spec;
  CHECK_THROWS_AS(expected_flips_oracle(Formula(1, {Clause::from_dimacs({1}), Clause::from_dimacs({-1})}), spec),
                  NumericError);
  CHECK_THROWS_AS(expected_flips_oracle(Formula(13, {Clause::from_dimacs({1})}), spec), ConfigError);
}

TEST_CASE("oracle matches independent value iteration") {
  for (const auto& f : tiny_corpus()) {
    SolverSpec srwa;
    CHECK(expected_flips_oracle(f, srwa) ==
          doctest::Approx(value_iteration(f, uniform_choice, 3 * f.num_vars())).epsilon(1e-9));
    srwa.srwa.period_factor = 0;
    CHECK(expected_flips_oracle(f, srwa) == doctest::Approx(value_iteration(f, uniform_choice, 0)).epsilon(1e-9));
    srwa.srwa.period_factor = 1;
    CHECK(expected_flips_oracle(f, srwa) ==
          doctest::Approx(value_iteration(f, uniform_choice, f.num_vars())).epsilon(1e-9));
    SolverSpec ps;
    ps.kind = SolverKind::probsat;
    CHECK(expected_flips_oracle(f, ps) == doctest::Approx(value_iteration(f, break_choice(ps.probsat), 0)).epsilon(1e-9));
    ps.probsat = {2.5, 0.0, BreakFunction::exponential};
    CHECK(expected_flips_oracle(f, ps) == doctest::Approx(value_iteration(f, break_choice(ps.probsat), 0)).epsilon(1e-9));
  }
}

TEST_CASE("solved runs carry a model") {
  Rng g(6);
  for (int t = 0; t < 30; ++t) {
    const Formula f = oracle::random_sat_formula(15, 50, 3, g);
    for (auto kind : {SolverKind::srwa, SolverKind::probsat}) {
      SolverSpec spec;
      spec.kind = kind;
      Rng rng(static_cast<std::uint64_t>(t));
      const auto out = solve(f, spec, rng, 1'000'000);
      REQUIRE(out.solved());
      REQUIRE(out.model);
      CHECK(unsat_clauses(f, *out.model).empty());
    }
  }
}

TEST_CASE("budget exhaustion is a status") {
  const Formula f(1, {Clause::from_dimacs({1}), Clause::from_dimacs({-1})});
  Rng rng(1);
  const auto out = srwa_solve(f, rng, 37);
  CHECK(out.status == SolveStatus::flip_budget_exhausted);
  CHECK(out.flips == 37);
  CHECK_FALSE(out.model);
  Rng r2(1);
  CHECK(probsat_solve(f, {}, r2, 5).flips == 5);
}

TEST_CASE("runs are reproducible") {
  Rng g(2);
  const Formula f = oracle::random_sat_formula(20, 80, 3, g);
  for (auto kind : {SolverKind::srwa, SolverKind::probsat}) {
    SolverSpec spec;
    spec.kind = kind;
    Rng a(42), b(42);
    const auto x = solve(f, spec, a, 10'000'000);
    const auto y = solve(f, spec, b, 10'000'000);
    CHECK(x.flips == y.flips);
    CHECK(*x.model == *y.model);
  }
}

TEST_CASE("simulation matches the oracle on a 3-variable formula") {
  const Formula f = tiny_corpus()[0];
  for (auto kind : {SolverKind::srwa, SolverKind::probsat}) {
    SolverSpec spec;
    spec.kind = kind;
    const double exact = expected_flips_oracle(f, spec);
    auto [m, se] = simulate([&](Rng& rng) { return solve(f, spec, rng, kNoCutoff).flips; }, 200000, 5);
    CHECK(std::abs(m - exact) < 3.5 * se);
  }
}

TEST_CASE("restarts on a unit clause") {
  SolverSpec spec;
  auto [m, se] = simulate(
      [&](Rng& rng) { return run_with_restarts(spec, unit_x1(), 1, rng).flips; }, 100000, 9);
  CHECK(std::abs(m - 0.5) < 3.5 * se);
}

TEST_CASE("restart wrapper with no cutoff is the plain solver") {
  Rng g(4);
  const Formula f = oracle::random_sat_formula(12, 40, 3, g);
  SolverSpec spec;
  Rng a(3), b(3);
  CHECK(run_with_restarts(spec, f, kNoCutoff, a).flips == solve(f, spec, b, kNoCutoff).flips);
}

TEST_CASE("restart safety budget and bad cutoff") {
  const Formula f(1, {Clause::from_dimacs({1}), Clause::from_dimacs({-1})});
  SolverSpec spec;
  Rng rng(1);
  CHECK_THROWS_AS(run_with_restarts(spec, f, 10, rng, 100), BudgetError);
  CHECK_THROWS_AS(run_with_restarts(spec, f, 0, rng, 100), ConfigError);
}

TEST_CASE("restart identity on the tiny corpus") {
  // E[X_t] = E[min(X, t)] / P(X <= t), with the right side estimated from
  // plain runs.
  const Formula f = tiny_corpus()[1];
  SolverSpec spec;
  spec.srwa.period_factor = 0;
  const std::uint64_t t = 2;
  std::vector<double> plain;
  for (int i = 0; i < 200000; ++i) {
    Rng rng(derive_seed(1, StreamDomain::run, 1, static_cast<std::uint64_t>(i)));
    plain.push_back(static_cast<double>(solve(f, spec, rng, kNoCutoff).flips));
  }
  double trunc = 0.0, hit = 0.0;
  for (double x : plain) {
    trunc += std::min(x, static_cast<double>(t));
    hit += x <= static_cast<double>(t) ? 1.0 : 0.0;
  }
  const double predicted = trunc / hit;
  auto [m, se] = simulate([&](Rng& rng) { return run_with_restarts(spec, f, t, rng).flips; }, 200000, 13);
  CHECK(std::abs(m - predicted) < 4 * se + 0.01 * predicted);
}

}  // TEST_SUITE
