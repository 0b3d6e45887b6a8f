#include <doctest.h>

#include <cmath>

#include "alfa/error.hpp"
#include "alfa/restart.hpp"
#include "oracles.hpp"

using namespace alfa;

namespace {

// Increasing hazard: restarts never help.
class Weibull2 final : public DistModel {
 public:
  std::string kind() const override { return "weibull2"; }
  double cdf(double x) const override { return x <= 0 ? 0.0 : -std::expm1(-x * x); }
  double pdf(double x) const override { return x <= 0 ? 0.0 : 2 * x * std::exp(-x * x); }
  double survival(double x) const override { return x <= 0 ? 1.0 : std::exp(-x * x); }
  double quantile(double p) const override { return std::sqrt(-std::log1p(-p)); }
  double mean() const override { return std::sqrt(M_PI) / 2; }
};

// Pareto with shape 0.8: infinite mean.
class HeavyPareto final : public DistModel {
 public:
  std::string kind() const override { return "pareto"; }
  double cdf(double x) const override { return x <= 1 ? 0.0 : 1 - std::pow(x, -0.8); }
  double pdf(double x) const override { return x <= 1 ? 0.0 : 0.8 * std::pow(x, -1.8); }
  double quantile(double p) const override { return std::pow(1 - p, -1 / 0.8); }
  double mean() const override { return std::numeric_limits<double>::infinity(); }
  double support_lower() const override { return 1.0; }
};

double std_norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Integral of x f(x) over [gamma, t] for a shifted lognormal.
double ref_partial(const Lognormal3& d, double t) {
  if (t <= d.gamma) return 0.0;
  const double z = (std::log(t - d.gamma) - d.mu) / d.sigma;
  return d.gamma * std_norm_cdf(z) + std::exp(d.mu + 0.5 * d.sigma * d.sigma) * std_norm_cdf(z - d.sigma);
}

// Mills ratio S(x) / phi(x) by its continued fraction; fine for x >= 4.
double mills(double x) {
  double r = x;
  for (int k = 200; k >= 1; --k) r = x + k / r;
  return 1.0 / r;
}

// E[X - t | X > t] = int_z^inf sigma e^{mu + sigma y} S(y) / S(z) dy after
// the substitution u = gamma + e^{mu + sigma y}. Simpson on a fine grid.
double ref_mrl(const Lognormal3& d, double z) {
  auto ratio = [&](double y) { return std::exp(-0.5 * (y * y - z * z)) * mills(y) / mills(z); };
  const double hi = z + 60.0 / z + 20.0 * d.sigma;
  const int n = 200000;
  const double h = (hi - z) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = z + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * d.sigma * std::exp(d.mu + d.sigma * y) * ratio(y);
  }
  return sum * h / 3.0;
}

}  // namespace

TEST_SUITE("restart") {

TEST_CASE("exponential reference is the boundary case") {
  const ExponentialModel e(1.0);
  for (double p : {0.1, 0.5, 0.9}) {
    // Q(p) = -ln(1-p), integral of Q over [0, p] = (1-p) ln(1-p) + p
    const double q = -std::log1p(-p);
    CHECK(e.quantile(p) == doctest::Approx(q).epsilon(1e-14));
    CHECK(e.partial_expectation(q) == doctest::Approx((1 - p) * std::log1p(-p) + p).epsilon(1e-10));
    CHECK(std::abs(restart_functional(e, p) - p) < 1e-8);
  }
  for (double t : {0.1, 1.0, 10.0}) CHECK(std::abs(expected_runtime_with_restart(e, t) - 1.0) < 1e-8);
  const auto a = restarts_useful(e);
  CHECK_FALSE(a.useful);
  CHECK_FALSE(a.witness_p);
  CHECK(a.curve.size() == kRestartGridPoints);
  CHECK_THROWS_AS(optimal_restart_cutoff(e), NumericError);
  for (double t : {0.01, 1.0, 30.0}) CHECK(e.pdf(t) / e.survival(t) == doctest::Approx(1.0));
  const ExponentialModel slow(0.25);
  CHECK(expected_runtime_with_restart(slow, 3.0) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("lognormal integrals match closed forms") {
  for (const Lognormal3 p : {Lognormal3{0, 1, 0}, Lognormal3{2, 0.5, 10}, Lognormal3{-1, 2, 0.3}}) {
    const LognormalModel d(p);
    for (double u : {0.01, 0.3, 0.5, 0.99, 1 - 1e-9}) {
      const double t = p.quantile(u);
      CHECK(d.partial_expectation(t) == doctest::Approx(ref_partial(p, t)).epsilon(1e-9));
      CHECK(d.partial_expectation(t) + *d.tail_expectation(t) == doctest::Approx(d.mean()).epsilon(1e-9));
      // E[min(X, t)] = t S(t) + int_0^t x f(x) dx
      CHECK(d.integrated_survival(t) == doctest::Approx(t * p.survival(t) + ref_partial(p, t)).epsilon(1e-9));
    }
    CHECK(mean_by_quadrature(d) == doctest::Approx(d.mean()).epsilon(1e-6));
  }
}

TEST_CASE("restart functional limits for the standard lognormal") {
  const LognormalModel d({0, 1, 0});
  const double r = restart_functional(d, 1 - 1e-6);
  CHECK(r > 0.99);
  CHECK(r < 1.0);
  CHECK(std::abs(restart_functional(d, 1 - 1e-8) - 1.0) < 1e-3);
  // approach to 1 is monotone over the last decade of p
  double prev = restart_functional(d, 0.9);
  for (double p : {0.93, 0.96, 0.99, 0.999, 0.9999}) {
    const double cur = restart_functional(d, p);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("restart identity") {
  for (const Lognormal3 p : {Lognormal3{0, 1, 0}, Lognormal3{5, 0.75, 50}}) {
    const LognormalModel d(p);
    for (double u : {0.05, 0.25, 0.5, 0.75, 0.95}) {
      const double t = d.quantile(u);
      const double lhs = restart_functional(d, u) * d.mean();
      CHECK(lhs == doctest::Approx(d.cdf(t) * expected_runtime_with_restart(d, t)).epsilon(1e-8));
      CHECK(lhs == doctest::Approx(d.integrated_survival(t)).epsilon(1e-8));
    }
  }
}

TEST_CASE("standard lognormal restarts are useful") {
  const LognormalModel d({0, 1, 0});
  bool found = false;
  for (double t = 0.1; t < 100; t *= 1.3) found = found || expected_runtime_with_restart(d, t) < d.mean();
  CHECK(found);
  const auto a = restarts_useful(d);
  CHECK(a.useful);
  CHECK_FALSE(a.infinite_mean);
  REQUIRE(a.witness_p);
  CHECK(restart_functional(d, *a.witness_p) < *a.witness_p);
  CHECK(*a.expected_restarted < a.expected_plain);
  CHECK(*a.witness_cutoff == doctest::Approx(d.quantile(*a.witness_p)));
}

TEST_CASE("optimal cutoff") {
  const LognormalModel d({1, 1.2, 2});
  const auto best = optimal_restart_cutoff(d);
  CHECK(best.expected_runtime < d.mean());
  for (double p : restart_p_grid(65))
    CHECK(best.expected_runtime <= expected_runtime_with_restart(d, d.quantile(p)) * (1 + 1e-9));
  const double f = d.cdf(best.cutoff);
  CHECK(restart_functional(d, f) < f);
  CHECK(best.expected_runtime == doctest::Approx(expected_runtime_with_restart(d, best.cutoff)));
}

TEST_CASE("increasing hazard is not helped by restarts") {
  const Weibull2 w;
  CHECK(mean_by_quadrature(w) == doctest::Approx(w.mean()).epsilon(1e-8));
  const auto a = restarts_useful(w);
  CHECK_FALSE(a.useful);
  CHECK(a.min_gap > -1e-10);
}

TEST_CASE("mean residual life far in the tail") {
  const Lognormal3 p{3.2, 0.134, 6.68};
  const LognormalModel d(p);
  for (double z : {5.0, 20.0, 45.0, 60.0}) {
    const double t = p.gamma + std::exp(p.mu + p.sigma * z);
    CHECK(*d.mean_residual_life(t) == doctest::Approx(ref_mrl(p, z)).epsilon(1e-7));
  }
  // agrees with the generic route where S(t) is still representable
  const double t = p.quantile(0.9);
  CHECK(*d.mean_residual_life(t) == doctest::Approx(*d.tail_expectation(t) / d.survival(t) - t).epsilon(1e-10));
  CHECK(*d.mean_residual_life(p.gamma - 1) == doctest::Approx(d.mean() - (p.gamma - 1)));
  CHECK(*ExponentialModel(4.0).mean_residual_life(3.0) == 0.25);
  const std::vector<double> xs{1, 2, 3, 10};
  const EmpiricalModel e(xs);
  CHECK(*e.mean_residual_life(2.5) == doctest::Approx(4.0));
  CHECK_FALSE(e.mean_residual_life(10.0));
}

TEST_CASE("narrow lognormal needs the tail scan") {
  const LognormalModel d({3.2, 0.134, 6.68});
  const auto a = restarts_useful(d);
  CHECK(a.min_gap > kUsefulnessThreshold);
  CHECK(a.useful);
  CHECK(a.tail_witness);
  REQUIRE(a.witness_cutoff);
  REQUIRE(a.log_gain);
  const double t = *a.witness_cutoff;
  CHECK(*d.mean_residual_life(t) > d.mean());
  CHECK(*d.mean_residual_life(t / 2) <= d.mean() * (1 - kUsefulnessThreshold));
  CHECK(*a.witness_log_survival == doctest::Approx(d.log_survival(t)));
  CHECK(*a.log_gain == doctest::Approx(d.log_survival(t) + std::log(*d.mean_residual_life(t) - d.mean())));
  const auto best = optimal_restart_cutoff(d);
  REQUIRE(best.log_gain);
  CHECK(*best.log_gain >= *a.log_gain);
  CHECK(best.expected_runtime <= d.mean());
  // the gain is real but far below double resolution
  CHECK(*best.log_gain < -700);
}

TEST_CASE("restart gain on a representable scale") {
  const LognormalModel d({0, 1, 0});
  CHECK_FALSE(log_restart_gain(d, 0.5));  // restarting this early hurts
  for (double t : {1.0, 3.0, 10.0}) {
    const double direct = d.mean() - expected_runtime_with_restart(d, t);
    REQUIRE(log_restart_gain(d, t));
    CHECK(std::exp(*log_restart_gain(d, t)) == doctest::Approx(direct).epsilon(1e-8));
  }
  CHECK_FALSE(log_restart_gain(ExponentialModel(1.0), 2.0));
  CHECK_FALSE(log_restart_gain(Weibull2{}, 1.0));
}

TEST_CASE("infinite mean") {
  const HeavyPareto d;
  CHECK(restart_functional(d, 0.5) == 0.0);
  const auto a = restarts_useful(d);
  CHECK(a.useful);
  CHECK(a.infinite_mean);
  REQUIRE(a.expected_restarted);
  CHECK(std::isfinite(*a.expected_restarted));
}

TEST_CASE("quantile derivative is the reciprocal density") {
  for (const Lognormal3 p : {Lognormal3{0, 1, 0}, Lognormal3{3, 0.4, 7}}) {
    const LognormalModel d(p);
    for (double u : {0.01, 0.2, 0.5, 0.8, 0.99}) {
      const double h = 1e-6 * std::min(u, 1 - u);
      const double fd = (d.quantile(u + h) - d.quantile(u - h)) / (2 * h);
      CHECK(fd == doctest::Approx(1 / d.pdf(d.quantile(u))).epsilon(1e-5));
    }
  }
}

TEST_CASE("empirical model") {
  const std::vector<double> v{4, 1, 3, 2};
  const EmpiricalModel e(v);
  CHECK(e.mean() == doctest::Approx(2.5));
  CHECK(e.cdf(2.0) == doctest::Approx(0.5));
  CHECK(e.quantile(0.5) == 2.0);
  CHECK(e.quantile(0.51) == 3.0);
  CHECK(e.partial_expectation(2.5) == doctest::Approx(0.75));
  // E[min(X, 2.5)] = (1 + 2 + 2.5 + 2.5) / 4
  CHECK(e.integrated_survival(2.5) == doctest::Approx(2.0));
  CHECK(expected_runtime_with_restart(e, 2.5) == doctest::Approx(4.0));
  CHECK(restart_functional(e, 0.5) * e.mean() == doctest::Approx(e.integrated_survival(2.0)));
  CHECK_THROWS_AS(EmpiricalModel(std::vector<double>{}), NumericError);
}

TEST_CASE("zero success probability") {
  const LognormalModel d({0, 1, 5});
  CHECK_THROWS_AS(expected_runtime_with_restart(d, 4.0), NumericError);
}

TEST_CASE("simulation agrees with the restart formula") {
  const LognormalModel d({2, 1.5, 0});
  const auto best = optimal_restart_cutoff(d);
  Rng rng(3);
  const auto sim = simulate_restarts(d, best.cutoff, 100000, rng);
  CHECK(std::abs(sim.mean - best.expected_runtime) < 3.5 * sim.standard_error);
  Rng rng2(4);
  const auto plain = simulate_plain(d, 100000, rng2);
  CHECK(std::abs(plain.mean - d.mean()) < 4 * plain.standard_error);
  CHECK(sim.mean < plain.mean);
}

}  // TEST_SUITE
