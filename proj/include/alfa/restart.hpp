#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alfa/rng.hpp"
#include "alfa/stats.hpp"

namespace alfa {

// A positive runtime distribution. Continuous models only need cdf, pdf,
// quantile and mean; the integrals used by the restart analysis default to
// adaptive quadrature split at quantile breakpoints.
class DistModel {
 public:
  virtual ~DistModel() = default;

  virtual std::string kind() const = 0;
  virtual double cdf(double x) const = 0;
  virtual double pdf(double x) const = 0;
  virtual double quantile(double p) const = 0;
  // +infinity when the mean does not exist.
  virtual double mean() const = 0;
  virtual double survival(double x) const { return 1.0 - cdf(x); }
  // Infimum of the support (F(x) = 0 below it).
  virtual double support_lower() const { return 0.0; }
  virtual double sample(Rng& rng) const { return quantile(rng.uniform_open()); }

  // Integral of x f(x) over [0, t].
  virtual double partial_expectation(double t) const;
  // Integral of 1 - F(u) over [0, t], i.e. E[min(X, t)].
  virtual double integrated_survival(double t) const;
  // Integral of x f(x) over [t, inf). Only models with a closed form provide it.
  virtual std::optional<double> tail_expectation(double t) const;
  virtual double log_survival(double x) const { return std::log(survival(x)); }
  // E[X - t | X > t]. Only models that can evaluate it without cancellation
  // far into the tail provide it; the default goes through tail_expectation.
  virtual std::optional<double> mean_residual_life(double t) const;
};

class LognormalModel final : public DistModel {
 public:
  explicit LognormalModel(Lognormal3 params);
  std::string kind() const override { return "lognormal3"; }
  double cdf(double x) const override { return params_.cdf(x); }
  double pdf(double x) const override { return params_.pdf(x); }
  double quantile(double p) const override { return params_.quantile(p); }
  double mean() const override { return mean_; }
  double survival(double x) const override { return params_.survival(x); }
  double support_lower() const override { return params_.gamma; }
  double sample(Rng& rng) const override { return params_.sample(rng); }
  std::optional<double> tail_expectation(double t) const override;
  double log_survival(double x) const override { return params_.log_survival(x); }
  std::optional<double> mean_residual_life(double t) const override;
  const Lognormal3& params() const { return params_; }

 private:
  Lognormal3 params_;
  double mean_;
};

// Memoryless reference with rate lambda.
class ExponentialModel final : public DistModel {
 public:
  explicit ExponentialModel(double rate = 1.0);
  std::string kind() const override { return "exponential_reference"; }
  double cdf(double x) const override;
  double pdf(double x) const override;
  double quantile(double p) const override;
  double mean() const override { return 1.0 / rate_; }
  double survival(double x) const override;
  std::optional<double> tail_expectation(double t) const override;
  double log_survival(double x) const override { return x > 0.0 ? -rate_ * x : 0.0; }
  std::optional<double> mean_residual_life(double) const override { return 1.0 / rate_; }
  double rate() const { return rate_; }

 private:
  double rate_;
};

// Plug-in model on a sample: ecdf, left-continuous empirical quantile and
// sample mean. The integrals are exact sums over the order statistics.
class EmpiricalModel final : public DistModel {
 public:
  explicit EmpiricalModel(std::span<const double> values);
  std::string kind() const override { return "empirical"; }
  double cdf(double x) const override;
  // Not a density; returns 0. Present only to satisfy the interface.
  double pdf(double) const override { return 0.0; }
  double quantile(double p) const override;
  double mean() const override { return mean_; }
  double support_lower() const override { return 0.0; }
  double partial_expectation(double t) const override;
  double integrated_survival(double t) const override;
  std::optional<double> mean_residual_life(double t) const override;

 private:
  std::vector<double> sorted_;
  std::vector<double> prefix_;  // prefix sums of sorted_
  double mean_;
};

// R(p, X) = ((1-p) Q(p) + integral_0^p Q(u) du) / E[X], with the integral
// evaluated as integral_0^{Q(p)} x f(x) dx. Returns 0 for an infinite mean.
double restart_functional(const DistModel& d, double p);

// E[X_t] = integral_0^t (1 - F(u)) du / F(t). Throws NumericError if F(t) = 0.
double expected_runtime_with_restart(const DistModel& d, double t);

// E[X] from partial_expectation up to Q(1 - 1e-12) plus the analytic tail.
double mean_by_quadrature(const DistModel& d);

// R(p) - p = S(t) (1 - MRL(t) / E[X]) at t = Q(p). When the sign change
// happens so far out that S(t) underflows, the p scan sees only zeros; the
// tail scan then walks t directly and decides on 1 - MRL(t) / E[X]. Such a
// witness has no representable p (witness_p stays empty unless F(t) < 1)
// and its gain E[X] - E[X_t] is only available as a logarithm.
struct RestartAnalysis {
  bool useful = false;
  bool infinite_mean = false;
  bool tail_witness = false;
  std::optional<double> witness_p;
  std::optional<double> witness_cutoff;
  std::optional<double> witness_log_survival;
  double min_gap = 0.0;  // min over the p scan of R(p) - p
  double expected_plain = 0.0;
  std::optional<double> expected_restarted;
  std::optional<double> log_gain;  // ln(E[X] - E[X_t]) at the witness
  std::vector<std::pair<double, double>> curve;  // (p, R(p))
};

inline constexpr double kUsefulnessThreshold = -1e-10;
inline constexpr std::size_t kRestartGridPoints = 129;

// The logit-spaced scan grid of p values.
std::vector<double> restart_p_grid(std::size_t points = kRestartGridPoints);

inline constexpr std::size_t kTailScanSteps = 256;

// ln(E[X] - E[X_t]) = ln S(t) + ln(MRL(t) - E[X]) - ln F(t), or nullopt when
// restarting at t does not help or the model has no mean residual life.
std::optional<double> log_restart_gain(const DistModel& d, double t);

// Scans R(p) - p on the logit grid, refines around the minimum by
// golden-section search and declares restarts useful when the minimum is
// below kUsefulnessThreshold. If that fails and the model provides a mean
// residual life, t is doubled from the last grid quantile for up to
// kTailScanSteps steps and the first t with 1 - MRL(t) / E[X] below the
// threshold becomes the witness.
RestartAnalysis restarts_useful(const DistModel& d);

struct OptimalCutoff {
  double cutoff = 0.0;
  double expected_runtime = 0.0;
  std::optional<double> log_gain;  // ln(E[X] - E[X_t*])
};

// Minimizes E[X_t] over t by golden-section search on log t. For a tail
// witness, where E[X_t] rounds to E[X], it maximizes log_restart_gain
// instead. Throws NumericError if restarts are not useful for d.
OptimalCutoff optimal_restart_cutoff(const DistModel& d);

struct RestartSimulation {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Monte-Carlo estimate of E[X_t] by drawing runtimes from d and restarting at t.
RestartSimulation simulate_restarts(const DistModel& d, double cutoff, std::size_t draws, Rng& rng);

// Monte-Carlo estimate of E[X] (no restarts).
RestartSimulation simulate_plain(const DistModel& d, std::size_t draws, Rng& rng);

}  // namespace alfa
