#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alfa/rng.hpp"

namespace alfa {

double normal_cdf(double z);
// Upper tail 1 - Phi(z), accurate far into the tail.
double normal_sf(double z);
double log_normal_sf(double z);
double normal_quantile(double p);
// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi_square_sf(double statistic, double df);

// Hardness values plus, optionally, the sample variance of the runs behind
// each value (each value being a mean of runs_per_value runs).
struct Sample {
  std::vector<double> values;
  std::vector<double> run_variance;  // empty or same length as values
  std::size_t runs_per_value = 100;

  void validate() const;
  bool has_variance() const { return !run_variance.empty(); }
};

// Right-continuous empirical cdf.
class Ecdf {
 public:
  explicit Ecdf(std::span<const double> values);
  double operator()(double t) const;
  double survival(double t) const { return 1.0 - (*this)(t); }
  const std::vector<double>& sorted() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }
  // sup_x |ecdf(x) - cdf(x)| for a continuous cdf.
  template <class Cdf>
  double sup_distance(Cdf&& cdf) const {
    double d = 0.0;
    const double n = static_cast<double>(sorted_.size());
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
      const double f = cdf(sorted_[i]);
      d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
    }
    return d;
  }

 private:
  std::vector<double> sorted_;
};

// log(X - gamma) ~ Normal(mu, sigma^2).
struct Lognormal3 {
  double mu = 0.0;
  double sigma = 1.0;
  double gamma = 0.0;

  void validate() const;
  double pdf(double x) const;
  double log_pdf(double x) const;
  double cdf(double x) const;
  double survival(double x) const;
  double log_survival(double x) const;
  double quantile(double p) const;
  double mean() const;
  double sample(Rng& rng) const;
};

double survival(const Lognormal3& d, double x);
// pdf/survival evaluated in log space.
double hazard_rate(const Lognormal3& d, double t);
// S(x + y) / S(x).
double long_tail_ratio(const Lognormal3& d, double x, double y);

double log_likelihood(const Lognormal3& d, std::span<const double> values);

struct LognormalFit {
  Lognormal3 params;
  double loglik = 0.0;
};

// Maximum-likelihood fit with gamma restricted to [0, (1-1e-6) min(x)].
// The profile likelihood over gamma is scanned on a 256-point grid and the
// best cell refined by golden-section search; mu and sigma are then the
// mean and population standard deviation of log(x - gamma).
LognormalFit fit_lognormal3_mle(std::span<const double> values);
// Two-parameter fit with a fixed location.
LognormalFit fit_lognormal_fixed_gamma(std::span<const double> values, double gamma);

struct GofBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t observed = 0;
  double expected = 0.0;
};

struct GofReport {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  std::size_t initial_bins = 0;
  std::vector<GofBin> bins;
};

inline constexpr int kFittedParameters = 3;

// Equiprobable-bin count ceil(2 n^0.4).
std::size_t equiprobable_bin_count(std::size_t n);

// Pearson statistic for already-binned data. Throws NumericError when fewer
// than 5 bins are given.
GofReport chi_square_from_bins(std::vector<GofBin> bins, int fitted_parameters = kFittedParameters);

// ceil(2 n^0.4) equiprobable bins under `params`, adjacent bins merged until
// each expects at least 5 observations, df = bins - 1 - 3.
GofReport chi_square_gof(std::span<const double> values, const Lognormal3& params);

enum class Verdict { accept, reject };
std::string to_string(Verdict v);

struct BootstrapReport {
  double observed_statistic = 0.0;
  std::vector<double> resampled_statistics;  // sorted ascending
  Verdict verdict = Verdict::accept;
  double alpha = 0.05;
  double p_boot = 1.0;
  std::size_t floored = 0;
  double floored_fraction = 0.0;
  bool floored_warning = false;  // more than 0.1% of resampled values floored
  bool pooled_variance = false;  // no per-value variance was available
  LognormalFit fit;
};

// Reject iff observed > the floor((1-alpha) N)-th smallest resampled statistic.
Verdict bootstrap_decision(double observed, std::span<const double> sorted_resampled,
                           double alpha);

struct BootstrapOptions {
  std::size_t rounds = 200;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// Parametric bootstrap of the chi-square statistic with measurement noise:
// each round draws n values from the fitted lognormal, adds independent
// normal noise whose variance is run_variance / runs_per_value (variances are
// matched to resampled values by rank), refits and recomputes the statistic.
BootstrapReport bootstrap_test(const Sample& s, const BootstrapOptions& options);

// Per-value noise variances of a sample, ordered to match the ascending order
// of its values. Falls back to the pooled variance when none are present.
std::vector<double> noise_variances_by_rank(const Sample& s, bool* pooled = nullptr);

}  // namespace alfa
