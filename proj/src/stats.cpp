#include "alfa/stats.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

#include "alfa/error.hpp"

namespace alfa {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double log_normal_sf(double z) {
  if (z < 30.0) return std::log(normal_sf(z));
  // Asymptotic Mills-ratio expansion; erfc underflows out here.
  const double z2 = z * z;
  return -0.5 * z2 - kLogSqrt2Pi - std::log(z) +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw NumericError("normal quantile needs p in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double chi_square_sf(double statistic, double df) {
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

void Sample::validate() const {
  if (values.empty()) throw NumericError("empty sample");
  for (double v : values)
    if (!(v > 0.0) || !std::isfinite(v)) throw NumericError("sample values must be positive and finite");
  if (!run_variance.empty() && run_variance.size() != values.size())
    throw NumericError("run variance column must match the number of values");
  for (double v : run_variance)
    if (!(v >= 0.0)) throw NumericError("run variances must be non-negative");
  if (runs_per_value == 0) throw NumericError("runs per value must be positive");
}

Ecdf::Ecdf(std::span<const double> values) : sorted_(values.begin(), values.end()) {
  if (sorted_.empty()) throw NumericError("ecdf of an empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double t) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

void Lognormal3::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw NumericError("lognormal sigma must be positive");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw NumericError("lognormal gamma must be non-negative");
  if (!std::isfinite(mu)) throw NumericError("lognormal mu must be finite");
}

double Lognormal3::log_pdf(double x) const {
  if (!(x > gamma)) return -std::numeric_limits<double>::infinity();
  const double lx = std::log(x - gamma);
  const double z = (lx - mu) / sigma;
  return -lx - std::log(sigma) - kLogSqrt2Pi - 0.5 * z * z;
}

double Lognormal3::pdf(double x) const {
  if (!(x > gamma)) return 0.0;
  return std::exp(log_pdf(x));
}

double Lognormal3::cdf(double x) const {
  if (!(x > gamma)) return 0.0;
  return normal_cdf((std::log(x - gamma) - mu) / sigma);
}

double Lognormal3::survival(double x) const {
  if (!(x > gamma)) return 1.0;
  return normal_sf((std::log(x - gamma) - mu) / sigma);
}

double Lognormal3::log_survival(double x) const {
  if (!(x > gamma)) return 0.0;
  return log_normal_sf((std::log(x - gamma) - mu) / sigma);
}

double Lognormal3::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw NumericError("quantile needs p in (0, 1)");
  return gamma + std::exp(mu + sigma * normal_quantile(p));
}

double Lognormal3::mean() const { return gamma + std::exp(mu + 0.5 * sigma * sigma); }

double Lognormal3::sample(Rng& rng) const { return gamma + std::exp(mu + sigma * rng.normal()); }

double survival(const Lognormal3& d, double x) { return d.survival(x); }

double hazard_rate(const Lognormal3& d, double t) {
  if (!(t > d.gamma)) return 0.0;
  const double ls = d.log_survival(t);
  if (!std::isfinite(ls)) throw NumericError("hazard rate undefined where survival is 0");
  return std::exp(d.log_pdf(t) - ls);
}

double long_tail_ratio(const Lognormal3& d, double x, double y) {
  const double ls = d.log_survival(x);
  if (!std::isfinite(ls)) throw NumericError("long-tail ratio undefined where survival is 0");
  return std::exp(d.log_survival(x + y) - ls);
}

double log_likelihood(const Lognormal3& d, std::span<const double> values) {
  double sum = 0.0;
  for (double x : values) sum += d.log_pdf(x);
  return sum;
}

namespace {

struct Profile {
  double loglik;
  double mu;
  double sigma;
};

Profile profile_at(std::span<const double> values, double gamma) {
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double x : values) sum += std::log(x - gamma);
  const double mu = sum / n;
  // Two-pass variance for accuracy.
  double ss = 0.0;
  for (double x : values) {
    const double d = std::log(x - gamma) - mu;
    ss += d * d;
  }
  const double var = ss / n;
  if (!(var > 0.0)) return {-std::numeric_limits<double>::infinity(), mu, 0.0};
  const double sigma = std::sqrt(var);
  const double ll = -sum - n * std::log(sigma) - n * kLogSqrt2Pi - 0.5 * n;
  return {ll, mu, sigma};
}

void check_fit_input(std::span<const double> values) {
  if (values.size() < 10) throw NumericError("lognormal fit needs at least 10 values");
  for (double x : values)
    if (!(x > 0.0) || !std::isfinite(x)) throw NumericError("lognormal fit needs positive finite values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) throw NumericError("degenerate sample: all values equal");
}

}  // namespace

LognormalFit fit_lognormal_fixed_gamma(std::span<const double> values, double gamma) {
  check_fit_input(values);
  if (!(gamma >= 0.0) || !(gamma < *std::min_element(values.begin(), values.end())))
    throw NumericError("fixed gamma must lie in [0, min(values))");
  const Profile p = profile_at(values, gamma);
  if (!std::isfinite(p.loglik)) throw NumericError("non-finite log-likelihood");
  return {{p.mu, p.sigma, gamma}, p.loglik};
}

LognormalFit fit_lognormal3_mle(std::span<const double> values) {
  check_fit_input(values);
  const double min_x = *std::min_element(values.begin(), values.end());
  // Search over t = log(min_x - gamma); t_max <-> gamma = 0.
  constexpr int kGrid = 256;
  constexpr double kMargin = 1e-6;
  const double t_max = std::log(min_x);
  const double t_min = std::log(kMargin * min_x);
  auto gamma_of = [&](double t) {
    const double g = min_x - std::exp(t);
    return std::clamp(g, 0.0, (1.0 - kMargin) * min_x);
  };
  auto objective = [&](double t) { return profile_at(values, gamma_of(t)).loglik; };

  std::vector<double> grid(kGrid), ll(kGrid);
  int best = 0;
  for (int i = 0; i < kGrid; ++i) {
    grid[i] = t_max + (t_min - t_max) * static_cast<double>(i) / (kGrid - 1);
    ll[i] = objective(grid[i]);
    if (ll[i] > ll[best]) best = i;
  }
  if (!std::isfinite(ll[best])) throw NumericError("non-finite log-likelihood");

  // The grid runs from high t to low t.
  double lo = grid[std::min(best + 1, kGrid - 1)];
  double hi = grid[std::max(best - 1, 0)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * (1.0 + std::abs(lo)); ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = objective(d);
    }
  }
  double t_best = grid[best];
  double ll_best = ll[best];
  for (auto [t, f] : {std::pair{c, fc}, std::pair{d, fd}}) {
    if (f > ll_best) {
      ll_best = f;
      t_best = t;
    }
  }
  const double gamma = gamma_of(t_best);
  const Profile p = profile_at(values, gamma);
  if (!std::isfinite(p.loglik)) throw NumericError("non-finite log-likelihood");
  return {{p.mu, p.sigma, gamma}, p.loglik};
}

std::size_t equiprobable_bin_count(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(2.0 * std::pow(static_cast<double>(n), 0.4)));
}

GofReport chi_square_from_bins(std::vector<GofBin> bins, int fitted_parameters) {
  if (bins.size() < 5) throw NumericError("chi-square test needs at least 5 bins after merging");
  GofReport r;
  r.initial_bins = bins.size();
  for (const auto& b : bins) {
    const double diff = static_cast<double>(b.observed) - b.expected;
    r.statistic += diff * diff / b.expected;
  }
  r.degrees_of_freedom = static_cast<int>(bins.size()) - 1 - fitted_parameters;
  if (r.degrees_of_freedom < 1) throw NumericError("chi-square test has no degrees of freedom left");
  r.p_value = chi_square_sf(r.statistic, r.degrees_of_freedom);
  r.bins = std::move(bins);
  return r;
}

GofReport chi_square_gof(std::span<const double> values, const Lognormal3& params) {
  params.validate();
  const std::size_t n = values.size();
  if (n == 0) throw NumericError("chi-square test on an empty sample");
  const std::size_t k = equiprobable_bin_count(n);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<GofBin> raw(k);
  std::size_t prev = 0;
  double lower = params.gamma;
  for (std::size_t i = 0; i < k; ++i) {
    const double upper = (i + 1 == k) ? std::numeric_limits<double>::infinity()
                                      : params.quantile(static_cast<double>(i + 1) / static_cast<double>(k));
    const std::size_t idx = (i + 1 == k) ? n
                                         : static_cast<std::size_t>(
                                               std::upper_bound(sorted.begin(), sorted.end(), upper) - sorted.begin());
    raw[i] = {lower, upper, idx - prev, static_cast<double>(n) / static_cast<double>(k)};
    prev = idx;
    lower = upper;
  }

  std::vector<GofBin> merged;
  GofBin acc{raw.front().lower, raw.front().lower, 0, 0.0};
  for (const auto& b : raw) {
    acc.upper = b.upper;
    acc.observed += b.observed;
    acc.expected += b.expected;
    if (acc.expected >= 5.0) {
      merged.push_back(acc);
      acc = {b.upper, b.upper, 0, 0.0};
    }
  }
  if (acc.expected > 0.0) {
    if (merged.empty()) {
      merged.push_back(acc);
    } else {
      merged.back().upper = acc.upper;
      merged.back().observed += acc.observed;
      merged.back().expected += acc.expected;
    }
  }
  GofReport r = chi_square_from_bins(std::move(merged));
  r.initial_bins = k;
  return r;
}

std::string to_string(Verdict v) { return v == Verdict::accept ? "accept" : "reject"; }

Verdict bootstrap_decision(double observed, std::span<const double> sorted_resampled,
                           double alpha) {
  const std::size_t n = sorted_resampled.size();
  if (n == 0) throw NumericError("bootstrap needs at least one round");
  // 1-based order statistic floor((1-alpha) N); the small slack keeps exact
  // products such as 0.95 * 200 from rounding down.
  auto idx = static_cast<std::size_t>(std::floor((1.0 - alpha) * static_cast<double>(n) + 1e-9));
  idx = std::clamp<std::size_t>(idx, 1, n);
  return sorted_resampled[idx - 1] < observed ? Verdict::reject : Verdict::accept;
}

std::vector<double> noise_variances_by_rank(const Sample& s, bool* pooled) {
  const std::size_t n = s.values.size();
  const auto runs = static_cast<double>(s.runs_per_value);
  std::vector<double> out(n);
  if (!s.has_variance()) {
    const double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : s.values) ss += (v - mean) * (v - mean);
    const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
    std::fill(out.begin(), out.end(), var / runs);
    if (pooled) *pooled = true;
    return out;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
  for (std::size_t r = 0; r < n; ++r) out[r] = s.run_variance[order[r]] / runs;
  if (pooled) *pooled = false;
  return out;
}

BootstrapReport bootstrap_test(const Sample& s, const BootstrapOptions& options) {
  s.validate();
  if (options.rounds == 0) throw NumericError("bootstrap needs at least one round");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw NumericError("alpha must lie in (0, 1)");

  BootstrapReport report;
  report.alpha = options.alpha;
  report.fit = fit_lognormal3_mle(s.values);
  report.observed_statistic = chi_square_gof(s.values, report.fit.params).statistic;

  const std::vector<double> noise_var = noise_variances_by_rank(s, &report.pooled_variance);
  std::vector<double> noise_sd(noise_var.size());
  for (std::size_t i = 0; i < noise_var.size(); ++i) noise_sd[i] = std::sqrt(noise_var[i]);

  const Lognormal3 fitted = report.fit.params;
  const double floor_value = fitted.gamma * (1.0 + 1e-9) + 1e-12;
  const std::size_t n = s.values.size();
  std::vector<double> stats(options.rounds);
  std::vector<std::size_t> floored(options.rounds, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    std::vector<double> y(n);
    for (std::size_t round; (round = next.fetch_add(1)) < options.rounds;) {
      try {
        Rng rng(derive_seed(options.seed, StreamDomain::bootstrap, round));
        for (auto& v : y) v = fitted.sample(rng);
        std::sort(y.begin(), y.end());
        for (std::size_t i = 0; i < n; ++i) {
          if (noise_sd[i] > 0.0) y[i] += noise_sd[i] * rng.normal();
          if (!(y[i] > 0.0)) {
            y[i] = floor_value;
            ++floored[round];
          }
        }
        const LognormalFit refit = fit_lognormal3_mle(y);
        stats[round] = chi_square_gof(y, refit.params).statistic;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(options.rounds);
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, options.rounds);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(stats.begin(), stats.end());
  report.resampled_statistics = stats;
  report.verdict = bootstrap_decision(report.observed_statistic, stats, options.alpha);
  const auto at_least = std::count_if(stats.begin(), stats.end(),
                                      [&](double x) { return x >= report.observed_statistic; });
  report.p_boot = static_cast<double>(at_least) / static_cast<double>(stats.size());
  report.floored = std::accumulate(floored.begin(), floored.end(), std::size_t{0});
  report.floored_fraction =
      static_cast<double>(report.floored) / static_cast<double>(options.rounds * n);
  report.floored_warning = report.floored_fraction > 1e-3;
  return report;
}

}  // namespace alfa
