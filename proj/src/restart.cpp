#include "alfa/restart.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "alfa/error.hpp"

namespace alfa {

namespace {

constexpr double kQuadTolerance = 1e-11;
constexpr unsigned kQuadDepth = 15;

// Integration breakpoints on [lo, t] at quantiles of the model, so every
// piece carries a comparable share of probability mass or tail.
std::vector<double> breakpoints(const DistModel& d, double lo, double t) {
  const double ft = d.cdf(t);
  std::vector<double> us;
  for (int j = 1; j < 16; ++j) us.push_back(ft * j / 16.0);
  for (int m = 1; m <= 16; ++m) {
    const double u = 1.0 - std::pow(10.0, -m);
    if (u < ft) us.push_back(u);
  }
  std::vector<double> xs{lo};
  for (double u : us) {
    if (!(u > 0.0 && u < 1.0)) continue;
    const double x = d.quantile(u);
    if (x > lo && x < t) xs.push_back(x);
  }
  xs.push_back(t);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

// Single Gauss-Kronrod panel. Boost reports the error estimate on the
// reference interval [-1, 1], so it is rescaled here.
template <class F>
double gk31(F& f, double a, double b, double& err) {
  using boost::math::quadrature::gauss_kronrod;
  const double v = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err);
  err *= 0.5 * (b - a);
  return v;
}

// Bisection until the Kronrod error meets the relative tolerance or an
// absolute floor tied to the size of the whole integral.
template <class F>
double adaptive(F& f, double a, double b, double v, double err, double abs_tol, unsigned depth) {
  if (err <= std::max(kQuadTolerance * std::abs(v), abs_tol) || depth == 0) return v;
  const double mid = 0.5 * (a + b);
  double el = 0.0, er = 0.0;
  const double vl = gk31(f, a, mid, el);
  const double vr = gk31(f, mid, b, er);
  return adaptive(f, a, mid, vl, el, 0.5 * abs_tol, depth - 1) +
         adaptive(f, mid, b, vr, er, 0.5 * abs_tol, depth - 1);
}

template <class F>
double integrate_pieces(const std::vector<double>& xs, F&& f) {
  const std::size_t pieces = xs.size() - 1;
  std::vector<double> vs(pieces), es(pieces);
  double scale = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    vs[i] = gk31(f, xs[i], xs[i + 1], es[i]);
    scale += std::abs(vs[i]);
  }
  const double abs_tol = 1e-14 * scale / static_cast<double>(pieces);
  double total = 0.0;
  for (std::size_t i = 0; i < pieces; ++i)
    total += adaptive(f, xs[i], xs[i + 1], vs[i], es[i], abs_tol, kQuadDepth);
  if (!std::isfinite(total)) throw NumericError("quadrature did not converge");
  return total;
}

}  // namespace

double DistModel::partial_expectation(double t) const {
  const double lo = support_lower();
  if (!(t > lo)) return 0.0;
  return integrate_pieces(breakpoints(*this, lo, t), [this](double x) { return x * pdf(x); });
}

double DistModel::integrated_survival(double t) const {
  const double lo = support_lower();
  if (!(t > lo)) return std::max(t, 0.0);
  return lo + integrate_pieces(breakpoints(*this, lo, t), [this](double u) { return survival(u); });
}

std::optional<double> DistModel::tail_expectation(double) const { return std::nullopt; }

std::optional<double> DistModel::mean_residual_life(double t) const {
  const auto tail = tail_expectation(t);
  const double s = survival(t);
  if (!tail || !(s > 0.0)) return std::nullopt;
  return *tail / s - t;
}

LognormalModel::LognormalModel(Lognormal3 params) : params_(params) {
  params_.validate();
  mean_ = params_.mean();
}

std::optional<double> LognormalModel::tail_expectation(double t) const {
  if (!(t > params_.gamma)) return mean_;
  const double z = (std::log(t - params_.gamma) - params_.mu) / params_.sigma;
  return params_.gamma * normal_sf(z) +
         std::exp(params_.mu + 0.5 * params_.sigma * params_.sigma) * normal_sf(z - params_.sigma);
}

// (t - gamma) (E[e^{sigma Z} | Z > z] / e^{sigma z} - 1), with the ratio of
// normal tails taken in log space so it survives where S(t) underflows.
std::optional<double> LognormalModel::mean_residual_life(double t) const {
  const auto& q = params_;
  if (!(t > q.gamma)) return mean_ - t;
  const double z = (std::log(t - q.gamma) - q.mu) / q.sigma;
  const double e = 0.5 * q.sigma * q.sigma - q.sigma * z + log_normal_sf(z - q.sigma) - log_normal_sf(z);
  return (t - q.gamma) * std::expm1(e);
}

ExponentialModel::ExponentialModel(double rate) : rate_(rate) {
  if (!(rate > 0.0)) throw NumericError("exponential rate must be positive");
}

double ExponentialModel::cdf(double x) const { return x > 0.0 ? -std::expm1(-rate_ * x) : 0.0; }

double ExponentialModel::pdf(double x) const { return x >= 0.0 ? rate_ * std::exp(-rate_ * x) : 0.0; }

double ExponentialModel::survival(double x) const { return x > 0.0 ? std::exp(-rate_ * x) : 1.0; }

double ExponentialModel::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw NumericError("quantile needs p in (0, 1)");
  return -std::log1p(-p) / rate_;
}

std::optional<double> ExponentialModel::tail_expectation(double t) const {
  const double s = std::max(t, 0.0);
  return (s + 1.0 / rate_) * std::exp(-rate_ * s);
}

EmpiricalModel::EmpiricalModel(std::span<const double> values)
    : sorted_(values.begin(), values.end()) {
  if (sorted_.empty()) throw NumericError("empirical model needs data");
  for (double v : sorted_)
    if (!(v > 0.0)) throw NumericError("runtimes must be positive");
  std::sort(sorted_.begin(), sorted_.end());
  prefix_.resize(sorted_.size() + 1, 0.0);
  std::partial_sum(sorted_.begin(), sorted_.end(), prefix_.begin() + 1);
  mean_ = prefix_.back() / static_cast<double>(sorted_.size());
}

double EmpiricalModel::cdf(double x) const {
  const auto k = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
  return static_cast<double>(k) / static_cast<double>(sorted_.size());
}

double EmpiricalModel::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw NumericError("quantile needs p in (0, 1)");
  const auto n = static_cast<double>(sorted_.size());
  auto k = static_cast<std::size_t>(std::ceil(p * n - 1e-12));
  k = std::clamp<std::size_t>(k, 1, sorted_.size());
  return sorted_[k - 1];
}

double EmpiricalModel::partial_expectation(double t) const {
  const auto k = std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin();
  return prefix_[static_cast<std::size_t>(k)] / static_cast<double>(sorted_.size());
}

double EmpiricalModel::integrated_survival(double t) const {
  const auto k = static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin());
  const auto above = static_cast<double>(sorted_.size() - k);
  return (prefix_[k] + std::max(t, 0.0) * above) / static_cast<double>(sorted_.size());
}

std::optional<double> EmpiricalModel::mean_residual_life(double t) const {
  const auto k = static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin());
  if (k == sorted_.size()) return std::nullopt;
  const auto above = static_cast<double>(sorted_.size() - k);
  return (prefix_.back() - prefix_[k]) / above - t;
}

double restart_functional(const DistModel& d, double p) {
  if (!(p > 0.0 && p < 1.0)) throw NumericError("restart functional needs p in (0, 1)");
  const double mean = d.mean();
  if (!std::isfinite(mean)) return 0.0;
  const double t = d.quantile(p);
  return ((1.0 - p) * t + d.partial_expectation(t)) / mean;
}

double expected_runtime_with_restart(const DistModel& d, double t) {
  const double ft = d.cdf(t);
  if (!(ft > 0.0)) throw NumericError("restart cutoff has zero success probability");
  return d.integrated_survival(t) / ft;
}

double mean_by_quadrature(const DistModel& d) {
  const double t = d.quantile(1.0 - 1e-12);
  return d.partial_expectation(t) + d.tail_expectation(t).value_or(0.0);
}

std::vector<double> restart_p_grid(std::size_t points) {
  constexpr double kLogitSpan = 14.0;
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double z = -kLogitSpan + 2.0 * kLogitSpan * static_cast<double>(i) / static_cast<double>(points - 1);
    out[i] = 1.0 / (1.0 + std::exp(-z));
  }
  return out;
}

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }
double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Golden-section minimization on [lo, hi]; returns (argmin, min).
template <class F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = f(d);
    }
  }
  return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace

std::optional<double> log_restart_gain(const DistModel& d, double t) {
  const double mean = d.mean();
  if (!std::isfinite(mean)) return std::nullopt;
  const auto mrl = d.mean_residual_life(t);
  const double f = d.cdf(t);
  if (!mrl || !(*mrl > mean) || !(f > 0.0)) return std::nullopt;
  return d.log_survival(t) + std::log(*mrl - mean) - std::log(f);
}

namespace {

// Doubling cutoffs beyond the last grid quantile.
std::vector<double> tail_cutoffs(const DistModel& d) {
  std::vector<double> out;
  double t = d.quantile(restart_p_grid().back());
  for (std::size_t i = 0; i < kTailScanSteps; ++i) {
    t *= 2.0;
    if (!std::isfinite(t)) break;
    out.push_back(t);
  }
  return out;
}

}  // namespace

RestartAnalysis restarts_useful(const DistModel& d) {
  RestartAnalysis out;
  out.expected_plain = d.mean();
  const auto grid = restart_p_grid();

  if (!std::isfinite(out.expected_plain)) {
    // R(p, X) = 0 < p for every p.
    out.infinite_mean = true;
    out.useful = true;
    out.witness_p = 0.5;
    out.witness_cutoff = d.quantile(0.5);
    out.expected_restarted = expected_runtime_with_restart(d, *out.witness_cutoff);
    out.min_gap = -0.5;
    for (double p : grid) out.curve.emplace_back(p, 0.0);
    return out;
  }

  std::size_t best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = restart_functional(d, grid[i]);
    out.curve.emplace_back(grid[i], r);
    if (r - grid[i] < best_gap) {
      best_gap = r - grid[i];
      best = i;
    }
  }
  double best_p = grid[best];
  const double zlo = logit(grid[best == 0 ? 0 : best - 1]);
  const double zhi = logit(grid[std::min(best + 1, grid.size() - 1)]);
  if (zhi > zlo) {
    auto gap = [&](double z) {
      const double p = logistic(z);
      return restart_functional(d, p) - p;
    };
    const auto [z, g] = golden_min(gap, zlo, zhi, 1e-9);
    if (g < best_gap) {
      best_gap = g;
      best_p = logistic(z);
    }
  }
  out.min_gap = best_gap;
  out.useful = best_gap < kUsefulnessThreshold;
  if (out.useful) {
    out.witness_p = best_p;
    out.witness_cutoff = d.quantile(best_p);
    out.witness_log_survival = std::log1p(-best_p);
    out.expected_restarted = expected_runtime_with_restart(d, *out.witness_cutoff);
    const double diff = out.expected_plain - *out.expected_restarted;
    out.log_gain = diff > 0.0 ? std::optional<double>(std::log(diff)) : log_restart_gain(d, *out.witness_cutoff);
    return out;
  }

  for (double t : tail_cutoffs(d)) {
    const auto mrl = d.mean_residual_life(t);
    if (!mrl || !std::isfinite(*mrl)) break;
    if (1.0 - *mrl / out.expected_plain >= kUsefulnessThreshold) continue;
    out.useful = true;
    out.tail_witness = true;
    out.witness_cutoff = t;
    const double f = d.cdf(t);
    if (f < 1.0) out.witness_p = f;
    out.witness_log_survival = d.log_survival(t);
    out.log_gain = log_restart_gain(d, t);
    if (out.log_gain) out.expected_restarted = out.expected_plain - std::exp(*out.log_gain);
    break;
  }
  return out;
}

namespace {

OptimalCutoff optimal_tail_cutoff(const DistModel& d) {
  const auto ts = tail_cutoffs(d);
  auto negative_gain = [&](double lt) {
    const auto g = log_restart_gain(d, std::exp(lt));
    return g ? -*g : std::numeric_limits<double>::infinity();
  };
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double v = negative_gain(std::log(ts[i]));
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (!std::isfinite(best_value)) throw NumericError("no restart cutoff with a positive gain");
  double best_log_t = std::log(ts[best]);
  const double lo = std::log(ts[best == 0 ? 0 : best - 1]);
  const double hi = std::log(ts[std::min(best + 1, ts.size() - 1)]);
  if (hi > lo) {
    const auto [lt, v] = golden_min(negative_gain, lo, hi, 1e-8);
    if (v < best_value) {
      best_value = v;
      best_log_t = lt;
    }
  }
  return {std::exp(best_log_t), d.mean() - std::exp(-best_value), -best_value};
}

}  // namespace

OptimalCutoff optimal_restart_cutoff(const DistModel& d) {
  const RestartAnalysis analysis = restarts_useful(d);
  if (!analysis.useful) throw NumericError("restarts are not useful for this distribution");
  if (analysis.tail_witness) return optimal_tail_cutoff(d);
  const auto grid = restart_p_grid();
  std::vector<double> log_t(grid.size());
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = d.quantile(grid[i]);
    log_t[i] = std::log(t);
    const double v = expected_runtime_with_restart(d, t);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  double best_log_t = log_t[best];
  const double lo = log_t[best == 0 ? 0 : best - 1];
  const double hi = log_t[std::min(best + 1, grid.size() - 1)];
  if (hi > lo) {
    auto objective = [&](double lt) { return expected_runtime_with_restart(d, std::exp(lt)); };
    const auto [lt, v] = golden_min(objective, lo, hi, 1e-8);
    if (v < best_value) {
      best_value = v;
      best_log_t = lt;
    }
  }
  const double diff = d.mean() - best_value;
  std::optional<double> log_gain;
  if (diff > 0.0) log_gain = std::log(diff);
  return {std::exp(best_log_t), best_value, log_gain};
}

namespace {

RestartSimulation summarize(double sum, double sum_sq, std::size_t n) {
  const auto dn = static_cast<double>(n);
  const double mean = sum / dn;
  const double var = n > 1 ? std::max(0.0, (sum_sq - dn * mean * mean) / (dn - 1.0)) : 0.0;
  return {mean, std::sqrt(var / dn)};
}

}  // namespace

RestartSimulation simulate_restarts(const DistModel& d, double cutoff, std::size_t draws, Rng& rng) {
  if (draws == 0) throw NumericError("simulation needs at least one draw");
  if (!(d.cdf(cutoff) > 0.0)) throw NumericError("restart cutoff has zero success probability");
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    double total = 0.0;
    for (;;) {
      const double x = d.sample(rng);
      if (x <= cutoff) {
        total += x;
        break;
      }
      total += cutoff;
    }
    sum += total;
    sum_sq += total * total;
  }
  return summarize(sum, sum_sq, draws);
}

RestartSimulation simulate_plain(const DistModel& d, std::size_t draws, Rng& rng) {
  if (draws == 0) throw NumericError("simulation needs at least one draw");
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double x = d.sample(rng);
    sum += x;
    sum_sq += x * x;
  }
  return summarize(sum, sum_sq, draws);
}

}  // namespace alfa
