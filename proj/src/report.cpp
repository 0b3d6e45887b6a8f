#include "alfa/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "alfa/error.hpp"

namespace alfa {

using nlohmann::json;

FitReport make_fit_report(const Sample& s, const FitOptions& options) {
  s.validate();
  FitReport r;
  r.n = s.values.size();
  r.fit = fit_lognormal3_mle(s.values);
  try {
    r.chi2 = chi_square_gof(s.values, r.fit.params);
  } catch (const NumericError& e) {
    r.chi2_error = e.what();
  }
  if (options.bootstrap && r.chi2) {
    r.bootstrap = bootstrap_test(s, options.bootstrap_options);
    r.bootstrap_rounds = options.bootstrap_options.rounds;
  }
  return r;
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? finite_or_null(*v) : json(nullptr);
}

}  // namespace

json to_json(const FitReport& r) {
  json j;
  j["n"] = r.n;
  j["mu"] = r.fit.params.mu;
  j["sigma"] = r.fit.params.sigma;
  j["gamma"] = r.fit.params.gamma;
  j["loglik"] = r.fit.loglik;
  if (r.chi2) {
    j["chi2"] = {{"stat", r.chi2->statistic},
                 {"df", r.chi2->degrees_of_freedom},
                 {"p", r.chi2->p_value},
                 {"initial_bins", r.chi2->initial_bins},
                 {"bins", r.chi2->bins.size()}};
  } else {
    j["chi2"] = nullptr;
    j["chi2_error"] = r.chi2_error;
  }
  if (r.bootstrap) {
    const auto& b = *r.bootstrap;
    j["bootstrap"] = {{"N", r.bootstrap_rounds},
                      {"alpha", b.alpha},
                      {"statistic", b.observed_statistic},
                      {"p_boot", b.p_boot},
                      {"verdict", to_string(b.verdict)},
                      {"floored_fraction", b.floored_fraction},
                      {"floored_warning", b.floored_warning},
                      {"pooled_variance", b.pooled_variance}};
  } else {
    j["bootstrap"] = nullptr;
  }
  return j;
}

FitReport fit_report_from_json(const json& j) {
  try {
    FitReport r;
    r.n = j.value("n", std::size_t{0});
    r.fit.params.mu = j.at("mu").get<double>();
    r.fit.params.sigma = j.at("sigma").get<double>();
    r.fit.params.gamma = j.at("gamma").get<double>();
    r.fit.loglik = j.value("loglik", 0.0);
    r.fit.params.validate();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed fit report: ") + e.what());
  }
}

json to_json(const RestartAnalysis& a, const std::optional<OptimalCutoff>& optimal) {
  json j;
  j["useful"] = a.useful;
  j["infinite_mean"] = a.infinite_mean;
  j["witness_p"] = optional_json(a.witness_p);
  j["witness_cutoff"] = optional_json(a.witness_cutoff);
  j["witness_log_survival"] = optional_json(a.witness_log_survival);
  j["tail_witness"] = a.tail_witness;
  j["log_gain"] = optional_json(a.log_gain);
  j["min_gap"] = a.min_gap;
  j["expected_plain"] = finite_or_null(a.expected_plain);
  j["expected_restarted"] = optional_json(a.expected_restarted);
  if (optimal) {
    j["optimal_cutoff"] = optimal->cutoff;
    j["optimal_expected_runtime"] = optimal->expected_runtime;
    j["optimal_log_gain"] = optional_json(optimal->log_gain);
  } else {
    j["optimal_cutoff"] = nullptr;
    j["optimal_expected_runtime"] = nullptr;
    j["optimal_log_gain"] = nullptr;
  }
  return j;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_hardness_csv(std::ostream& out, const Sample& s) {
  out << "instance_index,mean_flips,run_variance,runs\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    out << i << ',' << format_double(s.values[i]) << ',';
    if (s.has_variance()) out << format_double(s.run_variance[i]);
    out << ',' << s.runs_per_value << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream iss(line);
  while (std::getline(iss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("hardness table line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

}  // namespace

Sample read_hardness_csv(std::istream& in) {
  Sample s;
  std::string line;
  std::size_t lineno = 0;
  int value_col = 0, var_col = -1, runs_col = -1;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv(line);
    if (!header_seen && !cells.empty() && !cells[0].empty() &&
        (std::isalpha(static_cast<unsigned char>(cells[0][0])) || cells[0][0] == '_')) {
      header_seen = true;
      value_col = -1;
      for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
        if (cells[c] == "mean_flips" || cells[c] == "value") value_col = c;
        if (cells[c] == "run_variance") var_col = c;
        if (cells[c] == "runs") runs_col = c;
      }
      if (value_col < 0) throw ConfigError("hardness table needs a mean_flips column");
      continue;
    }
    header_seen = true;
    if (static_cast<int>(cells.size()) <= value_col)
      throw ConfigError("hardness table line " + std::to_string(lineno) + ": missing value");
    s.values.push_back(parse_number(cells[value_col], lineno));
    if (var_col >= 0 && var_col < static_cast<int>(cells.size()) && !cells[var_col].empty())
      s.run_variance.push_back(parse_number(cells[var_col], lineno));
    if (runs_col >= 0 && runs_col < static_cast<int>(cells.size()) && !cells[runs_col].empty()) {
      s.runs_per_value = static_cast<std::size_t>(parse_number(cells[runs_col], lineno));
    }
  }
  if (!s.run_variance.empty() && s.run_variance.size() != s.values.size())
    throw ConfigError("run_variance column is only partially filled");
  s.validate();
  return s;
}

Sample read_hardness_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_hardness_csv(in);
}

void write_restart_curve_csv(std::ostream& out, const RestartAnalysis& a) {
  out << "p,R,R_minus_p\n";
  for (const auto& [p, r] : a.curve)
    out << format_double(p) << ',' << format_double(r) << ',' << format_double(r - p) << '\n';
}

std::vector<PlotRow> plot_rows(const std::vector<double>& values, const Lognormal3& fitted,
                               PlotSpacing spacing, std::size_t points) {
  const Ecdf ecdf(values);
  const double lo = ecdf.sorted().front();
  const double hi = ecdf.sorted().back();
  std::vector<PlotRow> rows;
  rows.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double frac = points == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    double x = spacing == PlotSpacing::linear ? lo + (hi - lo) * frac
                                              : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * frac);
    if (i == 0) x = lo;
    if (i + 1 == points) x = hi;
    const double e = ecdf(x);
    rows.push_back({x, e, fitted.cdf(x), 1.0 - e, fitted.survival(x)});
  }
  return rows;
}

void write_plot_csv(std::ostream& out, const std::vector<PlotRow>& rows) {
  out << "x,ecdf,fitted_cdf,empirical_survival,fitted_survival\n";
  for (const auto& r : rows)
    out << format_double(r.x) << ',' << format_double(r.ecdf) << ',' << format_double(r.fitted_cdf) << ','
        << format_double(r.empirical_survival) << ',' << format_double(r.fitted_survival) << '\n';
}

std::vector<std::string> emit_plot_data(const std::vector<double>& values, const Lognormal3& fitted,
                                        const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, PlotSpacing>> files{
      {"plot_cdf_linear.csv", PlotSpacing::linear},
      {"plot_cdf_loglog.csv", PlotSpacing::logarithmic},
      {"plot_survival_loglog.csv", PlotSpacing::logarithmic}};
  std::vector<std::string> written;
  for (const auto& [name, spacing] : files) {
    std::ostringstream out;
    write_plot_csv(out, plot_rows(values, fitted, spacing));
    const auto path = (std::filesystem::path(dir) / name).string();
    write_text_file(path, out.str());
    written.push_back(path);
  }
  return written;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace alfa
