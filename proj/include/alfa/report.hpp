#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alfa/restart.hpp"
#include "alfa/stats.hpp"

namespace alfa {

// Everything known about the hardness distribution of one base instance.
struct FitReport {
  std::size_t n = 0;
  LognormalFit fit;
  std::optional<GofReport> chi2;
  std::string chi2_error;  // set when the test could not be run
  std::optional<BootstrapReport> bootstrap;
  std::size_t bootstrap_rounds = 0;
};

struct FitOptions {
  bool bootstrap = true;
  BootstrapOptions bootstrap_options;
};

FitReport make_fit_report(const Sample& s, const FitOptions& options);

nlohmann::json to_json(const FitReport& r);
// Reads the fitted parameters back (mu, sigma, gamma, loglik, n).
FitReport fit_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RestartAnalysis& a, const std::optional<OptimalCutoff>& optimal);

// Shortest round-trip decimal representation.
std::string format_double(double v);

// Hardness table: instance_index,mean_flips,run_variance,runs
void write_hardness_csv(std::ostream& out, const Sample& s);
// Accepts the table above, or a bare column of values (one per line).
Sample read_hardness_csv(std::istream& in);
Sample read_hardness_file(const std::string& path);

// (p, R(p), R(p) - p)
void write_restart_curve_csv(std::ostream& out, const RestartAnalysis& a);

struct PlotRow {
  double x;
  double ecdf;
  double fitted_cdf;
  double empirical_survival;
  double fitted_survival;
};

enum class PlotSpacing { linear, logarithmic };

inline constexpr std::size_t kPlotPoints = 512;

// kPlotPoints rows spanning [min, max] of the sample.
std::vector<PlotRow> plot_rows(const std::vector<double>& values, const Lognormal3& fitted,
                               PlotSpacing spacing, std::size_t points = kPlotPoints);
void write_plot_csv(std::ostream& out, const std::vector<PlotRow>& rows);

// Writes plot_cdf_linear.csv, plot_cdf_loglog.csv and plot_survival_loglog.csv
// into `dir`; returns the paths written.
std::vector<std::string> emit_plot_data(const std::vector<double>& values, const Lognormal3& fitted,
                                        const std::string& dir);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace alfa
