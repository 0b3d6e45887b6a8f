#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <unordered_set>

#include "alfa/error.hpp"
#include "alfa/harness.hpp"
#include "oracles.hpp"

using namespace alfa;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("alfa_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.base_instance.generate = GenSpec{20, 85, 3, 5, InstanceKind::hidden};
  c.M = 30;
  c.N = 5;
  c.base_seed = 123;
  c.bootstrap_rounds = 20;
  return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("calibration rule") {
  CHECK(*calibrate_p(200, 4000, 0.1) == doctest::Approx(0.005));
  CHECK(*calibrate_p(200, 10, 0.1) == 1.0);
  CHECK_FALSE(calibrate_p(200, 0, 0.1));
  CHECK_THROWS_AS(calibrate_p(200, 10, 0.0), ConfigError);
}

TEST_CASE("expected added clauses follow the budget") {
  Rng g(21);
  const Formula f = oracle::random_sat_formula(12, 40, 3, g);
  const auto pool = res_w_closure(f, 4);
  const double p = *calibrate_p(f.size(), pool.size(), 0.1);
  REQUIRE(p < 1.0);
  double sum = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Rng rng(modification_seed(9, s));
    sum += static_cast<double>(alfa_modify(pool, {4, p, true}, rng).size() - f.size());
  }
  const double target = 0.1 * static_cast<double>(f.size());
  const double sd = std::sqrt(static_cast<double>(pool.size()) * p * (1 - p) / 1000);
  CHECK(std::abs(sum / 1000 - target) < 4 * sd);
}

TEST_CASE("seed derivation is injective") {
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = 0; i < 2000; ++i)
    for (std::size_t j = 0; j < 500; ++j) seen.insert(run_seed(1, i, j));
  CHECK(seen.size() == 2000u * 500u);
  std::unordered_set<std::uint64_t> mods;
  for (std::size_t i = 0; i < 100000; ++i) mods.insert(modification_seed(1, i));
  CHECK(mods.size() == 100000u);
  CHECK(run_seed(1, 0, 0) != modification_seed(1, 0));
}

TEST_CASE("config parsing") {
  const auto j = nlohmann::json::parse(R"({
    "base_instance": {"generate": {"kind": "hidden", "n": 30, "m": 120, "seed": 4, "chances": [0, 0.1, 0.3, 0.6]}},
    "solver": {"name": "probsat", "cb": 2.5, "eps": 1.0},
    "M": 10, "N": 3, "base_seed": 8, "output_dir": "out"})");
  const auto c = config_from_json(j);
  CHECK(c.solver.kind == SolverKind::probsat);
  CHECK(c.solver.probsat.cb == 2.5);
  CHECK(c.w == 4);
  CHECK(c.resolvent_budget_fraction == 0.1);
  CHECK(c.max_flips == 10'000'000'000ULL);
  CHECK(c.base_instance.generate->m == 120);
  CHECK(c.base_instance.chances->q[3] == 0.6);
  CHECK(config_from_json(to_json(c)).M == 10);

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"base_instance": "x.cnf", "MM": 3})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"base_instance": "x.cnf", "M": 0})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"M": 3})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"base_instance": "x.cnf", "M": "many"})")), ConfigError);
  const auto ratio = config_from_json(
      nlohmann::json::parse(R"({"base_instance": {"generate": {"kind": "uniform", "n": 50, "ratio": 4.267}}})"));
  CHECK(ratio.base_instance.generate->m == 213);
}

TEST_CASE("worker count from the environment") {
  ::setenv(kWorkersEnv, "3", 1);
  CHECK(workers_from_env() == 3);
  ::setenv(kWorkersEnv, "zero", 1);
  CHECK_THROWS_AS(workers_from_env(), ConfigError);
  ::unsetenv(kWorkersEnv);
  CHECK(workers_from_env(2) == 2);
}

TEST_CASE("degenerate pipeline equals a direct solve") {
  const auto dir = scratch("degenerate");
  const Formula f(3, {Clause::from_dimacs({1}), Clause::from_dimacs({2}), Clause::from_dimacs({-3})});
  write_dimacs_file(f, (dir / "base.cnf").string());
  ExperimentConfig c;
  c.base_instance.path = (dir / "base.cnf").string();
  c.M = 1;
  c.N = 1;
  c.base_seed = 55;
  const auto r = run_experiment(c);
  CHECK(r.pool_size == 0);
  CHECK_FALSE(r.p);
  Rng rng(run_seed(55, 0, 0));
  CHECK(r.runs.at(0).flips == solve(f, c.solver, rng, c.max_flips).flips);
  CHECK_FALSE(r.fit);
  CHECK_FALSE(r.fit_error.empty());
}

TEST_CASE("small experiment") {
  const auto r = run_experiment(small_config(), 1);
  REQUIRE(r.runs.size() == 150);
  REQUIRE(r.hardness.size() == 30);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < 30; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 5; ++j) {
      const auto& run = r.runs[i * 5 + j];
      CHECK(run.instance_index == i);
      CHECK(run.run_index == j);
      CHECK(run.seed == run_seed(123, i, j));
      CHECK(run.status == SolveStatus::solved);
      s += static_cast<double>(run.flips);
      total += run.flips;
    }
    CHECK(r.hardness[i].mean_flips == doctest::Approx(s / 5).epsilon(1e-15));
  }
  CHECK(r.total_flips == total);
  CHECK(r.pool_size > 0);
  REQUIRE(r.p);
  CHECK(*r.p == doctest::Approx(std::min(1.0, 0.1 * 85 / static_cast<double>(r.pool_size))));

  const auto r3 = run_experiment(small_config(), 3);
  CHECK(runs_table(r) == runs_table(r3));
  CHECK(hardness_table(r) == hardness_table(r3));
  CHECK(instances_table(r) == instances_table(r3));
  if (r.fit) {
    REQUIRE(r3.fit);
    CHECK(to_json(*r.fit) == to_json(*r3.fit));
  }
}

TEST_CASE("flip budget aborts") {
  auto c = small_config();
  c.max_flips = 1;
  try {
    run_experiment(c);
    FAIL("expected a budget error");
  } catch (const BudgetError& e) {
    CHECK(std::string(e.what()).find("instance") != std::string::npos);
    CHECK(e.exit_code() == 3);
  }
}

TEST_CASE("unsatisfiable base is rejected") {
  const auto dir = scratch("unsat");
  write_dimacs_file(Formula(1, {Clause::from_dimacs({1}), Clause::from_dimacs({-1})}), (dir / "u.cnf").string());
  ExperimentConfig c;
  c.base_instance.path = (dir / "u.cnf").string();
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
}

TEST_CASE("artifacts") {
  auto c = small_config();
  c.output_dir = scratch("artifacts").string();
  const auto r = run_experiment(c);
  const auto written = write_artifacts(r);
  for (const char* name : {"base.cnf", "runs.csv", "hardness.csv", "instances.csv", "manifest.json"})
    CHECK(fs::exists(fs::path(c.output_dir) / name));
  if (r.fit) {
    for (const char* name : {"fit.json", "restart.json", "restart_curve.csv", "plot_cdf_linear.csv",
                             "plot_cdf_loglog.csv", "plot_survival_loglog.csv"})
      CHECK(fs::exists(fs::path(c.output_dir) / name));
  }
  const auto manifest = nlohmann::json::parse(read_text_file((fs::path(c.output_dir) / "manifest.json").string()));
  CHECK(manifest["total_flips"].get<std::uint64_t>() == r.total_flips);
  CHECK(manifest["config"]["M"] == 30);
  const Sample back = read_hardness_file((fs::path(c.output_dir) / "hardness.csv").string());
  CHECK(back.values == r.hardness_sample().values);
  CHECK(back.run_variance == r.hardness_sample().run_variance);
  CHECK(back.runs_per_value == 5);
  CHECK(parse_dimacs(read_text_file((fs::path(c.output_dir) / "base.cnf").string())) == r.base);
}

TEST_CASE("hardness table parsing") {
  std::istringstream bare("12\n15.5\n# note\n9\n");
  const Sample s = read_hardness_csv(bare);
  CHECK(s.values == std::vector<double>{12, 15.5, 9});
  CHECK_FALSE(s.has_variance());
  std::istringstream bad("mean_flips\n1\nabc\n");
  CHECK_THROWS_AS(read_hardness_csv(bad), ConfigError);
  std::istringstream nocol("foo,bar\n1,2\n");
  CHECK_THROWS_AS(read_hardness_csv(nocol), ConfigError);
  CHECK_THROWS_AS(read_hardness_file("/nonexistent/h.csv"), IoError);
}

TEST_CASE("fit report json") {
  Rng rng(5);
  Sample s;
  const Lognormal3 truth{3, 0.6, 20};
  for (int i = 0; i < 300; ++i) s.values.push_back(truth.sample(rng));
  FitOptions o;
  o.bootstrap_options.rounds = 30;
  const auto r = make_fit_report(s, o);
  const auto j = to_json(r);
  CHECK(j["n"] == 300);
  CHECK(j["chi2"]["df"].get<int>() == static_cast<int>(r.chi2->bins.size()) - 4);
  CHECK(j["bootstrap"]["N"] == 30);
  const auto back = fit_report_from_json(j);
  CHECK(back.fit.params.mu == r.fit.params.mu);
  CHECK(back.fit.params.sigma == r.fit.params.sigma);
  CHECK(back.fit.params.gamma == r.fit.params.gamma);
  CHECK_THROWS_AS(fit_report_from_json(nlohmann::json::parse(R"({"mu": 1})")), ConfigError);
}

TEST_CASE("plot rows") {
  const Lognormal3 truth{2, 0.5, 0};
  Rng rng(1);
  std::vector<double> x(2000);
  for (auto& v : x) v = truth.sample(rng);
  const auto fit = fit_lognormal3_mle(x).params;
  for (auto spacing : {PlotSpacing::linear, PlotSpacing::logarithmic}) {
    const auto rows = plot_rows(x, fit, spacing);
    REQUIRE(rows.size() == kPlotPoints);
    CHECK(rows.front().x == *std::min_element(x.begin(), x.end()));
    CHECK(rows.back().x == *std::max_element(x.begin(), x.end()));
    CHECK(rows.back().ecdf == 1.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i].fitted_cdf >= rows[i - 1].fitted_cdf);
      CHECK(rows[i].x > rows[i - 1].x);
    }
  }
  const double med = fit.quantile(0.5);
  CHECK(std::abs(Ecdf(x)(med) - fit.cdf(med)) < 0.05);
  std::ostringstream out;
  write_plot_csv(out, plot_rows(x, fit, PlotSpacing::linear, 3));
  CHECK(out.str().rfind("x,ecdf,fitted_cdf,empirical_survival,fitted_survival\n", 0) == 0);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 12345.678, 1e-300, 2.5e10}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(2.0) == "2");
}

}  // TEST_SUITE
