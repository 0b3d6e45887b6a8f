#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "alfa/error.hpp"
#include "alfa/formula.hpp"
#include "alfa/gen.hpp"
#include "alfa/harness.hpp"
#include "alfa/report.hpp"
#include "alfa/resolve.hpp"
#include "alfa/restart.hpp"
#include "alfa/sls.hpp"
#include "alfa/stats.hpp"

namespace py = pybind11;
using namespace alfa;

namespace {

py::object to_py(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null:
      return py::none();
    case nlohmann::json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float:
      return py::float_(j.get<double>());
    case nlohmann::json::value_t::string:
      return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& x : j) out.append(to_py(x));
      return out;
    }
    default: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
      return out;
    }
  }
}

Formula make_formula(std::size_t num_vars, const std::vector<std::vector<int>>& clauses) {
  Formula f(num_vars);
  for (const auto& c : clauses) {
    std::vector<Literal> lits;
    for (int x : c) lits.push_back(Literal::from_dimacs(x));
    f.add(Clause::make(std::move(lits)));
  }
  return f;
}

std::vector<std::vector<int>> clause_lists(const Formula& f) {
  std::vector<std::vector<int>> out;
  for (const auto& c : f.clauses()) {
    auto& row = out.emplace_back();
    for (auto l : c) row.push_back(l.to_dimacs());
  }
  return out;
}

std::vector<bool> to_bools(const Assignment& a) {
  std::vector<bool> out;
  for (auto v : a.values()) out.push_back(v != 0);
  return out;
}

SolverSpec solver_spec(const std::string& name, std::uint64_t period_factor, double cb, double eps,
                       const std::string& function) {
  SolverSpec s;
  s.kind = parse_solver_kind(name);
  s.srwa.period_factor = period_factor;
  s.probsat.cb = cb;
  s.probsat.eps = eps;
  if (function == "poly" || function == "polynomial") {
    s.probsat.function = BreakFunction::polynomial;
  } else if (function == "exp" || function == "exponential") {
    s.probsat.function = BreakFunction::exponential;
  } else {
    throw ConfigError("unknown break function: " + function);
  }
  s.probsat.validate();
  return s;
}

Sample make_sample(std::vector<double> values, std::vector<double> run_variance, std::size_t runs_per_value) {
  Sample s;
  s.values = std::move(values);
  s.run_variance = std::move(run_variance);
  s.runs_per_value = runs_per_value;
  s.validate();
  return s;
}

py::dict fit_dict(const LognormalFit& f) {
  py::dict d;
  d["mu"] = f.params.mu;
  d["sigma"] = f.params.sigma;
  d["gamma"] = f.params.gamma;
  d["loglik"] = f.loglik;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bounded-resolution formula modification, SLS solvers and runtime-distribution analysis";
  m.attr("__version__") = kVersion;

  static py::exception<Error> base_error(m, "AlfaError");
  static py::exception<ConfigError> config_error(m, "ConfigError", base_error.ptr());
  static py::exception<BudgetError> budget_error(m, "BudgetError", base_error.ptr());
  static py::exception<NumericError> numeric_error(m, "NumericError", base_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const BudgetError& e) {
      budget_error(e.what());
    } catch (const NumericError& e) {
      numeric_error(e.what());
    } catch (const Error& e) {
      base_error(e.what());
    }
  });

  py::class_<Formula>(m, "Formula")
      .def(py::init(&make_formula), py::arg("num_vars"), py::arg("clauses"))
      .def_static("from_dimacs", [](const std::string& text) { return parse_dimacs(std::string_view(text)); })
      .def("to_dimacs", [](const Formula& f) { return emit_dimacs(f); })
      .def_property_readonly("num_vars", &Formula::num_vars)
      .def_property_readonly("clauses", &clause_lists)
      .def("__len__", &Formula::size)
      .def("__eq__", [](const Formula& a, const Formula& b) { return a == b; })
      .def(
          "satisfied_by",
          [](const Formula& f, const std::vector<bool>& model) {
            Assignment a(f.num_vars());
            if (model.size() != f.num_vars()) throw ConfigError("model length differs from num_vars");
            for (std::size_t v = 0; v < model.size(); ++v) a.set(static_cast<Var>(v), model[v]);
            return satisfies(f, a);
          },
          py::arg("model"));

  m.def(
      "generate",
      [](const std::string& kind, std::size_t n, std::size_t num_clauses, std::size_t k, std::uint64_t seed,
         std::optional<std::vector<double>> chances) {
        GenSpec spec{n, num_clauses, k, seed, kind == "uniform" ? InstanceKind::uniform : InstanceKind::hidden};
        if (kind != "uniform" && kind != "hidden") throw ConfigError("kind must be hidden or uniform");
        std::optional<ChanceVector> cv;
        if (chances) cv = ChanceVector{*chances};
        auto g = generate_instance(spec, cv);
        py::object planted = py::none();
        if (g.planted) planted = py::cast(to_bools(*g.planted));
        return py::make_tuple(g.formula, planted);
      },
      py::arg("kind"), py::arg("n"), py::arg("m"), py::arg("k") = 3, py::arg("seed") = 0,
      py::arg("chances") = py::none(),
      "Generates a satisfiable instance. Returns (formula, planted assignment or None).");

  m.def("is_satisfiable", [](const Formula& f) { return dpll_sat(f); }, py::arg("formula"));

  m.def(
      "resolution_closure",
      [](const Formula& f, std::size_t w, std::size_t cap) {
        const auto pool = res_w_closure(f, w, cap);
        return Formula(f.num_vars(), pool.pool);
      },
      py::arg("formula"), py::arg("w") = 4, py::arg("cap") = kDefaultPoolCap,
      "Bounded-width resolvents of the formula that it does not already contain.");

  m.def(
      "modify",
      [](const Formula& f, std::size_t w, std::optional<double> p, double fraction, std::uint64_t seed,
         bool shuffle) {
        const auto pool = res_w_closure(f, w);
        double prob = 1.0;
        if (p) {
          prob = *p;
        } else if (auto c = calibrate_p(f.size(), pool.size(), fraction)) {
          prob = *c;
        } else {
          return f;
        }
        Rng rng(seed);
        return alfa_modify(pool, ModificationParams{w, prob, shuffle}, rng);
      },
      py::arg("formula"), py::arg("w") = 4, py::arg("p") = py::none(), py::arg("fraction") = 0.1,
      py::arg("seed") = 0, py::arg("shuffle") = true,
      "Adds a random subset of bounded-width resolvents. Without p, p is calibrated from fraction.");

  m.def(
      "solve",
      [](const Formula& f, const std::string& solver, std::uint64_t seed, std::uint64_t max_flips,
         std::uint64_t period_factor, double cb, double eps, const std::string& function) {
        Rng rng(seed);
        const auto out = solve(f, solver_spec(solver, period_factor, cb, eps, function), rng, max_flips);
        py::dict d;
        d["solved"] = out.solved();
        d["flips"] = out.flips;
        d["model"] = out.model ? py::cast(to_bools(*out.model)) : py::none();
        return d;
      },
      py::arg("formula"), py::arg("solver") = "srwa", py::arg("seed") = 0, py::arg("max_flips") = kNoCutoff,
      py::arg("period_factor") = 3, py::arg("cb") = 2.3, py::arg("eps") = 0.9, py::arg("function") = "poly");

  m.def(
      "expected_flips",
      [](const Formula& f, const std::string& solver, std::uint64_t period_factor, double cb, double eps,
         const std::string& function) {
        return expected_flips_oracle(f, solver_spec(solver, period_factor, cb, eps, function));
      },
      py::arg("formula"), py::arg("solver") = "srwa", py::arg("period_factor") = 3, py::arg("cb") = 2.3,
      py::arg("eps") = 0.9, py::arg("function") = "poly",
      "Exact expected flip count from the solver's Markov chain (at most 12 variables).");

  m.def(
      "fit_lognormal",
      [](const std::vector<double>& values) { return fit_dict(fit_lognormal3_mle(values)); },
      py::arg("values"), "Three-parameter lognormal maximum-likelihood fit.");

  m.def(
      "chi_square_test",
      [](const std::vector<double>& values, double mu, double sigma, double gamma) {
        const auto r = chi_square_gof(values, Lognormal3{mu, sigma, gamma});
        py::dict d;
        d["statistic"] = r.statistic;
        d["df"] = r.degrees_of_freedom;
        d["p_value"] = r.p_value;
        d["bins"] = r.bins.size();
        return d;
      },
      py::arg("values"), py::arg("mu"), py::arg("sigma"), py::arg("gamma"));

  m.def(
      "fit_report",
      [](std::vector<double> values, std::vector<double> run_variance, std::size_t runs_per_value,
         std::size_t rounds, double alpha, std::uint64_t seed) {
        FitOptions opts;
        opts.bootstrap = rounds > 0;
        opts.bootstrap_options = {rounds, alpha, seed, 1};
        return to_py(to_json(make_fit_report(make_sample(std::move(values), std::move(run_variance), runs_per_value), opts)));
      },
      py::arg("values"), py::arg("run_variance") = std::vector<double>{}, py::arg("runs_per_value") = 100,
      py::arg("rounds") = 200, py::arg("alpha") = 0.05, py::arg("seed") = 0,
      "Fit, chi-square test and noise-aware parametric bootstrap, as a dict.");

  m.def(
      "restart_analysis",
      [](double mu, double sigma, double gamma) {
        const LognormalModel d({mu, sigma, gamma});
        const auto a = restarts_useful(d);
        std::optional<OptimalCutoff> best;
        if (a.useful && !a.infinite_mean) best = optimal_restart_cutoff(d);
        return to_py(to_json(a, best));
      },
      py::arg("mu"), py::arg("sigma"), py::arg("gamma") = 0.0,
      "Restart usefulness and optimal cutoff for a fitted lognormal.");

  m.def(
      "restart_functional",
      [](double mu, double sigma, double gamma, double p) {
        return restart_functional(LognormalModel({mu, sigma, gamma}), p);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("gamma"), py::arg("p"));

  m.def(
      "expected_runtime_with_restart",
      [](double mu, double sigma, double gamma, double t) {
        return expected_runtime_with_restart(LognormalModel({mu, sigma, gamma}), t);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("gamma"), py::arg("t"));

  m.def(
      "run_experiment",
      [](const std::string& config_json, std::size_t workers) {
        auto cfg = config_from_json(nlohmann::json::parse(config_json));
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg, workers);
          if (!cfg.output_dir.empty()) write_artifacts(r);
        }
        py::dict d;
        d["manifest"] = to_py(manifest_json(r));
        d["runs_csv"] = runs_table(r);
        d["hardness_csv"] = hardness_table(r);
        d["instances_csv"] = instances_table(r);
        d["hardness"] = r.hardness_sample().values;
        d["fit"] = r.fit ? to_py(to_json(*r.fit)) : py::none();
        d["restart"] = r.restart ? to_py(to_json(*r.restart, r.optimal_cutoff)) : py::none();
        return d;
      },
      py::arg("config_json"), py::arg("workers") = 1,
      "Runs the full pipeline from a JSON config string. Writes artifacts when output_dir is set.");
}
