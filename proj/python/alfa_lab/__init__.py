"""Python interface to the alfa C++ core.

Formulas are ``Formula`` objects built from DIMACS-style integer clauses.
Statistical results come back as plain dicts with the same keys as the
JSON artifacts written by the ``alfa`` command line tool.
"""

from ._core import (
    AlfaError,
    BudgetError,
    ConfigError,
    Formula,
    NumericError,
    __version__,
    chi_square_test,
    expected_flips,
    expected_runtime_with_restart,
    fit_lognormal,
    fit_report,
    generate,
    is_satisfiable,
    modify,
    resolution_closure,
    restart_analysis,
    restart_functional,
    run_experiment,
    solve,
)

__all__ = [
    "AlfaError",
    "BudgetError",
    "ConfigError",
    "Formula",
    "NumericError",
    "__version__",
    "chi_square_test",
    "expected_flips",
    "expected_runtime_with_restart",
    "fit_lognormal",
    "fit_report",
    "generate",
    "is_satisfiable",
    "modify",
    "resolution_closure",
    "restart_analysis",
    "restart_functional",
    "run_experiment",
    "solve",
]
