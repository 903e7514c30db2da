"""jbsde: numerical solvers and verification tools for backward SDEs with
jumps driven by finitely supported random measures.
"""

from .measures import (MarkMeasure, MeasureError, PathBundle, TimeGrid,
                       ZetaDensity, bmo_statistic, build_mark_measure,
                       onb_expansion_check, simulate_paths, truncate_measure,
                       ut_norm)
from .generators import (ConditionReport, GeneratorError, GeneratorSpec,
                         TruncationBand, approx_sequence, apriori_bound,
                         build_named_generator, check_afin, check_ainfi,
                         drift_adjust, eval_generator, gamma_slope, ode_bounds,
                         truncate_generator)
from .solvers import (BsdeSolution, Lattice, SolveConfig, SolverError,
                      adjoint_representation, compare_solutions,
                      martingale_diagnostic, monotone_driver, solve_lattice,
                      solve_lsmc, zero_z_check)
from .finance import (ConstraintSet, FinanceError, GoodDealSpec, MarketSpec,
                      exp_utility_purejump_solve, exp_utility_solve,
                      gooddeal_bound, gooddeal_inner_max,
                      martingale_optimality_check, power_transform,
                      power_utility_solve, project_ker_im)
from .demos import (demo_counterexample_quadratic_growth,
                    demo_counterexample_royer, demo_nonconvex_generator)
from .reports import CsvTable, PropertyReport
from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .verification import verify_suite

__version__ = "0.1.0"
