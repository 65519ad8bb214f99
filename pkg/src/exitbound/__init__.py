"""Eigenvalue lower bounds from first-exit-time quantiles.

The package simulates the drift-diffusion process attached to a
second-order elliptic operator with absorbing boundary, estimates
quantiles of the first exit time, and turns them into certified lower
bounds on the principal Dirichlet eigenvalue.  A classical mean-exit-time
bound and independent spectral/PDE survival oracles are included for
validation.
"""

from .baseline import MeanExitSolution, analytic_mean_exit, mesh_tsv, solve_mean_exit_1d
from .errors import (ConfigurationError, EllipticityError, ExitBoundError,
                     ExpressionError, GeometryError, HorizonError,
                     UnsupportedDimensionError)
from .estimator import (QuantileBoundReport, empirical_survival, estimate_d_p,
                        quantile_bound, sup_over_starts, theorem_rhs)
from .expressions import parse_expression
from .model import (Domain, DriftDiffusionField, EllipticProblem, make_problem,
                    preset_center, preset_problem, to_sde)
from .reference import (DiskSurvivalOracle, IntervalSurvivalOracle,
                        PdeSurvivalOracle, bessel_j0_zeros, disk_survival,
                        interval_survival, oracle_quantile, preset_oracle,
                        reference_lambda1, survival_pde_1d)
from .sde import (ExitRecord, ExitTimeSample, SimConfig, sample_to_tsv,
                  simulate_batch, simulate_path, step, write_sample)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "DiskSurvivalOracle", "Domain", "DriftDiffusionField",
    "EllipticProblem", "EllipticityError", "ExitBoundError", "ExitRecord",
    "ExitTimeSample", "ExpressionError", "GeometryError", "HorizonError",
    "IntervalSurvivalOracle", "MeanExitSolution", "PdeSurvivalOracle",
    "QuantileBoundReport", "SimConfig", "UnsupportedDimensionError",
    "analytic_mean_exit", "bessel_j0_zeros", "disk_survival",
    "empirical_survival", "estimate_d_p", "interval_survival", "make_problem",
    "mesh_tsv", "oracle_quantile", "parse_expression", "preset_center",
    "preset_oracle", "preset_problem", "quantile_bound", "reference_lambda1",
    "sample_to_tsv", "simulate_batch", "simulate_path", "solve_mean_exit_1d",
    "step", "sup_over_starts", "survival_pde_1d", "theorem_rhs", "to_sde",
    "write_sample",
]
