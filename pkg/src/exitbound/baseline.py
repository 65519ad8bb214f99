"""Mean-exit-time baseline: solve the Poisson-type problem and bound by 1/sup w.

The mean exit time w satisfies -div(a w')  + V' w' = 1 with absorbing ends,
and 1/sup w is the classical lower bound for the principal eigenvalue.
Only 1-D problems are solved by finite differences; the disk preset has a
closed form.  Pure central differences are used (no upwinding), which can
oscillate for strong drift on coarse meshes; at the mesh sizes used by the
presets this does not occur.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigurationError, ExitBoundError, UnsupportedDimensionError
from .model import EllipticProblem


@dataclass(frozen=True)
class MeanExitSolution:
    """Mean exit time on a uniform mesh plus the derived eigenvalue bound."""

    mesh: np.ndarray
    w: np.ndarray
    sup_w: float
    dv_bound: float
    argmax: float
    problem: str

    def __post_init__(self):
        if self.sup_w <= 0:
            raise ExitBoundError("mean exit time must be positive somewhere")


def solve_mean_exit_1d(problem: EllipticProblem, h: float) -> MeanExitSolution:
    """Central-difference solve of the mean-exit equation on a 1-D interval.

    -[a_{i+1/2}(w_{i+1}-w_i) - a_{i-1/2}(w_i-w_{i-1})]/h^2
        + V'(x_i)(w_{i+1}-w_{i-1})/(2h) = 1,   w = 0 at both ends,

    solved by direct tridiagonal elimination.
    """
    if problem.domain.dimension != 1:
        raise UnsupportedDimensionError(
            "finite-difference mean exit solve supports 1-D intervals only")
    left, right = problem.domain.interval_bounds
    length = right - left
    n = int(round(length / h))
    if n < 2:
        raise ConfigurationError("mesh must contain at least one interior node")
    if abs(n * h - length) > 1e-8 * length:
        raise ConfigurationError(
            f"h={h} does not divide the interval length {length} to within rounding")

    x = left + h * np.arange(n + 1)
    interior = x[1:-1].reshape(-1, 1)
    half = (x[:-1] + 0.5 * h).reshape(-1, 1)
    a_half = problem.a(half)              # a at x_{i+1/2}, i = 0..n-1
    vprime = problem.grad_V(interior)[:, 0]

    a_minus = a_half[:-1]
    a_plus = a_half[1:]
    diag = (a_plus + a_minus) / h ** 2
    upper = -a_plus / h ** 2 + vprime / (2.0 * h)
    lower = -a_minus / h ** 2 - vprime / (2.0 * h)

    m = n - 1
    ab = np.zeros((3, m))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    try:
        w_int = solve_banded((1, 1), ab, np.ones(m))
    except np.linalg.LinAlgError as exc:  # cannot occur under ellipticity
        raise ExitBoundError(f"tridiagonal solve failed: {exc}") from exc
    if not np.all(np.isfinite(w_int)):
        raise ExitBoundError("tridiagonal solve produced non-finite values")

    w = np.concatenate(([0.0], w_int, [0.0]))
    i_max = int(np.argmax(w))
    sup_w = float(w[i_max])
    return MeanExitSolution(mesh=x, w=w, sup_w=sup_w, dv_bound=1.0 / sup_w,
                            argmax=float(x[i_max]), problem=problem.name)


def analytic_mean_exit(preset: str, nodes: int = 1001) -> MeanExitSolution:
    """Closed-form mean exit time for presets that admit one.

    interval01: w(x) = x/2 - x^2/2, bound 8.
    disk-bm: w(r) = (1 - r^2)/2 as a function of radius, bound 2.
    """
    if preset == "interval01":
        x = np.linspace(0.0, 1.0, nodes)
        w = 0.5 * x - 0.5 * x ** 2
        return MeanExitSolution(mesh=x, w=w, sup_w=0.125, dv_bound=8.0,
                                argmax=0.5, problem=preset)
    if preset == "disk-bm":
        r = np.linspace(0.0, 1.0, nodes)
        w = 0.5 * (1.0 - r ** 2)
        return MeanExitSolution(mesh=r, w=w, sup_w=0.5, dv_bound=2.0,
                                argmax=0.0, problem=preset)
    raise ValueError(f"no closed-form mean exit time for preset {preset!r}")


def mesh_tsv(solution: MeanExitSolution) -> str:
    """Mesh dump: one `x<TAB>w(x)` line per node."""
    lines = [f"{float(x)!r}\t{float(w)!r}" for x, w in zip(solution.mesh, solution.w)]
    return "\n".join(lines) + "\n"
