"""Independent high-accuracy survival functions, quantiles and eigenvalues.

These oracles are the ground truth the Monte Carlo machinery is tested
against: sine/Bessel eigenfunction series where the geometry admits one,
and an implicit finite-difference time march for 1-D problems with a
potential.  Series are truncated when the term envelope drops below
SERIES_TOL (never before SERIES_MIN_TERMS terms) and values are clamped
to [0, 1]; for times too small for the series to converge the evaluation
falls back to the PDE march.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import j0, j1

from .errors import ExitBoundError, HorizonError, UnsupportedDimensionError
from .model import EllipticProblem

SERIES_TOL = 1e-14
SERIES_MIN_TERMS = 5
TINY_T_FACTOR = 1e-3
QUANTILE_TOL = 1e-8

# First 20 positive zeros of the Bessel function J0 (Abramowitz & Stegun,
# Table 9.5); refined once by a Newton step at first use.
J0_ZEROS_TABLE = (
    2.4048255577, 5.5200781103, 8.6537279129, 11.7915344391, 14.9309177086,
    18.0710639679, 21.2116366299, 24.3524715308, 27.4934791320, 30.6346064684,
    33.7758202136, 36.9170983537, 40.0584257646, 43.1997917132, 46.3411883717,
    49.4826098974, 52.6240518411, 55.7655107550, 58.9069839261, 62.0484691902,
)

_j0_zeros_cache: np.ndarray | None = None


def bessel_j0_zeros() -> np.ndarray:
    """Hardcoded J0 zeros, Newton-refined: j <- j + J0(j)/J1(j)."""
    global _j0_zeros_cache
    if _j0_zeros_cache is None:
        z = np.array(J0_ZEROS_TABLE)
        z = z + j0(z) / j1(z)
        if abs(z[0] - 2.404826) > 1e-6:
            raise ExitBoundError("Bessel zero table failed validation against j1=2.404826")
        _j0_zeros_cache = z
    return _j0_zeros_cache


def interval_survival(x: float, t: float, a: float = 1.0, length: float = 1.0,
                      offset: float = 0.0) -> float:
    """Survival S(x, t) on an interval with constant diffusion a and no drift.

    Sine series sum_{k odd} (4/(k pi)) sin(k pi (x-offset)/length)
    exp(-a k^2 pi^2 t / length^2).
    """
    xi = (x - offset) / length
    if not 0.0 < xi < 1.0:
        raise ValueError(f"x={x} is not strictly inside the interval")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t < TINY_T_FACTOR * length ** 2 / a:
        return _interval_survival_pde(xi, t, a, length)

    rate = a * np.pi ** 2 / length ** 2
    total = 0.0
    k = 1
    terms = 0
    while True:
        envelope = 4.0 / (k * np.pi) * np.exp(-(k * k) * rate * t)
        total += 4.0 / (k * np.pi) * np.sin(k * np.pi * xi) * np.exp(-(k * k) * rate * t)
        terms += 1
        if terms >= SERIES_MIN_TERMS and envelope < SERIES_TOL:
            break
        k += 2
    return float(min(1.0, max(0.0, total)))


def _interval_survival_pde(xi: float, t: float, a: float, length: float) -> float:
    """Small-time fallback: implicit march of S_t = a S_xx on the unit interval."""
    if t == 0.0:
        return 1.0
    # rescale to unit interval/unit coefficient: tau = a t / length^2
    tau = a * t / length ** 2
    n = 2000
    steps = 200
    march = _SurvivalMarch1D(np.linspace(0.0, 1.0, n + 1),
                             a=np.ones(n - 1), conv=np.zeros(n - 1),
                             time_step=tau / steps)
    march.advance(steps)
    return march.value_at(xi)


def disk_survival(r: float, t: float, a: float = 0.5) -> float:
    """Survival at radius r in the unit disk, diffusion coefficient a.

    Bessel series sum_k c_k J0(j_k r) exp(-a j_k^2 t) with
    c_k = 2/(j_k J1(j_k)).  At t = 0 the series Abel-sums to 1 and the
    evaluation short-circuits; when the 20 tabulated zeros cannot reach the
    truncation tolerance the radial PDE march is used instead.
    """
    if not 0.0 <= r < 1.0:
        raise ValueError(f"radius {r} must lie in [0, 1)")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return 1.0
    zeros = bessel_j0_zeros()
    c = 2.0 / (zeros * j1(zeros))
    tail = abs(c[-1]) * np.exp(-a * zeros[-1] ** 2 * t)
    if tail > 1e-13 or t < TINY_T_FACTOR / a:
        return _disk_survival_pde(r, t, a)
    # all 20 tabulated modes; the tail check above guarantees the envelope
    # is already below the truncation tolerance
    total = float(np.sum(c * j0(zeros * r) * np.exp(-a * zeros ** 2 * t)))
    return min(1.0, max(0.0, total))


def _disk_survival_pde(r: float, t: float, a: float) -> float:
    """Radial finite-volume march of S_t = a (S'' + S'/r), absorbing at r=1."""
    n = 2000
    h = 1.0 / n
    centers = (np.arange(n) + 0.5) * h
    faces = np.arange(n + 1) * h
    steps = max(200, int(np.ceil(t / 2e-6)))
    steps = min(steps, 20000)
    k = t / steps

    # flux-form tridiagonal operator: (1/r_i h) [r_{i+1/2} (S_{i+1}-S_i)/h - ...]
    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    for i in range(n):
        fl = faces[i] / (centers[i] * h * h)
        fr = faces[i + 1] / (centers[i] * h * h)
        if i > 0:
            lower[i] = a * fl
            diag[i] -= a * fl
        if i < n - 1:
            upper[i] = a * fr
            diag[i] -= a * fr
        else:
            # Dirichlet at r=1: ghost value -S_n gives flux -2 S_n / h
            diag[i] -= 2.0 * a * fr
    S = np.ones(n)
    ab = np.zeros((3, n))
    theta = 0.5
    for step_idx in range(steps):
        th = 1.0 if step_idx < 4 else theta  # Rannacher start
        ab[0, 1:] = -th * k * upper[:-1]
        ab[1, :] = 1.0 - th * k * diag
        ab[2, :-1] = -th * k * lower[1:]
        rhs = S + (1 - th) * k * (diag * S)
        rhs[:-1] += (1 - th) * k * upper[:-1] * S[1:]
        rhs[1:] += (1 - th) * k * lower[1:] * S[:-1]
        S = solve_banded((1, 1), ab, rhs)
    return float(min(1.0, max(0.0, np.interp(r, centers, S))))


class _SurvivalMarch1D:
    """Theta-scheme time march of S_t = a S'' + conv S' with absorbing ends.

    First four steps are backward Euler to damp the discontinuous initial
    state, then Crank-Nicolson.
    """

    def __init__(self, grid: np.ndarray, a: np.ndarray, conv: np.ndarray,
                 time_step: float):
        self.grid = grid
        h = grid[1] - grid[0]
        n = len(grid) - 2  # interior unknowns
        self.h = h
        self.time_step = time_step
        self.diag = -2.0 * a / h ** 2
        self.upper = a / h ** 2 + conv / (2 * h)
        self.lower = a / h ** 2 - conv / (2 * h)
        self.S = np.ones(n)
        self.t = 0.0
        self.steps_done = 0
        self.trace_t = [0.0]
        self.trace_S = [self.S.copy()]

    def _apply(self, coef: float) -> np.ndarray:
        """(I + coef * A) S for the tridiagonal operator A."""
        out = (1.0 + coef * self.diag) * self.S
        out[:-1] += coef * self.upper[:-1] * self.S[1:]
        out[1:] += coef * self.lower[1:] * self.S[:-1]
        return out

    def advance(self, steps: int) -> None:
        n = len(self.S)
        ab = np.zeros((3, n))
        k = self.time_step
        for _ in range(steps):
            th = 1.0 if self.steps_done < 4 else 0.5
            ab[0, 1:] = -th * k * self.upper[:-1]
            ab[1, :] = 1.0 - th * k * self.diag
            ab[2, :-1] = -th * k * self.lower[1:]
            rhs = self._apply((1.0 - th) * k)
            self.S = solve_banded((1, 1), ab, rhs)
            self.steps_done += 1
            self.t += k
            self.trace_t.append(self.t)
            self.trace_S.append(self.S.copy())

    def value_at(self, x: float, snapshot: np.ndarray | None = None) -> float:
        S = self.S if snapshot is None else snapshot
        full = np.concatenate(([0.0], S, [0.0]))
        return float(np.interp(x, self.grid, full))


class IntervalSurvivalOracle:
    """Series oracle for constant-coefficient interval problems."""

    def __init__(self, a: float = 1.0, length: float = 1.0, offset: float = 0.0,
                 problem_id: str = "interval"):
        self.a = a
        self.length = length
        self.offset = offset
        self.problem_id = problem_id
        self.lambda1 = a * np.pi ** 2 / length ** 2

    def eval(self, x: float, t: float) -> float:
        return interval_survival(x, t, self.a, self.length, self.offset)

    def u1(self, x: float) -> float:
        return float(np.sin(np.pi * (x - self.offset) / self.length))


class DiskSurvivalOracle:
    """Bessel series oracle for driftless diffusion in the unit disk."""

    def __init__(self, a: float = 0.5, problem_id: str = "disk"):
        self.a = a
        self.problem_id = problem_id
        self.lambda1 = a * bessel_j0_zeros()[0] ** 2

    def eval(self, x, t: float) -> float:
        r = self._radius(x)
        return disk_survival(r, t, self.a)

    @staticmethod
    def _radius(x) -> float:
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        if arr.size == 1:
            return abs(float(arr[0]))
        return float(np.linalg.norm(arr))

    def u1(self, x) -> float:
        return float(j0(bessel_j0_zeros()[0] * self._radius(x)))


class PdeSurvivalOracle:
    """Finite-difference survival oracle for a 1-D elliptic problem.

    The implicit march is performed once and extended lazily; evaluations
    interpolate the stored trajectory, so quantile bisection stays cheap.
    """

    def __init__(self, problem: EllipticProblem, h: float | None = None,
                 time_step: float = 1e-3, lambda1: float | None = None,
                 u1=None):
        if problem.domain.dimension != 1:
            raise UnsupportedDimensionError("PDE survival oracle requires a 1-D problem")
        left, right = problem.domain.interval_bounds
        if h is None:
            h = (right - left) / 2000.0
        n = int(round((right - left) / h))
        grid = np.linspace(left, right, n + 1)
        interior = grid[1:-1].reshape(-1, 1)
        a_vals = problem.a(interior)
        conv = problem.grad_a(interior)[:, 0] - problem.grad_V(interior)[:, 0]
        self._march = _SurvivalMarch1D(grid, a_vals, conv, time_step)
        self.problem_id = problem.name
        self.lambda1 = lambda1
        self._u1 = u1

    def u1(self, x: float) -> float:
        if self._u1 is None:
            raise ExitBoundError("no reference ground state attached to this oracle")
        return float(self._u1(x))

    def _ensure(self, t: float) -> None:
        m = self._march
        if t > m.t:
            missing = int(np.ceil((t - m.t) / m.time_step)) + 1
            m.advance(missing)

    def eval(self, x: float, t: float) -> float:
        if t < 0:
            raise ValueError("t must be nonnegative")
        self._ensure(t)
        m = self._march
        idx = min(int(t / m.time_step), len(m.trace_t) - 2)
        t0, t1 = m.trace_t[idx], m.trace_t[idx + 1]
        v0 = m.value_at(x, m.trace_S[idx])
        v1 = m.value_at(x, m.trace_S[idx + 1])
        if t1 == t0:
            return v0
        w = (t - t0) / (t1 - t0)
        return float(min(1.0, max(0.0, (1 - w) * v0 + w * v1)))

    def decay_rate(self, x: float, t1: float, t2: float) -> float:
        """Tail slope (log S(t1) - log S(t2))/(t2 - t1); amplitude-free."""
        s1, s2 = self.eval(x, t1), self.eval(x, t2)
        return float((np.log(s1) - np.log(s2)) / (t2 - t1))


def survival_pde_1d(problem: EllipticProblem, x0: float, t: float,
                    h: float | None = None, time_step: float = 1e-3) -> float:
    """One-shot PDE survival value S(x0, t); see PdeSurvivalOracle."""
    oracle = PdeSurvivalOracle(problem, h=h, time_step=time_step)
    return oracle.eval(x0, t)


def oracle_quantile(oracle, x, p: float) -> float:
    """Smallest t with S(x, t) = p, by bisection to |interval| <= 1e-8 (1+t)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")
    lam = getattr(oracle, "lambda1", None)
    hi = 1.0 / lam if lam else 1.0
    lo = 0.0
    expansions = 0
    while oracle.eval(x, hi) > p:
        lo = hi
        hi *= 2.0
        expansions += 1
        if expansions > 60:
            raise HorizonError("survival never drops below p; bisection bracket failed")
    while hi - lo > QUANTILE_TOL * (1.0 + hi):
        mid = 0.5 * (lo + hi)
        if oracle.eval(x, mid) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def preset_oracle(name: str, h: float | None = None, time_step: float = 1e-3):
    """Reference oracle for each built-in problem."""
    if name == "interval01":
        return IntervalSurvivalOracle(a=1.0, length=1.0, offset=0.0, problem_id=name)
    if name == "disk-bm":
        return DiskSurvivalOracle(a=0.5, problem_id=name)
    if name == "ou-interval":
        from .model import preset_problem
        problem = preset_problem(name)
        return PdeSurvivalOracle(problem, h=h, time_step=time_step, lambda1=2.0,
                                 u1=lambda x: 1.0 - x ** 2)
    raise ValueError(f"no reference oracle for {name!r}")


def reference_lambda1(name: str) -> float:
    values = {
        "interval01": float(np.pi ** 2),
        "ou-interval": 2.0,
        "disk-bm": float(0.5 * bessel_j0_zeros()[0] ** 2),
    }
    if name not in values:
        raise ValueError(f"no reference eigenvalue for {name!r}")
    return values[name]
