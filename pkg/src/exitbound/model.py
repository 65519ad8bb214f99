"""Domains, elliptic operators and their drift-diffusion translation.

The operator convention used throughout the package is

    A u = div(a(x) grad u) - grad V . grad u,

acting on a bounded open domain with absorbing (Dirichlet) boundary.  The
process generated by A is

    dX = (grad a - grad V) dt + sqrt(2 a) dW,

so that for constant a the noise scale is sqrt(2a) and the drift is the
negative potential gradient.  All scalar fields evaluate vectorized on
arrays of shape (n, dim) and return shape (n,); vector fields return
(n, dim).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EllipticityError, GeometryError

ScalarField = Callable[[np.ndarray], np.ndarray]
VectorField = Callable[[np.ndarray], np.ndarray]

# Relative step for gradient auto-fill, times the bounding-box diameter.
FD_STEP_REL = 1e-6
# Points sampled when checking uniform ellipticity at construction.
ELLIPTICITY_SAMPLES = 512


def _as_points(x) -> np.ndarray:
    """Normalize input to a (n, dim) float array; also accepts a single point."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr


@dataclass(frozen=True)
class Domain:
    """Bounded open domain with a membership predicate and a bounding box."""

    kind: str
    dimension: int
    lo: np.ndarray
    hi: np.ndarray
    _membership: Callable[[np.ndarray], np.ndarray]

    @staticmethod
    def interval(left: float, right: float) -> "Domain":
        if not left < right:
            raise GeometryError(f"interval requires left < right, got [{left}, {right}]")

        def inside(pts: np.ndarray) -> np.ndarray:
            x = pts[:, 0]
            return (x > left) & (x < right)

        return Domain("interval", 1, np.array([left]), np.array([right]), inside)

    @staticmethod
    def disk(radius: float, center=(0.0, 0.0)) -> "Domain":
        if radius <= 0:
            raise GeometryError(f"disk requires radius > 0, got {radius}")
        c = np.asarray(center, dtype=float)
        r2 = radius * radius

        def inside(pts: np.ndarray) -> np.ndarray:
            d = pts - c
            return d[:, 0] ** 2 + d[:, 1] ** 2 < r2

        return Domain("disk", 2, c - radius, c + radius, inside)

    @staticmethod
    def custom(dimension: int, membership: Callable[[np.ndarray], np.ndarray],
               lo, hi) -> "Domain":
        """Domain from a vectorized predicate; points outside [lo, hi] never belong."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != (dimension,) or hi.shape != (dimension,) or np.any(lo >= hi):
            raise GeometryError("bounding box must satisfy lo < hi componentwise")

        def inside(pts: np.ndarray) -> np.ndarray:
            in_box = np.all((pts > lo) & (pts < hi), axis=1)
            out = np.zeros(len(pts), dtype=bool)
            if np.any(in_box):
                out[in_box] = np.asarray(membership(pts[in_box]), dtype=bool)
            return out

        return Domain("custom", dimension, lo, hi, inside)

    def contains(self, x) -> np.ndarray | bool:
        """Strict interior membership; scalar for a single point, array otherwise."""
        pts = _as_points(x)
        if pts.shape[1] != self.dimension:
            raise GeometryError(
                f"point dimension {pts.shape[1]} != domain dimension {self.dimension}")
        result = self._membership(pts)
        arr = np.asarray(x)
        if arr.ndim <= 1:
            return bool(result[0])
        return result

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    @property
    def interval_bounds(self) -> tuple[float, float]:
        if self.kind != "interval":
            raise GeometryError("interval_bounds only defined for interval domains")
        return float(self.lo[0]), float(self.hi[0])


@dataclass(frozen=True)
class EllipticProblem:
    """Operator data: domain, diffusion coefficient a, potential V, and gradients.

    a has units length^2/time; V is dimensionless (exp(-V) weight convention).
    a_min is the smallest sampled value of a over the bounding box and is
    guaranteed positive at construction.
    """

    domain: Domain
    a: ScalarField
    grad_a: VectorField
    V: ScalarField
    grad_V: VectorField
    a_min: float
    name: str = "custom"


@dataclass(frozen=True)
class DriftDiffusionField:
    """Drift b = grad a - grad V and isotropic noise scale sigma = sqrt(2a)."""

    drift: VectorField
    noise_scale: ScalarField
    sigma_min: float
    dimension: int


def central_difference_gradient(f: ScalarField, step: float) -> VectorField:
    """Vectorized central-difference gradient of a scalar field."""

    def grad(pts: np.ndarray) -> np.ndarray:
        out = np.empty_like(pts)
        for j in range(pts.shape[1]):
            shift = np.zeros(pts.shape[1])
            shift[j] = step
            out[:, j] = (f(pts + shift) - f(pts - shift)) / (2.0 * step)
        return out

    return grad


def constant_field(value: float) -> ScalarField:
    def f(pts: np.ndarray) -> np.ndarray:
        return np.full(len(pts), float(value))
    return f


def zero_vector_field() -> VectorField:
    def f(pts: np.ndarray) -> np.ndarray:
        return np.zeros_like(pts)
    return f


def make_problem(domain: Domain, a: ScalarField, V: ScalarField,
                 grad_a: VectorField | None = None,
                 grad_V: VectorField | None = None,
                 name: str = "custom") -> EllipticProblem:
    """Build an elliptic problem, auto-filling missing gradients.

    Missing gradients are filled by central differences with step
    FD_STEP_REL times the bounding-box diameter.  Uniform ellipticity is
    checked by sampling a at fixed pseudo-random points of the bounding box;
    a non-positive sample raises EllipticityError.
    """
    step = FD_STEP_REL * domain.diameter
    if grad_a is None:
        grad_a = central_difference_gradient(a, step)
    if grad_V is None:
        grad_V = central_difference_gradient(V, step)

    rng = np.random.default_rng(1729)  # fixed: the check must be reproducible
    pts = rng.uniform(domain.lo, domain.hi, size=(ELLIPTICITY_SAMPLES, domain.dimension))
    a_vals = np.asarray(a(pts), dtype=float)
    if a_vals.shape != (ELLIPTICITY_SAMPLES,):
        raise EllipticityError(
            f"a must map (n, {domain.dimension}) points to (n,) values, got {a_vals.shape}")
    a_min = float(a_vals.min())
    if not np.isfinite(a_min) or a_min <= 0.0:
        raise EllipticityError(f"diffusion coefficient must be positive; sampled min {a_min}")

    return EllipticProblem(domain=domain, a=a, grad_a=grad_a, V=V, grad_V=grad_V,
                           a_min=a_min, name=name)


def to_sde(problem: EllipticProblem) -> DriftDiffusionField:
    """Translate the operator into its sampling form b = grad a - grad V, sigma = sqrt(2a)."""
    grad_a, grad_V, a = problem.grad_a, problem.grad_V, problem.a

    def drift(pts: np.ndarray) -> np.ndarray:
        return grad_a(pts) - grad_V(pts)

    def noise_scale(pts: np.ndarray) -> np.ndarray:
        return np.sqrt(2.0 * a(pts))

    return DriftDiffusionField(drift=drift, noise_scale=noise_scale,
                               sigma_min=float(np.sqrt(2.0 * problem.a_min)),
                               dimension=problem.domain.dimension)


def _quadratic_potential(pts: np.ndarray) -> np.ndarray:
    return 0.5 * pts[:, 0] ** 2


def _quadratic_potential_grad(pts: np.ndarray) -> np.ndarray:
    return pts.copy()


def preset_problem(name: str) -> EllipticProblem:
    """Built-in problems addressable by name.

    interval01   : unit interval, a = 1, V = 0              (lambda_1 = pi^2)
    ou-interval  : [-1, 1], a = 1, V = x^2/2, drift -x      (lambda_1 = 2)
    disk-bm      : unit disk, a = 1/2, standard Brownian motion
                   (lambda_1 = j_{0,1}^2 / 2)
    """
    if name == "interval01":
        return make_problem(Domain.interval(0.0, 1.0), constant_field(1.0),
                            constant_field(0.0), grad_a=zero_vector_field(),
                            grad_V=zero_vector_field(), name=name)
    if name == "ou-interval":
        return make_problem(Domain.interval(-1.0, 1.0), constant_field(1.0),
                            _quadratic_potential, grad_a=zero_vector_field(),
                            grad_V=_quadratic_potential_grad, name=name)
    if name == "disk-bm":
        return make_problem(Domain.disk(1.0), constant_field(0.5),
                            constant_field(0.0), grad_a=zero_vector_field(),
                            grad_V=zero_vector_field(), name=name)
    raise GeometryError(f"unknown preset {name!r}; known: interval01, ou-interval, disk-bm")


def preset_center(name: str) -> np.ndarray:
    """The symmetric center used as default start point for each preset."""
    centers = {
        "interval01": np.array([0.5]),
        "ou-interval": np.array([0.0]),
        "disk-bm": np.array([0.0, 0.0]),
    }
    if name not in centers:
        raise GeometryError(f"unknown preset {name!r}")
    return centers[name]


PRESET_NAMES = ("interval01", "ou-interval", "disk-bm")
