"""
Parameter sweeps over families of qutrit measurements and the steering
visibility thresholds derived from them.

Families
--------
``M2`` (parameter ``theta``), two bases::

    {(1, 0, 0), (0, cos t, -sin t), (0, sin t, cos t)}
    {(sqrt2, sqrt3, 1), (sqrt2, 0, -2), (sqrt2, -sqrt3, 1)} / sqrt6

``M3`` (parameters ``a`` and ``phi``), three bases::

    computational basis
    {(1, 0, -1) / sqrt2, (0, 1, 0), (1, 0, 1) / sqrt2}
    {(sqrt a, e^{i phi} sqrt(1-a), 0), (sqrt(1-a), -e^{i phi} sqrt a, 0), (0, 0, 1)}

``custom`` holds a fixed list of bases read from a measurement file.

Grid points are solved independently, in worker processes when ``jobs > 1``;
results are always in grid order.
"""

import concurrent.futures
import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .analytic_bounds import cp_bound, mu_bound, overlaps, rpz_bound
from .config.solver_defaults import (
    M2_GRID_POINTS,
    M2_THETA_RANGE,
    M3_GRID_POINTS,
    STEERING_ALPHA,
)
from .entropy import EntropySpec, eur_bounds_from_hmin
from .exceptions import EurBoundsError, OutOfRange
from .quantum_core import PureState, combine_povms, pvm_from_basis
from .solver import SolverConfig, minimize_entropy

logger = logging.getLogger(__name__)

Point = dict


class FamilyName(str, Enum):
    M2 = "M2"
    M3 = "M3"
    CUSTOM = "custom"


@dataclass(frozen=True)
class MeasurementFamily:
    """
    A parametrized list of measurement bases.

    Use :meth:`m2`, :meth:`m3` or :meth:`custom` rather than the constructor.
    """

    name: FamilyName
    dim: int = 3
    bases: tuple = ()

    @classmethod
    def m2(cls) -> "MeasurementFamily":
        return cls(FamilyName.M2)

    @classmethod
    def m3(cls) -> "MeasurementFamily":
        return cls(FamilyName.M3)

    @classmethod
    def custom(cls, bases: Sequence[Sequence[PureState]]) -> "MeasurementFamily":
        bases = tuple(tuple(basis) for basis in bases)
        if not bases:
            raise ValueError("a custom family needs at least one basis")
        return cls(FamilyName.CUSTOM, dim=bases[0][0].dim, bases=bases)

    @property
    def parameters(self) -> tuple[str, ...]:
        if self.name is FamilyName.M2:
            return ("theta",)
        if self.name is FamilyName.M3:
            return ("a", "phi")
        return ()

    @property
    def n_measurements(self) -> int:
        if self.name is FamilyName.M2:
            return 2
        if self.name is FamilyName.M3:
            return 3
        return len(self.bases)


def default_grid(
    family: MeasurementFamily, points: Optional[int] = None
) -> list[Point]:
    """
    The parameter grid of ``family``.

    By default 61 values of ``theta`` on ``[0, pi]`` for M2 and a 31 x 31 grid
    of ``a`` in ``[0, 1]`` and ``phi`` in ``[0, 2 pi)`` for M3; ``points``
    overrides the count per axis. Custom families have a single empty point.
    """
    if points is not None and points < 1:
        raise ValueError("a grid needs at least one point per axis")
    if family.name is FamilyName.M2:
        low, high = M2_THETA_RANGE
        count = points or M2_GRID_POINTS
        return [{"theta": float(t)} for t in np.linspace(low, high, count)]
    if family.name is FamilyName.M3:
        count = points or M3_GRID_POINTS
        a_values = np.linspace(0.0, 1.0, count)
        phi_values = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
        return [
            {"a": float(a), "phi": float(phi)} for a in a_values for phi in phi_values
        ]
    return [{}]


def _require(point: Point, name: str, low: float, high: float, closed: bool) -> float:
    if name not in point:
        raise OutOfRange(f"missing parameter {name!r}")
    value = float(point[name])
    inside = low <= value <= high if closed else low <= value < high
    if not (math.isfinite(value) and inside):
        bracket = "]" if closed else ")"
        raise OutOfRange(f"{name}={value!r} outside [{low}, {high}{bracket}")
    return value


def _basis(*vectors) -> list[PureState]:
    return [PureState.from_vector(vector) for vector in vectors]


def build_family_bases(
    family: MeasurementFamily, point: Point
) -> list[list[PureState]]:
    """
    The bases of ``family`` at ``point``, with canonical global phases.

    Raises
    ------
    OutOfRange
        If a parameter is missing or outside its range (``theta`` and ``phi``
        in ``[0, 2 pi)``, ``a`` in ``[0, 1]``).
    """
    if family.name is FamilyName.M2:
        theta = _require(point, "theta", 0.0, 2.0 * math.pi, closed=False)
        cos, sin = math.cos(theta), math.sin(theta)
        r2, r3 = math.sqrt(2.0), math.sqrt(3.0)
        return [
            _basis([1, 0, 0], [0, cos, -sin], [0, sin, cos]),
            _basis([r2, r3, 1], [r2, 0, -2], [r2, -r3, 1]),
        ]
    if family.name is FamilyName.M3:
        a = _require(point, "a", 0.0, 1.0, closed=True)
        phi = _require(point, "phi", 0.0, 2.0 * math.pi, closed=False)
        phase = complex(math.cos(phi), math.sin(phi))
        ra, rb = math.sqrt(a), math.sqrt(1.0 - a)
        return [
            _basis([1, 0, 0], [0, 1, 0], [0, 0, 1]),
            _basis([1, 0, -1], [0, 1, 0], [1, 0, 1]),
            _basis([ra, phase * rb, 0], [rb, -phase * ra, 0], [0, 0, 1]),
        ]
    return [list(basis) for basis in family.bases]


@dataclass(frozen=True)
class SweepPoint:
    """Summary of one grid point; failed points carry ``error`` and NaN values."""

    parameters: Point
    q_optimal: float = math.nan
    h_minus: float = math.nan
    h_plus: float = math.nan
    gap: float = math.nan
    q_tsallis: float = math.nan
    q_renyi: float = math.nan
    converged: bool = False
    stop_reason: Optional[str] = None
    iterations: int = 0
    vertex_count_max: int = 0
    q_mu: Optional[float] = None
    q_cp: Optional[float] = None
    q_rpz: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    family: MeasurementFamily
    spec: EntropySpec
    config: SolverConfig
    points: tuple = field(default_factory=tuple)

    @property
    def parameter_grid(self) -> list[Point]:
        return [point.parameters for point in self.points]

    def column(self, name: str) -> np.ndarray:
        """One field of every point as a float array (``None`` becomes NaN)."""
        values = [getattr(point, name) for point in self.points]
        return np.array([math.nan if v is None else v for v in values], dtype=float)

    @property
    def q_optimal(self) -> np.ndarray:
        return self.column("q_optimal")

    @property
    def failures(self) -> list[SweepPoint]:
        return [point for point in self.points if point.error is not None]


def _solve_point(task) -> SweepPoint:
    family, point, config = task
    try:
        bases = build_family_bases(family, point)
        povm = combine_povms([pvm_from_basis(basis) for basis in bases])
        certificate = minimize_entropy(povm, config)
        bounds = eur_bounds_from_hmin(
            certificate.final_h_minus, len(bases), config.entropy
        )
        analytic = {}
        if len(bases) == 2:
            data = overlaps(bases[0], bases[1])
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                analytic = {
                    "q_mu": mu_bound(data),
                    "q_cp": cp_bound(data),
                    "q_rpz": rpz_bound(data),
                }
    except EurBoundsError as exc:
        logger.warning("sweep point %s failed: %s", point, exc)
        return SweepPoint(parameters=dict(point), error=f"{type(exc).__name__}: {exc}")

    return SweepPoint(
        parameters=dict(point),
        q_optimal=bounds.headline,
        h_minus=certificate.final_h_minus,
        h_plus=certificate.final_h_plus,
        gap=certificate.gap,
        q_tsallis=bounds.q_tsallis,
        q_renyi=bounds.q_renyi,
        converged=certificate.converged,
        stop_reason=certificate.stop_reason.value,
        iterations=certificate.iteration_count,
        vertex_count_max=certificate.max_vertex_count,
        **analytic,
    )


def _run(tasks: list, jobs: int) -> tuple:
    if jobs <= 1 or len(tasks) <= 1:
        return tuple(_solve_point(task) for task in tasks)
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return tuple(pool.map(_solve_point, tasks))


def sweep_bounds(
    family: MeasurementFamily,
    grid: Sequence[Point],
    spec: EntropySpec,
    config: SolverConfig,
    jobs: int = 1,
) -> SweepResult:
    """
    Solve every grid point of ``family`` for the entropy ``spec``.

    ``spec`` replaces ``config.entropy``. Points that raise an
    :class:`EurBoundsError` are recorded with their error and the sweep goes on.
    Two-basis families also get the closed-form MU, CP and RPZ bounds.
    """
    config = dataclasses.replace(config, entropy=spec)
    tasks = [(family, dict(point), config) for point in grid]
    logger.info(
        "sweeping %s over %d points with %d job(s)", family.name.value, len(tasks), jobs
    )
    points = _run(tasks, jobs)
    return SweepResult(family=family, spec=spec, config=config, points=points)


@dataclass(frozen=True)
class SteeringThreshold:
    eta: float
    clamped: bool


def steering_threshold(q_tsallis_2: float, n: int, d: int) -> SteeringThreshold:
    """
    Visibility ``sqrt(1 - d q / (N (d - 1)))`` below which an isotropic state
    admits a local hidden state model.

    The argument of the square root is clamped to ``[0, 1]``; ``clamped``
    reports whether that happened.

    Examples
    --------
    >>> steering_threshold(0.0, 2, 2)
    SteeringThreshold(eta=1.0, clamped=False)
    """
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 measurements and dimension d >= 2")
    argument = 1.0 - d * q_tsallis_2 / (n * (d - 1))
    clamped = not 0.0 <= argument <= 1.0
    eta = math.sqrt(min(max(argument, 0.0), 1.0))
    return SteeringThreshold(eta=eta, clamped=clamped)


@dataclass(frozen=True)
class SteeringResult:
    grid: list
    q_tsallis_2: np.ndarray
    eta_threshold: np.ndarray
    clamped: np.ndarray
    alpha: float
    n_measurements: int
    dim: int
    points: tuple = ()
    comparison_q: Optional[np.ndarray] = None
    comparison_eta: Optional[np.ndarray] = None


def _thresholds(q_values, n: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    eta = np.full(len(q_values), math.nan)
    clamped = np.zeros(len(q_values), dtype=bool)
    for index, q in enumerate(q_values):
        if math.isfinite(q):
            threshold = steering_threshold(q, n, d)
            eta[index], clamped[index] = threshold.eta, threshold.clamped
    return eta, clamped


def steering_sweep(
    family: MeasurementFamily,
    grid: Sequence[Point],
    config: SolverConfig,
    jobs: int = 1,
    comparison: Optional[Sequence[float]] = None,
) -> SteeringResult:
    """
    Steering thresholds from the optimal Tsallis-2 bounds over ``grid``.

    Parameters
    ----------
    comparison : sequence of float, optional
        An externally computed ``q_2^T`` per grid point (e.g. a majorization
        bound); its thresholds are reported alongside.
    """
    if comparison is not None and len(comparison) != len(grid):
        raise ValueError(
            f"comparison has {len(comparison)} values for {len(grid)} grid points"
        )
    spec = EntropySpec.tsallis(STEERING_ALPHA)
    sweep = sweep_bounds(family, grid, spec, config, jobs)
    n, d = family.n_measurements, family.dim
    q_values = sweep.column("q_tsallis")
    eta, clamped = _thresholds(q_values, n, d)

    comparison_q = comparison_eta = None
    if comparison is not None:
        comparison_q = np.asarray(comparison, dtype=float)
        comparison_eta, _ = _thresholds(comparison_q, n, d)
    return SteeringResult(
        grid=sweep.parameter_grid,
        q_tsallis_2=q_values,
        eta_threshold=eta,
        clamped=clamped,
        alpha=STEERING_ALPHA,
        n_measurements=n,
        dim=d,
        points=sweep.points,
        comparison_q=comparison_q,
        comparison_eta=comparison_eta,
    )
