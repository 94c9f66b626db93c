"""
Outer-approximation minimization of a concave entropy over the outcome
distributions of a measurement.

Each iteration

1. enumerates the vertices of the current polytope and takes the one with the
   smallest entropy, which gives a lower bound ``h_minus``;
2. computes the gradient ``g`` of the entropy at that vertex and the ground
   state of ``Omega(g) = sum_i g_i E_i``; the entropy of the ground state's
   distribution is a physical value and hence an upper bound ``h_plus``;
3. if the gap is still above ``epsilon``, adds the supporting half-space of
   the probability set in direction ``-g``. Its offset is
   ``lambda_max(Omega(-g)) = -lambda_min(Omega(g))``, which the ground-state
   solve already produced, so one eigen-decomposition serves both steps.

Symmetric measurements often leave many vertices tied at the minimum. Cutting
one of them per iteration leaves ``h_minus`` flat until the last is gone, so
every tied minimizer (up to ``TIED_CUT_LIMIT``) is cut in the same iteration,
and an iteration that shrinks the tied set counts as progress.

The certificate keeps the best lower and upper bounds seen. Any ground state of
``Omega(g)`` gives a valid upper bound, so degenerate ground spaces only affect
which witness is reported, never validity.

Vertex probabilities can fall slightly outside the simplex because the
polytope is an outer approximation. Negative entries are clamped to 0 and the
vector renormalized when its mass is off by more than 1e-8; the perturbation
is bounded by the vertex dedup tolerance, well inside the gap target.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .config.solver_defaults import (
    DEFAULT_EPSILON,
    DEFAULT_MAX_ITERATIONS,
    RANK_TOLERANCE,
    RENORMALIZE_TOL,
    STALL_IMPROVEMENT,
    STALL_VIOLATION,
    STALL_WINDOW,
    TIE_TOL,
    TIED_CUT_LIMIT,
    VERTEX_LIMIT,
)
from .entropy import (
    EntropySpec,
    entropy_gradient,
    entropy_value,
    entropy_values,
    objective_to_family,
    solver_objective,
)
from .exceptions import DegenerateMeasurement
from .polytope import HalfSpace, Polytope, initial_polytope
from .probability_geometry import AffineModel, build_affine_model, z_to_probability
from .quantum_core import Povm, PureState, min_eigen, probabilities, weighted_sum

logger = logging.getLogger(__name__)


class StopReason(str, Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    STALL = "stall"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class SolverConfig:
    """
    Parameters of one :func:`minimize_entropy` run.

    Parameters
    ----------
    epsilon : float
        Target for ``h_plus - h_minus``, in the units of ``entropy``.
    max_iterations : int
        Iteration cap; reaching it returns valid but unconverged bounds.
    use_pair_constraints : bool
        Add the pairwise spectral constraints to the initial polytope.
    vertex_limit : int
        Abort with :class:`TooManyVertices` beyond this many vertices.
    entropy : EntropySpec
    rank_tolerance : float
        Relative singular-value cutoff for the reduced dimension.
    stall_window : int
        Consecutive iterations without lower-bound progress tolerated.
    multi_start : int
        Number of random directions whose ground states seed the upper bound.
    seed : int
        Seed for the multi-start directions.
    """

    epsilon: float = DEFAULT_EPSILON
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    use_pair_constraints: bool = True
    vertex_limit: int = VERTEX_LIMIT
    entropy: EntropySpec = field(default_factory=EntropySpec.shannon)
    rank_tolerance: float = RANK_TOLERANCE
    stall_window: int = STALL_WINDOW
    multi_start: int = 0
    seed: int = 0

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.vertex_limit < 1:
            raise ValueError("vertex_limit must be at least 1")
        if self.rank_tolerance <= 0:
            raise ValueError("rank_tolerance must be positive")
        if self.stall_window < 1:
            raise ValueError("stall_window must be at least 1")
        if self.multi_start < 0:
            raise ValueError("multi_start must be non-negative")

    def describe(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "max_iterations": self.max_iterations,
            "use_pair_constraints": self.use_pair_constraints,
            "vertex_limit": self.vertex_limit,
            "rank_tolerance": self.rank_tolerance,
            "stall_window": self.stall_window,
            "multi_start": self.multi_start,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class IterationRecord:
    """Bounds and witnesses of one iteration; ``gap = h_plus - h_minus``."""

    index: int
    h_minus: float
    h_plus: float
    gap: float
    optimal_vertex_z: np.ndarray
    witness_probabilities: np.ndarray
    cut_normal: Optional[np.ndarray]
    vertex_count: int


@dataclass(frozen=True, eq=False)
class BoundCertificate:
    """
    The bracket ``final_h_minus <= h(E) <= final_h_plus`` and how it was found.

    ``final_h_minus`` is the best lower bound and ``final_h_plus`` the best
    upper bound over all iterations; ``witness_state`` attains
    ``final_h_plus``.
    """

    config: SolverConfig
    iterations: tuple
    final_h_minus: float
    final_h_plus: float
    converged: bool
    witness_state: PureState
    witness_probabilities: np.ndarray
    stop_reason: StopReason
    reduced_rank: int
    ellipsoid_semi_axes: np.ndarray
    degenerate_skips: int = 0

    @property
    def gap(self) -> float:
        return self.final_h_plus - self.final_h_minus

    @property
    def iteration_count(self) -> int:
        return len(self.iterations)

    @property
    def max_vertex_count(self) -> int:
        return max((record.vertex_count for record in self.iterations), default=0)


@dataclass(frozen=True, eq=False)
class UpperBound:
    """Ground state of ``Omega(gradient)`` and the entropy of its distribution."""

    state: PureState
    h_plus: float
    probabilities: np.ndarray
    gradient: np.ndarray
    ground_energy: float


def clamp_probabilities(p) -> np.ndarray:
    """Clamp negative entries to 0; renormalize only if the mass is off by > 1e-8."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    total = p.sum(axis=-1, keepdims=True)
    if np.any(np.abs(total - 1.0) > RENORMALIZE_TOL):
        p = p / total
    return p


def lower_bound_step(
    poly: Polytope, model: AffineModel, spec: EntropySpec
) -> tuple[np.ndarray, float]:
    """
    Entropy-minimizing vertex of ``poly`` and its entropy.

    Ties go to the vertex with the lowest index.

    Returns
    -------
    tuple of (numpy.ndarray, float)
        ``(z_star, h_minus)``.
    """
    vertices, values = _vertex_entropies(poly, model, spec)
    best = int(np.argmin(values))
    return vertices[best].copy(), float(values[best])


def _vertex_entropies(poly: Polytope, model: AffineModel, spec: EntropySpec):
    vertices = poly.enumerate_vertices()
    rows = model.center + vertices @ model.basis.T
    return vertices, entropy_values(spec, clamp_probabilities(rows), check=False)


def _tied_minimizers(values: np.ndarray, best: int) -> np.ndarray:
    # indices other than ``best`` within TIE_TOL of the minimum, lowest first
    level = values[best]
    tied = np.flatnonzero(values <= level + TIE_TOL * (1.0 + abs(level)))
    return tied[tied != best]


def upper_bound_step(
    model: AffineModel, povm: Povm, z_star, spec: EntropySpec
) -> UpperBound:
    """
    Ground state of ``Omega(grad H(p(z_star)))`` and its entropy.

    Raises
    ------
    ConvergenceFailure
        Propagated from the eigensolver.
    """
    vertex_probabilities = clamp_probabilities(z_to_probability(model, z_star))
    gradient = entropy_gradient(spec, vertex_probabilities)
    energy, state = min_eigen(weighted_sum(povm, gradient))
    witness = probabilities(povm, state)
    return UpperBound(
        state=state,
        h_plus=entropy_value(spec, witness),
        probabilities=witness,
        gradient=gradient,
        ground_energy=energy,
    )


def _cut_from(model: AffineModel, upper: UpperBound) -> Optional[HalfSpace]:
    # <-g, s + Q z> <= lambda_max(Omega(-g)) = -lambda_min(Omega(g))
    normal = -(model.basis.T @ upper.gradient)
    if np.linalg.norm(normal) <= 1e-14:
        return None
    offset = -upper.ground_energy + float(upper.gradient @ model.center)
    return HalfSpace.normalized(normal, offset)


def _cut_tied(
    poly: Polytope, model: AffineModel, povm: Povm, spec: EntropySpec, vertices
) -> Optional[UpperBound]:
    """Cut off each of ``vertices``; returns the best upper bound met on the way."""
    best = None
    for z in vertices:
        upper = upper_bound_step(model, povm, z, spec)
        if best is None or upper.h_plus < best.h_plus:
            best = upper
        cut = _cut_from(model, upper)
        if cut is not None and -cut.slack(z) >= STALL_VIOLATION:
            poly.add_cut(cut)
    return best


def _multi_start(povm: Povm, spec: EntropySpec, count: int, seed: int):
    rng = np.random.Generator(np.random.PCG64(seed))
    best = None
    for _ in range(count):
        direction = rng.standard_normal(povm.num_outcomes)
        _, state = min_eigen(weighted_sum(povm, direction))
        witness = probabilities(povm, state)
        value = entropy_value(spec, witness)
        if best is None or value < best[0]:
            best = (value, state, witness)
    return best


def _degenerate_certificate(
    config: SolverConfig, povm: Povm, center: np.ndarray
) -> BoundCertificate:
    h = entropy_value(config.entropy, center)
    record = IterationRecord(
        index=1,
        h_minus=h,
        h_plus=h,
        gap=0.0,
        optimal_vertex_z=np.empty(0),
        witness_probabilities=np.array(center),
        cut_normal=None,
        vertex_count=1,
    )
    logger.info("measurement is state independent; h = H(s) = %.12g", h)
    return BoundCertificate(
        config=config,
        iterations=(record,),
        final_h_minus=h,
        final_h_plus=h,
        converged=True,
        witness_state=PureState.basis_state(povm.dim, 0),
        witness_probabilities=np.array(center),
        stop_reason=StopReason.DEGENERATE,
        reduced_rank=0,
        ellipsoid_semi_axes=np.empty(0),
    )


def minimize_entropy(
    povm: Povm,
    config: SolverConfig,
    polytope_hook: Optional[Callable[[int, Polytope], None]] = None,
) -> BoundCertificate:
    """
    Bracket the minimal entropy of ``povm``'s outcome distribution.

    Parameters
    ----------
    povm : Povm
        Usually the effective measurement from :func:`combine_povms`.
    config : SolverConfig
    polytope_hook : callable, optional
        Called as ``hook(iteration, polytope)`` after every iteration.

    Returns
    -------
    BoundCertificate
        ``converged`` is False when the run stopped at ``max_iterations`` or
        stalled; the bounds are valid either way.

    Raises
    ------
    TooManyVertices
        If the polytope outgrows ``config.vertex_limit``.
    ConvergenceFailure
        If an eigen-solve fails.

    Examples
    --------
    >>> z = pvm_from_basis([PureState.basis_state(2, 0), PureState.basis_state(2, 1)])
    >>> minimize_entropy(z, SolverConfig()).final_h_plus
    0.0
    """
    spec = config.entropy
    objective = solver_objective(spec)
    try:
        model = build_affine_model(povm, config.rank_tolerance)
    except DegenerateMeasurement as exc:
        return _degenerate_certificate(config, povm, exc.center)

    poly = initial_polytope(
        model, povm, config.use_pair_constraints, vertex_limit=config.vertex_limit
    )
    seeded = None
    if config.multi_start:
        seeded = _multi_start(povm, objective, config.multi_start, config.seed)

    records = []
    best_minus, best_plus = -math.inf, math.inf
    best_state, best_witness = None, None
    stop_reason = StopReason.MAX_ITERATIONS
    idle, tied_before = 0, math.inf

    for index in range(1, config.max_iterations + 1):
        vertices, values = _vertex_entropies(poly, model, objective)
        best_index = int(np.argmin(values))
        z_star, h_minus = vertices[best_index].copy(), float(values[best_index])
        tied = _tied_minimizers(values, best_index)
        upper = upper_bound_step(model, povm, z_star, objective)
        h_plus, state, witness = upper.h_plus, upper.state, upper.probabilities
        if index == 1 and seeded is not None and seeded[0] < h_plus:
            h_plus, state, witness = seeded

        h_minus = objective_to_family(spec, h_minus)
        h_plus = objective_to_family(spec, h_plus)
        if h_minus > best_minus + STALL_IMPROVEMENT or tied.size < tied_before:
            idle = 0
        else:
            idle += 1
        tied_before = tied.size
        best_minus = max(best_minus, h_minus)
        if h_plus < best_plus:
            best_plus, best_state, best_witness = h_plus, state, witness
        vertex_count = poly.vertex_count

        cut = None
        if best_plus - best_minus <= config.epsilon:
            stop_reason = StopReason.CONVERGED
        elif index < config.max_iterations:
            cut = _cut_from(model, upper)
            if cut is None or -cut.slack(z_star) < STALL_VIOLATION:
                cut, stop_reason = None, StopReason.STALL
            elif not poly.add_cut(cut):
                cut, stop_reason = None, StopReason.STALL
            else:
                others = vertices[tied[: TIED_CUT_LIMIT - 1]]
                extra = _cut_tied(poly, model, povm, objective, others)
                if extra is not None:
                    extra_plus = objective_to_family(spec, extra.h_plus)
                    if extra_plus < best_plus:
                        best_plus = extra_plus
                        best_state, best_witness = extra.state, extra.probabilities
                if idle >= config.stall_window:
                    stop_reason = StopReason.STALL

        records.append(
            IterationRecord(
                index=index,
                h_minus=h_minus,
                h_plus=h_plus,
                gap=h_plus - h_minus,
                optimal_vertex_z=z_star,
                witness_probabilities=witness,
                cut_normal=None if cut is None else cut.normal,
                vertex_count=vertex_count,
            )
        )
        logger.debug(
            "iteration %d: h_minus=%.12g h_plus=%.12g gap=%.3e vertices=%d",
            index,
            h_minus,
            h_plus,
            h_plus - h_minus,
            vertex_count,
        )
        if polytope_hook is not None:
            polytope_hook(index, poly)
        if cut is None and stop_reason is not StopReason.MAX_ITERATIONS:
            break
        if stop_reason is StopReason.STALL:
            break

    converged = stop_reason is StopReason.CONVERGED
    logger.info(
        "solver stopped (%s) after %d iterations: [%.12g, %.12g]",
        stop_reason.value,
        len(records),
        best_minus,
        best_plus,
    )
    return BoundCertificate(
        config=config,
        iterations=tuple(records),
        final_h_minus=best_minus,
        final_h_plus=best_plus,
        converged=converged,
        witness_state=best_state,
        witness_probabilities=best_witness,
        stop_reason=stop_reason,
        reduced_rank=model.reduced_rank,
        ellipsoid_semi_axes=model.ellipsoid_semi_axes,
        degenerate_skips=poly.degenerate_skips,
    )
