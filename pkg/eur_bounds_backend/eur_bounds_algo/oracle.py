"""
Slow reference computations used to check the solver and the polytope engine.

Nothing here shares code with the solver's gradient or cutting-plane paths:
the entropy search only evaluates the entropy, and vertex enumeration solves
every square active-constraint system.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config.solver_defaults import (
    ACTIVITY_TOL,
    BRUTE_FORCE_MAX_DIM,
    DEDUP_TOL,
    ORACLE_MAX_DIM,
    ORACLE_MIN_SAMPLES,
    ORACLE_MIN_STEP,
    ORACLE_REFINED_STARTS,
    ORACLE_RELATIVE_IMPROVEMENT,
)
from .entropy import EntropySpec, entropy_values
from .exceptions import DimensionTooLarge
from .polytope import HalfSpace, bounding_box, merge_close
from .quantum_core import Povm, PureState

logger = logging.getLogger(__name__)

INITIAL_STEP = 0.1
MAX_SWEEPS = 5000


@dataclass(frozen=True, eq=False)
class OracleResult:
    """An upper bound ``h_estimate`` on h(E), attained by ``best_state``."""

    h_estimate: float
    best_state: PureState
    samples: int
    refinement_steps: int


def _born(povm: Povm, states: np.ndarray) -> np.ndarray:
    rows = np.einsum("si,mij,sj->sm", states.conj(), povm.elements, states).real
    rows = np.clip(rows, 0.0, None)
    return rows / rows.sum(axis=1, keepdims=True)


def _entropy_of(povm: Povm, spec: EntropySpec, coordinates: np.ndarray) -> float:
    d = povm.dim
    psi = coordinates[:d] + 1.0j * coordinates[d:]
    psi = psi / np.linalg.norm(psi)
    return float(entropy_values(spec, _born(povm, psi[None, :]), check=False)[0])


def _refine(povm: Povm, spec: EntropySpec, start: np.ndarray):
    coordinates = np.concatenate([start.real, start.imag])
    value = _entropy_of(povm, spec, coordinates)
    step, evaluations = INITIAL_STEP, 0
    for _ in range(MAX_SWEEPS):
        if step < ORACLE_MIN_STEP:
            break
        before = value
        for axis in range(coordinates.size):
            for sign in (1.0, -1.0):
                trial = coordinates.copy()
                trial[axis] += sign * step
                candidate = _entropy_of(povm, spec, trial)
                evaluations += 1
                if candidate < value:
                    coordinates, value = trial, candidate
                    break
        # only the step floor ends the search
        if before - value <= ORACLE_RELATIVE_IMPROVEMENT * abs(before):
            step /= 2.0
    d = povm.dim
    return value, coordinates[:d] + 1.0j * coordinates[d:], evaluations


def brute_force_min_entropy(
    povm: Povm, spec: EntropySpec, samples: int, seed: int
) -> OracleResult:
    """
    Smallest entropy over ``samples`` random pure states, locally refined.

    The five best samples are refined by coordinate search on the real and
    imaginary parts of the amplitudes. A sweep that gains less than 1e-10
    (relative) halves the step, and the search runs until the step is below
    1e-9. The result is an upper bound on the true minimum.

    Raises
    ------
    DimensionTooLarge
        If ``povm.dim`` exceeds 6.
    ValueError
        If fewer than 1000 samples are requested.
    """
    if povm.dim > ORACLE_MAX_DIM:
        raise DimensionTooLarge(
            f"brute-force oracle accepts d <= {ORACLE_MAX_DIM}, got {povm.dim}"
        )
    if samples < ORACLE_MIN_SAMPLES:
        raise ValueError(f"need at least {ORACLE_MIN_SAMPLES} samples, got {samples}")

    rng = np.random.Generator(np.random.PCG64(seed))
    shape = (samples, povm.dim)
    states = rng.standard_normal(shape) + 1.0j * rng.standard_normal(shape)
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    values = entropy_values(spec, _born(povm, states), check=False)

    best_value, best_vector, total_steps = np.inf, None, 0
    for index in np.argsort(values, kind="stable")[:ORACLE_REFINED_STARTS]:
        value, vector, steps = _refine(povm, spec, states[index])
        total_steps += steps
        if value < best_value:
            best_value, best_vector = value, vector
    logger.debug(
        "oracle: %d samples, %d refinement evaluations, h <= %.12g",
        samples,
        total_steps,
        best_value,
    )
    return OracleResult(
        h_estimate=float(best_value),
        best_state=PureState.from_vector(best_vector),
        samples=samples,
        refinement_steps=total_steps,
    )


def brute_force_vertices(halfspaces: Sequence[HalfSpace], r: int) -> np.ndarray:
    """
    Vertices of ``{z : <a_k, z> <= b_k}`` from all ``C(n, r)`` active sets.

    Raises
    ------
    DimensionTooLarge
        If ``r`` exceeds 6.
    Unbounded
        If the system does not describe a bounded set.

    Examples
    --------
    >>> square = [HalfSpace.normalized(n, 1.0) for n in ([1, 0], [-1, 0], [0, 1], [0, -1])]
    >>> len(brute_force_vertices(square, 2))
    4
    """
    if r > BRUTE_FORCE_MAX_DIM:
        raise DimensionTooLarge(
            f"brute-force enumeration accepts r <= {BRUTE_FORCE_MAX_DIM}"
        )
    normals = np.array([h.normal for h in halfspaces], dtype=float).reshape(-1, r)
    offsets = np.array([h.offset for h in halfspaces], dtype=float)
    bounding_box(normals, offsets)

    found, singular = [], 0
    for subset in itertools.combinations(range(len(offsets)), r):
        system = normals[list(subset)]
        if np.linalg.matrix_rank(system) < r:
            singular += 1
            continue
        point = np.linalg.solve(system, offsets[list(subset)])
        if np.all(normals @ point <= offsets + ACTIVITY_TOL):
            found.append(point)
    if singular:
        logger.debug("skipped %d singular active sets", singular)
    if not found:
        return np.empty((0, r))
    return merge_close(np.asarray(found), DEDUP_TOL)
