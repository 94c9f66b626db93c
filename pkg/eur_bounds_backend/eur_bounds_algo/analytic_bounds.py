"""
Closed-form entropic uncertainty bounds for two orthonormal bases.

All values are in nats.
"""

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .config.solver_defaults import BASIS_ORTHONORMALITY_TOL
from .exceptions import DegenerateOverlapWarning, NotOrthonormal
from .quantum_core import Basis

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OverlapData:
    """
    Attributes
    ----------
    c : float
        Largest squared overlap ``max |<a_i|b_j>|^2``.
    c2 : float
        Second entry of all ``d^2`` squared overlaps sorted in descending
        order, so ties give ``c2 = c``.
    b : float
        ``(1 + sqrt(c)) / 2``.
    """

    c: float
    c2: float
    b: float


def _basis_matrix(basis: Basis, label: str) -> np.ndarray:
    vectors = [
        np.asarray(getattr(v, "amplitudes", v), dtype=np.complex128) for v in basis
    ]
    if not vectors:
        raise NotOrthonormal(f"basis {label} is empty")
    matrix = np.column_stack(vectors)
    d = matrix.shape[0]
    if matrix.shape != (d, d):
        raise NotOrthonormal(
            f"basis {label} has {matrix.shape[1]} vectors in dimension {d}"
        )
    deviation = np.max(np.abs(matrix.conj().T @ matrix - np.eye(d)))
    if deviation > BASIS_ORTHONORMALITY_TOL:
        raise NotOrthonormal(
            f"basis {label} deviates from orthonormal by {deviation:.3e}"
        )
    return matrix


def overlaps(basis_a: Basis, basis_b: Basis) -> OverlapData:
    """
    Overlap data of two orthonormal bases.

    Raises
    ------
    NotOrthonormal
        If either basis is not orthonormal within 1e-10, or the dimensions differ.

    Examples
    --------
    >>> z = [PureState.basis_state(2, 0), PureState.basis_state(2, 1)]
    >>> overlaps(z, z)
    OverlapData(c=1.0, c2=1.0, b=1.0)
    """
    a = _basis_matrix(basis_a, "A")
    b = _basis_matrix(basis_b, "B")
    if a.shape != b.shape:
        raise NotOrthonormal(f"bases have dimensions {a.shape[0]} and {b.shape[0]}")
    squared = np.abs(a.conj().T @ b) ** 2
    ranked = np.sort(squared, axis=None)[::-1]
    c = float(ranked[0])
    return OverlapData(c=c, c2=float(ranked[1]), b=(1.0 + math.sqrt(c)) / 2.0)


def mu_bound(ov: OverlapData) -> float:
    """``-ln c``."""
    return -math.log(ov.c)


def _degenerate(ov: OverlapData, name: str) -> bool:
    if ov.c2 > 0:
        return False
    warnings.warn(
        f"c2 = 0: {name} bound undefined, returning the MU value",
        DegenerateOverlapWarning,
        stacklevel=3,
    )
    return True


def cp_bound(ov: OverlapData) -> float:
    """
    ``ln(1/c) + (1 - sqrt(c)) ln(c / c2) / 2``.

    Issues :class:`DegenerateOverlapWarning` and returns :func:`mu_bound` when
    ``c2 = 0``.
    """
    if _degenerate(ov, "CP"):
        return mu_bound(ov)
    return -math.log(ov.c) + 0.5 * (1.0 - math.sqrt(ov.c)) * math.log(ov.c / ov.c2)


def rpz_bound(ov: OverlapData) -> float:
    """
    ``ln(1/c) - ln(b^2 + (c2 / c)(1 - b^2))``.

    Same ``c2 = 0`` handling as :func:`cp_bound`.
    """
    if _degenerate(ov, "RPZ"):
        return mu_bound(ov)
    b_sq = ov.b * ov.b
    return -math.log(ov.c) - math.log(b_sq + (ov.c2 / ov.c) * (1.0 - b_sq))
