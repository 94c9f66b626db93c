"""
Affine model of the quantum probability space.

For a POVM ``{E_mu}`` on a d-dimensional system the outcome distribution of a
state with Bloch vector ``r`` is ``p = s + M r`` with ``s_mu = Tr[E_mu] / d`` and
``M_mu_nu = Tr[E_mu pi_nu] / 2``. Writing ``M = U Sigma V^T`` and keeping the
first ``r = rank(M)`` left singular vectors as ``Q`` reduces the problem to
``p = s + Q z`` with ``z`` in R^r, which is where the polytope lives.

The support function of the set of distributions is a spectral quantity:
``sigma(u) = lambda_max(sum_i u_i E_i)``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config.solver_defaults import (
    ABSOLUTE_RANK_FLOOR,
    DENSE_BLOCH_COLUMN_LIMIT,
    RANK_TOLERANCE,
)
from .exceptions import DegenerateMeasurement, DimensionMismatch
from .quantum_core import (
    Povm,
    PureState,
    bloch_coefficients,
    matrix_from_bloch,
    max_eigen,
    probabilities,
    weighted_sum,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AffineModel:
    """
    The map ``z -> s + Q z`` onto the affine hull of the probability space.

    Attributes
    ----------
    povm : Povm
        The measurement the model describes.
    center : numpy.ndarray
        ``s``, the distribution of the maximally mixed state.
    basis : numpy.ndarray
        ``Q``, an ``m x r`` matrix with orthonormal columns spanning the range of M.
    singular_values : numpy.ndarray
        The ``r`` nonzero singular values of M, descending.
    bloch_map : numpy.ndarray or None
        ``M`` itself; ``None`` when it was too large to materialize and the
        factors came from the Gram matrix ``M M^T``.
    """

    povm: Povm
    center: np.ndarray
    basis: np.ndarray
    singular_values: np.ndarray
    bloch_map: Optional[np.ndarray] = None

    @property
    def reduced_rank(self) -> int:
        return self.basis.shape[1]

    @property
    def ellipsoid_semi_axes(self) -> np.ndarray:
        """Semi-axes ``sigma_i(M) sqrt(2 (d - 1) / d)`` of the enclosing ellipsoid."""
        d = self.povm.dim
        return self.singular_values * np.sqrt(2.0 * (d - 1) / d)


@dataclass(frozen=True, eq=False)
class SupportEvaluation:
    """``value = sigma_P(direction)``, attained by ``maximizer``."""

    direction: np.ndarray
    value: float
    maximizer: PureState


def _fix_signs(columns: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of every column positive, so Q is reproducible
    pivots = np.argmax(np.abs(columns), axis=0)
    signs = np.sign(columns[pivots, np.arange(columns.shape[1])])
    signs[signs == 0] = 1.0
    return columns * signs


def build_affine_model(povm: Povm, tol_rank: float = RANK_TOLERANCE) -> AffineModel:
    """
    Compute ``s``, ``M`` and the SVD reduction ``(Q, r)`` of a measurement.

    Parameters
    ----------
    povm : Povm
        A validated measurement.
    tol_rank : float
        Singular values above ``tol_rank * sigma_max`` count towards the rank.

    Returns
    -------
    AffineModel

    Raises
    ------
    DegenerateMeasurement
        If the rank is 0, i.e. the outcome distribution is the same for every
        state. The exception carries ``s`` so the caller can return ``H(s)``.
    """
    if tol_rank <= 0:
        raise ValueError("tol_rank must be positive")
    elements = povm.elements
    d = povm.dim
    center = np.real(np.trace(elements, axis1=1, axis2=2)) / d

    n_generators = d * d - 1
    relative_tol = tol_rank
    if n_generators <= DENSE_BLOCH_COLUMN_LIMIT:
        bloch_map = bloch_coefficients(elements) / 2.0
        left, sigma, _ = np.linalg.svd(bloch_map, full_matrices=False)
    else:
        # M M^T = (Tr[E_mu E_nu] - d s_mu s_nu) / 2 by completeness of the generators
        bloch_map = None
        overlaps = np.real(np.einsum("aij,bji->ab", elements, elements))
        gram = (overlaps - d * np.outer(center, center)) / 2.0
        eigenvalues, left = np.linalg.eigh(gram)
        order = np.argsort(eigenvalues)[::-1]
        eigenvalues, left = eigenvalues[order], left[:, order]
        sigma = np.sqrt(np.clip(eigenvalues, 0.0, None))
        # eigenvalues carry rounding noise of order eps * sigma_max^2
        relative_tol = math.sqrt(tol_rank)
        logger.debug(
            "used Gram factorization for d=%d (%d generators)", d, n_generators
        )

    if sigma.size == 0:
        rank = 0
    else:
        threshold = max(relative_tol * sigma[0], ABSOLUTE_RANK_FLOOR)
        rank = int(np.count_nonzero(sigma > threshold))
    if rank == 0:
        raise DegenerateMeasurement(center)

    basis = _fix_signs(left[:, :rank])
    center.setflags(write=False)
    basis.setflags(write=False)
    if bloch_map is not None:
        bloch_map.setflags(write=False)
    logger.debug("affine model: m=%d d=%d rank=%d", povm.num_outcomes, d, rank)
    return AffineModel(
        povm=povm,
        center=center,
        basis=basis,
        singular_values=sigma[:rank].copy(),
        bloch_map=bloch_map,
    )


def support_function(povm: Povm, u) -> SupportEvaluation:
    """
    Evaluate ``sigma_P(u) = lambda_max(sum_i u_i E_i)``.

    Raises
    ------
    DimensionMismatch
        If ``u`` does not have one entry per outcome.
    ConvergenceFailure
        Propagated from the eigensolver.
    """
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("support direction must be finite")
    value, maximizer = max_eigen(weighted_sum(povm, u))
    return SupportEvaluation(direction=u, value=value, maximizer=maximizer)


def z_to_probability(model: AffineModel, z) -> np.ndarray:
    """
    Return ``s + Q z``.

    The result sums to one for every ``z`` but may have negative entries when
    ``z`` lies outside the physical set, as polytope vertices can.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (model.reduced_rank,):
        raise DimensionMismatch(
            f"expected a {model.reduced_rank}-vector, got shape {z.shape}"
        )
    return model.center + model.basis @ z


def state_to_z(model: AffineModel, state: PureState) -> np.ndarray:
    """Reduced coordinates ``Q^T (p(psi) - s)`` of a pure state."""
    return model.basis.T @ (probabilities(model.povm, state) - model.center)


def bloch_vector(state: PureState) -> np.ndarray:
    """Bloch vector ``r_nu = Tr[rho pi_nu]`` of a pure state."""
    return bloch_coefficients(state.density_matrix())


def bloch_to_z(model: AffineModel, r) -> np.ndarray:
    """
    Map a Bloch vector to reduced coordinates, ``z = Q^T M r``.

    ``M r`` is evaluated as ``Tr[E_mu (r . pi)] / 2`` so it also works when
    ``M`` was not materialized.
    """
    d = model.povm.dim
    generator_sum = matrix_from_bloch(r, d)
    displacement = (
        np.real(np.einsum("mij,ji->m", model.povm.elements, generator_sum)) / 2.0
    )
    return model.basis.T @ displacement
