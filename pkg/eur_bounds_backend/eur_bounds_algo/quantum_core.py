"""
Dense Hermitian linear algebra for finite-dimensional measurements.

This module holds the value types the solver works with (POVMs, pure states,
generator bases) and the spectral primitives everything else is built on.
All values are immutable after construction; every function is a pure
function of its inputs and an explicit seed.

Generator ordering
------------------
The generalized Gell-Mann matrices are returned in a fixed order so that
Bloch vectors and the matrix ``M`` are reproducible:

1. symmetric pairs ``E_jk + E_kj`` for ``j < k``,
2. antisymmetric pairs ``-i E_jk + i E_kj`` for ``j < k``,
3. diagonal ``sqrt(2 / (l (l + 1))) (sum_{n<l} E_nn - l E_ll)`` for ``l = 1..d-1``,

each block in index-lexicographic order. For ``d = 2`` this gives
``(sigma_x, sigma_y, sigma_z)``.

Random measurements
-------------------
:func:`random_haar_povm` draws ``m`` complex Ginibre matrices ``A_i`` from a
``numpy.random.PCG64`` generator (real parts first, then imaginary parts),
sets ``G_i = A_i A_i^dagger``, ``S = sum G_i`` and returns
``E_i = S^{-1/2} G_i S^{-1/2}``.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .config.solver_defaults import (
    COMPLETENESS_TOL,
    NORMALIZATION_TOL,
    POSITIVITY_TOL,
)
from .exceptions import (
    ConvergenceFailure,
    DimensionMismatch,
    NotComplete,
    NotPositive,
)

logger = logging.getLogger(__name__)

HermitianMatrix = np.ndarray
"""A d x d complex array equal to its conjugate transpose (after :func:`hermitize`)."""


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PureState:
    """
    A normalized state vector.

    Parameters
    ----------
    amplitudes : array_like
        Complex d-vector with unit norm (within 1e-12).
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if amplitudes.ndim != 1 or amplitudes.size == 0:
            raise DimensionMismatch("a pure state must be a non-empty vector")
        norm_sq = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm_sq - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm_sq!r}")
        object.__setattr__(self, "amplitudes", _frozen(amplitudes))

    @classmethod
    def from_vector(cls, vector) -> "PureState":
        """Normalize ``vector`` and fix its global phase (see :func:`canonical_phase`)."""
        vector = np.asarray(vector, dtype=np.complex128)
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(canonical_phase(vector / norm))

    @classmethod
    def basis_state(cls, dim: int, index: int) -> "PureState":
        amplitudes = np.zeros(dim, dtype=np.complex128)
        amplitudes[index] = 1.0
        return cls(amplitudes)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class Povm:
    """
    A validated measurement: positive elements summing to the identity.

    Build instances through :func:`validate_povm`, :func:`combine_povms`,
    :func:`pvm_from_basis` or :func:`random_haar_povm`.

    Attributes
    ----------
    elements : numpy.ndarray
        Read-only array of shape ``(m, d, d)``.
    """

    elements: np.ndarray

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @property
    def num_outcomes(self) -> int:
        return self.elements.shape[0]

    def __len__(self) -> int:
        return self.num_outcomes


@dataclass(frozen=True, eq=False)
class GeneratorBasis:
    """The d^2 - 1 traceless generators with Tr[pi_mu pi_nu] = 2 delta_mu_nu."""

    dim: int
    generators: np.ndarray


Basis = Sequence[PureState]


def hermitize(matrix) -> HermitianMatrix:
    """
    Return ``(H + H^dagger) / 2`` as a complex array.

    Raises
    ------
    DimensionMismatch
        If ``matrix`` is not square.
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {matrix.shape}")
    return (matrix + matrix.conj().T) / 2


def canonical_phase(vector) -> np.ndarray:
    """
    Rotate the global phase so the first nonzero amplitude is real and non-negative.

    Examples
    --------
    >>> canonical_phase(np.array([0, 1j]))
    array([0.+0.j, 1.+0.j])
    """
    vector = np.asarray(vector, dtype=np.complex128)
    nonzero = np.flatnonzero(np.abs(vector) > 1e-12)
    if nonzero.size == 0:
        return vector.copy()
    pivot = vector[nonzero[0]]
    rotated = vector * (abs(pivot) / pivot)
    rotated[nonzero[0]] = abs(pivot)
    return rotated


def validate_povm(elements) -> Povm:
    """
    Validate a list of matrices as a POVM.

    Elements are symmetrized before the checks, which tolerates the
    1e-12-level asymmetry left by parsing text files.

    Parameters
    ----------
    elements : sequence of array_like
        The candidate elements, all d x d.

    Returns
    -------
    Povm

    Raises
    ------
    DimensionMismatch
        If elements are not square or not all of the same size.
    NotPositive
        If some element has an eigenvalue below -1e-10.
    NotComplete
        If the elements do not sum to the identity (Frobenius norm 1e-10), or
        fewer than two elements are given.
    """
    elements = [np.asarray(element, dtype=np.complex128) for element in elements]
    if len(elements) < 2:
        raise NotComplete("a POVM needs at least two elements")
    symmetrized = [hermitize(element) for element in elements]
    dim = symmetrized[0].shape[0]
    for index, element in enumerate(symmetrized):
        if element.shape != (dim, dim):
            raise DimensionMismatch(
                f"element {index} has shape {element.shape}, expected {(dim, dim)}"
            )
    stacked = np.stack(symmetrized)

    for index, element in enumerate(stacked):
        smallest = scipy.linalg.eigvalsh(element, subset_by_index=[0, 0])[0]
        if smallest < -POSITIVITY_TOL:
            raise NotPositive(
                f"element {index} has eigenvalue {smallest:.3e} < -{POSITIVITY_TOL}"
            )

    deviation = np.linalg.norm(stacked.sum(axis=0) - np.eye(dim), ord="fro")
    if deviation > COMPLETENESS_TOL:
        raise NotComplete(f"elements sum to identity only within {deviation:.3e}")

    return Povm(_frozen(stacked))


def combine_povms(povms: Sequence[Povm]) -> Povm:
    """
    Build the effective POVM of ``N`` measurements.

    Every element is scaled by ``1/N`` and the lists are concatenated in input
    order, so the entropy of the result is the entropy of the concatenated,
    rescaled outcome distributions.

    Raises
    ------
    DimensionMismatch
        If the measurements act on different dimensions.
    """
    povms = list(povms)
    if not povms:
        raise ValueError("need at least one measurement to combine")
    dim = povms[0].dim
    for index, povm in enumerate(povms):
        if povm.dim != dim:
            raise DimensionMismatch(
                f"measurement {index} acts on dimension {povm.dim}, expected {dim}"
            )
    if len(povms) == 1:
        return povms[0]
    scaled = np.concatenate([povm.elements for povm in povms]) / len(povms)
    return Povm(_frozen(scaled))


def pvm_from_basis(basis: Basis) -> Povm:
    """Return the projective measurement ``{|v><v|}`` of an orthonormal basis."""
    vectors = [
        np.asarray(getattr(v, "amplitudes", v), dtype=np.complex128) for v in basis
    ]
    return validate_povm([np.outer(v, v.conj()) for v in vectors])


def gell_mann_basis(d: int) -> GeneratorBasis:
    """
    Generalized Gell-Mann matrices in the documented order.

    Parameters
    ----------
    d : int
        Hilbert-space dimension, at least 2.

    Returns
    -------
    GeneratorBasis
        ``d^2 - 1`` traceless Hermitian matrices with
        ``Tr[pi_mu pi_nu] = 2 delta_mu_nu``.
    """
    if d < 2:
        raise ValueError("generators exist for d >= 2 only")
    rows, cols = np.triu_indices(d, k=1)
    n_pairs = rows.size
    generators = np.zeros((d * d - 1, d, d), dtype=np.complex128)
    pair = np.arange(n_pairs)

    generators[pair, rows, cols] = 1.0
    generators[pair, cols, rows] = 1.0

    generators[n_pairs + pair, rows, cols] = -1.0j
    generators[n_pairs + pair, cols, rows] = 1.0j

    for level in range(1, d):
        diagonal = np.zeros(d)
        diagonal[:level] = 1.0
        diagonal[level] = -level
        generators[2 * n_pairs + level - 1] = np.diag(
            np.sqrt(2.0 / (level * (level + 1))) * diagonal
        )
    return GeneratorBasis(dim=d, generators=_frozen(generators))


def bloch_coefficients(matrices) -> np.ndarray:
    """
    Compute ``Tr[X pi_nu]`` for every generator without materializing them.

    Parameters
    ----------
    matrices : array_like
        Array of shape ``(..., d, d)``; Hermitian inputs give real results.

    Returns
    -------
    numpy.ndarray
        Real array of shape ``(..., d^2 - 1)`` in the documented generator order.
    """
    matrices = np.asarray(matrices, dtype=np.complex128)
    d = matrices.shape[-1]
    rows, cols = np.triu_indices(d, k=1)
    upper = matrices[..., rows, cols]
    lower = matrices[..., cols, rows]
    symmetric = upper + lower
    antisymmetric = 1.0j * (upper - lower)

    diagonal = np.real(np.diagonal(matrices, axis1=-2, axis2=-1))
    levels = np.arange(1, d)
    partial = np.cumsum(diagonal, axis=-1)[..., :-1]
    weights = np.sqrt(2.0 / (levels * (levels + 1)))
    diagonal_part = weights * (partial - levels * diagonal[..., 1:])

    return np.concatenate(
        [np.real(symmetric), np.real(antisymmetric), diagonal_part], axis=-1
    )


def matrix_from_bloch(vector, d: int) -> np.ndarray:
    """
    Inverse of :func:`bloch_coefficients` up to the factor 2: ``sum_nu r_nu pi_nu``.
    """
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (d * d - 1,):
        raise DimensionMismatch(
            f"expected {d * d - 1} coefficients, got {vector.shape}"
        )
    rows, cols = np.triu_indices(d, k=1)
    n_pairs = rows.size
    symmetric = vector[:n_pairs]
    antisymmetric = vector[n_pairs : 2 * n_pairs]
    diagonal_part = vector[2 * n_pairs :]

    matrix = np.zeros((d, d), dtype=np.complex128)
    matrix[rows, cols] = symmetric - 1.0j * antisymmetric
    matrix[cols, rows] = symmetric + 1.0j * antisymmetric
    levels = np.arange(1, d)
    weights = np.sqrt(2.0 / (levels * (levels + 1))) * diagonal_part
    diagonal = np.zeros(d)
    # level l contributes weight to entries 0..l-1 and -l * weight to entry l
    diagonal[: d - 1] += np.cumsum(weights[::-1])[::-1]
    diagonal[1:] -= levels * weights
    matrix[np.arange(d), np.arange(d)] += diagonal
    return matrix


def weighted_sum(povm: Povm, weights) -> HermitianMatrix:
    """The observable ``Omega(u) = sum_i u_i E_i``."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (povm.num_outcomes,):
        raise DimensionMismatch(
            f"expected {povm.num_outcomes} weights, got shape {weights.shape}"
        )
    return np.tensordot(weights, povm.elements, axes=1)


def probabilities(povm: Povm, state: PureState) -> np.ndarray:
    """
    Born-rule outcome probabilities ``<psi|E_mu|psi>``, clamped to [0, 1].

    Raises
    ------
    DimensionMismatch
        If the state and measurement dimensions differ.
    """
    if state.dim != povm.dim:
        raise DimensionMismatch(
            f"state has dimension {state.dim}, measurement {povm.dim}"
        )
    psi = state.amplitudes
    values = np.einsum("i,mij,j->m", psi.conj(), povm.elements, psi).real
    return np.clip(values, 0.0, 1.0)


def _extreme_eigenpair(matrix, largest: bool) -> tuple[float, PureState]:
    matrix = hermitize(matrix)
    index = matrix.shape[0] - 1 if largest else 0
    try:
        values, vectors = scipy.linalg.eigh(matrix, subset_by_index=[index, index])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"eigensolver failed: {exc}") from exc
    vector = vectors[:, 0]
    vector = vector / np.linalg.norm(vector)
    return float(values[0]), PureState(canonical_phase(vector))


def max_eigen(h) -> tuple[float, PureState]:
    """
    Largest eigenvalue and a unit eigenvector of a Hermitian matrix.

    The eigenvector's global phase is fixed by :func:`canonical_phase`, so the
    result is deterministic for a given input.

    Raises
    ------
    ConvergenceFailure
        If LAPACK reports non-convergence.
    """
    return _extreme_eigenpair(h, largest=True)


def min_eigen(h) -> tuple[float, PureState]:
    """Smallest eigenvalue and eigenvector; same contract as :func:`max_eigen`."""
    return _extreme_eigenpair(h, largest=False)


def spectral_range(h) -> tuple[float, float]:
    """Return ``(lambda_min, lambda_max)`` from one dense eigenvalue solve."""
    try:
        values = scipy.linalg.eigvalsh(hermitize(h))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"eigensolver failed: {exc}") from exc
    return float(values[0]), float(values[-1])


def random_haar_povm(d: int, m: int, seed: int) -> Povm:
    """
    Random POVM from the Ginibre construction described in the module docstring.

    Parameters
    ----------
    d : int
        Hilbert-space dimension, at least 2.
    m : int
        Number of outcomes, at least 2.
    seed : int
        Seed for ``numpy.random.PCG64``; equal seeds give bitwise-equal output.
    """
    if d < 2 or m < 2:
        raise ValueError("random POVMs need d >= 2 and m >= 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    real = rng.standard_normal((m, d, d))
    imag = rng.standard_normal((m, d, d))
    ginibre = (real + 1.0j * imag) / np.sqrt(2.0)
    grams = ginibre @ ginibre.conj().transpose(0, 2, 1)
    total = grams.sum(axis=0)
    eigenvalues, eigenvectors = scipy.linalg.eigh(hermitize(total))
    inv_sqrt = (eigenvectors / np.sqrt(eigenvalues)) @ eigenvectors.conj().T
    elements = inv_sqrt @ grams @ inv_sqrt
    logger.debug("drew random POVM d=%d m=%d seed=%d", d, m, seed)
    return validate_povm(list(elements))
