"""
Outer-approximating polytopes in reduced coordinates.

A :class:`Polytope` keeps an H-representation (half-spaces ``<a, z> <= b`` with
unit normals) together with a cached V-representation. Vertices are maintained
by the incremental double-description step: when a cut arrives, vertices are
split into kept and cut ones, and a new vertex is placed on the cutting
hyperplane for every adjacent (kept, cut) pair. Two vertices are adjacent when
their common active constraints have rank ``r - 1``.

The first enumeration starts from a frame box around the LP bounding box of
the polytope and inserts the constraints one by one. Frame faces never touch
the final vertices; if one does, the system is unbounded.
"""

import itertools
import logging
import threading
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import linprog

from .config.solver_defaults import (
    ACTIVITY_TOL,
    DEDUP_TOL,
    DUPLICATE_NORMAL_TOL,
    DUPLICATE_OFFSET_TOL,
    FRAME_MARGIN,
    VERTEX_LIMIT,
)
from .exceptions import (
    DegenerateMeasurement,
    DimensionMismatch,
    EmptyPolytope,
    TooManyVertices,
    Unbounded,
)
from .probability_geometry import AffineModel
from .quantum_core import Povm, spectral_range

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """The constraint ``<normal, z> <= offset`` with ``|normal| = 1``."""

    normal: np.ndarray
    offset: float

    @classmethod
    def normalized(cls, normal, offset: float) -> "HalfSpace":
        normal = np.asarray(normal, dtype=float)
        norm = np.linalg.norm(normal)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("half-space normal must be nonzero and finite")
        unit = normal / norm
        unit.setflags(write=False)
        return cls(normal=unit, offset=float(offset) / norm)

    def slack(self, points) -> np.ndarray:
        return self.offset - np.asarray(points, dtype=float) @ self.normal


def bounding_box(normals, offsets) -> tuple[np.ndarray, np.ndarray]:
    """
    Coordinate-wise bounds of ``{z : A z <= b}`` from ``2 r`` linear programs.

    Raises
    ------
    EmptyPolytope
        If the system is infeasible.
    Unbounded
        If some coordinate is unbounded.
    """
    normals = np.asarray(normals, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    dim = normals.shape[1]
    lower = np.empty(dim)
    upper = np.empty(dim)
    for axis in range(dim):
        for sign, target in ((1.0, lower), (-1.0, upper)):
            cost = np.zeros(dim)
            cost[axis] = sign
            result = linprog(
                cost,
                A_ub=normals,
                b_ub=offsets,
                bounds=[(None, None)] * dim,
                method="highs",
            )
            if result.status == 2:
                raise EmptyPolytope("half-space system is infeasible")
            if result.status == 3:
                raise Unbounded(f"coordinate {axis} is unbounded")
            if result.status != 0:
                raise Unbounded(f"bounding LP failed: {result.message}")
            target[axis] = sign * result.fun
    return lower, upper


def _box_vertices(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    corners = itertools.product(*zip(lower, upper))
    return np.array(list(corners), dtype=float)


def merge_close(points: np.ndarray, tol: float) -> np.ndarray:
    kept: list[np.ndarray] = []
    for point in points:
        if kept and np.min(np.linalg.norm(np.asarray(kept) - point, axis=1)) <= tol:
            continue
        kept.append(point)
    return np.asarray(kept, dtype=float).reshape(-1, points.shape[1])


class Polytope:
    """
    Bounded polytope ``{z in R^r : A z <= b}`` with an incremental vertex cache.

    Mutation (:meth:`add_cut`, filling the cache) happens under a lock; the
    vertex arrays handed out are read-only snapshots.

    Parameters
    ----------
    dim : int
        Dimension ``r`` of the ambient space.
    halfspaces : iterable of HalfSpace, optional
        Initial constraints; duplicates are dropped.
    vertex_limit : int
        Enumeration raises :class:`TooManyVertices` beyond this many vertices.
    """

    def __init__(
        self,
        dim: int,
        halfspaces: Iterable[HalfSpace] = (),
        vertex_limit: int = VERTEX_LIMIT,
    ):
        if dim < 1:
            raise ValueError("polytope dimension must be at least 1")
        self.dim = dim
        self.vertex_limit = vertex_limit
        self.degenerate_skips = 0
        self._normals = np.empty((0, dim))
        self._offsets = np.empty(0)
        self._frame_count = 0
        self._vertices: Optional[np.ndarray] = None
        self._lock = threading.RLock()
        for halfspace in halfspaces:
            self.add_cut(halfspace)

    # -- H-representation --------------------------------------------------

    @property
    def halfspaces(self) -> list[HalfSpace]:
        """The constraints in insertion order (frame faces excluded)."""
        start = self._frame_count
        return [
            HalfSpace(normal=normal, offset=float(offset))
            for normal, offset in zip(self._normals[start:], self._offsets[start:])
        ]

    @property
    def constraint_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        start = self._frame_count
        return self._normals[start:].copy(), self._offsets[start:].copy()

    @property
    def vertex_cache_valid(self) -> bool:
        return self._vertices is not None

    def add_cut(self, halfspace: HalfSpace) -> bool:
        """
        Intersect the polytope with ``halfspace``.

        Returns
        -------
        bool
            ``False`` when the half-space duplicates an existing one (normals
            and offsets within 1e-10); the polytope is then left unchanged.

        Raises
        ------
        EmptyPolytope
            If the cut removes every vertex.
        TooManyVertices
            If the updated vertex set exceeds the vertex limit.
        """
        normal = np.asarray(halfspace.normal, dtype=float)
        if normal.shape != (self.dim,):
            raise DimensionMismatch(
                f"cut normal has shape {normal.shape}, polytope dimension is {self.dim}"
            )
        with self._lock:
            start = self._frame_count
            existing = self._normals[start:]
            if existing.size:
                same_normal = (
                    np.linalg.norm(existing - normal, axis=1) <= DUPLICATE_NORMAL_TOL
                )
                same_offset = (
                    np.abs(self._offsets[start:] - halfspace.offset)
                    <= DUPLICATE_OFFSET_TOL
                )
                if np.any(same_normal & same_offset):
                    return False

            # commit nothing until the vertex update has succeeded
            vertices = self._vertices
            if vertices is not None:
                vertices = self._cut(
                    vertices, self._normals, self._offsets, normal, halfspace.offset
                )
            self._normals = np.vstack([self._normals, normal])
            self._offsets = np.append(self._offsets, halfspace.offset)
            self._vertices = vertices
            return True

    # -- V-representation --------------------------------------------------

    def enumerate_vertices(self) -> np.ndarray:
        """
        All vertices, deduplicated to 1e-8, as a read-only ``(k, r)`` array.

        Raises
        ------
        Unbounded
            If the constraints do not bound the polytope.
        EmptyPolytope
            If the constraints are infeasible.
        TooManyVertices
            If the vertex count exceeds the limit.
        """
        with self._lock:
            if self._vertices is None:
                self._vertices = self._full_enumeration()
            return self._vertices

    @property
    def vertex_count(self) -> int:
        return self.enumerate_vertices().shape[0]

    def active_constraints(self, point) -> np.ndarray:
        """Indices (into :attr:`halfspaces`) of the constraints active at ``point``."""
        normals, offsets = self.constraint_matrix
        slack = offsets - normals @ np.asarray(point, dtype=float)
        return np.flatnonzero(slack <= ACTIVITY_TOL)

    def _full_enumeration(self) -> np.ndarray:
        start = self._frame_count
        normals = self._normals[start:]
        offsets = self._offsets[start:]
        if normals.shape[0] == 0:
            raise Unbounded("a polytope without constraints is unbounded")

        lower, upper = bounding_box(normals, offsets)
        padding = FRAME_MARGIN + 0.1 * (upper - lower)
        lower, upper = lower - padding, upper + padding

        identity = np.eye(self.dim)
        frame_normals = np.vstack([identity, -identity])
        frame_offsets = np.concatenate([upper, -lower])

        vertices = _box_vertices(lower, upper)
        prior_normals, prior_offsets = frame_normals, frame_offsets
        for normal, offset in zip(normals, offsets):
            vertices = self._cut(vertices, prior_normals, prior_offsets, normal, offset)
            prior_normals = np.vstack([prior_normals, normal])
            prior_offsets = np.append(prior_offsets, offset)

        frame_slack = frame_offsets - vertices @ frame_normals.T
        if np.any(frame_slack <= ACTIVITY_TOL):
            raise Unbounded("constraints do not bound the polytope")

        self._normals = prior_normals
        self._offsets = prior_offsets
        self._frame_count = frame_normals.shape[0]
        logger.debug(
            "enumerated %d vertices from %d constraints in dimension %d",
            vertices.shape[0],
            normals.shape[0],
            self.dim,
        )
        return vertices

    def _cut(self, vertices, prior_normals, prior_offsets, normal, offset):
        values = vertices @ normal - offset
        outside = values > ACTIVITY_TOL
        if not np.any(outside):
            return vertices
        if np.all(outside):
            raise EmptyPolytope("cut removes the whole polytope")
        inside = values < -ACTIVITY_TOL
        on_plane = ~outside & ~inside

        inside_vertices, outside_vertices = vertices[inside], vertices[outside]
        inside_values, outside_values = values[inside], values[outside]

        # shared constraints must be active at the cut-off vertex, so only
        # those columns are checked against the kept vertices
        out_slack = prior_offsets - outside_vertices @ prior_normals.T
        out_active = out_slack <= ACTIVITY_TOL
        columns = np.flatnonzero(out_active.any(axis=0))
        column_normals = prior_normals[columns]
        in_slack = prior_offsets[columns] - inside_vertices @ column_normals.T
        active_in = (in_slack <= ACTIVITY_TOL).astype(np.int32)
        active_out = out_active[:, columns].astype(np.int32)
        shared_counts = active_in @ active_out.T
        pair_in, pair_out = np.nonzero(shared_counts >= self.dim - 1)

        created = []
        for i, o in zip(pair_in, pair_out):
            if self.dim > 2:
                shared = (active_in[i] & active_out[o]).astype(bool)
                rank = np.linalg.matrix_rank(column_normals[shared], tol=1e-9)
                if rank < self.dim - 1:
                    self.degenerate_skips += 1
                    continue
            t = inside_values[i] / (inside_values[i] - outside_values[o])
            created.append(
                inside_vertices[i] + t * (outside_vertices[o] - inside_vertices[i])
            )

        plane_vertices = vertices[on_plane]
        if created:
            merged = merge_close(
                np.vstack([plane_vertices, np.asarray(created)]), DEDUP_TOL
            )
        else:
            merged = plane_vertices
        result = np.vstack([vertices[inside], merged])
        if result.shape[0] > self.vertex_limit:
            raise TooManyVertices(
                f"{result.shape[0]} vertices exceed the limit of {self.vertex_limit}"
            )
        if self.degenerate_skips:
            logger.debug("skipped %d degenerate vertex pairs", self.degenerate_skips)
        result.setflags(write=False)
        return result

    # -- diagnostics -------------------------------------------------------

    def dump_text(self) -> str:
        """Plain-text dump: one ``H`` line per constraint, one ``V`` line per vertex."""
        lines = []
        for halfspace in self.halfspaces:
            coefficients = " ".join(format(x, ".17g") for x in halfspace.normal)
            lines.append(f"H {coefficients} <= {halfspace.offset:.17g}")
        for vertex in self.enumerate_vertices():
            lines.append("V " + " ".join(format(x, ".17g") for x in vertex))
        return "\n".join(lines) + "\n"


def _spectral_halfspaces(normal, lower, upper, shift) -> list[HalfSpace]:
    # lower <= <e, p> <= upper with p = s + Q z, e an indicator vector
    if np.linalg.norm(normal) <= 1e-12:
        return []
    return [
        HalfSpace.normalized(normal, upper - shift),
        HalfSpace.normalized(-normal, shift - lower),
    ]


def initial_polytope(
    model: AffineModel,
    povm: Povm,
    use_pairs: bool = True,
    vertex_limit: int = VERTEX_LIMIT,
) -> Polytope:
    """
    Starting polytope from the spectral limits of the measurement operators.

    Box constraints ``lambda_min(E_i) <= p_i <= lambda_max(E_i)`` are always
    included; with ``use_pairs`` the pair constraints
    ``lambda_min(E_i + E_j) <= p_i + p_j <= lambda_max(E_i + E_j)`` are added
    for all ``i < j``. Rows of ``Q`` that vanish give constraints independent
    of ``z`` and are skipped.

    Raises
    ------
    DegenerateMeasurement
        If the model has rank 0 (callers handle this case before).
    Unbounded
        If the constraints fail to bound z-space.
    """
    if model.reduced_rank < 1:
        raise DegenerateMeasurement(model.center)
    basis = model.basis
    center = model.center
    elements = povm.elements
    halfspaces = []
    for i in range(povm.num_outcomes):
        lower, upper = spectral_range(elements[i])
        halfspaces += _spectral_halfspaces(basis[i], lower, upper, center[i])
    if use_pairs:
        for i, j in itertools.combinations(range(povm.num_outcomes), 2):
            lower, upper = spectral_range(elements[i] + elements[j])
            halfspaces += _spectral_halfspaces(
                basis[i] + basis[j], lower, upper, center[i] + center[j]
            )
    polytope = Polytope(model.reduced_rank, halfspaces, vertex_limit=vertex_limit)
    polytope.enumerate_vertices()
    logger.debug(
        "initial polytope: %d constraints, %d vertices",
        len(polytope.halfspaces),
        polytope.vertex_count,
    )
    return polytope
