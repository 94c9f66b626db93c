"""
Numeric constants shared by the solver modules.

Tolerances are absolute unless stated otherwise. Values that users tune per
run (gap target, iteration cap, vertex limit) are also exposed through Django
settings; the constants here are the library-level defaults.
"""

import math

# =============================================================================
# Quantum core
# =============================================================================

HERMITIAN_TOL = 1e-12
"""Allowed |H - H^dagger| entry deviation after symmetrization"""

POSITIVITY_TOL = 1e-10
"""Smallest eigenvalue a POVM element may have (as -POSITIVITY_TOL)"""

COMPLETENESS_TOL = 1e-10
"""Frobenius-norm tolerance on sum(E) - I"""

NORMALIZATION_TOL = 1e-12
"""Allowed deviation of a pure state's squared norm from 1"""

PROBABILITY_SUM_TOL = 1e-10
"""Allowed deviation of Born-rule probabilities from summing to 1"""

# =============================================================================
# Probability geometry
# =============================================================================

RANK_TOLERANCE = 1e-10
"""Singular values above RANK_TOLERANCE * sigma_max count towards the reduced rank"""

ABSOLUTE_RANK_FLOOR = 1e-13
"""Singular values at or below this are zero regardless of sigma_max"""

DENSE_BLOCH_COLUMN_LIMIT = 10**6
"""Largest d^2 - 1 for which the m x (d^2 - 1) matrix M is materialized"""

# =============================================================================
# Polytope
# =============================================================================

ACTIVITY_TOL = 1e-8
"""Slack below which a half-space counts as active at a vertex"""

DEDUP_TOL = 1e-8
"""Vertices closer than this (Euclidean, z-space) are merged"""

DUPLICATE_NORMAL_TOL = 1e-10
"""Normals closer than this are the same direction when deduplicating cuts"""

DUPLICATE_OFFSET_TOL = 1e-10
"""Offsets closer than this are the same when deduplicating cuts"""

VERTEX_LIMIT = 10**6
"""Vertex enumeration aborts once the vertex set grows beyond this"""

FRAME_MARGIN = 0.5
"""Padding added around the LP bounding box used to seed vertex enumeration"""

BRUTE_FORCE_MAX_DIM = 6
"""Largest dimension accepted by the C(n, r) active-set enumeration"""

# =============================================================================
# Entropy
# =============================================================================

CLAMP_EPSILON = 1e-12
"""Probability floor used before differentiating entropies"""

DISTRIBUTION_NEGATIVITY_TOL = 1e-10
"""Entries above -DISTRIBUTION_NEGATIVITY_TOL are clamped to zero"""

DISTRIBUTION_SUM_TOL = 1e-8
"""Allowed deviation of a distribution's total mass from 1"""

# =============================================================================
# Solver
# =============================================================================

DEFAULT_EPSILON = 1e-6
"""Gap target h_plus - h_minus"""

DEFAULT_MAX_ITERATIONS = 500
"""Iteration cap for the outer-approximation loop"""

STALL_VIOLATION = 1e-12
"""A cut violated by less than this at the optimal vertex does not separate"""

STALL_IMPROVEMENT = 1e-14
"""h_minus changes smaller than this count as no progress"""

STALL_WINDOW = 10
"""Consecutive non-improving iterations tolerated before declaring a stall"""

TIE_TOL = 1e-10
"""Vertices within ``TIE_TOL * (1 + |h_minus|)`` of the minimum count as tied"""

TIED_CUT_LIMIT = 512
"""Most tied minimizing vertices cut off in one iteration"""

RENORMALIZE_TOL = 1e-8
"""Vertex probabilities are renormalized only when their sum is off by more"""

# =============================================================================
# Applications
# =============================================================================

M2_GRID_POINTS = 61
"""Default number of theta points on [0, pi] for the two-basis qutrit family"""

M3_GRID_POINTS = 31
"""Default number of points per axis of the (a, phi) grid for the three-basis family"""

M2_THETA_RANGE = (0.0, math.pi)
"""Default theta interval (inclusive) for the two-basis qutrit family"""

STEERING_ALPHA = 2.0
"""Tsallis order for which the isotropic-state steering criterion is closed-form"""

BASIS_ORTHONORMALITY_TOL = 1e-10
"""Allowed |<a_i|a_j> - delta_ij| for bases passed to overlap computations"""

# =============================================================================
# Oracle
# =============================================================================

ORACLE_MAX_DIM = 6
"""Largest Hilbert-space dimension the brute-force oracle accepts"""

ORACLE_MIN_SAMPLES = 1000
"""Smallest number of random states the oracle draws"""

ORACLE_REFINED_STARTS = 5
"""Number of best samples handed to local refinement"""

ORACLE_RELATIVE_IMPROVEMENT = 1e-10
"""A sweep improving the value by at most this (relative) halves the refinement step"""

ORACLE_MIN_STEP = 1e-9
"""Refinement stops once the coordinate step shrinks below this"""
