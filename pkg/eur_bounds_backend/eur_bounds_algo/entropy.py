"""
Shannon, Tsallis and Renyi entropies, their gradients, and the conversion from
the minimal entropy of a combined measurement to uncertainty-relation bounds.

All values are in nats.

For ``N`` measurements with outcome distributions ``p_1 .. p_N`` the combined
distribution is ``q = (p_1 (+) ... (+) p_N) / N``. The Tsallis entropies satisfy

    sum_i H_a^T(p_i) = N^a H_a^T(q) - (N - N^a) / (1 - a)

so the Tsallis bound is ``q_a^T = N^a h - (N - N^a) / (1 - a)``; for Renyi
entropies the bound on the combined distribution is ``h`` itself, and the
Shannon limit gives ``N h - N ln N``.

The solver needs a concave objective. Tsallis entropy is concave for every
order; Renyi entropy is not for ``a > 1``, so Renyi runs minimize the Tsallis
entropy of the same order and convert through the increasing map
``H^R = ln(1 + (1 - a) H^T) / (1 - a)`` (see :func:`solver_objective`).
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.special import entr

from .config.solver_defaults import (
    CLAMP_EPSILON,
    DISTRIBUTION_NEGATIVITY_TOL,
    DISTRIBUTION_SUM_TOL,
)
from .exceptions import InvalidDistribution, InvalidEntropySpec

logger = logging.getLogger(__name__)


class EntropyFamily(str, Enum):
    SHANNON = "shannon"
    TSALLIS = "tsallis"
    RENYI = "renyi"


@dataclass(frozen=True)
class EntropySpec:
    """
    Entropy family and order.

    Parameters
    ----------
    family : EntropyFamily or str
        ``"shannon"``, ``"tsallis"`` or ``"renyi"``.
    alpha : float, optional
        Order, required for Tsallis and Renyi; positive and different from 1.
    clamp_epsilon : float
        Probability floor applied before differentiating, in ``(0, 1e-6]``.
    """

    family: EntropyFamily = EntropyFamily.SHANNON
    alpha: Optional[float] = None
    clamp_epsilon: float = CLAMP_EPSILON

    def __post_init__(self):
        try:
            family = EntropyFamily(self.family)
        except ValueError as exc:
            raise InvalidEntropySpec(f"unknown entropy family {self.family!r}") from exc
        object.__setattr__(self, "family", family)

        if family is EntropyFamily.SHANNON:
            object.__setattr__(self, "alpha", None)
        else:
            if self.alpha is None:
                raise InvalidEntropySpec(f"{family.value} entropy needs an order alpha")
            alpha = float(self.alpha)
            if not math.isfinite(alpha) or alpha <= 0 or alpha == 1.0:
                raise InvalidEntropySpec(
                    f"alpha must lie in (0, 1) or (1, inf), got {alpha!r}"
                )
            object.__setattr__(self, "alpha", alpha)

        if not 0 < self.clamp_epsilon <= 1e-6:
            raise InvalidEntropySpec("clamp_epsilon must lie in (0, 1e-6]")

    @classmethod
    def shannon(cls) -> "EntropySpec":
        return cls(EntropyFamily.SHANNON)

    @classmethod
    def tsallis(cls, alpha: float) -> "EntropySpec":
        return cls(EntropyFamily.TSALLIS, alpha)

    @classmethod
    def renyi(cls, alpha: float) -> "EntropySpec":
        return cls(EntropyFamily.RENYI, alpha)

    @property
    def is_logarithmic(self) -> bool:
        """True for families measured in nats (Shannon, Renyi)."""
        return self.family is not EntropyFamily.TSALLIS

    def describe(self) -> dict:
        return {"family": self.family.value, "alpha": self.alpha}


@dataclass(frozen=True)
class EurBounds:
    """
    Uncertainty-relation bounds derived from a combined minimal entropy.

    Attributes
    ----------
    h_min : float
        Minimal entropy of the combined measurement in ``family``.
    q_tsallis : float
        Tsallis sum bound (the Shannon-sum bound for Shannon runs).
    q_renyi : float
        Renyi bound on the combined distribution.
    q_shannon_sum : float or None
        ``N h - N ln N``, Shannon runs only.
    """

    h_min: float
    q_tsallis: float
    q_renyi: float
    q_shannon_sum: Optional[float]
    n_measurements: int
    alpha: float
    family: EntropyFamily

    @property
    def headline(self) -> float:
        """The bound matching the entropy family of the run."""
        if self.family is EntropyFamily.SHANNON:
            return self.q_shannon_sum
        if self.family is EntropyFamily.TSALLIS:
            return self.q_tsallis
        return self.q_renyi


def _checked(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim == 0 or p.shape[-1] == 0:
        raise InvalidDistribution("empty probability vector")
    if not np.all(np.isfinite(p)):
        raise InvalidDistribution("probability vector has non-finite entries")
    if np.any(p < -DISTRIBUTION_NEGATIVITY_TOL):
        raise InvalidDistribution(f"negative probability {p.min():.3e}")
    totals = p.sum(axis=-1)
    if np.any(np.abs(totals - 1.0) > DISTRIBUTION_SUM_TOL):
        raise InvalidDistribution(f"probabilities sum to {np.ravel(totals)[0]!r}")
    return np.clip(p, 0.0, None)


def entropy_values(spec: EntropySpec, rows, check: bool = True) -> np.ndarray:
    """
    Row-wise entropies of a ``(k, m)`` array of distributions.

    With ``check=False`` no validation or clamping is done and the formulas
    are evaluated as written (used for finite differences and for
    already-clamped vertex probabilities).
    """
    rows = _checked(rows) if check else np.asarray(rows, dtype=float)
    if spec.family is EntropyFamily.SHANNON:
        return entr(rows).sum(axis=-1)
    power_sum = np.power(rows, spec.alpha).sum(axis=-1)
    if spec.family is EntropyFamily.TSALLIS:
        return (power_sum - 1.0) / (1.0 - spec.alpha)
    return np.log(power_sum) / (1.0 - spec.alpha)


def entropy_value(spec: EntropySpec, p) -> float:
    """
    Entropy of one distribution in nats, with ``0 ln 0 = 0``.

    Parameters
    ----------
    spec : EntropySpec
    p : array_like
        Entries at least -1e-10 (clamped to 0), summing to 1 within 1e-8.

    Raises
    ------
    InvalidDistribution

    Examples
    --------
    >>> entropy_value(EntropySpec.shannon(), [0.25] * 4)  # ln 4
    1.3862943611198906
    >>> entropy_value(EntropySpec.tsallis(2), [0.5, 0.5])
    0.5
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise InvalidDistribution("expected a single probability vector")
    return float(entropy_values(spec, p))


def entropy_gradient(spec: EntropySpec, p) -> np.ndarray:
    """
    Gradient of the entropy with ``p`` floored at ``spec.clamp_epsilon``.

    Shannon: ``-(1 + ln p)``; Tsallis: ``a p^(a-1) / (1 - a)``;
    Renyi: ``a p^(a-1) / ((1 - a) sum_j p_j^a)``.

    Raises
    ------
    InvalidDistribution
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise InvalidDistribution("expected a single probability vector")
    floored = np.maximum(_checked(p), spec.clamp_epsilon)
    if spec.family is EntropyFamily.SHANNON:
        return -(1.0 + np.log(floored))
    alpha = spec.alpha
    derivative = alpha * np.power(floored, alpha - 1.0) / (1.0 - alpha)
    if spec.family is EntropyFamily.TSALLIS:
        return derivative
    return derivative / np.power(floored, alpha).sum()


def renyi_from_tsallis(h_tsallis: float, alpha: float) -> float:
    """``ln(1 + (1 - a) h) / (1 - a)``, strictly increasing in ``h``."""
    return math.log1p((1.0 - alpha) * h_tsallis) / (1.0 - alpha)


def tsallis_from_renyi(h_renyi: float, alpha: float) -> float:
    """Inverse of :func:`renyi_from_tsallis`."""
    return math.expm1((1.0 - alpha) * h_renyi) / (1.0 - alpha)


def solver_objective(spec: EntropySpec) -> EntropySpec:
    """The concave entropy the solver minimizes for ``spec``."""
    if spec.family is EntropyFamily.RENYI:
        return EntropySpec(EntropyFamily.TSALLIS, spec.alpha, spec.clamp_epsilon)
    return spec


def objective_to_family(spec: EntropySpec, value: float) -> float:
    """Convert a value of :func:`solver_objective` back into ``spec``'s family."""
    if spec.family is EntropyFamily.RENYI:
        return renyi_from_tsallis(value, spec.alpha)
    return value


def tsallis_sum_bound(h_tsallis: float, n: int, alpha: float) -> float:
    """``N^a h - (N - N^a) / (1 - a)``."""
    n_alpha = float(n) ** alpha
    return n_alpha * h_tsallis - (n - n_alpha) / (1.0 - alpha)


def eur_bounds_from_hmin(h_min: float, n: int, spec: EntropySpec) -> EurBounds:
    """
    Turn the minimal combined entropy into uncertainty-relation bounds.

    ``h_min`` is read in ``spec``'s family. For Tsallis and Renyi runs the
    other family's minimum follows from the increasing map between them
    (the minimizers coincide), so both ``q_tsallis`` and ``q_renyi`` are
    reported.

    Examples
    --------
    >>> bounds = eur_bounds_from_hmin(1.5 * math.log(2), 2, EntropySpec.shannon())
    >>> round(bounds.q_shannon_sum, 12) == round(math.log(2), 12)
    True
    """
    if n < 1:
        raise ValueError("number of measurements must be positive")
    if h_min < -DISTRIBUTION_NEGATIVITY_TOL:
        raise ValueError(f"minimal entropy must be non-negative, got {h_min!r}")
    h_min = max(h_min, 0.0)

    if spec.family is EntropyFamily.SHANNON:
        shannon_sum = n * h_min - n * math.log(n)
        return EurBounds(
            h_min=h_min,
            q_tsallis=shannon_sum,
            q_renyi=h_min,
            q_shannon_sum=shannon_sum,
            n_measurements=n,
            alpha=1.0,
            family=spec.family,
        )

    alpha = spec.alpha
    if spec.family is EntropyFamily.TSALLIS:
        h_tsallis, h_renyi = h_min, renyi_from_tsallis(h_min, alpha)
    else:
        h_tsallis, h_renyi = tsallis_from_renyi(h_min, alpha), h_min
    return EurBounds(
        h_min=h_min,
        q_tsallis=tsallis_sum_bound(h_tsallis, n, alpha),
        q_renyi=h_renyi,
        q_shannon_sum=None,
        n_measurements=n,
        alpha=alpha,
        family=spec.family,
    )


def concatenate_scaled(p_list: Sequence) -> np.ndarray:
    """The combined distribution ``(p_1 (+) ... (+) p_N) / N``."""
    p_list = [np.asarray(p, dtype=float) for p in p_list]
    if not p_list:
        raise ValueError("need at least one distribution")
    return np.concatenate(p_list) / len(p_list)


def tsallis_concat_identity_check(p_list: Sequence, alpha: float) -> float:
    """
    Residual of ``sum_i H^T(p_i) = N^a H^T(q) - (N - N^a) / (1 - a)``.

    Returns the absolute difference of the two sides; it vanishes up to
    rounding for every family of distributions.
    """
    spec = EntropySpec.tsallis(alpha)
    separate = sum(entropy_value(spec, p) for p in p_list)
    combined = entropy_value(spec, concatenate_scaled(p_list))
    return abs(separate - tsallis_sum_bound(combined, len(p_list), alpha))
