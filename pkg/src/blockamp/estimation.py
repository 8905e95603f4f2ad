"""Concentration and counting bounds for block scores."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError

#: Largest single-round score the counting bound assumes.
SCORE_CEILING = 0.5


@dataclass(frozen=True, eq=False)
class BlockScores:
    per_round: np.ndarray
    conditional_avg_bound: float | None = None

    def __post_init__(self):
        arr = np.asarray(self.per_round, dtype=float).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "per_round", arr)

    @property
    def empirical_avg(self) -> float:
        return float(self.per_round.mean()) if self.per_round.size else 0.0


def azuma_tail(m_prime: int, delta_az: float) -> float:
    """``min(1, 2 exp(−m' δ²/4))``."""
    if m_prime < 1:
        raise ParameterError("m_prime must be >= 1")
    if delta_az <= 0:
        raise ParameterError("delta_az must be positive")
    return min(1.0, 2 * math.exp(-m_prime * delta_az * delta_az / 4))


def good_rounds_lower_bound(m_prime: int, delta: float, kappa: float) -> float:
    """Rounds with score at least ``κ``: ``m'(δ − 2κ) / (2(1 − 2κ))``.

    Assumes every score is at most 1/2 and the mean over the ``m'/2``
    rounds is at least ``δ/2``.
    """
    if not 0 < kappa < delta / 2:
        raise ParameterError(f"need 0 < kappa < delta/2, got kappa={kappa}, delta={delta}")
    return m_prime * (delta - 2 * kappa) / (2 * (1 - 2 * kappa))


def count_good_rounds(scores, kappa: float) -> int:
    return int((np.asarray(scores) >= kappa).sum())


def per_block_abort_prob(m_prime: int, g_exp: float, delta: float) -> float:
    """``min(1, exp(−m'(G_exp − δ)²/3))``; 1 when ``m' = 0``."""
    if g_exp <= delta:
        raise ParameterError(f"bound needs g_exp > delta, got {g_exp} <= {delta}")
    if m_prime <= 0:
        return 1.0
    return min(1.0, math.exp(-m_prime * (g_exp - delta) ** 2 / 3))


def completeness_abort_bound(d: int, m_prime: int, g_exp: float, delta: float) -> float:
    """Union bound ``min(1, 2^d exp(−m'(G_exp − δ)²/3))`` on honest aborts."""
    if g_exp <= delta:
        raise ParameterError(f"bound needs g_exp > delta, got {g_exp} <= {delta}")
    if m_prime <= 0:
        return 1.0
    return min(1.0, 2.0 ** d * math.exp(-m_prime * (g_exp - delta) ** 2 / 3))
