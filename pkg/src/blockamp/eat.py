"""Closed-form entropy bounds for the MDL-Hardy and GHZ tests.

Every logarithm is base 2.  ``c_ε = (1/4 − ε²)²`` is the normalisation of
the MDL-Hardy score; the per-round curve saturates at the branch point
``S* = c_ε (√2 − 1)/2`` where the argument of the binary entropy reaches 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError, ParameterError

GRID_POINTS = 1024
GOLDEN = (math.sqrt(5) - 1) / 2
LOG2_9 = math.log2(9)
LOG2_5 = math.log2(5)


class CertificationWarning(UserWarning):
    """A score too small to certify any entropy."""


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def score_scale(eps: float) -> float:
    """``(1/4 − ε²)²``."""
    if not 0 <= eps < 0.5:
        raise DomainError(f"eps must lie in [0, 1/2), got {eps}")
    return (0.25 - eps * eps) ** 2


def branch_point(eps: float) -> float:
    """Score ``S*`` at which the per-round entropy reaches one bit."""
    return score_scale(eps) * (math.sqrt(2) - 1) / 2


def _curve(s: float, c: float) -> float:
    return 1 - binary_entropy(0.5 + math.sqrt(s * (s + c)) / c)


def per_round_entropy(m_eps: float, eps: float) -> float:
    """Von Neumann entropy per round certified by an MDL-Hardy score.

    ``1 − h(1/2 + sqrt(M(M + c))/c)`` below the branch point and 1 above.
    A negative score certifies nothing: the result is 0 and a
    :class:`CertificationWarning` is emitted.
    """
    c = score_scale(eps)
    if m_eps < 0:
        warnings.warn(f"negative score {m_eps} certifies no entropy", CertificationWarning, stacklevel=2)
        return 0.0
    if m_eps >= branch_point(eps):
        return 1.0
    return _curve(m_eps, c)


def s_epsilon(p1: float, pm1: float, eps: float) -> float:
    """``(1/2 − ε)² p(1) − (1/2 + ε)² p(−1)``."""
    if p1 < 0 or pm1 < 0 or p1 + pm1 > 1 + 1e-12:
        raise ParameterError("need p1, pm1 >= 0 and p1 + pm1 <= 1")
    return (0.5 - eps) ** 2 * p1 - (0.5 + eps) ** 2 * pm1


def g_epsilon(s: float, eps: float) -> float:
    """Per-round min-tradeoff curve as a function of the score ``s``."""
    c = score_scale(eps)
    u = s / c
    if not -1e-15 <= u <= 1 + 1e-15:
        raise DomainError(f"normalised score {u} outside [0, 1]")
    s = max(s, 0.0)
    if s >= branch_point(eps):
        return 1.0
    return _curve(s, c)


def tangent_slope(s_t: float, eps: float) -> float:
    """``a(s_t) = dg_ε/dS`` at ``S = s_t``."""
    _check_st(s_t, eps)
    c = score_scale(eps)
    root = math.sqrt(s_t * (s_t + c))
    u = 0.5 + root / c
    return math.log2(u / (1 - u)) * (2 * s_t + c) / (2 * c * root)


def tangent_line(s_t: float, eps: float):
    """``(a, b)`` with ``a S + b`` tangent to ``g_ε`` at ``s_t``."""
    a = tangent_slope(s_t, eps)
    return a, g_epsilon(s_t, eps) - a * s_t


def _check_st(s_t, eps):
    if not 0 < s_t < branch_point(eps):
        raise DomainError(f"s_t={s_t} outside (0, {branch_point(eps)})")


def f_min(score: float, s_t: float, eps: float) -> float:
    """Curve below ``s_t``, tangent line above."""
    _check_st(s_t, eps)
    if score <= s_t:
        return g_epsilon(score, eps)
    a, b = tangent_line(s_t, eps)
    return a * score + b


@dataclass(frozen=True)
class EatConfig:
    gamma: float
    eps_ea: float
    delta: float
    half_block: float
    eps: float

    def __post_init__(self):
        for name in ("gamma", "eps_ea"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ParameterError(f"{name} must lie in (0, 1), got {v}")
        if self.delta < 0:
            raise ParameterError("delta must be non-negative")
        if self.half_block <= 0:
            raise ParameterError("half_block must be positive")
        if not 0 <= self.eps < 0.5:
            raise DomainError(f"eps must lie in [0, 1/2), got {self.eps}")
        if self.delta > score_scale(self.eps):
            raise DomainError("delta exceeds the largest attainable score")

    @classmethod
    def from_dict(cls, d: dict) -> "EatConfig":
        return cls(**{k: d[k] for k in ("gamma", "eps_ea", "delta", "half_block", "eps")})

    def to_dict(self) -> dict:
        return asdict(self)


def _objective(s_t: float, cfg: EatConfig, spread: float) -> float:
    a = tangent_slope(s_t, cfg.eps)
    penalty = 2 * (LOG2_9 + a * (0.5 + cfg.eps) ** 2) * spread / math.sqrt(cfg.half_block)
    return f_min(cfg.delta, s_t, cfg.eps) - penalty


def _spread(cfg: EatConfig) -> float:
    return math.sqrt(1 - 2 * math.log2(cfg.gamma * cfg.eps_ea))


def accumulation_objective(s_t: float, cfg: EatConfig) -> float:
    """Bracketed expression maximised over ``s_t``; ``sqrt(2/m') = sqrt(1/half_block)``."""
    return _objective(s_t, cfg, _spread(cfg))


def _golden_max(f, lo, hi, tol=1e-14, max_iter=200):
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(hi)):
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def optimise_threshold(cfg: EatConfig, grid_points: int = GRID_POINTS):
    """``(s_t, value)`` maximising the accumulation objective.

    A log-spaced grid over ``(0, S*)`` locates the best cell and a
    golden-section search refines inside its neighbours.  Requires
    ``delta < S*``.
    """
    top = branch_point(cfg.eps)
    if top <= 0:
        raise DomainError("empty threshold domain")
    if cfg.delta >= top:
        # the tangent slope diverges as s_t -> S*, so the bracket has no finite maximum
        raise DomainError(f"delta={cfg.delta} is not below the branch point {top}")
    spread = _spread(cfg)
    f = lambda s: _objective(s, cfg, spread)  # noqa: E731
    grid = top * np.concatenate([np.logspace(-12, 0, grid_points, endpoint=False)[1:],
                                 1 - np.logspace(-12, -1, 64)])
    grid = np.unique(grid[(grid > 0) & (grid < top)])
    vals = np.array([f(s) for s in grid])
    i = int(np.argmax(vals))
    lo = grid[i - 1] if i > 0 else grid[0] * 0.5
    hi = grid[i + 1] if i + 1 < grid.size else (grid[i] + top) / 2
    s_best, v_best = _golden_max(f, lo, hi)
    if vals[i] > v_best:
        s_best, v_best = float(grid[i]), float(vals[i])
    return float(s_best), float(v_best)


def accumulation_g(cfg: EatConfig) -> float:
    """Entropy rate per round after the finite-size correction."""
    return optimise_threshold(cfg)[1]


def chain_penalty(gamma: float) -> float:
    """``log2(1/(1 − sqrt(1 − γ²/16)))``."""
    if not 0 < gamma < 1:
        raise ParameterError("gamma must lie in (0, 1)")
    return -math.log2(1 - math.sqrt(1 - gamma * gamma / 16))


@dataclass(frozen=True)
class EntropyCertificate:
    hmin_bound: float
    gamma: float
    chain_penalty: float
    rate: float
    pre_penalty: float
    s_t: float

    def to_dict(self) -> dict:
        return asdict(self)


def certificate(cfg: EatConfig) -> EntropyCertificate:
    """Smooth min-entropy of the Bell-test outputs, clamped at 0."""
    s_t, g = optimise_threshold(cfg)
    pre = cfg.half_block * g
    pen = chain_penalty(cfg.gamma)
    return EntropyCertificate(max(0.0, pre - pen), cfg.gamma, pen, g, pre, s_t)


# --------------------------------------------------------------------------
# GHZ


MERMIN_MIN = 2 * math.sqrt(2)
MERMIN_MAX = 4.0
MERMIN_KINK = 2 + math.sqrt(2)


def ghz_guessing_bound(M: float) -> float:
    """Guessing probability bound ``f(M)`` on ``[2√2, 4]``."""
    if not MERMIN_MIN - 1e-12 <= M <= MERMIN_MAX + 1e-12:
        raise DomainError(f"Mermin value {M} outside [2√2, 4]")
    M = min(max(M, MERMIN_MIN), MERMIN_MAX)
    if M >= MERMIN_KINK:
        return 0.5 + 0.5 * math.sqrt(M * (1 - M / 4))
    return 1 + 1 / math.sqrt(2) - M / 4


class GhzEntropy(NamedTuple):
    bits: float
    mermin: float
    vacuous: bool


def ghz_entropy_from_mdl(mdl: float, eps: float) -> GhzEntropy:
    """``−log2 f(M)`` at the Mermin lower bound implied by an MDL-GHZ score.

    Outside ``[2√2, 4]`` the guessing bound does not apply: the result is
    0 bits with ``vacuous=True``.
    """
    from .games import mermin_from_mdl

    M = mermin_from_mdl(mdl, eps)
    if not MERMIN_MIN - 1e-12 <= M <= MERMIN_MAX + 1e-12:
        return GhzEntropy(0.0, M, True)
    return GhzEntropy(min(1.0, -math.log2(ghz_guessing_bound(M))), M, False)


def ghz_eat_constant(grad_inf: float, gamma: float, eps_ea: float) -> float:
    """``2 (log2 5 + ⌈‖∇f_min‖_∞⌉) sqrt(1 − 2 log2(γ ε_EA))`` for the GHZ test."""
    return 2 * (LOG2_5 + math.ceil(grad_inf)) * math.sqrt(1 - 2 * math.log2(gamma * eps_ea))
