"""MDL-Hardy and MDL-GHZ scores, the Mermin expression and classical bounds.

All MDL scores consume joint probabilities ``ν(x) P(a|x)``.  Input bit 0 of
every party is the first setting of the game.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .devices import DeviceBehavior, all_deterministic_boxes
from .exceptions import DomainError, ParameterError, ValidationError

NU_TOL = 1e-12

# (a, b, x, y) events of the two-party score
HARDY_POSITIVE = (0, 0, 0, 0)
HARDY_NEGATIVE = ((0, 1, 0, 1), (1, 0, 1, 0), (0, 0, 1, 1))
# input triples of the three-party score
GHZ_POSITIVE = (0, 0, 0)
GHZ_NEGATIVE = ((0, 1, 1), (1, 0, 1), (1, 1, 0))


class Game(str, enum.Enum):
    HARDY2 = "hardy2"
    GHZ3 = "ghz3"


def _check_eps(eps):
    if not 0 <= eps < 0.5:
        raise DomainError(f"eps must lie in [0, 1/2), got {eps}")


def bias_window(parties: int, eps: float):
    """Per-input-tuple probability window ``((1/2−ε)^p, (1/2+ε)^p)``."""
    _check_eps(eps)
    return (0.5 - eps) ** parties, (0.5 + eps) ** parties


@dataclass(frozen=True, eq=False)
class InputDistribution:
    """Input distribution ``ν`` with its admissible window ``[l, h]``."""

    nu: np.ndarray
    l: float
    h: float

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float).reshape(-1)
        if nu.size not in (4, 8):
            raise ValidationError("nu must have 4 or 8 entries")
        if abs(nu.sum() - 1) > NU_TOL:
            raise ValidationError(f"nu sums to {nu.sum()!r}")
        if (nu < self.l - NU_TOL).any() or (nu > self.h + NU_TOL).any():
            raise ValidationError(f"nu leaves the window [{self.l}, {self.h}]")
        nu.setflags(write=False)
        object.__setattr__(self, "nu", nu)

    @property
    def parties(self) -> int:
        return 2 if self.nu.size == 4 else 3

    def __getitem__(self, inputs) -> float:
        w = 1 << np.arange(self.parties - 1, -1, -1)
        return float(self.nu[int(np.dot(inputs, w))])

    @classmethod
    def uniform(cls, parties: int = 2, eps: float = 0.0) -> "InputDistribution":
        l, h = bias_window(parties, eps)
        return cls(np.full(1 << parties, 1.0 / (1 << parties)), l, h)

    @classmethod
    def windowed(cls, nu, eps: float) -> "InputDistribution":
        nu = np.asarray(nu, dtype=float).reshape(-1)
        l, h = bias_window(2 if nu.size == 4 else 3, eps)
        return cls(nu, l, h)


@dataclass(frozen=True)
class MdlScore:
    value: float
    game: Game
    eps: float


def hardy_coefficients(eps: float) -> np.ndarray:
    """``c[x, y, a, b]`` with ``M_ε = Σ ν(x,y) c[x,y,a,b] P(a,b|x,y)``."""
    _check_eps(eps)
    c = np.zeros((2, 2, 2, 2))
    a, b, x, y = HARDY_POSITIVE
    c[x, y, a, b] = (0.5 - eps) ** 2
    for a, b, x, y in HARDY_NEGATIVE:
        c[x, y, a, b] = -(0.5 + eps) ** 2
    return c


def ghz_coefficients(eps: float) -> np.ndarray:
    """``c[x, y, z, a, b, c]`` for the three-party MDL score."""
    _check_eps(eps)
    c = np.zeros((2,) * 6)
    even = [o for o in itertools.product((0, 1), repeat=3) if sum(o) % 2 == 0]
    for o in even:
        c[GHZ_POSITIVE + o] = (0.5 - eps) ** 3
        for t in GHZ_NEGATIVE:
            c[t + o] = -(0.5 + eps) ** 3
    return c


def _score(b: DeviceBehavior, nu: InputDistribution, coeffs: np.ndarray) -> float:
    p = b.parties
    weights = nu.nu.reshape((2,) * p)
    expand = weights.reshape(weights.shape + (1,) * p)
    return float((expand * coeffs * b.cond_probs).sum())


def mdl_hardy_score(b: DeviceBehavior, nu: InputDistribution | None = None, eps: float = 0.0) -> MdlScore:
    """``(1/2−ε)² P(0,0,0,0) − (1/2+ε)² [P(0,1,0,1) + P(1,0,1,0) + P(0,0,1,1)]``.

    ``P(a,b,x,y) = ν(x,y) P(a,b|x,y)``; ``ν`` defaults to uniform.
    """
    if b.parties != 2:
        raise ParameterError("MDL-Hardy needs a two-party behaviour")
    nu = InputDistribution.uniform(2, eps) if nu is None else nu
    if nu.parties != 2:
        raise ParameterError("MDL-Hardy needs a four-entry input distribution")
    return MdlScore(_score(b, nu, hardy_coefficients(eps)), Game.HARDY2, eps)


def mdl_ghz_score(b: DeviceBehavior, nu: InputDistribution | None = None, eps: float = 0.0) -> MdlScore:
    if b.parties != 3:
        raise ParameterError("MDL-GHZ needs a three-party behaviour")
    nu = InputDistribution.uniform(3, eps) if nu is None else nu
    if nu.parties != 3:
        raise ParameterError("MDL-GHZ needs an eight-entry input distribution")
    return MdlScore(_score(b, nu, ghz_coefficients(eps)), Game.GHZ3, eps)


# --------------------------------------------------------------------------
# classical bounds


def nu_vertices(k: int, l: float, h: float) -> np.ndarray:
    """Vertices of ``{ν : l <= ν_i <= h, Σ ν = 1}``.

    At a vertex at most one coordinate is strictly inside its bounds, so each
    candidate fixes the others at ``l`` or ``h`` and solves for the last.
    """
    out = []
    for free in range(k):
        for pattern in itertools.product((l, h), repeat=k - 1):
            rest = 1 - sum(pattern)
            if l - NU_TOL <= rest <= h + NU_TOL:
                v = list(pattern)
                v.insert(free, min(max(rest, l), h))
                out.append(v)
    if not out:
        raise DomainError(f"empty input polytope for k={k}, l={l}, h={h}")
    return np.unique(np.round(np.array(out), 15), axis=0)


def greedy_lp_max(c: np.ndarray, l: float, h: float) -> float:
    """``max c·ν`` on the window polytope by filling the largest ``c`` first."""
    nu = np.full(c.size, l)
    left = 1 - nu.sum()
    for i in np.argsort(-c, kind="stable"):
        add = min(h - l, left)
        nu[i] += add
        left -= add
    return float(c @ nu)


def _per_input_values(b: DeviceBehavior, coeffs: np.ndarray) -> np.ndarray:
    p = b.parties
    return (coeffs * b.cond_probs).reshape(1 << p, -1).sum(axis=1)


def _exact_lhv_max(parties, eps):
    e = Fraction(eps)
    l, h = (Fraction(1, 2) - e) ** parties, (Fraction(1, 2) + e) ** parties
    pos = (Fraction(1, 2) - e) ** parties
    neg = -(Fraction(1, 2) + e) ** parties
    k = 1 << parties
    verts = []
    for free in range(k):
        for pattern in itertools.product((l, h), repeat=k - 1):
            rest = 1 - sum(pattern)
            if l <= rest <= h:
                v = list(pattern)
                v.insert(free, rest)
                verts.append(v)
    coeffs = hardy_coefficients(0.0) if parties == 2 else ghz_coefficients(0.0)
    sign = np.sign(coeffs)
    best = None
    for _, box in all_deterministic_boxes(parties):
        # per-input value as (count of positive events, count of negative events)
        hits = (sign[..., None] == np.array([1, -1])) & (box.cond_probs[..., None] > 0)
        counts = hits.reshape(k, -1, 2).sum(axis=1)
        v = [pos * int(cp) + neg * int(cn) for cp, cn in counts]
        val = max(sum(a * b for a, b in zip(vert, v)) for vert in verts)
        best = val if best is None or val > best else best
    return best


def _lhv_max(parties, coeffs, eps, method):
    if method == "exact":
        return float(_exact_lhv_max(parties, eps))
    l, h = bias_window(parties, eps)
    verts = nu_vertices(1 << parties, l, h) if method == "vertex" else None
    best = -math.inf
    for _, box in all_deterministic_boxes(parties):
        v = _per_input_values(box, coeffs)
        val = float((verts @ v).max()) if method == "vertex" else greedy_lp_max(v, l, h)
        best = max(best, val)
    return best


def lhv_max_mdl_hardy(eps: float, method: str = "exact") -> float:
    """Classical maximum of the MDL-Hardy score over boxes and ``ν``.

    ``method`` is ``"exact"`` (rational vertex enumeration), ``"vertex"``
    (floating-point vertex enumeration) or ``"greedy"`` (closed-form LP).
    """
    _check_eps(eps)
    return _lhv_max(2, hardy_coefficients(eps), eps, method)


def lhv_max_mdl_ghz(eps: float, method: str = "vertex") -> float:
    _check_eps(eps)
    return _lhv_max(3, ghz_coefficients(eps), eps, method)


# --------------------------------------------------------------------------
# Mermin


MERMIN_TERMS = (((0, 0, 0), 1.0), ((0, 1, 1), -1.0), ((1, 0, 1), -1.0), ((1, 1, 0), -1.0))


def correlator(b: DeviceBehavior, inputs) -> float:
    """``Σ_{even parity} P − Σ_{odd parity} P`` at ``inputs``."""
    p = b.conditional(inputs)
    parity = np.array([bin(i).count("1") & 1 for i in range(p.size)])
    return float(p[parity == 0].sum() - p[parity == 1].sum())


def mermin_score(b: DeviceBehavior) -> float:
    if b.parties != 3:
        raise ParameterError("the Mermin expression needs a three-party behaviour")
    return sum(s * correlator(b, x) for x, s in MERMIN_TERMS)


def lhv_max_mermin() -> float:
    return max(mermin_score(box) for _, box in all_deterministic_boxes(3))


def mermin_from_mdl(mdl: float, eps: float) -> float:
    """Lower bound ``2 mdl / (1/4 − ε²)³ + 2`` on the Mermin value."""
    _check_eps(eps)
    return 2 * mdl / (0.25 - eps * eps) ** 3 + 2


def round_scores(inputs: np.ndarray, outputs: np.ndarray, eps: float) -> np.ndarray:
    """Plug-in per-round MDL-Hardy scores for arrays of ``(x, y)`` and ``(a, b)``.

    ``(1/2−ε)²`` on ``(a,b,x,y) = 0000``, ``−(1/2+ε)²`` on the three flagged
    events and 0 otherwise; the mean under the device equals the MDL score.
    """
    c = hardy_coefficients(eps)
    inputs = np.asarray(inputs, dtype=np.int64)
    outputs = np.asarray(outputs, dtype=np.int64)
    return c[inputs[..., 0], inputs[..., 1], outputs[..., 0], outputs[..., 1]]


def ghz_round_scores(inputs: np.ndarray, outputs: np.ndarray, eps: float) -> np.ndarray:
    c = ghz_coefficients(eps)
    i = np.asarray(inputs, dtype=np.int64)
    o = np.asarray(outputs, dtype=np.int64)
    return c[i[..., 0], i[..., 1], i[..., 2], o[..., 0], o[..., 1], o[..., 2]]


def empirical_mdl_hardy(inputs, outputs, eps: float) -> float:
    """Plug-in estimate of the MDL-Hardy score from a transcript."""
    return float(np.mean(round_scores(inputs, outputs, eps)))
