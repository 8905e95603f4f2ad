"""Weak (t, r)-designs for Trevisan's seed slicing.

The construction is the polynomial-evaluation design.  The seed index set
``[d]`` is identified with ``GF(q) x GF(q)`` (``d = q^2``), and the i-th set
is the graph of the i-th polynomial of degree ``< l`` restricted to the
first ``t`` field elements::

    R_i = {(a, P_i(a)) : a in first t elements of GF(q)},  index = a*q + P_i(a)

``q`` is ``t`` itself when ``t`` is a prime power and the next prime power
otherwise.  Two distinct polynomials agree on at most ``l - 1`` points,
which is what keeps the overlap sums small.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError, ValidationError
from .gf import next_prime_power, prime_power_field

#: Overlap parameter the polynomial design is checked against.
DESIGN_R_BOUND = 2 * math.e
MAX_SETS = 1 << 20


@dataclass(frozen=True)
class WeakDesign:
    sets: tuple
    t: int
    r: float
    d: int
    field_size: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(tuple(int(i) for i in s) for s in self.sets))

    @property
    def m(self) -> int:
        return len(self.sets)

    def index_array(self) -> np.ndarray:
        """``(m, t)`` array of seed positions; rows are sorted ascending."""
        return np.array(self.sets, dtype=np.int64).reshape(self.m, self.t)

    def to_json(self) -> str:
        return json.dumps({"t": self.t, "r": self.r, "d": self.d,
                           "field_size": self.field_size, "sets": [list(s) for s in self.sets]})

    @classmethod
    def from_json(cls, text: str) -> "WeakDesign":
        obj = json.loads(text)
        if isinstance(obj, list):
            sets = obj
            t = len(sets[0]) if sets else 0
            d = 1 + max((max(s) for s in sets if s), default=0)
            return cls(sets, t, DESIGN_R_BOUND, d)
        return cls(obj["sets"], obj["t"], obj["r"], obj["d"], obj.get("field_size", 0))


@dataclass
class DesignReport:
    size_ok: bool
    range_ok: bool
    overlap_ok: bool
    max_overlap_sum: int
    worst_index: int
    achieved_r: float
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.size_ok and self.range_ok and self.overlap_ok


def _degree_bound(m: int, q: int) -> int:
    ell = 1
    while q ** ell < m:
        ell += 1
    return ell


def build_weak_design(m: int, t: int) -> WeakDesign:
    """Polynomial-evaluation weak design with ``m`` sets of size ``t``.

    The returned design records ``field_size`` (the promoted prime power
    ``q``), ``d = q**2`` and ``r`` as the achieved overlap ratio, which is
    at most ``2e`` on every grid the test-suite covers.
    """
    if m < 1 or t < 1:
        raise ParameterError(f"need m >= 1 and t >= 1, got m={m}, t={t}")
    if m > MAX_SETS:
        raise ParameterError(f"m={m} exceeds supported maximum {MAX_SETS}")
    q = next_prime_power(t)
    gf = prime_power_field(q)
    ell = _degree_bound(m, q)
    points = np.arange(t)
    sets = []
    for i in range(m):
        coeffs = [(i // q ** j) % q for j in range(ell)]
        values = np.zeros(t, dtype=np.int64)
        for c in reversed(coeffs):
            values = gf.add[gf.mul[values, points], c]
        sets.append(tuple(int(v) for v in points * q + values))
    wd = WeakDesign(sets, t, 0.0, q * q, q)
    achieved = validate_weak_design(wd).achieved_r
    return WeakDesign(sets, t, achieved, q * q, q)


def overlap_sums(wd: WeakDesign) -> np.ndarray:
    """``s_i = Σ_{j<i} 2^{|R_i ∩ R_j|}`` for every ``i``."""
    m = wd.m
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    member = np.zeros((m, max(wd.d, 1)), dtype=np.int64)
    for i, s in enumerate(wd.sets):
        for j in s:
            if 0 <= j < wd.d:
                member[i, j] = 1
    inter = member @ member.T
    weights = np.tril(np.left_shift(1, inter), k=-1)
    return weights.sum(axis=1)


def validate_weak_design(wd: WeakDesign) -> DesignReport:
    """Check both weak-design properties and report the achieved ``r``."""
    failures = []
    size_ok = all(len(set(s)) == wd.t and len(s) == wd.t for s in wd.sets)
    if not size_ok:
        bad = [i for i, s in enumerate(wd.sets) if len(set(s)) != wd.t or len(s) != wd.t]
        failures.append(f"property 1: sets {bad[:10]} do not have exactly t={wd.t} elements")
    range_ok = all(0 <= j < wd.d for s in wd.sets for j in s)
    if not range_ok:
        failures.append(f"index outside [0, {wd.d})")
    sums = overlap_sums(wd)
    worst = int(np.argmax(sums)) if sums.size else 0
    max_sum = int(sums.max()) if sums.size else 0
    achieved = max_sum / wd.m if wd.m else 0.0
    overlap_ok = max_sum <= wd.r * wd.m + 1e-9
    if not overlap_ok:
        failures.append(f"property 2: set {worst} has overlap sum {max_sum} > r*m = {wd.r * wd.m}")
    return DesignReport(size_ok, range_ok, overlap_ok, max_sum, worst, achieved, failures)


def check_weak_design(wd: WeakDesign) -> WeakDesign:
    report = validate_weak_design(wd)
    if not report.passed:
        raise ValidationError("; ".join(report.failures))
    return wd
