"""Bit strings, explicit distributions and min-entropy arithmetic.

Conventions
-----------
Bit strings are 0-indexed and big-endian when read as integers: bit 0 is
the most significant bit, so ``BitString.from_int(6, 3)`` is ``110``.
A :class:`Distribution` over ``{0,1}^n`` is indexed by that integer value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from ._validation import PROB_TOL, as_bit_array, check_probability_vector
from .exceptions import ParameterError, ResourceError, ValidationError

#: Largest ``n`` any brute-force enumeration will accept.
MAX_ORACLE_BITS = 20
#: Default cap on the number of flat sources a single enumeration may yield.
DEFAULT_FLAT_SOURCE_CAP = 2_000_000


@dataclass(frozen=True, eq=False)
class BitString:
    """Immutable bit vector backed by a read-only ``uint8`` array."""

    bits: np.ndarray

    def __post_init__(self):
        arr = as_bit_array(self.bits)
        if arr.size < 1:
            raise ValidationError("BitString must have length >= 1")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @classmethod
    def from_str(cls, s: str) -> "BitString":
        return cls(as_bit_array(s.strip()))

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitString":
        if value < 0 or value >= 1 << length:
            raise ParameterError(f"{value} does not fit in {length} bits")
        return cls(int_to_bits(value, length))

    @classmethod
    def from_hex(cls, s: str, length: int | None = None) -> "BitString":
        s = s.strip().lower().removeprefix("0x")
        bits = int_to_bits(int(s, 16), 4 * len(s))
        if length is not None:
            if length > bits.size:
                raise ParameterError("hex string shorter than requested length")
            bits = bits[:length]
        return cls(bits)

    @property
    def length(self) -> int:
        return int(self.bits.size)

    def __len__(self):
        return self.length

    def __getitem__(self, i):
        return int(self.bits[i])

    def __iter__(self):
        return (int(b) for b in self.bits)

    def __eq__(self, other):
        if not isinstance(other, BitString):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __repr__(self):
        return f"BitString('{self.to_str()}')"

    def slice(self, start: int, length: int) -> "BitString":
        """Return exactly ``length`` bits starting at ``start``."""
        if start < 0 or length < 1 or start + length > self.length:
            raise ParameterError(f"slice({start}, {length}) out of range for {self.length} bits")
        return BitString(self.bits[start:start + length])

    def to_int(self) -> int:
        return bits_to_int(self.bits)

    def to_str(self) -> str:
        return "".join("01"[b] for b in self.bits)

    def to_hex(self) -> str:
        width = -(-self.length // 4)
        padded = np.concatenate([self.bits, np.zeros(4 * width - self.length, np.uint8)])
        return format(bits_to_int(padded), f"0{width}x")


def int_to_bits(value: int, length: int) -> np.ndarray:
    return np.array([(value >> (length - 1 - i)) & 1 for i in range(length)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for b in np.asarray(bits).tolist():
        out = (out << 1) | int(b)
    return out


def all_bit_rows(n: int) -> np.ndarray:
    """All ``2^n`` strings of length ``n`` as rows, in integer order."""
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Dense probability vector over ``{0,1}^n``."""

    n: int
    probs: np.ndarray

    def __post_init__(self):
        p = check_probability_vector(self.probs).copy()
        if p.size != 1 << self.n:
            raise ValidationError(f"support size {p.size} != 2^{self.n}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def support_size(self) -> int:
        return int(self.probs.size)

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls(n, np.full(1 << n, 1.0 / (1 << n)))

    @classmethod
    def point_mass(cls, n: int, x: int) -> "Distribution":
        p = np.zeros(1 << n)
        p[x] = 1.0
        return cls(n, p)

    @classmethod
    def flat(cls, n: int, support: Sequence[int]) -> "Distribution":
        p = np.zeros(1 << n)
        p[list(support)] = 1.0 / len(support)
        return cls(n, p)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)


@dataclass(frozen=True)
class ConditionalSource:
    """A source ``X`` together with classical side information ``Λ``.

    ``per_lambda[i]`` is the distribution of ``X`` given ``Λ = side_values[i]``,
    which occurs with probability ``weights[i]``.
    """

    side_values: tuple
    weights: tuple
    per_lambda: tuple = field(repr=False)

    def __post_init__(self):
        if len(self.side_values) == 0:
            raise ValidationError("side-value set is empty")
        if not (len(self.side_values) == len(self.weights) == len(self.per_lambda)):
            raise ValidationError("side_values, weights and per_lambda lengths differ")
        check_probability_vector(self.weights, "weights")
        ns = {d.n for d in self.per_lambda}
        if len(ns) != 1:
            raise ValidationError("per-lambda distributions have different lengths")

    @classmethod
    def single(cls, dist: Distribution) -> "ConditionalSource":
        return cls((None,), (1.0,), (dist,))

    @property
    def n(self) -> int:
        return self.per_lambda[0].n

    def marginal(self) -> Distribution:
        p = sum(w * d.probs for w, d in zip(self.weights, self.per_lambda))
        return Distribution(self.n, p / p.sum())


def min_entropy(dist: Distribution) -> float:
    """``-log2`` of the largest point probability."""
    if not isinstance(dist, Distribution):
        dist = Distribution(int(math.log2(len(dist))), np.asarray(dist, float))
    return max(0.0, -math.log2(float(dist.probs.max())))


def conditional_min_entropy(src: ConditionalSource) -> float:
    """Worst case over side-information values of the min-entropy.

    Every value of ``Λ`` with positive weight counts, matching the
    block-source requirement that entropy hold for each realised prefix.
    See :func:`guessing_min_entropy` for the averaged variant.
    """
    if len(src.side_values) == 0:
        raise ValidationError("side-value set is empty")
    return min(min_entropy(d) for w, d in zip(src.weights, src.per_lambda) if w > 0)


def guessing_min_entropy(src: ConditionalSource) -> float:
    """``-log2 Σ_λ w_λ max_x p(x|λ)`` (average guessing probability)."""
    pg = sum(w * float(d.probs.max()) for w, d in zip(src.weights, src.per_lambda))
    return max(0.0, -math.log2(pg))


def statistical_distance(p: Distribution, q: Distribution) -> float:
    """Total-variation distance ``½ Σ |p_i - q_i|``."""
    pp = p.probs if isinstance(p, Distribution) else np.asarray(p, float)
    qq = q.probs if isinstance(q, Distribution) else np.asarray(q, float)
    if pp.shape != qq.shape:
        raise ValidationError(f"support sizes differ: {pp.size} vs {qq.size}")
    return float(min(1.0, 0.5 * np.abs(pp - qq).sum()))


def count_flat_sources(n: int, k: int) -> int:
    return math.comb(1 << n, 1 << k)


def iter_flat_supports(n: int, k: int, cap: int = DEFAULT_FLAT_SOURCE_CAP) -> Iterator[tuple]:
    """Yield the support (tuple of integers) of every flat ``k``-source on ``n`` bits."""
    if not 0 <= k <= n:
        raise ParameterError(f"need 0 <= k <= n, got n={n}, k={k}")
    if n > MAX_ORACLE_BITS:
        raise ResourceError(f"n={n} exceeds the oracle limit of {MAX_ORACLE_BITS} bits")
    total = count_flat_sources(n, k)
    if total > cap:
        raise ResourceError(f"{total} flat sources for n={n}, k={k} exceeds cap {cap}")
    return combinations(range(1 << n), 1 << k)


def enumerate_flat_sources(n: int, k: int, cap: int = DEFAULT_FLAT_SOURCE_CAP) -> Iterator[Distribution]:
    """Stream every distribution uniform on a ``2^k``-subset of ``{0,1}^n``.

    Raises :class:`ResourceError` before yielding anything if the count
    exceeds ``cap``.
    """
    supports = iter_flat_supports(n, k, cap)
    return (Distribution.flat(n, s) for s in supports)


def is_normalized(p, tol=PROB_TOL) -> bool:
    return abs(float(np.sum(p)) - 1.0) <= tol
