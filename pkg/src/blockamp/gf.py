"""Small finite-field arithmetic.

Two flavours are needed: characteristic-two fields ``GF(2^q)`` with
elements packed as integers (the Reed-Solomon symbols of the one-bit
extractor), and general prime-power fields ``GF(p^e)`` with full lookup
tables (the evaluation domain of the weak design).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import ParameterError

# Fixed low-weight irreducible polynomials over GF(2), leading term included.
BINARY_IRREDUCIBLE = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}


def gf2_mul(a: int, b: int, q: int) -> int:
    """Multiply two elements of ``GF(2^q)``."""
    poly = BINARY_IRREDUCIBLE[q]
    top = 1 << q
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return r


@lru_cache(maxsize=None)
def gf2_mul_table(q: int) -> np.ndarray:
    if q > 12:
        raise ParameterError("table-driven GF(2^q) is limited to q <= 12")
    size = 1 << q
    return np.array([[gf2_mul(a, b, q) for b in range(size)] for a in range(size)], dtype=np.int64)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p ** 0.5) + 1))


def prime_power(q: int):
    """Return ``(p, e)`` with ``q == p**e`` or ``None``."""
    if q < 2:
        return None
    for p in range(2, q + 1):
        if q % p == 0:
            if not is_prime(p):
                return None
            e, r = 0, q
            while r % p == 0:
                r //= p
                e += 1
            return (p, e) if r == 1 else None
    return None


def next_prime_power(t: int) -> int:
    q = max(2, t)
    while prime_power(q) is None:
        q += 1
    return q


@dataclass(frozen=True, eq=False)
class PrimePowerField:
    """``GF(p^e)`` with elements ``0..q-1`` (base-``p`` digit vectors)."""

    q: int
    p: int
    e: int
    add: np.ndarray
    mul: np.ndarray

    def poly_eval(self, coeffs, point: int) -> int:
        """Horner evaluation; ``coeffs[0]`` is the constant term."""
        acc = 0
        for c in reversed(coeffs):
            acc = int(self.add[self.mul[acc, point], c])
        return acc


@lru_cache(maxsize=None)
def prime_power_field(q: int) -> PrimePowerField:
    pe = prime_power(q)
    if pe is None:
        raise ParameterError(f"{q} is not a prime power")
    p, e = pe
    digits = np.array([[(a // p ** i) % p for i in range(e)] for a in range(q)], dtype=np.int64)
    weights = p ** np.arange(e)
    add = (((digits[:, None, :] + digits[None, :, :]) % p) @ weights).astype(np.int64)
    if e == 1:
        a = np.arange(q)
        return PrimePowerField(q, p, e, add, (a[:, None] * a[None, :]) % p)
    for tail in itertools.product(range(p), repeat=e):
        if tail[0] == 0:
            continue
        modulus = list(tail) + [1]
        mul = _poly_mul_table(digits, p, e, modulus) @ weights
        if all((mul[a] == 1).any() for a in range(1, q)):
            return PrimePowerField(q, p, e, add, mul.astype(np.int64))
    raise AssertionError(f"no irreducible polynomial found for GF({q})")  # pragma: no cover


def _poly_mul_table(digits, p, e, modulus):
    q = digits.shape[0]
    prod = np.zeros((q, q, 2 * e - 1), dtype=np.int64)
    for i in range(e):
        for j in range(e):
            prod[:, :, i + j] += digits[:, None, i] * digits[None, :, j]
    prod %= p
    for k in range(2 * e - 2, e - 1, -1):
        c = prod[:, :, k].copy()
        for i in range(e + 1):
            prod[:, :, k - e + i] = (prod[:, :, k - e + i] - c * modulus[i]) % p
    return prod[:, :, :e]
