"""Two-source extraction for the final step of the protocol.

The kernel is the inner product over ``GF(2^m)``: both inputs are zero
padded to a common length ``L`` (a multiple of ``m``), cut into ``m``-bit
blocks read as field elements, and the output is ``Σ_i x1_i · x2_i``.  For
``m = 1`` this is the plain GF(2) inner product.

Two modes share the kernel.  ``inner-product`` reports the Raz parameter
inequalities but does not enforce them; ``raz-gated`` refuses to run unless
every inequality holds.  Logs are base 2 throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import as_bit_array, check_open_unit
from .bits import BitString, bits_to_int, int_to_bits
from .exceptions import InfeasibleConfigError, ParameterError
from .gf import BINARY_IRREDUCIBLE, gf2_mul

DELTA_PRIME_MAX = 19 / 32


class ExtractorMode(str, enum.Enum):
    INNER_PRODUCT = "inner-product"
    RAZ_GATED = "raz-gated"


@dataclass(frozen=True)
class RazParams:
    """Inputs of the Raz parameter theorem.

    ``n1`` is the high-rate input, ``n2`` the low-entropy one; ``k1p`` and
    ``k2p`` are their min-entropy thresholds.
    """

    n1: int
    n2: int
    k1p: float
    k2p: float
    m: int
    delta_p: float

    @property
    def eps(self) -> float:
        return math.sqrt(3) / 2 * 2.0 ** (-self.m / 4)


@dataclass
class RazReport:
    margins: dict
    eps: float
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"passed": self.passed, "margins": dict(self.margins), "eps": self.eps,
                "failures": list(self.failures)}


def raz_m_ceiling(n1: int, k2p: float, delta_p: float) -> float:
    return 16 * delta_p / 19 * min(n1 / 8, 4 * k2p / 163) - 1


def raz_params_check(p: RazParams) -> RazReport:
    """Evaluate the four inequalities; each margin is ``lhs − rhs`` (>= 0 passes)."""
    lg = math.log2
    failures = []
    if not 0 < p.delta_p < DELTA_PRIME_MAX:
        failures.append(f"delta_p={p.delta_p} outside (0, 19/32)")
    margins = {
        "n1_length": p.n1 - (6 * lg(p.n1) + 2 * lg(p.n2)),
        "k1_entropy": p.k1p - ((0.5 + p.delta_p) * p.n1 + 3 * lg(p.n1) + lg(p.n2)),
    }
    inner = (1 + 3 * p.delta_p / 19) * p.n1 - p.k1p
    margins["k2_entropy"] = p.k2p - 163 / 32 * lg(inner) if inner > 0 else math.inf
    margins["m_ceiling"] = raz_m_ceiling(p.n1, p.k2p, p.delta_p) - p.m
    for name, v in margins.items():
        if v < 0:
            failures.append(f"{name}: margin {v:.6g} < 0")
    return RazReport(margins, p.eps, failures)


@dataclass(frozen=True)
class MarkovPenalty:
    k1_eff: float
    k2_eff: float
    eps_markov: float


def markov_convert(k1: float, k2: float, eps: float, M: int) -> MarkovPenalty:
    """Thresholds and error of a strong two-source extractor in the Markov model."""
    check_open_unit(eps, "eps")
    if M < 1:
        raise ParameterError("output length M must be >= 1")
    pen = math.log2(1 / eps)
    return MarkovPenalty(k1 + pen, k2 + pen, math.sqrt(3 * eps * 2.0 ** (M - 2)))


def inner_product_error(length: int, k1: float, k2: float, m: int) -> float:
    """Strong (in either input) error of the GF(2^m) inner product.

    ``½ sqrt((2^m − 1) 2^{L − k1 − k2})``, clamped to 1, for padded length ``L``.
    """
    log_err = -1 + 0.5 * (math.log2(2 ** m - 1) + length - k1 - k2)
    return 1.0 if log_err >= 0 else 2.0 ** log_err


def padded_length(n1: int, n2: int, m: int) -> int:
    L = max(n1, n2)
    return -(-L // m) * m


def _inner_product(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    if m == 1:
        return np.array([int(a.astype(np.int64) @ b.astype(np.int64)) & 1], dtype=np.uint8)
    if m not in BINARY_IRREDUCIBLE:
        raise ParameterError(f"output length m={m} unsupported (max {max(BINARY_IRREDUCIBLE)})")
    acc = 0
    for i in range(0, a.size, m):
        acc ^= gf2_mul(bits_to_int(a[i:i + m]), bits_to_int(b[i:i + m]), m)
    return int_to_bits(acc, m)


def two_source_extract(x1, x2, m: int = 1, mode=ExtractorMode.INNER_PRODUCT,
                       raz: RazParams | None = None, lengths: tuple | None = None) -> BitString:
    """``m``-bit output from two independent weak sources.

    Parameters
    ----------
    x1, x2 : bit strings
    m : int
        Output length.
    mode : ExtractorMode
        ``raz-gated`` requires ``raz`` and runs only if every inequality holds.
    lengths : tuple, optional
        Expected ``(len(x1), len(x2))``.
    """
    mode = ExtractorMode(mode)
    a, b = as_bit_array(x1, name="x1"), as_bit_array(x2, name="x2")
    if lengths is not None and (a.size, b.size) != tuple(lengths):
        raise ParameterError(f"input lengths {(a.size, b.size)} != configured {tuple(lengths)}")
    if m < 1:
        raise ParameterError("m must be >= 1")
    if mode is ExtractorMode.RAZ_GATED:
        if raz is None:
            raise ParameterError("raz-gated mode needs RazParams")
        rep = raz_params_check(raz)
        if not rep.passed:
            raise InfeasibleConfigError("raz", "; ".join(rep.failures))
        if m > raz.m:
            raise ParameterError(f"m={m} exceeds configured output length {raz.m}")
    L = padded_length(a.size, b.size, m)
    a = np.concatenate([a, np.zeros(L - a.size, np.uint8)])
    b = np.concatenate([b, np.zeros(L - b.size, np.uint8)])
    return BitString(_inner_product(a, b, m))


def final_output_distance_bound(eps_s: float, eps: float):
    """``6(ε_s + ε)`` clamped to 1; returns ``(value, clamped)``."""
    for name, v in (("eps_s", eps_s), ("eps", eps)):
        if not 0 <= v <= 1:
            raise ParameterError(f"{name}={v} outside [0, 1]")
    raw = 6 * (eps_s + eps)
    return min(1.0, raw), raw > 1.0


def raz_report_dict(p: RazParams) -> dict:
    out = asdict(p)
    out.update(raz_params_check(p).to_dict())
    return out
