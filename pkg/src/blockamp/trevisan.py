"""Trevisan's extractor over a Reed-Solomon ⊙ Hadamard one-bit extractor.

The one-bit extractor ``C(x, y)`` splits the ``t``-bit seed into an
evaluation point ``α`` (first ``q = t/2`` bits) and a Hadamard index
``β`` (last ``q`` bits).  The source ``x`` is cut into ``q``-bit symbols
that are read as the coefficients of a polynomial ``P_x`` over
``GF(2^q)`` (symbol ``i`` is the coefficient of ``α^i``; the last symbol
is zero padded), and::

    C(x, y) = <bits(P_x(α)), β>  mod 2

``C`` is GF(2)-linear in ``x``: ``C(x, y) = <a_y, x>`` for a fixed row
vector ``a_y``.  The bulk paths below exploit that by precomputing rows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from ._validation import as_bit_array
from .bits import BitString, bits_to_int
from .design import WeakDesign, build_weak_design
from .exceptions import ParameterError
from .gf import BINARY_IRREDUCIBLE, gf2_mul, gf2_mul_table

#: Row tables are materialised only up to this seed length.
MAX_TABLE_SEED_BITS = 20


class Regime(str, enum.Enum):
    """Parameter regimes for the seeded extractor.

    ``SHORT_SEED``: ``k = n^γ m + 8 log(m/ε) + C0`` with seed ``O(log n / γ)``.
    ``LONG_OUTPUT``: ``k = m + 4 log(1/ε) + C0`` with seed ``O(log²(n/ε) log m)``.
    """

    SHORT_SEED = "short-seed"
    LONG_OUTPUT = "long-output"


def min_seed_length(n: int) -> int:
    """Smallest even ``t`` whose Reed-Solomon code is injective on ``n`` bits."""
    for q in range(1, max(BINARY_IRREDUCIBLE) + 1):
        if -(-n // q) <= 1 << q:
            return 2 * q
    raise ParameterError(f"n={n} is too long for the supported symbol sizes")


class RSHadamardCode:
    """One-bit extractor ``{0,1}^n x {0,1}^t -> {0,1}``.

    Parameters
    ----------
    n : int
        Source length.
    t : int, optional
        Seed length; must be even.  Defaults to :func:`min_seed_length`.
    """

    def __init__(self, n: int, t: int | None = None):
        if n < 1:
            raise ParameterError("n must be positive")
        t = min_seed_length(n) if t is None else int(t)
        if t < 2 or t % 2:
            raise ParameterError(f"seed length t={t} must be even and >= 2")
        q = t // 2
        if q not in BINARY_IRREDUCIBLE:
            raise ParameterError(f"symbol size q={q} unsupported")
        n_symbols = -(-n // q)
        if n_symbols > 1 << q:
            raise ParameterError(
                f"{n_symbols} symbols of {q} bits do not fit a degree < {1 << q} code; increase t")
        self.n = n
        self.t = t
        self.q = q
        self.n_symbols = n_symbols

    def __repr__(self):
        return f"RSHadamardCode(n={self.n}, t={self.t})"

    @property
    def relative_distance(self) -> float:
        """Guaranteed fraction of seeds on which two distinct sources differ."""
        return 0.5 * (1 - (self.n_symbols - 1) / (1 << self.q))

    def symbols(self, x) -> list:
        x = as_bit_array(x, self.n, "x")
        pad = np.zeros(self.n_symbols * self.q - self.n, dtype=np.uint8)
        chunks = np.concatenate([x, pad]).reshape(self.n_symbols, self.q)
        return [bits_to_int(c) for c in chunks]

    def evaluate(self, x, alpha: int) -> int:
        acc = 0
        for s in reversed(self.symbols(x)):
            acc = gf2_mul(acc, alpha, self.q) ^ s
        return acc

    def bit(self, x, y) -> int:
        y = as_bit_array(y, self.t, "y")
        alpha = bits_to_int(y[: self.q])
        beta = bits_to_int(y[self.q:])
        return bin(self.evaluate(x, alpha) & beta).count("1") & 1

    def row(self, y: int) -> np.ndarray:
        """The vector ``a_y`` with ``C(x, y) = <a_y, x> mod 2``."""
        if self.t <= MAX_TABLE_SEED_BITS:
            return self.rows[y]
        return self._row_direct(int(y))

    def _row_direct(self, y: int) -> np.ndarray:
        q = self.q
        alpha, beta = y >> q, y & ((1 << q) - 1)
        out = np.zeros(self.n_symbols * q, dtype=np.uint8)
        power = 1
        for i in range(self.n_symbols):
            for b in range(q):
                v = gf2_mul(1 << (q - 1 - b), power, q)
                out[i * q + b] = bin(v & beta).count("1") & 1
            power = gf2_mul(power, alpha, q)
        return out[: self.n]

    @cached_property
    def rows(self) -> np.ndarray:
        """``(2^t, n)`` matrix whose row ``y`` is ``a_y``."""
        if self.t > MAX_TABLE_SEED_BITS:
            raise ParameterError(f"t={self.t} too large to tabulate")
        q = self.q
        size = 1 << q
        alphas = np.arange(size)
        if q <= 12:
            mul = gf2_mul_table(q)
            powers = np.ones((self.n_symbols, size), dtype=np.int64)
            for i in range(1, self.n_symbols):
                powers[i] = mul[powers[i - 1], alphas]
            units = 1 << (q - 1 - np.arange(q))
            # value[i, b, α] = (unit_b) * α^i in GF(2^q)
            value = mul[units[None, :, None], powers[:, None, :]]
        else:  # pragma: no cover - t <= 20 implies q <= 10
            raise ParameterError("unsupported")
        dtype = np.uint8 if q <= 8 else np.uint16
        value = value.astype(dtype)
        parity = _parity_table(q)
        betas = np.arange(size, dtype=dtype)
        table = np.empty((size * size, self.n_symbols * q), dtype=np.uint8)
        for alpha in range(size):
            # bits[β, i*q + b] = parity(value[i, b, α] & β)
            block = parity[value[:, :, alpha].reshape(-1)[None, :] & betas[:, None]]
            table[alpha * size:(alpha + 1) * size] = block
        table = np.ascontiguousarray(table[:, : self.n])
        table.setflags(write=False)
        return table


@lru_cache(maxsize=None)
def _parity_table(q: int) -> np.ndarray:
    v = np.arange(1 << q)
    p = np.zeros(v.size, dtype=np.uint8)
    while v.any():
        p ^= (v & 1).astype(np.uint8)
        v = v >> 1
    return p


def one_bit_extract(x, y, code: RSHadamardCode | None = None) -> int:
    """``C(x, y)``; the code defaults to ``RSHadamardCode(len(x), len(y))``."""
    x = as_bit_array(x, name="x")
    y = as_bit_array(y, name="y")
    if code is None:
        code = RSHadamardCode(x.size, y.size)
    elif y.size != code.t:
        raise ParameterError(f"seed has {y.size} bits, code expects t={code.t}")
    return code.bit(x, y)


def _code_for(wd: WeakDesign, n: int, code):
    if code is None:
        code = RSHadamardCode(n, wd.t)
    if code.t != wd.t:
        raise ParameterError(f"code seed length {code.t} != design set size {wd.t}")
    if code.n != n:
        raise ParameterError(f"code expects n={code.n}, source has {n} bits")
    return code


def trevisan_extract(x, seed, wd: WeakDesign, code: RSHadamardCode | None = None) -> BitString:
    """``Ext(x, y) = C(x, y|R_1) ... C(x, y|R_m)``.

    ``y|R_i`` lists the seed bits at the positions of ``R_i`` in ascending
    order.
    """
    x = as_bit_array(x, name="x")
    seed = as_bit_array(seed, name="seed")
    if seed.size != wd.d:
        raise ParameterError(f"seed has {seed.size} bits, design expects d={wd.d}")
    code = _code_for(wd, x.size, code)
    out = extraction_rows(seed[None, :], wd, code)[0] @ x.astype(np.int64) % 2
    return BitString(out.astype(np.uint8))


def restricted_seed_ints(seeds: np.ndarray, wd: WeakDesign) -> np.ndarray:
    """Integer value of ``y|R_i`` for each seed row and set; shape ``(S, m)``."""
    idx = np.array([sorted(s) for s in wd.sets], dtype=np.int64)
    weights = 1 << np.arange(wd.t - 1, -1, -1, dtype=np.int64)
    return seeds[:, idx].astype(np.int64) @ weights


def extraction_rows(seeds: np.ndarray, wd: WeakDesign, code: RSHadamardCode) -> np.ndarray:
    """Linear maps of the extractor for a batch of seeds, shape ``(S, m, n)``."""
    ys = restricted_seed_ints(np.atleast_2d(seeds), wd)
    if code.t <= MAX_TABLE_SEED_BITS:
        return code.rows[ys]
    return np.stack([[code.row(int(y)) for y in row] for row in ys])


def effective_positions(wd: WeakDesign) -> np.ndarray:
    """Seed positions that influence the output (the union of the sets)."""
    return np.array(sorted({j for s in wd.sets for j in s}), dtype=np.int64)


def effective_seeds(wd: WeakDesign, max_bits: int = 24) -> np.ndarray:
    """All seeds that differ on the effective positions (others held at zero).

    Seeds agreeing on the union of the sets give identical outputs, so a
    uniform seed induces a uniform choice among these ``2^|U|`` rows.
    """
    pos = effective_positions(wd)
    if pos.size > max_bits:
        raise ParameterError(f"{pos.size} effective seed bits exceed limit {max_bits}")
    from .bits import all_bit_rows

    seeds = np.zeros((1 << pos.size, wd.d), dtype=np.uint8)
    seeds[:, pos] = all_bit_rows(pos.size)
    return seeds


# --------------------------------------------------------------------------
# parameter calculus


@dataclass(frozen=True)
class TrevisanParams:
    n: int
    m: int
    d: int
    k: float
    eps: float
    t: int
    r: float
    regime: Regime
    constants: dict = field(default_factory=dict)

    def design(self) -> WeakDesign:
        return build_weak_design(self.m, self.t)

    def code(self) -> RSHadamardCode:
        return RSHadamardCode(self.n, self.t)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "d": self.d, "k": self.k, "eps": self.eps,
                "t": self.t, "r": self.r, "regime": self.regime.value,
                "constants": dict(self.constants)}


def _short_seed_k(n, gamma, m, eps, c0):
    return n ** gamma * m + 8 * math.log2(m / eps) + c0


def params_for_regime(n: int, alpha: float, gamma: float, regime=Regime.SHORT_SEED,
                      c1: float = 1.0, c0: float = 0.0, t: int | None = None) -> TrevisanParams:
    """Concrete parameters for a source with min-entropy ``n**alpha``.

    All hidden constants are pinned: the error is ``ε = n^{-c1}``, the
    additive entropy constant is ``c0``, and the output length ``m`` is the
    largest integer whose entropy requirement fits in ``n**alpha``.

    Raises
    ------
    ParameterError
        If ``0 < γ < α <= 1`` fails (short-seed regime) or no ``m >= 1`` fits.
    """
    regime = Regime(regime)
    if n < 2:
        raise ParameterError("n must be at least 2")
    if not 0 < alpha <= 1:
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if c1 <= 0:
        raise ParameterError("c1 must be positive")
    k_avail = n ** alpha
    eps = n ** (-c1)
    log_n = math.log2(n)
    constants = {"alpha": alpha, "c1": c1, "c0": c0, "k_available": k_avail}
    if regime is Regime.SHORT_SEED:
        if not 0 < gamma < alpha:
            raise ParameterError(f"need 0 < gamma < alpha, got gamma={gamma}, alpha={alpha}")
        m = 0
        while _short_seed_k(n, gamma, m + 1, eps, c0) <= k_avail:
            m += 1
        if m < 1:
            raise ParameterError(
                f"infeasible: k(m=1) = {_short_seed_k(n, gamma, 1, eps, c0):.3f} > n^alpha = {k_avail:.3f}")
        k = _short_seed_k(n, gamma, m, eps, c0)
        t_min = 2 * math.ceil(math.ceil(log_n / gamma) / 2)
        constants.update(gamma=gamma, m_asymptotic=n ** (alpha - gamma),
                         seed_bound=log_n / gamma)
    else:
        m = math.floor(k_avail - 4 * math.log2(1 / eps) - c0)
        if m < 1:
            raise ParameterError(f"infeasible: n^alpha = {k_avail:.3f} leaves no output bits")
        k = m + 4 * math.log2(1 / eps) + c0
        t_min = 2 * math.ceil(math.ceil(math.log2(n / eps)) / 2)
        constants.update(seed_bound=math.ceil(math.log2(n / eps)) ** 2 * max(1, math.ceil(math.log2(m))))
    if k > n:
        raise ParameterError(f"infeasible: required k={k:.3f} exceeds n={n}")
    if t is None:
        t = max(min_seed_length(n), t_min)
    code = RSHadamardCode(n, t)
    wd = build_weak_design(m, code.t)
    constants["field_size"] = wd.field_size
    return TrevisanParams(n, m, wd.d, k, eps, code.t, wd.r, regime, constants)


def desk_params(n: int, m: int, k: float, t: int | None = None) -> TrevisanParams:
    """Parameters for an explicitly sized instance; ``eps`` is the composed bound."""
    code = RSHadamardCode(n, t)
    wd = build_weak_design(m, code.t)
    eps = composed_error_bound(code, wd, k)
    return TrevisanParams(n, m, wd.d, float(k), eps, code.t, wd.r, Regime.SHORT_SEED,
                          {"field_size": wd.field_size, "desk": True})


def composed_guarantee(k_one_bit: float, eps_one_bit: float, m: int, r: float):
    """Entropy threshold and error of the m-bit extractor from its one-bit part.

    Returns ``(k + r m + log2(1/ε), 3 m sqrt(ε))``.
    """
    return k_one_bit + r * m + math.log2(1 / eps_one_bit), 3 * m * math.sqrt(eps_one_bit)


def one_bit_error_bound(code: RSHadamardCode, k: float) -> float:
    """Upper bound on the one-bit extractor's strong error for min-entropy ``k``.

    Rows ``a_y = 0`` always output 0 and contribute ``½`` each; the rest is
    bounded with Cauchy-Schwarz and Parseval, using the largest multiplicity
    of a nonzero row.  Valid for every source with min-entropy ``>= k``.
    """
    if code.t > MAX_TABLE_SEED_BITS:
        raise ParameterError("one-bit bound needs a tabulated code")
    ny = 1 << code.t
    keys, counts = np.unique(_pack_rows(code.rows), return_counts=True)
    zero = counts[keys == 0].sum()
    nonzero = counts[keys != 0]
    mu = int(nonzero.max()) if nonzero.size else 0
    spectrum = max(0.0, 2.0 ** (code.n - k) - 1)
    bound = 0.5 * zero / ny + math.sqrt((ny - zero) * mu * spectrum) / (2 * ny)
    return min(0.5, bound)


def _pack_rows(rows: np.ndarray) -> np.ndarray:
    n = rows.shape[-1]
    w = (1 << np.arange(n - 1, -1, -1, dtype=np.int64))
    return rows.astype(np.int64) @ w


def composed_error_bound(code: RSHadamardCode, wd: WeakDesign, k: float) -> float:
    """Smallest error the composition theorem certifies for total entropy ``k``.

    Searches the one-bit error ``ε_C`` for which the one-bit bound holds at
    ``k_C = k - r m - log2(1/ε_C)``; the composed error is ``3 m sqrt(ε_C)``
    clamped to 1.
    """
    m, r = wd.m, wd.r

    def feasible(e):
        kc = k - r * m - math.log2(1 / e)
        return e >= one_bit_error_bound(code, kc)

    lo, hi = 1e-300, 0.5
    if not feasible(hi):
        return 1.0
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return min(1.0, 3 * m * math.sqrt(hi))
