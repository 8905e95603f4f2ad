"""Somewhere-random source built by enumerating the seeds of a seeded extractor.

Block ``j`` is ``S'_j = rule(Ext(x1, j))``, a length ``m'`` substring of the
extractor output on seed ``j``.  Three seed families are supported:

``full``
    every ``d``-bit seed (only when ``d`` is small);
``effective``
    every assignment of the seed positions the design actually reads, all
    other positions zero.  Seeds agreeing on those positions produce equal
    blocks, so fractions and averages over this family equal those over the
    full family;
``sampled``
    ``2^{d_family}`` seeds drawn from a public, fixed-seed generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_bit_array
from .bits import ConditionalSource, Distribution, all_bit_rows
from .exceptions import InfeasibleConfigError, ParameterError, ValidationError
from .trevisan import (RSHadamardCode, effective_seeds, extraction_rows)

FULL_FAMILY_MAX_BITS = 20


def support_threshold(m: int, eps: float) -> int:
    """Largest ``m'`` with ``2^{-m'} > ε``, capped at ``m``."""
    if not 0 < eps < 1:
        raise ParameterError(f"eps={eps} outside (0, 1)")
    return min(m, math.ceil(-math.log2(eps)) - 1)


def _apply_rule(full: np.ndarray, m_prime: int, rule) -> np.ndarray:
    """Select ``m'`` columns of the ``(S, m)`` output matrix."""
    m = full.shape[1]
    if rule is None or rule == "prefix":
        return full[:, :m_prime]
    if rule == "suffix":
        return full[:, m - m_prime:]
    if isinstance(rule, (int, np.integer)):
        if not 0 <= rule <= m - m_prime:
            raise ParameterError(f"offset {rule} leaves fewer than {m_prime} bits")
        return full[:, rule:rule + m_prime]
    if callable(rule):
        out = np.asarray([rule(row) for row in full], dtype=np.uint8)
        if out.ndim != 2 or out.shape[1] != m_prime:
            raise ParameterError(f"substring rule must return {m_prime} bits")
        return out
    raise ParameterError(f"unknown substring rule {rule!r}")


def _rule_name(rule) -> str:
    if rule is None:
        return "prefix"
    if callable(rule):
        return getattr(rule, "__name__", "callable")
    return str(rule) if not isinstance(rule, (int, np.integer)) else f"offset:{int(rule)}"


def seed_family(wd, family: str = "effective", family_bits: int | None = None,
                family_seed: int = 0) -> np.ndarray:
    """Seeds enumerated by the SRS, as an ``(S, d)`` bit matrix."""
    if family == "full":
        if wd.d > FULL_FAMILY_MAX_BITS:
            raise ParameterError(f"d={wd.d} too large for the full seed family")
        return all_bit_rows(wd.d)
    if family == "effective":
        return effective_seeds(wd)
    if family == "sampled":
        if family_bits is None or family_bits < 0:
            raise ParameterError("sampled family needs family_bits >= 0")
        rng = np.random.default_rng(family_seed)
        return rng.integers(0, 2, size=(1 << family_bits, wd.d), dtype=np.uint8)
    raise ParameterError(f"unknown seed family {family!r}")


@dataclass(frozen=True, eq=False)
class SomewhereRandomSource:
    blocks: np.ndarray
    d: int
    m_prime: int
    eps: float
    family: str = "effective"
    rule: str = "prefix"

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=np.uint8)
        if b.ndim != 2 or b.shape[1] != self.m_prime:
            raise ValidationError(f"blocks must have shape (2^d, {self.m_prime})")
        if b.shape[0] != 1 << self.d:
            raise ValidationError(f"{b.shape[0]} blocks, expected 2^{self.d}")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)

    @property
    def n_blocks(self) -> int:
        return self.blocks.shape[0]

    def dumps(self) -> str:
        """Text dump: a header line then one row of bits per block."""
        head = f"# srs d={self.d} m_prime={self.m_prime} eps={self.eps!r} family={self.family} rule={self.rule}"
        rows = ["".join("01"[v] for v in row) for row in self.blocks]
        return "\n".join([head, *rows]) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SomewhereRandomSource":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# srs"):
            raise ValidationError("missing SRS header line")
        meta = dict(tok.split("=", 1) for tok in lines[0].split()[2:])
        blocks = np.array([as_bit_array(r) for r in lines[1:]], dtype=np.uint8)
        return cls(blocks, int(meta["d"]), int(meta["m_prime"]), float(meta["eps"]),
                   meta.get("family", "effective"), meta.get("rule", "prefix"))


def check_srs_preconditions(m: int, eps: float, m_prime: int) -> list:
    """Names and messages of violated preconditions (empty when all hold)."""
    out = []
    if m_prime < 2 or m_prime % 2:
        out.append(("m_prime_parity", f"m'={m_prime} must be even and >= 2"))
    if m_prime > m:
        out.append(("m_prime_length", f"m'={m_prime} exceeds extractor output m={m}"))
    if not (0 < eps < 1 and m_prime < -math.log2(eps)):
        out.append(("srs_eps", f"m'={m_prime} is not below -log2(eps) for eps={eps}"))
    return out


def build_srs(x1, params, m_prime: int, substring_rule="prefix", *, family: str = "effective",
              family_bits: int | None = None, family_seed: int = 0, strict: bool = True,
              design=None, code=None) -> SomewhereRandomSource:
    """Blocks ``S'_j`` for every seed ``j`` of the chosen family.

    With ``strict`` every precondition raises; otherwise only parity and
    length are enforced and the error-rate condition is left to the caller.
    """
    wd = design if design is not None else params.design()
    code = code if code is not None else RSHadamardCode(params.n, wd.t)
    x1 = as_bit_array(x1, params.n, "x1")
    for gate, msg in check_srs_preconditions(wd.m, params.eps, m_prime):
        if strict or gate != "srs_eps":
            raise InfeasibleConfigError(gate, msg)
    seeds = seed_family(wd, family, family_bits, family_seed)
    full = srs_outputs(x1[None, :], seeds, wd, code)[0]
    blocks = _apply_rule(full, m_prime, substring_rule)
    d = int(round(math.log2(seeds.shape[0])))
    return SomewhereRandomSource(blocks, d, m_prime, params.eps, family, _rule_name(substring_rule))


def srs_outputs(xs: np.ndarray, seeds: np.ndarray, wd, code) -> np.ndarray:
    """Extractor outputs for every source row and seed: shape ``(X, S, m)``."""
    maps = extraction_rows(seeds, wd, code).astype(np.int64)  # (S, m, n)
    return (np.einsum("smn,xn->xsm", maps, np.asarray(xs, dtype=np.int64)) & 1).astype(np.uint8)


@dataclass
class SrsCertificate:
    tv: np.ndarray
    eps: float
    m_prime: int
    best_index: int
    best_support: int
    notices: list = field(default_factory=list)

    @property
    def n_blocks(self) -> int:
        return int(self.tv.size)

    @property
    def min_tv(self) -> float:
        return float(self.tv.min())

    @property
    def mean_tv(self) -> float:
        return float(self.tv.mean())

    @property
    def max_tv(self) -> float:
        return float(self.tv.max())

    @property
    def every_block_ok(self) -> bool:
        return self.max_tv <= self.eps

    @property
    def good_count(self) -> int:
        return int((self.tv <= math.sqrt(self.eps)).sum())

    @property
    def count_bound(self) -> float:
        return self.n_blocks * (1 - math.sqrt(self.eps))

    @property
    def mean_bound_holds(self) -> bool:
        return self.mean_tv <= self.eps

    @property
    def count_bound_met(self) -> bool:
        return self.good_count >= self.count_bound

    @property
    def remark_holds(self) -> bool:
        """The counting bound, as an implication from the mean bound."""
        return (not self.mean_bound_holds) or self.count_bound_met

    @property
    def full_support(self) -> bool:
        return self.best_support == 1 << self.m_prime

    def to_dict(self) -> dict:
        return {"n_blocks": self.n_blocks, "eps": self.eps, "m_prime": self.m_prime,
                "min_tv": self.min_tv, "mean_tv": self.mean_tv, "max_tv": self.max_tv,
                "every_block_ok": self.every_block_ok, "good_count": self.good_count,
                "count_bound": self.count_bound, "mean_bound_holds": self.mean_bound_holds,
                "count_bound_met": self.count_bound_met, "remark_holds": self.remark_holds,
                "best_index": self.best_index, "best_support": self.best_support,
                "full_support": self.full_support, "notices": list(self.notices)}


def certify_srs(source_model, params, m_prime: int, substring_rule="prefix", *,
                eps: float | None = None, family: str = "effective", family_bits=None,
                family_seed: int = 0, design=None, code=None) -> SrsCertificate:
    """Exact block-by-block distances from uniform for an enumerable source.

    Side information is classical: a block's distance is the ``Λ``-weighted
    average of its per-``λ`` total-variation distance.
    """
    if isinstance(source_model, Distribution):
        source_model = ConditionalSource.single(source_model)
    wd = design if design is not None else params.design()
    code = code if code is not None else RSHadamardCode(params.n, wd.t)
    eps = params.eps if eps is None else eps
    n = source_model.n
    if n != code.n:
        raise ParameterError(f"source has {n} bits, extractor expects {code.n}")
    notices = [f"{g}: {msg}" for g, msg in check_srs_preconditions(wd.m, eps, m_prime)]
    from .bits import MAX_ORACLE_BITS
    from .exceptions import ResourceError
    if n > MAX_ORACLE_BITS:
        raise ResourceError(f"n={n} exceeds the oracle limit of {MAX_ORACLE_BITS} bits")
    seeds = seed_family(wd, family, family_bits, family_seed)
    xs = all_bit_rows(n)
    blocks = _apply_rule_batched(srs_outputs(xs, seeds, wd, code), m_prime, substring_rule)
    w = 1 << np.arange(m_prime - 1, -1, -1)
    z = blocks.astype(np.int64) @ w  # (X, S)
    n_z = 1 << m_prime
    onehot = (z[..., None] == np.arange(n_z)).astype(float)  # (X, S, Z)
    tv = np.zeros(seeds.shape[0])
    support = np.zeros((seeds.shape[0], n_z), dtype=bool)
    for wl, dist in zip(source_model.weights, source_model.per_lambda):
        if wl <= 0:
            continue
        p = np.einsum("x,xsz->sz", dist.probs, onehot)
        tv += wl * 0.5 * np.abs(p - 1.0 / n_z).sum(axis=1)
        support |= p > 0
    best = int(np.argmin(tv))
    return SrsCertificate(tv, eps, m_prime, best, int(support[best].sum()), notices)


def _apply_rule_batched(outputs: np.ndarray, m_prime: int, rule) -> np.ndarray:
    X, S, m = outputs.shape
    return _apply_rule(outputs.reshape(X * S, m), m_prime, rule).reshape(X, S, m_prime)
