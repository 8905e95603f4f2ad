"""Worst-case strong-extractor distances at desk scale.

A seeded extractor with ``Ny`` (effective) seeds is tabulated as an integer
matrix ``Z[y, x]`` holding the packed ``m``-bit output.  For a source ``X``
the strong distance is::

    ½‖(Ext(X, Y), Y) − U_m × U_Y‖ = mean_y TV(Ext(X, y), U_m)

Flat sources are the vertices of the set of ``k``-sources and the distance
is convex in the source, so the maximum over all ``k``-sources is attained
at a flat one.  Three routes compute or bound it:

* :func:`exhaustive_worst_case` walks every flat source (tiny ``n`` only).
* :func:`vertex_worst_case` writes the distance as a maximum over
  per-seed tests ``T_y`` of linear functionals; for fixed tests the best
  flat source is a top-``2^k`` selection, so enumerating the tests is exact.
* :func:`search_worst_case` and :func:`fourier_upper_bound` bracket the
  value when neither exact route is affordable.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .bits import DEFAULT_FLAT_SOURCE_CAP, all_bit_rows, iter_flat_supports
from .exceptions import ParameterError, ResourceError

#: Largest number of test patterns :func:`vertex_worst_case` will enumerate.
MAX_PATTERNS = 1 << 24


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis (big-endian) into integers."""
    w = 1 << np.arange(bits.shape[-1] - 1, -1, -1, dtype=np.int64)
    return bits.astype(np.int64) @ w


def linear_table(maps: np.ndarray) -> np.ndarray:
    """Tabulate ``x -> A_y x`` for GF(2) maps of shape ``(Ny, m, n)``."""
    maps = np.asarray(maps, dtype=np.int64)
    n = maps.shape[-1]
    xs = all_bit_rows(n).astype(np.int64)
    out = np.einsum("ymn,xn->yxm", maps, xs) & 1
    return pack_bits(out)


def trevisan_table(code, wd):
    """Output table over all effective seeds, plus the maps it came from."""
    from .trevisan import effective_seeds, extraction_rows

    seeds = effective_seeds(wd)
    maps = extraction_rows(seeds, wd, code)
    return linear_table(maps), maps


def flat_source_distance(Z: np.ndarray, support, m: int) -> float:
    """Strong distance of the flat source on ``support``."""
    sub = Z[:, np.asarray(support)]
    K = sub.shape[1]
    counts = np.stack([(sub == z).sum(axis=1) for z in range(1 << m)], axis=1)
    tv = 0.5 * np.abs(counts / K - 2.0 ** -m).sum(axis=1)
    return float(tv.mean())


def exhaustive_worst_case(Z: np.ndarray, n: int, k: int, m: int,
                          cap: int = DEFAULT_FLAT_SOURCE_CAP, batch: int = 4096):
    """Maximum strong distance over every flat ``k``-source, by enumeration.

    Returns ``(value, support)`` of a maximiser.
    """
    supports = iter_flat_supports(n, k, cap)
    best, arg = -1.0, None
    zs = np.arange(1 << m)
    K = 1 << k
    while True:
        chunk = list(itertools.islice(supports, batch))
        if not chunk:
            break
        S = np.array(chunk, dtype=np.int64)
        sub = Z[:, S]  # (Ny, B, K)
        counts = (sub[..., None] == zs).sum(axis=2)  # (Ny, B, 2^m)
        tv = 0.5 * np.abs(counts / K - 2.0 ** -m).sum(axis=2).mean(axis=0)
        i = int(np.argmax(tv))
        if tv[i] > best:
            best, arg = float(tv[i]), tuple(chunk[i])
    return best, arg


def _distinct_rows(Z: np.ndarray):
    rows, mult = np.unique(Z, axis=0, return_counts=True)
    constant = (rows == rows[:, :1]).all(axis=1)
    return rows[~constant], mult[~constant], int(mult[constant].sum())


def vertex_worst_case(Z: np.ndarray, k: int, m: int, max_patterns: int = MAX_PATTERNS):
    """Exact maximum strong distance over all ``k``-sources.

    For each distinct non-constant seed map a test set ``T ⊂ {0,1}^m`` is
    chosen (trivial tests never help at the optimum); given the tests the
    objective is linear in the source and maximised by the ``2^k`` inputs of
    largest weight.  Constant maps contribute ``1 − 2^{-m}`` regardless.
    """
    ny, N = Z.shape
    K = 1 << k
    if K > N:
        raise ParameterError(f"k={k} exceeds the input length")
    rows, mult, n_const = _distinct_rows(Z)
    R = rows.shape[0]
    const_part = n_const * (1 - 2.0 ** -m) / ny
    if R == 0:
        return const_part
    tests = [t for t in range(1, (1 << (1 << m)) - 1)]
    n_patterns = len(tests) ** R
    if n_patterns > max_patterns:
        raise ResourceError(f"2^{math.log2(len(tests)) * R:.1f} test patterns exceed limit {max_patterns}")
    # options[r, o, x] = mult_r * [Z_r(x) in T_o]; offsets[r, o] = mult_r |T_o| / 2^m
    member = np.array([[(t >> z) & 1 for z in range(1 << m)] for t in tests], dtype=np.int64)
    options = mult[:, None, None] * member[:, rows].transpose(1, 0, 2)
    sizes = member.sum(axis=1)
    offsets = mult[:, None] * sizes[None, :] / (1 << m)
    best = -np.inf
    L = len(tests)
    chunk = max(1, min(n_patterns, (1 << 22) // max(N, 1)))
    for start in range(0, n_patterns, chunk):
        idx = np.arange(start, min(n_patterns, start + chunk))
        choice = np.stack([(idx // L ** r) % L for r in range(R)], axis=1)
        W = np.zeros((idx.size, N))
        off = np.zeros(idx.size)
        for r in range(R):
            W += options[r, choice[:, r]]
            off += offsets[r, choice[:, r]]
        top = np.partition(W, N - K, axis=1)[:, N - K:].sum(axis=1) / K
        best = max(best, float((top - off).max()))
    return best / ny + const_part


def search_worst_case(Z: np.ndarray, k: int, m: int, restarts: int = 64, rng=None,
                      max_iter: int = 200):
    """Lower bound on the worst-case distance by alternating ascent.

    Given a flat source the best tests are ``T_y = {z : P(z) > 2^{-m}}``;
    given tests the best source is a top-``2^k`` selection.  Each step never
    decreases the objective; random restarts diversify.  Returns
    ``(value, support)``.
    """
    rng = np.random.default_rng(rng)
    ny, N = Z.shape
    K = 1 << k
    zs = np.arange(1 << m)
    onehot = Z[..., None] == zs  # (Ny, N, 2^m)
    best, arg = -1.0, None
    for _ in range(restarts):
        S = np.sort(rng.choice(N, size=K, replace=False))
        prev = -1.0
        for _ in range(max_iter):
            P = onehot[:, S].mean(axis=1)  # (Ny, 2^m)
            val = float(0.5 * np.abs(P - 2.0 ** -m).sum(axis=1).mean())
            if val <= prev + 1e-15:
                break
            prev = val
            T = P > 2.0 ** -m
            w = (onehot & T[:, None, :]).any(axis=2).sum(axis=0)
            w = w + rng.random(N) * 1e-9
            S = np.sort(np.argpartition(w, N - K)[N - K:])
        if prev > best:
            best, arg = prev, tuple(int(s) for s in S)
    return best, arg


def fourier_upper_bound(maps: np.ndarray, k: float) -> float:
    """Upper bound valid for every source with min-entropy ``>= k``.

    Per seed, ``TV <= ½ sqrt(Σ_{c≠0} bias(c·A_y)²)``; averaging with
    Cauchy-Schwarz and counting how often each vector ``v = c·A_y`` occurs
    gives ``½ sqrt((ν_0 + ν'_max (2^{n-k} − 1)) / Ny)`` where ``ν_0`` counts
    zero combinations and ``ν'_max`` the most frequent nonzero one.
    """
    maps = np.asarray(maps, dtype=np.int64)
    ny, m, n = maps.shape
    cs = all_bit_rows(m)[1:].astype(np.int64)  # nonzero combinations
    combos = np.einsum("cm,ymn->ycn", cs, maps) & 1
    keys = pack_bits(combos).ravel()
    vals, counts = np.unique(keys, return_counts=True)
    nu0 = int(counts[vals == 0].sum())
    nz = counts[vals != 0]
    numax = int(nz.max()) if nz.size else 0
    spectrum = max(0.0, 2.0 ** (n - k) - 1)
    return min(1.0, 0.5 * math.sqrt((nu0 + numax * spectrum) / ny))


# --------------------------------------------------------------------------
# two-source


def two_source_table(ext, n1: int, n2: int) -> np.ndarray:
    """``T[x1, x2]`` = packed output of ``ext(bits(x1), bits(x2))``."""
    X1, X2 = all_bit_rows(n1), all_bit_rows(n2)
    return np.array([[int("".join(map(str, ext(a, b))), 2) for b in X2] for a in X1], dtype=np.int64)


def _per_x2_tv(T: np.ndarray, S1, m: int) -> np.ndarray:
    sub = T[np.asarray(S1)]  # (K1, N2)
    counts = np.stack([(sub == z).sum(axis=0) for z in range(1 << m)], axis=1)
    return 0.5 * np.abs(counts / sub.shape[0] - 2.0 ** -m).sum(axis=1)


def two_source_worst_case(T: np.ndarray, n1: int, n2: int, k1: int, k2: int, m: int,
                          cap: int = DEFAULT_FLAT_SOURCE_CAP) -> float:
    """Exact worst strong-in-``X2`` error over all flat ``(k1, k2)`` pairs.

    For a fixed ``X1`` the distance ``E_{x2~X2} TV(Ext(X1, x2), U_m)`` is
    linear in ``X2``, so the best flat ``X2`` is the top ``2^k2`` of the
    per-``x2`` values.
    """
    K2 = 1 << k2
    best = 0.0
    for S1 in iter_flat_supports(n1, k1, cap):
        v = _per_x2_tv(T, S1, m)
        best = max(best, float(np.sort(v)[-K2:].mean()))
    return best


def two_source_worst_case_bruteforce(T: np.ndarray, n1: int, n2: int, k1: int, k2: int, m: int,
                                     cap: int = DEFAULT_FLAT_SOURCE_CAP) -> float:
    """Same quantity by walking every pair of flat sources."""
    supports2 = list(iter_flat_supports(n2, k2, cap))
    best = 0.0
    for S1 in iter_flat_supports(n1, k1, cap):
        v = _per_x2_tv(T, S1, m)
        for S2 in supports2:
            best = max(best, float(v[list(S2)].mean()))
    return best
