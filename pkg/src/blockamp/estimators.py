"""scikit-learn style wrappers around the extractors and the block test.

Rows of ``X`` are bit strings.  Every estimator is stateless apart from the
objects built in ``fit`` (design, code, seed family), so ``fit`` may be
called on any array with the right number of columns.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_bit_array, check_bits
from .design import build_weak_design
from .devices import sample_rounds
from .exceptions import ParameterError
from .games import round_scores
from .protocol import build_device, device_inputs
from .srs import _apply_rule_batched, seed_family, srs_outputs
from .trevisan import RSHadamardCode, extraction_rows, min_seed_length
from .two_source import ExtractorMode, RazParams, two_source_extract


class TrevisanExtractor(TransformerMixin, BaseEstimator):
    """Seeded extractor ``n -> m`` with one fixed seed.

    Parameters
    ----------
    m : int
        Output bits.
    t : int, optional
        One-bit seed length; the smallest admissible value when omitted.
    seed : bit string or None
        Seed of length ``d``.  ``None`` draws one from ``random_state``.
    random_state : int
    """

    def __init__(self, m=1, t=None, seed=None, random_state=0):
        self.m = m
        self.t = t
        self.seed = seed
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_bits(X)
        self.n_features_in_ = X.shape[1]
        t = self.t if self.t is not None else min_seed_length(self.n_features_in_)
        self.design_ = build_weak_design(self.m, t)
        self.code_ = RSHadamardCode(self.n_features_in_, t)
        if self.seed is None:
            rng = np.random.default_rng(self.random_state)
            seed = rng.integers(0, 2, self.design_.d, dtype=np.uint8)
        else:
            seed = as_bit_array(self.seed, self.design_.d, "seed")
        self.seed_ = seed
        self.maps_ = extraction_rows(seed[None, :], self.design_, self.code_)[0].astype(np.int64)
        return self

    def transform(self, X):
        check_is_fitted(self, "maps_")
        X = check_bits(X, self.n_features_in_)
        return ((X.astype(np.int64) @ self.maps_.T) & 1).astype(np.uint8)


class SomewhereRandomTransformer(TransformerMixin, BaseEstimator):
    """Concatenated SRS blocks ``S'_1 .. S'_{2^d}`` of every row.

    Output rows have ``2^d * m_prime`` bits, block after block.
    """

    def __init__(self, m=8, m_prime=2, t=None, family="effective", family_bits=None,
                 family_seed=0, substring_rule="prefix"):
        self.m = m
        self.m_prime = m_prime
        self.t = t
        self.family = family
        self.family_bits = family_bits
        self.family_seed = family_seed
        self.substring_rule = substring_rule

    def fit(self, X, y=None):
        X = check_bits(X)
        self.n_features_in_ = X.shape[1]
        if self.m_prime > self.m:
            raise ParameterError(f"m_prime={self.m_prime} exceeds m={self.m}")
        t = self.t if self.t is not None else min_seed_length(self.n_features_in_)
        self.design_ = build_weak_design(self.m, t)
        self.code_ = RSHadamardCode(self.n_features_in_, t)
        self.seeds_ = seed_family(self.design_, self.family, self.family_bits, self.family_seed)
        self.n_blocks_ = self.seeds_.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "seeds_")
        X = check_bits(X, self.n_features_in_)
        out = srs_outputs(X, self.seeds_, self.design_, self.code_)
        blocks = _apply_rule_batched(out, self.m_prime, self.substring_rule)
        return blocks.reshape(X.shape[0], -1)


class TwoSourceExtractor(TransformerMixin, BaseEstimator):
    """Inner product over ``GF(2^m)`` of the first ``n1`` columns with the rest.

    In ``raz-gated`` mode ``fit`` refuses parameters that fail the Raz
    inequalities (``k1``, ``k2`` and ``delta_prime`` are then required).
    """

    def __init__(self, n1, m=1, mode="inner-product", k1=None, k2=None, delta_prime=0.1):
        self.n1 = n1
        self.m = m
        self.mode = mode
        self.k1 = k1
        self.k2 = k2
        self.delta_prime = delta_prime

    def fit(self, X, y=None):
        X = check_bits(X)
        if not 0 < self.n1 < X.shape[1]:
            raise ParameterError(f"n1={self.n1} must split {X.shape[1]} columns")
        self.n_features_in_ = X.shape[1]
        self.mode_ = ExtractorMode(self.mode)
        self.raz_ = None
        if self.mode_ is ExtractorMode.RAZ_GATED:
            if self.k1 is None or self.k2 is None:
                raise ParameterError("raz-gated mode needs k1 and k2")
            self.raz_ = RazParams(self.n1, X.shape[1] - self.n1, self.k1, self.k2, self.m,
                                  self.delta_prime)
            # run once so infeasible parameters fail at fit time
            two_source_extract(X[0, :self.n1], X[0, self.n1:], self.m, self.mode_, self.raz_)
        return self

    def transform(self, X):
        check_is_fitted(self, "mode_")
        X = check_bits(X, self.n_features_in_)
        return np.array([two_source_extract(r[:self.n1], r[self.n1:], self.m, self.mode_, self.raz_).bits
                         for r in X], dtype=np.uint8)


class BellBlockTest(BaseEstimator):
    """Per-block MDL-Hardy test on concatenated SRS rows.

    ``predict`` returns 1 when every block average reaches ``delta`` and 0
    when the run aborts; ``score_samples`` returns the smallest block average.
    """

    def __init__(self, m_prime=2, delta=0.0, eps=0.0, device=None, random_state=0):
        self.m_prime = m_prime
        self.delta = delta
        self.eps = eps
        self.device = device
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.m_prime < 2 or self.m_prime % 2:
            raise ParameterError("m_prime must be even and >= 2")
        self.device_ = build_device(self.device or {"kind": "hardy", "noise": 0.0})
        self.rng_ = np.random.default_rng(self.random_state)
        return self

    def block_scores(self, X):
        check_is_fitted(self, "device_")
        X = check_bits(X)
        if X.shape[1] % self.m_prime:
            raise ParameterError(f"row length {X.shape[1]} is not a multiple of m_prime")
        out = []
        for row in X:
            inputs = device_inputs(row.reshape(-1, self.m_prime))
            outputs = sample_rounds(self.device_, inputs, self.rng_)
            s = round_scores(inputs, outputs, self.eps)
            out.append(s.reshape(-1, self.m_prime // 2).mean(axis=1))
        return np.array(out)

    def score_samples(self, X):
        return self.block_scores(X).min(axis=1)

    def predict(self, X):
        return (self.score_samples(X) >= self.delta).astype(np.uint8)
