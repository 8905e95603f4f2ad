import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blockamp.exceptions import InfeasibleConfigError, ParameterError
from blockamp.gf import BINARY_IRREDUCIBLE
from blockamp.two_source import (ExtractorMode, RazParams, final_output_distance_bound,
                                 inner_product_error, markov_convert, raz_m_ceiling,
                                 raz_params_check, two_source_extract)


def test_raz_margins_reported():
    p = RazParams(2 ** 16, 2 ** 10, 0.7 * 2 ** 16, 64, 16, 0.1)
    rep = raz_params_check(p)
    n1, n2 = 2 ** 16, 2 ** 10
    assert rep.margins["n1_length"] == pytest.approx(n1 - (6 * 16 + 2 * 10))
    assert rep.margins["k1_entropy"] == pytest.approx(0.7 * n1 - (0.6 * n1 + 3 * 16 + 10))
    assert rep.margins["k2_entropy"] == pytest.approx(64 - 163 / 32 * math.log2((1 + 0.3 / 19) * n1 - 0.7 * n1))
    assert rep.margins["m_ceiling"] == pytest.approx(1.6 / 19 * min(n1 / 8, 256 / 163) - 1 - 16)
    assert set(rep.to_dict()) == {"passed", "margins", "eps", "failures"}
    assert rep.eps == pytest.approx(math.sqrt(3) / 2 * 2 ** -4)


def test_short_first_source_fails_length():
    for n2 in (2, 4, 1024):
        rep = raz_params_check(RazParams(8, n2, 8, 8, 1, 0.1))
        assert rep.margins["n1_length"] < 0 and not rep.passed


def test_m_above_ceiling_fails():
    ceiling = raz_m_ceiling(2 ** 16, 10 ** 5, 0.5)
    rep = raz_params_check(RazParams(2 ** 16, 2 ** 10, 0.99 * 2 ** 16, 10 ** 5, math.floor(ceiling) + 1, 0.5))
    assert rep.margins["m_ceiling"] < 0
    assert any("m_ceiling" in f for f in rep.failures)


def test_markov_convert_vectors():
    r = markov_convert(10, 3, 2.0 ** -40, 8)
    assert r.eps_markov == pytest.approx(math.sqrt(3) * 2.0 ** -17, rel=1e-15)
    assert markov_convert(1, 1, 0.25, 2).eps_markov == pytest.approx(math.sqrt(0.75), rel=1e-15)
    assert markov_convert(10, 0, 2.0 ** -10, 1).k1_eff == 20


def test_inner_product_vectors():
    assert two_source_extract("1010", "1100").bits.tolist() == [1]
    assert two_source_extract("0000", "1111").bits.tolist() == [0]
    with pytest.raises(ParameterError):
        two_source_extract("1010", "1100", lengths=(4, 5))


def _gf_mul(a, b, q):
    poly, prod = BINARY_IRREDUCIBLE[q], 0
    for i in range(q):
        if (b >> i) & 1:
            prod ^= a << i
    for deg in range(2 * q - 2, q - 1, -1):
        if (prod >> deg) & 1:
            prod ^= poly << (deg - q)
    return prod


@given(st.integers(1, 6), st.lists(st.integers(0, 1), min_size=1, max_size=30),
       st.lists(st.integers(0, 1), min_size=1, max_size=30))
def test_field_inner_product_matches_oracle(m, a, b):
    L = -(-max(len(a), len(b)) // m) * m
    pa, pb = a + [0] * (L - len(a)), b + [0] * (L - len(b))
    acc = 0
    for i in range(0, L, m):
        acc ^= _gf_mul(int("".join(map(str, pa[i:i + m])), 2), int("".join(map(str, pb[i:i + m])), 2), m)
    out = two_source_extract(np.array(a), np.array(b), m)
    assert int("".join(map(str, out.bits)), 2) == acc


def test_raz_gated_refuses_infeasible():
    with pytest.raises(InfeasibleConfigError):
        two_source_extract("1010", "1100", mode=ExtractorMode.RAZ_GATED, raz=RazParams(4, 4, 3, 3, 1, 0.1))
    with pytest.raises(ParameterError):
        two_source_extract("1010", "1100", mode="raz-gated")


def test_inner_product_error_formula_and_clamp():
    assert inner_product_error(4, 3, 3, 1) == pytest.approx(0.25)
    assert inner_product_error(2 ** 12, 0, 0, 8) == 1.0
    small = inner_product_error(4096, 3000, 3000, 4)
    assert small == pytest.approx(0.5 * math.sqrt(15) * 2.0 ** ((4096 - 6000) / 2), rel=1e-12)


def test_final_output_distance_vectors():
    assert final_output_distance_bound(0, 0) == (0, False)
    v, clamped = final_output_distance_bound(0.001, 0.002)
    assert v == pytest.approx(0.018) and not clamped
    assert final_output_distance_bound(0.1, 0.1) == (1.0, True)
    with pytest.raises(ParameterError):
        final_output_distance_bound(-0.1, 0)
