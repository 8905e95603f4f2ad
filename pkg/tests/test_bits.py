import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockamp.bits import (BitString, ConditionalSource, Distribution, all_bit_rows, bits_to_int,
                           conditional_min_entropy, enumerate_flat_sources, guessing_min_entropy,
                           int_to_bits, iter_flat_supports, min_entropy, statistical_distance)
from blockamp.exceptions import ParameterError, ResourceError, ValidationError


def test_min_entropy_vectors():
    assert min_entropy(Distribution.uniform(3)) == 3.0
    assert min_entropy(Distribution.point_mass(3, 5)) == 0.0
    assert min_entropy(Distribution(2, [0.5, 0.25, 0.125, 0.125])) == 1.0


def test_invalid_distribution_rejected():
    with pytest.raises(ValidationError):
        Distribution(1, [0.7, 0.7])
    with pytest.raises(ValidationError):
        Distribution(1, [1.2, -0.2])
    with pytest.raises(ValidationError):
        Distribution(2, [0.5, 0.5])


def test_conditional_min_entropy_vectors():
    u = Distribution.uniform(2)
    assert conditional_min_entropy(ConditionalSource.single(u)) == 2.0
    src = ConditionalSource((0, 1), (0.5, 0.5), (u, Distribution.point_mass(2, 1)))
    assert conditional_min_entropy(src) == 0.0
    halves = ConditionalSource((0, 1), (0.5, 0.5),
                               (Distribution(2, [.5, .5, 0, 0]), Distribution(2, [0, 0, .5, .5])))
    assert conditional_min_entropy(halves) == 1.0
    assert guessing_min_entropy(halves) == 1.0


def test_empty_side_information_rejected():
    with pytest.raises(ValidationError):
        ConditionalSource((), (), ())


def test_statistical_distance_vectors():
    u1 = Distribution.uniform(1)
    assert statistical_distance(u1, u1) == 0.0
    assert statistical_distance(Distribution.point_mass(1, 0), u1) == 0.5
    for n in (1, 3, 5):
        d = statistical_distance(Distribution.point_mass(n, 0), Distribution.uniform(n))
        assert d == pytest.approx(1 - 2.0 ** -n, abs=1e-15)
    with pytest.raises(ValidationError):
        statistical_distance(u1, Distribution.uniform(2))


def test_flat_source_counts():
    assert len(list(enumerate_flat_sources(2, 2))) == 1
    assert len(list(enumerate_flat_sources(2, 1))) == math.comb(4, 2)
    pts = list(enumerate_flat_sources(3, 0))
    assert len(pts) == 8
    assert all(min_entropy(d) == 0.0 for d in pts)
    with pytest.raises(ResourceError):
        iter_flat_supports(8, 5, cap=1000)
    with pytest.raises(ParameterError):
        iter_flat_supports(3, 4)


def test_all_bit_rows_big_endian():
    rows = all_bit_rows(3)
    assert rows.shape == (8, 3)
    assert [bits_to_int(r) for r in rows] == list(range(8))


@given(st.integers(0, 2 ** 20 - 1))
def test_int_bits_roundtrip(v):
    assert bits_to_int(int_to_bits(v, 20)) == v


@given(st.lists(st.integers(0, 1), min_size=1, max_size=64))
def test_bitstring_roundtrips(bits):
    b = BitString(np.array(bits, dtype=np.uint8))
    assert BitString.from_str(b.to_str()) == b
    assert BitString.from_hex(b.to_hex(), len(bits)) == b


@settings(max_examples=50)
@given(st.integers(1, 6), st.data())
def test_distance_is_a_metric(n, data):
    def draw():
        w = np.array(data.draw(st.lists(st.floats(0.01, 1), min_size=1 << n, max_size=1 << n)))
        return Distribution(n, w / w.sum())

    p, q, r = draw(), draw(), draw()
    assert statistical_distance(p, q) == pytest.approx(statistical_distance(q, p))
    assert statistical_distance(p, r) <= statistical_distance(p, q) + statistical_distance(q, r) + 1e-12
    assert 0 <= min_entropy(p) <= n + 1e-12
