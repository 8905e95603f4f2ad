import itertools
import math

import pytest

from blockamp.design import (DESIGN_R_BOUND, WeakDesign, build_weak_design, check_weak_design,
                             overlap_sums, validate_weak_design)
from blockamp.exceptions import ParameterError, ValidationError


def _brute_overlap(sets):
    return [sum(2 ** len(set(a) & set(b)) for b in sets[:i]) for i, a in enumerate(sets)]


def test_single_set_is_vacuous():
    for t in (2, 3, 5):
        wd = build_weak_design(1, t)
        assert wd.m == 1 and len(wd.sets[0]) == t
        assert validate_weak_design(wd).passed
        assert overlap_sums(wd).tolist() == [0]


def test_two_sets_small_overlap():
    wd = build_weak_design(2, 2)
    s = _brute_overlap(wd.sets)
    assert s[1] <= 2 * math.e * 2


def test_m16_t5_exhaustive():
    wd = build_weak_design(16, 5)
    assert wd.d == 25
    assert overlap_sums(wd).tolist() == _brute_overlap(wd.sets)
    assert max(_brute_overlap(wd.sets)) <= DESIGN_R_BOUND * 16
    assert validate_weak_design(WeakDesign(wd.sets, 5, DESIGN_R_BOUND, 25)).passed


def test_short_set_fails_size():
    bad = WeakDesign([(0, 1, 2), (3, 4)], 3, DESIGN_R_BOUND, 9)
    rep = validate_weak_design(bad)
    assert not rep.size_ok and not rep.passed
    with pytest.raises(ValidationError):
        check_weak_design(bad)


def test_identical_copies_fail_overlap():
    t, m = 4, 3
    wd = WeakDesign([(0, 1, 2, 3)] * m, t, 2 ** t / m - 0.5, 16)
    rep = validate_weak_design(wd)
    assert rep.max_overlap_sum == (m - 1) * 2 ** t
    assert not rep.overlap_ok


def test_json_roundtrip_and_list_form():
    wd = build_weak_design(6, 3)
    back = WeakDesign.from_json(wd.to_json())
    assert back == wd
    plain = WeakDesign.from_json("[[0, 1], [2, 3]]")
    assert plain.t == 2 and plain.d == 4 and validate_weak_design(plain).passed


def test_out_of_range_params():
    with pytest.raises(ParameterError):
        build_weak_design(0, 3)
    with pytest.raises(ParameterError):
        build_weak_design(3, 0)


@pytest.mark.parametrize("t", [2, 3, 4, 5, 7])
def test_sets_are_polynomial_graphs(t):
    wd = build_weak_design(20, t)
    q = wd.field_size
    for s in wd.sets:
        assert [j // q for j in s] == list(range(t))
    # with m <= q^t the polynomials have degree < t, so their graphs differ
    small = build_weak_design(min(20, q ** t), t)
    for a, b in itertools.combinations(small.sets, 2):
        assert a != b
