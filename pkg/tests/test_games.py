import itertools
import math

import numpy as np
import pytest

from blockamp.devices import (all_deterministic_boxes, deterministic_box, honest_ghz_device,
                              honest_hardy_device, sample_rounds, uniform_behavior)
from blockamp.exceptions import DomainError, ParameterError, ValidationError
from blockamp.games import (InputDistribution, empirical_mdl_hardy, greedy_lp_max, hardy_coefficients,
                            lhv_max_mdl_ghz, lhv_max_mdl_hardy, lhv_max_mermin, mdl_ghz_score,
                            mdl_hardy_score, mermin_from_mdl, mermin_score, nu_vertices)

IDEAL = (5 * math.sqrt(5) - 11) / 2


@pytest.mark.parametrize("eps", [0, 0.05, 0.1, 0.3])
def test_zero_box_score(eps):
    s = mdl_hardy_score(deterministic_box([(0, 0), (0, 0)]), eps=eps).value
    assert s == pytest.approx(((0.5 - eps) ** 2 - (0.5 + eps) ** 2) / 4, abs=1e-15)
    assert s == pytest.approx(-eps / 2, abs=1e-15)


def test_hardy_score_value():
    assert mdl_hardy_score(honest_hardy_device()).value == pytest.approx(IDEAL / 16, abs=1e-12)
    assert mdl_hardy_score(honest_hardy_device()).value == pytest.approx(0.005636, abs=1e-6)


def test_score_zero_when_terms_vanish():
    p = np.zeros((2,) * 4)
    p[..., 1, 1] = 1  # always (1, 1): none of the four events
    from blockamp.devices import DeviceBehavior
    assert mdl_hardy_score(DeviceBehavior(2, p), eps=0.2).value == 0


def _lp_oracle(vals, l, h):
    # brute force over a fine simplex grid is too slow; use scipy's LP instead
    from scipy.optimize import linprog
    k = vals.size
    res = linprog(-vals, A_eq=np.ones((1, k)), b_eq=[1], bounds=[(l, h)] * k, method="highs")
    return -res.fun


@pytest.mark.parametrize("eps", [0.0, 0.05, 0.1, 0.2, 0.3, 0.45])
def test_lhv_methods_agree_with_lp(eps):
    c = hardy_coefficients(eps)
    l, h = (0.5 - eps) ** 2, (0.5 + eps) ** 2
    best = -math.inf
    for _, box in all_deterministic_boxes(2):
        v = (c * box.cond_probs).reshape(4, -1).sum(axis=1)
        best = max(best, _lp_oracle(v, l, h))
        assert greedy_lp_max(v, l, h) == pytest.approx(_lp_oracle(v, l, h), abs=1e-12)
    exact = lhv_max_mdl_hardy(eps)
    assert exact <= 0
    assert exact == pytest.approx(best, abs=1e-12)
    assert lhv_max_mdl_hardy(eps, "vertex") == pytest.approx(exact, abs=1e-12)


def test_lhv_hardy_zero_at_uniform():
    assert lhv_max_mdl_hardy(0.0) == 0.0
    assert lhv_max_mdl_hardy(0.1) == 0.0


def test_ghz_scores():
    assert mdl_ghz_score(honest_ghz_device()).value == pytest.approx(1 / 64, abs=1e-12)
    assert mermin_score(honest_ghz_device()) == pytest.approx(4.0, abs=1e-10)
    assert lhv_max_mermin() == 2.0
    assert mermin_score(uniform_behavior(3)) == pytest.approx(0, abs=1e-15)
    assert lhv_max_mdl_ghz(0.0) <= 1e-15
    assert lhv_max_mdl_ghz(0.1) <= 1e-15


def test_ghz_zero_on_odd_outputs():
    p = np.zeros((2,) * 6)
    p[..., 1, 0, 0] = 1  # a+b+c odd on every input
    from blockamp.devices import DeviceBehavior
    assert mdl_ghz_score(DeviceBehavior(3, p)).value == 0


def test_mermin_from_mdl_vectors():
    assert mermin_from_mdl(0, 0.2) == 2
    assert mermin_from_mdl(1 / 64, 0) == pytest.approx(4)
    assert mermin_from_mdl(0.001, 0.1) == pytest.approx(2 + 0.002 / 0.24 ** 3)
    assert mermin_from_mdl(0.001, 0.1) == pytest.approx(2.1447, abs=1e-4)


def test_input_window_checks():
    with pytest.raises(ValidationError):
        InputDistribution.windowed([0.7, 0.1, 0.1, 0.1], 0.05)
    nu = InputDistribution.windowed([0.3, 0.2, 0.25, 0.25], 0.1)
    assert nu[(0, 0)] == 0.3
    with pytest.raises(DomainError):
        lhv_max_mdl_hardy(0.5)
    with pytest.raises(ParameterError):
        mdl_hardy_score(honest_ghz_device())


def test_nu_vertices_are_feasible():
    for eps in (0.0, 0.1, 0.3):
        l, h = (0.5 - eps) ** 2, (0.5 + eps) ** 2
        V = nu_vertices(4, l, h)
        assert np.allclose(V.sum(axis=1), 1)
        assert (V >= l - 1e-12).all() and (V <= h + 1e-12).all()


def test_empirical_score_converges():
    rng = np.random.default_rng(2)
    ins = rng.integers(0, 2, (400_000, 2))
    outs = sample_rounds(honest_hardy_device(), ins, rng)
    est = empirical_mdl_hardy(ins, outs, 0.0)
    assert est == pytest.approx(IDEAL / 16, abs=4 * math.sqrt(1 / 32 / 400_000))


def test_windowed_score_never_classically_positive():
    rng = np.random.default_rng(4)
    for _ in range(50):
        eps = rng.uniform(0, 0.45)
        l, h = (0.5 - eps) ** 2, (0.5 + eps) ** 2
        V = nu_vertices(4, l, h)
        w = rng.dirichlet(np.ones(len(V)))
        nu = InputDistribution.windowed(w @ V, eps)
        for _, box in itertools.islice(all_deterministic_boxes(2), 0, 16, 3):
            assert mdl_hardy_score(box, nu, eps).value <= 1e-15
