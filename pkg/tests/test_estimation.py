import math

import numpy as np
import pytest

from blockamp.estimation import (BlockScores, azuma_tail, completeness_abort_bound,
                                 count_good_rounds, good_rounds_lower_bound, per_block_abort_prob)
from blockamp.exceptions import ParameterError


def test_azuma_vectors():
    assert azuma_tail(400, 0.1) == pytest.approx(2 * math.exp(-1))
    assert azuma_tail(400, 1e-9) == 1.0
    with pytest.raises(ParameterError):
        azuma_tail(0, 0.1)


def test_good_rounds_vectors():
    assert good_rounds_lower_bound(100, 0.2, 0.05) == pytest.approx(100 * 0.1 / 1.8)
    for m, d in ((100, 0.2), (1000, 0.01), (64, 0.3)):
        assert good_rounds_lower_bound(m, d, d / 4) == pytest.approx(m * d / (2 * (2 - d)))
    with pytest.raises(ParameterError):
        good_rounds_lower_bound(100, 0.2, 0.1)


def test_good_rounds_limits():
    m, d = 200, 0.2
    assert good_rounds_lower_bound(m, d, d / 2 * (1 - 1e-12)) == pytest.approx(0, abs=1e-9)
    assert good_rounds_lower_bound(m, d, 1e-12) == pytest.approx(m * d / 2, rel=1e-9)
    for k in np.linspace(1e-6, d / 2 - 1e-6, 50):
        v = good_rounds_lower_bound(m, d, k)
        assert 0 <= v <= m / 2


def test_good_rounds_tight():
    # G rounds at 1/2 and the rest just below kappa: the largest mean with
    # G good rounds is (G/2 + (R-G)kappa)/R, which equals delta/2 at the bound
    m, d, k = 200, 0.2, 0.05
    R = m // 2
    G = good_rounds_lower_bound(m, d, k)
    assert (G / 2 + (R - G) * k) / R == pytest.approx(d / 2)
    scores = np.r_[np.full(math.ceil(G), 0.5), np.full(R - math.ceil(G), k - 1e-12)]
    assert scores.mean() >= d / 2 - 1e-9
    assert count_good_rounds(scores, k) >= G


def test_completeness_vectors():
    raw = 16 * math.exp(-0.16)
    assert completeness_abort_bound(4, 300, 0.05, 0.01) == min(1.0, raw) == 1.0
    assert 16 * per_block_abort_prob(300, 0.05, 0.01) == pytest.approx(raw)
    assert completeness_abort_bound(4, 30000, 0.05, 0.01) == pytest.approx(16 * math.exp(-16))
    vals = [completeness_abort_bound(8, c * 8, 0.25, 0.05) for c in (10, 100, 1000)]
    assert vals[0] >= vals[1] >= vals[2] and vals[2] < 1e-10
    assert completeness_abort_bound(4, 0, 0.05, 0.01) == 1.0
    assert per_block_abort_prob(100, 0.05, 0.05 - 1e-12) == pytest.approx(1)
    with pytest.raises(ParameterError):
        completeness_abort_bound(4, 300, 0.01, 0.05)


def test_block_scores_average():
    b = BlockScores([0.25, -0.25, 0.5])
    assert b.empirical_avg == pytest.approx(1 /6)
    assert not b.per_round.flags.writeable
