import json
import math

import numpy as np
import pytest

from blockamp.exceptions import InfeasibleConfigError, ValidationError
from blockamp.protocol import (ProtocolConfig, Transcript, abort_rate, bell_test,
                               device_inputs, k1_threshold, k2_threshold, plan_protocol,
                               reference_g_exp, run_protocol, security_epsilon,
                               simulate_markov_violation)
from blockamp.two_source import markov_convert, raz_m_ceiling

SMALL = dict(m_prime=6, d=3)


@pytest.fixture(scope="module")
def small_plan():
    return plan_protocol(ProtocolConfig(**SMALL))


def test_security_epsilon():
    assert security_epsilon(0.001, 0.001, 0.01) == 0.034
    rng = np.random.default_rng(0)
    for _ in range(20):
        e, g, a = rng.random(3)
        assert security_epsilon(e, g, a) >= a


def test_markov_composition():
    mk = markov_convert(100, 100, 2.0 ** -30, 4)
    eps_f = security_epsilon(mk.eps_markov, 0.001, 0.01)
    assert eps_f == 12 * (math.sqrt(3 * 2.0 ** -30 * 2 ** 2) + 0.001) + 0.01


def test_thresholds_n4096():
    n, N, eps = 2 ** 12, 2 ** 10, 2.0 ** -20
    got = k2_threshold(n, 0.05, N, eps)
    assert got == (0.5 + 0.05) * 4096 + 3 * 12 + 10 - 20 - 1
    assert got == pytest.approx(2277.8)
    assert k1_threshold(100, 0.5, eps) == 25 - 21


def test_config_roundtrip_and_unknown_fields():
    cfg = ProtocolConfig(m_prime=8, rng_seed=3)
    assert ProtocolConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ValidationError):
        ProtocolConfig.from_dict({"n": 64, "bogus": 1})


def test_parity_gate_named():
    with pytest.raises(InfeasibleConfigError) as exc:
        plan_protocol(ProtocolConfig(m_prime=5))
    assert exc.value.gate == "m_prime_parity"


def test_raz_gated_rejects_desk_scale():
    with pytest.raises(InfeasibleConfigError) as exc:
        plan_protocol(ProtocolConfig(extractor_mode="raz-gated", **SMALL))
    assert exc.value.gate.startswith("raz_")


def test_strict_gates_reject(small_plan):
    failing = [g for g in small_plan.gates if not g.passed]
    assert failing and not any(g.enforced for g in failing)
    with pytest.raises(InfeasibleConfigError):
        plan_protocol(ProtocolConfig(strict_gates=True, **SMALL))


def test_length_requirement_margin(small_plan):
    margins = small_plan.constants["raz_margins"]
    n, N = 64, small_plan.n_rounds
    assert margins["n1_length"] == pytest.approx(n - 6 * math.log2(n) - 2 * math.log2(2 * N))


def test_raz_ceiling_bounds_output(small_plan):
    c = small_plan.constants
    ceiling = raz_m_ceiling(c["n1_raz"], small_plan.cert.hmin_bound, 0.1)
    gate = {g.name: g for g in small_plan.gates}["raz_m_ceiling"]
    assert gate.passed == (ceiling >= 1)


def test_uncertified_flagged(small_plan):
    rep = run_protocol(ProtocolConfig(**SMALL), np.ones(64, np.uint8), np.ones(64, np.uint8)).report
    assert small_plan.cert.rate <= 0
    assert small_plan.k1_required < 0
    assert not rep.certified
    assert any("uncertified" in n for n in rep.notices)


def test_device_inputs_pairs():
    blocks = np.array([[1, 0, 0, 1], [1, 1, 0, 0]])
    assert device_inputs(blocks).tolist() == [[1, 0], [0, 1], [1, 1], [0, 0]]


def test_g_exp_reference():
    assert reference_g_exp() == pytest.approx((5 * math.sqrt(5) - 11) / 32)


def test_transcript_csv_roundtrip(small_plan):
    tr = bell_test(small_plan, np.arange(64) % 2, np.random.default_rng(0))
    back = Transcript.from_csv(tr.to_csv(), small_plan.delta)
    assert np.array_equal(back.inputs, tr.inputs) and np.array_equal(back.outputs, tr.outputs)
    assert np.array_equal(back.scores, tr.scores)
    assert np.allclose(back.block_scores, tr.block_scores) and back.abort == tr.abort


def test_block_abort_rule(small_plan):
    tr = bell_test(small_plan, np.zeros(64, np.uint8), np.random.default_rng(1))
    assert tr.block_scores.shape == (8,)
    assert tr.abort == bool((tr.block_scores < small_plan.delta).any())


def test_run_deterministic():
    cfg = ProtocolConfig(m_prime=200, trevisan_m=200, trevisan_t=16, rng_seed=4)
    x1, x2 = np.arange(64) % 2, (np.arange(64) // 3) % 2
    a, b = run_protocol(cfg, x1, x2), run_protocol(cfg, x1, x2)
    assert a.transcript.fingerprint() == b.transcript.fingerprint()
    assert a.report.to_json() == b.report.to_json()
    assert a.output == b.output
    json.loads(a.report.to_json())


def test_accepted_run_emits_output():
    # outputs (1, 1) hit no scored event, so every block averages exactly 0
    cfg = ProtocolConfig(m_prime=200, trevisan_m=200, trevisan_t=16, delta=0.0,
                         device={"kind": "deterministic", "assignment": [[1, 1], [1, 1]]})
    res = run_protocol(cfg, np.arange(64) % 2, np.ones(64, np.uint8))
    assert not res.transcript.abort
    assert res.output is not None and res.output.length == 1


def test_adversary_mostly_aborts():
    adv = ProtocolConfig(m_prime=200, trevisan_m=200, trevisan_t=16,
                         device={"kind": "deterministic", "assignment": [[0, 0], [0, 0]]})
    assert abort_rate(plan_protocol(adv), 200, seed=9) >= 0.98


def test_markov_demo():
    cfg = ProtocolConfig()
    ok = simulate_markov_violation(cfg, samples=10 ** 6, seed=1)
    assert ok["conditional_mutual_information"] < 1e-3
    bad = simulate_markov_violation(cfg, samples=10 ** 5, correlated=True, seed=1)
    assert bad["conditional_mutual_information"] == pytest.approx(2.0, abs=0.01)
