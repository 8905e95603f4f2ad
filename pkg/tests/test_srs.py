import math

import numpy as np
import pytest

from blockamp.bits import ConditionalSource, Distribution, all_bit_rows, bits_to_int
from blockamp.exceptions import InfeasibleConfigError, ParameterError, ValidationError
from blockamp.srs import (SomewhereRandomSource, build_srs, certify_srs, check_srs_preconditions,
                          seed_family, support_threshold)
from blockamp.trevisan import desk_params, trevisan_extract


@pytest.fixture(scope="module")
def params():
    return desk_params(8, 2, 5, 4)


def test_full_length_blocks_equal_extractor_outputs(params):
    x = np.array([1, 0, 1, 1, 0, 0, 1, 0], np.uint8)
    srs = build_srs(x, params, 2, family="sampled", family_bits=2, strict=False)
    seeds = seed_family(params.design(), "sampled", 2)
    assert srs.n_blocks == 4
    for j, seed in enumerate(seeds):
        assert srs.blocks[j].tolist() == trevisan_extract(x, seed, params.design()).bits.tolist()


def test_prefix_blocks():
    p = desk_params(8, 5, 8, 4)
    x = np.array([0, 1, 1, 0, 1, 0, 0, 1], np.uint8)
    srs = build_srs(x, p, 2, "prefix", family="sampled", family_bits=3, strict=False)
    seeds = seed_family(p.design(), "sampled", 3)
    assert srs.blocks.shape == (8, 2)
    for j, seed in enumerate(seeds):
        assert srs.blocks[j].tolist() == trevisan_extract(x, seed, p.design()).bits[:2].tolist()
    tail = build_srs(x, p, 2, "suffix", family="sampled", family_bits=3, strict=False)
    assert tail.blocks[0].tolist() == trevisan_extract(x, seeds[0], p.design()).bits[-2:].tolist()


def test_support_threshold_vectors():
    assert support_threshold(100, 1 / 256) == 7
    assert support_threshold(100, 0.5) == 0
    assert support_threshold(100, 256 ** -1) == 7
    assert support_threshold(3, 1 / 256) == 3


def test_preconditions(params):
    names = [g for g, _ in check_srs_preconditions(2, 0.125, 3)]
    assert "m_prime_parity" in names and "m_prime_length" in names
    assert [g for g, _ in check_srs_preconditions(4, 0.01, 4)] == []
    assert [g for g, _ in check_srs_preconditions(4, 0.125, 4)] == ["srs_eps"]
    with pytest.raises(InfeasibleConfigError):
        build_srs(np.zeros(8, np.uint8), params, 3)


def test_dump_roundtrip(params):
    srs = build_srs(np.ones(8, np.uint8), params, 2, family="sampled", family_bits=3, strict=False)
    back = SomewhereRandomSource.loads(srs.dumps())
    assert np.array_equal(back.blocks, srs.blocks)
    assert (back.d, back.m_prime, back.eps, back.rule) == (3, 2, srs.eps, "prefix")
    with pytest.raises(ValidationError):
        SomewhereRandomSource.loads("00\n11\n")


def _block_tv(dist, seed, wd, m_prime):
    counts = np.zeros(1 << m_prime)
    for x, px in zip(all_bit_rows(8), dist.probs):
        if px > 0:
            counts[bits_to_int(trevisan_extract(x, seed, wd).bits[:m_prime])] += px
    return 0.5 * np.abs(counts - 2.0 ** -m_prime).sum()


def test_certificate_matches_direct_evaluation(params):
    rng = np.random.default_rng(3)
    dist = Distribution.flat(8, rng.choice(256, 32, replace=False))
    cert = certify_srs(dist, params, 2, eps=0.125, family="sampled", family_bits=3, family_seed=5)
    seeds = seed_family(params.design(), "sampled", 3, 5)
    for j in (0, 3, 7):
        assert cert.tv[j] == pytest.approx(_block_tv(dist, seeds[j], params.design(), 2), abs=1e-12)


def test_uniform_source_statistics(params):
    cert = certify_srs(Distribution.uniform(8), params, 2, eps=0.125)
    assert cert.n_blocks == 256
    assert cert.mean_tv == pytest.approx(0.2578125)
    assert cert.max_tv == 0.75
    assert cert.min_tv == 0.0 and cert.full_support
    assert cert.good_count == int((cert.tv <= math.sqrt(0.125)).sum())
    assert cert.count_bound == pytest.approx(256 * (1 - math.sqrt(0.125)))


def test_count_remark_when_average_small():
    # a 4-bit-output instance on uniform input: average TV small enough to apply the remark
    p = desk_params(8, 2, 8, 6)
    cert = certify_srs(Distribution.uniform(8), p, 2, eps=0.25, family="sampled", family_bits=6)
    assert cert.mean_tv <= 0.25
    assert cert.good_count >= cert.count_bound and cert.remark_holds


def test_side_information_averages(params):
    u = Distribution.uniform(8)
    pm = Distribution.point_mass(8, 7)
    src = ConditionalSource((0, 1), (0.25, 0.75), (u, pm))
    kw = dict(eps=0.125, family="sampled", family_bits=3)
    a = certify_srs(ConditionalSource.single(u), params, 2, **kw)
    b = certify_srs(ConditionalSource.single(pm), params, 2, **kw)
    mix = certify_srs(src, params, 2, **kw)
    assert np.allclose(mix.tv, 0.25 * a.tv + 0.75 * b.tv)


def test_somewhere_random_on_flat_sources(params):
    # random flat 5-sources plus 5-dimensional subspaces: some block is eps-close
    rng = np.random.default_rng(11)
    sources = [Distribution.flat(8, rng.choice(256, 32, replace=False)) for _ in range(10)]
    for mask in (0b11111000, 0b00011111, 0b10101011):
        sources.append(Distribution.flat(8, [x for x in range(256) if x & ~mask & 0xFF == 0]))
    for dist in sources:
        cert = certify_srs(dist, params, 2, eps=0.125, family="sampled", family_bits=4, family_seed=1)
        assert cert.min_tv <= 0.125


def test_unknown_family(params):
    with pytest.raises(ParameterError):
        seed_family(params.design(), "bogus")
    with pytest.raises(ParameterError):
        seed_family(params.design(), "sampled")
