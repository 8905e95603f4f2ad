"""End-to-end randomness amplification with a simulated Bell device.

Steps, for source blocks ``x1`` and ``x2`` of ``n`` bits each:

1. build the somewhere-random source ``S'_j`` from ``x1`` over a seed family
   of ``2^d`` seeds;
2. read consecutive bit pairs of each block as the inputs ``(x, y)`` of
   ``m'/2`` device rounds, ``N = 2^d m'/2`` rounds in total, in block order;
3. score every round with the MDL-Hardy plug-in value and abort if any block
   average ``L^j`` falls below ``δ``;
4. otherwise extract ``R`` from the outputs ``A^N B^N`` and ``x2`` with the
   two-source extractor.

A :class:`SecurityReport` is produced for every run, aborted or not.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import as_bit_array
from .bits import BitString
from .devices import (DeviceBehavior, behavior_from_csv, deterministic_box, honest_ghz_device,
                      honest_hardy_device, sample_rounds)
from .eat import EatConfig, EntropyCertificate, certificate, chain_penalty
from .estimation import completeness_abort_bound
from .exceptions import InfeasibleConfigError, ParameterError, ValidationError
from .games import mdl_hardy_score, round_scores
from .srs import _apply_rule, check_srs_preconditions, seed_family
from .trevisan import Regime, RSHadamardCode, desk_params, extraction_rows, params_for_regime
from .two_source import (DELTA_PRIME_MAX, ExtractorMode, RazParams, inner_product_error,
                         markov_convert, padded_length, raz_params_check, two_source_extract)

EXIT_OK, EXIT_ABORT, EXIT_INFEASIBLE, EXIT_RUNTIME = 0, 2, 3, 4


@dataclass(frozen=True)
class ProtocolConfig:
    """Every knob of a protocol run; mirrors the JSON config field for field."""

    n: int = 64
    alpha: float = 1.0
    gamma_trev: float = 0.5
    c1: float = 1.0
    c2: float = 2.0
    regime: str = "long-output"
    trevisan_m: int | None = None
    trevisan_t: int | None = None
    seed_family: str = "sampled"
    d: int = 3
    family_seed: int = 0
    m_prime: int | None = None
    substring_rule: str = "prefix"
    delta_prime: float = 0.1
    delta: float | None = None
    eps_bias: float = 0.0
    eps_ea: float = 0.01
    gamma: float = 0.01
    k2: float | None = None
    device: dict = field(default_factory=lambda: {"kind": "hardy", "noise": 0.0})
    extractor_mode: str = "inner-product"
    output_bits: int = 1
    strict_gates: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("n must be at least 2")
        if not 0 < self.delta_prime < DELTA_PRIME_MAX:
            raise ParameterError(f"delta_prime must lie in (0, 19/32), got {self.delta_prime}")
        if self.c2 <= 1:
            raise ParameterError(f"c2 must exceed 1, got {self.c2}")
        if self.output_bits < 1:
            raise ParameterError("output_bits must be >= 1")
        ExtractorMode(self.extractor_mode)
        Regime(self.regime)

    @classmethod
    def from_dict(cls, d: dict) -> "ProtocolConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ProtocolConfig":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def replace(self, **kw) -> "ProtocolConfig":
        return dataclasses.replace(self, **kw)


def build_device(spec: dict) -> DeviceBehavior:
    kind = spec.get("kind", "hardy")
    if kind == "hardy":
        return honest_hardy_device(float(spec.get("noise", 0.0)))
    if kind == "ghz":
        return honest_ghz_device(float(spec.get("noise", 0.0)))
    if kind == "deterministic":
        return deterministic_box(spec.get("assignment", [[0, 0], [0, 0]]))
    if kind == "csv":
        with open(spec["path"]) as fh:
            return behavior_from_csv(fh.read())
    raise ParameterError(f"unknown device kind {kind!r}")


def reference_g_exp(eps_bias: float = 0.0, noise: float = 0.0) -> float:
    """Expected MDL-Hardy score of the honest Hardy device under uniform inputs."""
    return mdl_hardy_score(honest_hardy_device(noise), eps=eps_bias).value


def security_epsilon(ext_eps: float, gamma: float, eps_ea: float) -> float:
    """``12(ε_Ext + γ) + ε_EA``."""
    for name, v in (("ext_eps", ext_eps), ("gamma", gamma), ("eps_ea", eps_ea)):
        if not 0 <= v <= 1:
            raise ParameterError(f"{name}={v} outside [0, 1]")
    return 12 * (ext_eps + gamma) + eps_ea


def secrecy_case_bound(ext_eps: float, gamma: float, eps_ea: float, pass_prob: float) -> float:
    """Secrecy bound for a known probability of not aborting.

    If the protocol passes with probability at most ``ε_EA`` that alone
    bounds the secrecy; otherwise the entropy bound holds and the output is
    within ``6(γ + ε_Ext)`` of uniform.
    """
    if pass_prob <= eps_ea:
        return pass_prob
    return min(1.0, pass_prob * 6 * (gamma + ext_eps))


def inner_product_markov_error(length: int, h1: float, h2: float, M: int) -> float:
    """Smallest ``ε_Ext`` the inner product reaches in the Markov model.

    For a candidate inner error ``ε`` the Markov error is
    ``ε_M = sqrt(3 ε 2^{M−2})``, and the thresholds fed to the inner product
    are ``h_i − log2(1/ε) − log2(1/ε_M) − 1``.  The candidate is feasible
    when the inner product's own error at those thresholds is at most ``ε``.
    """
    best = 1.0
    for log_e in np.linspace(-200, 0, 4001):
        e = 2.0 ** log_e
        em = math.sqrt(3 * e * 2.0 ** (M - 2))
        if em >= best:
            continue
        pen = -log_e + max(0.0, -math.log2(em)) + 1
        if inner_product_error(length, h1 - pen, h2 - pen, M) <= e:
            best = em
    return min(1.0, best)


def k1_threshold(m_prime: int, rate: float, eps_ext: float) -> float:
    """Entropy of the device outputs the certificate must support: ``(m'/2) g − log2(1/ε) − 1``."""
    return (m_prime / 2) * rate - _log_inv(eps_ext) - 1


def k2_threshold(n: int, delta_pp: float, n_rounds: int, eps_ext: float) -> float:
    """``(1/2 + δ'')n + 3 log2 n + log2 N − log2(1/ε) − 1``."""
    return (0.5 + delta_pp) * n + 3 * math.log2(n) + math.log2(n_rounds) - _log_inv(eps_ext) - 1


def _log_inv(eps):
    return -math.log2(eps) if eps > 0 else math.inf


class Gate(NamedTuple):
    name: str
    passed: bool
    enforced: bool
    detail: str


@dataclass
class ProtocolPlan:
    """Everything about a run that does not depend on the source or the device draws."""

    cfg: ProtocolConfig
    params: object
    design: object
    code: RSHadamardCode
    seeds: np.ndarray
    maps: np.ndarray
    d: int
    m_prime: int
    n_rounds: int
    device: DeviceBehavior
    delta: float
    g_exp_reference: float
    g_exp_device: float
    cert: EntropyCertificate
    eps_ext: float
    k1_required: float
    k2_required: float
    gates: list
    constants: dict

    @property
    def half_block(self) -> int:
        return self.m_prime // 2

    @property
    def mode(self) -> ExtractorMode:
        return ExtractorMode(self.cfg.extractor_mode)


def plan_protocol(cfg: ProtocolConfig) -> ProtocolPlan:
    """Resolve parameters, evaluate every gate and the entropy certificate.

    Raises
    ------
    InfeasibleConfigError
        When an enforced gate fails.  Parity of ``m'`` and the extractor
        output length are always enforced; the Raz inequalities are enforced
        in ``raz-gated`` mode; every gate is enforced with ``strict_gates``.
    """
    mode = ExtractorMode(cfg.extractor_mode)
    if cfg.trevisan_m is not None:
        params = desk_params(cfg.n, cfg.trevisan_m, cfg.n ** cfg.alpha, cfg.trevisan_t)
    else:
        params = params_for_regime(cfg.n, cfg.alpha, cfg.gamma_trev, Regime(cfg.regime), cfg.c1,
                                   t=cfg.trevisan_t)
    wd = params.design()
    code = RSHadamardCode(cfg.n, wd.t)
    seeds = seed_family(wd, cfg.seed_family, cfg.d, cfg.family_seed)
    d = int(round(math.log2(seeds.shape[0])))
    m_prime = cfg.m_prime if cfg.m_prime is not None else 2 * math.ceil(cfg.c2 * d / 2)
    n_rounds = (1 << d) * (m_prime // 2)
    device = build_device(cfg.device)
    if device.parties != 2:
        raise ParameterError("the protocol runs the two-party MDL-Hardy test")
    g_ref = reference_g_exp(cfg.eps_bias)
    delta = g_ref / 2 if cfg.delta is None else float(cfg.delta)
    g_dev = mdl_hardy_score(device, eps=cfg.eps_bias).value

    gates = []
    for name, msg in check_srs_preconditions(params.m, params.eps, m_prime):
        gates.append(Gate(name, False, name != "srs_eps" or cfg.strict_gates, msg))
    if not any(g.name == "m_prime_parity" for g in gates):
        gates.append(Gate("m_prime_parity", True, True, f"m'={m_prime}"))
    if m_prime <= d:
        gates.append(Gate("c2", False, cfg.strict_gates, f"m'={m_prime} is not above d={d}"))

    eat_cfg = EatConfig(cfg.gamma, cfg.eps_ea, delta, m_prime / 2, cfg.eps_bias)
    cert = certificate(eat_cfg)
    h1 = cert.hmin_bound
    n1, n2 = cfg.n, 2 * n_rounds
    k2_source = (0.5 + cfg.delta_prime) * cfg.n if cfg.k2 is None else float(cfg.k2)
    M = cfg.output_bits
    if mode is ExtractorMode.RAZ_GATED:
        eps_inner = math.sqrt(3) / 2 * 2.0 ** (-M / 4)
        eps_ext = min(1.0, markov_convert(1, 1, eps_inner, M).eps_markov)
    else:
        eps_inner = None
        eps_ext = inner_product_markov_error(padded_length(n2, n1, M), h1, k2_source, M)
    log_inv = _log_inv(eps_ext)
    k1_required = k1_threshold(m_prime, cert.rate, eps_ext)
    delta_pp = cfg.delta_prime / 2
    k2_required = k2_threshold(cfg.n, delta_pp, n_rounds, eps_ext)
    chain_slack = (0.5 + cfg.delta_prime) * cfg.n - ((0.5 + delta_pp) * cfg.n + 3 * math.log2(cfg.n)
                                                    + math.log2(n_rounds))
    gates.append(Gate("k_chain", chain_slack >= 0, cfg.strict_gates,
                      f"(1/2+δ')n − [(1/2+δ'')n + 3 log n + log N] = {chain_slack:.4g}"))
    pen = (math.log2(1 / eps_inner) if eps_inner else 0) + log_inv
    raz = RazParams(n1, n2, k2_source - pen - 1, h1 - pen - 1, M, cfg.delta_prime)
    rep = raz_params_check(raz)
    enforce_raz = mode is ExtractorMode.RAZ_GATED or cfg.strict_gates
    for name, margin in rep.margins.items():
        gates.append(Gate(f"raz_{name}", margin >= 0, enforce_raz, f"margin {margin:.4g}"))
    for g in gates:
        if g.enforced and not g.passed:
            raise InfeasibleConfigError(g.name, g.detail)
    constants = {
        "c0": 0.0, "delta_double_prime": delta_pp, "k2_source": k2_source, "log_base": 2,
        "n1_raz": n1, "n2_raz": n2, "eps_inner": eps_inner, "raz_margins": rep.margins,
        "trevisan": params.to_dict(), "chain_penalty": chain_penalty(cfg.gamma),
    }
    maps = extraction_rows(seeds, wd, code)
    return ProtocolPlan(cfg, params, wd, code, seeds, maps, d, m_prime, n_rounds, device, delta,
                        g_ref, g_dev, cert, eps_ext, k1_required, k2_required, gates, constants)


@dataclass(frozen=True, eq=False)
class Transcript:
    inputs: np.ndarray
    outputs: np.ndarray
    scores: np.ndarray
    block_scores: np.ndarray
    abort: bool

    @property
    def n_rounds(self) -> int:
        return int(self.inputs.shape[0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "block", "k", "x", "y", "a", "b", "score"])
        half = self.n_rounds // max(1, self.block_scores.size)
        for i in range(self.n_rounds):
            w.writerow([i, i // half, i % half, *map(int, self.inputs[i]), *map(int, self.outputs[i]),
                        repr(float(self.scores[i]))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, delta: float) -> "Transcript":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValidationError("empty transcript")
        inputs = np.array([[int(r["x"]), int(r["y"])] for r in rows], dtype=np.uint8)
        outputs = np.array([[int(r["a"]), int(r["b"])] for r in rows], dtype=np.uint8)
        scores = np.array([float(r["score"]) for r in rows])
        blocks = np.array([int(r["block"]) for r in rows])
        n_blocks = blocks.max() + 1
        L = np.array([scores[blocks == j].mean() for j in range(n_blocks)])
        return cls(inputs, outputs, scores, L, bool((L < delta).any()))

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for arr in (self.inputs, self.outputs, self.scores, self.block_scores):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class SecurityReport:
    status: str
    abort: bool
    certified: bool
    mode: str
    hmin_certificate: dict
    k1_required: float
    k2_required: float
    eps_ext: float
    eps_f: float
    eps_f_clamped: float
    final_distance_bound: float
    g_exp_reference: float
    g_exp_device: float
    completeness_bound: float | None
    delta: float
    d: int
    m_prime: int
    n_rounds: int
    output_bits: int
    gates: list
    constants: dict
    notices: list

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


class ProtocolResult(NamedTuple):
    transcript: Transcript
    output: BitString | None
    report: SecurityReport


def device_inputs(blocks: np.ndarray) -> np.ndarray:
    """Consecutive bit pairs of each block as ``(x, y)``, in block order."""
    b = np.asarray(blocks, dtype=np.uint8)
    return b.reshape(b.shape[0] * (b.shape[1] // 2), 2)


def srs_blocks(plan: ProtocolPlan, x1) -> np.ndarray:
    x1 = as_bit_array(x1, plan.cfg.n, "x1").astype(np.int64)
    full = ((plan.maps.astype(np.int64) @ x1) & 1).astype(np.uint8)  # (2^d, m)
    return _apply_rule(full, plan.m_prime, plan.cfg.substring_rule)


def bell_test(plan: ProtocolPlan, x1, rng) -> Transcript:
    """Steps 1-3: inputs from the SRS, device rounds in order, block scores."""
    inputs = device_inputs(srs_blocks(plan, x1))
    outputs = sample_rounds(plan.device, inputs, rng)
    scores = round_scores(inputs, outputs, plan.cfg.eps_bias)
    L = scores.reshape(1 << plan.d, plan.half_block).mean(axis=1)
    return Transcript(inputs, outputs, scores, L, bool((L < plan.delta).any()))


def report_for(plan: ProtocolPlan, abort: bool) -> SecurityReport:
    cfg = plan.cfg
    eps_f = security_epsilon(plan.eps_ext, cfg.gamma, cfg.eps_ea)
    final = min(1.0, 6 * (cfg.gamma + plan.eps_ext))
    certified = plan.cert.hmin_bound > 0 and eps_f < 1
    notices = [f"{g.name}: {g.detail}" for g in plan.gates if not g.passed]
    if not certified:
        notices.append("uncertified: the entropy certificate does not support a secret output")
    comp = None
    if plan.g_exp_device > plan.delta:
        comp = completeness_abort_bound(plan.d, plan.m_prime, plan.g_exp_device, plan.delta)
    status = "aborted" if abort else ("accepted" if certified else "uncertified")
    return SecurityReport(
        status=status, abort=abort, certified=certified, mode=plan.mode.value,
        hmin_certificate=plan.cert.to_dict(), k1_required=plan.k1_required,
        k2_required=plan.k2_required, eps_ext=plan.eps_ext, eps_f=eps_f,
        eps_f_clamped=min(1.0, eps_f), final_distance_bound=final,
        g_exp_reference=plan.g_exp_reference, g_exp_device=plan.g_exp_device,
        completeness_bound=comp, delta=plan.delta, d=plan.d, m_prime=plan.m_prime,
        n_rounds=plan.n_rounds, output_bits=cfg.output_bits,
        gates=[g._asdict() for g in plan.gates], constants=plan.constants, notices=notices)


def run_with_plan(plan: ProtocolPlan, x1, x2, rng) -> ProtocolResult:
    x2 = as_bit_array(x2, plan.cfg.n, "x2")
    tr = bell_test(plan, x1, rng)
    out = None
    if not tr.abort:
        ab = np.concatenate([tr.outputs[:, 0], tr.outputs[:, 1]])
        out = two_source_extract(ab, x2, plan.cfg.output_bits, ExtractorMode.INNER_PRODUCT)
    return ProtocolResult(tr, out, report_for(plan, tr.abort))


def run_protocol(cfg: ProtocolConfig, x1, x2, rng=None) -> ProtocolResult:
    """Run the full protocol; randomness comes only from ``cfg.rng_seed`` unless ``rng`` is given."""
    plan = plan_protocol(cfg)
    rng = np.random.default_rng(cfg.rng_seed) if rng is None else rng
    return run_with_plan(plan, x1, x2, rng)


def trial_streams(seed: int, n_trials: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_trials)]


def abort_rate(plan: ProtocolPlan, n_trials: int, seed: int = 0) -> float:
    """Fraction of runs that abort, with a fresh uniform ``x1`` per run."""
    aborts = 0
    for rng in trial_streams(seed, n_trials):
        x1 = rng.integers(0, 2, plan.cfg.n, dtype=np.uint8)
        aborts += bell_test(plan, x1, rng).abort
    return aborts / n_trials


# --------------------------------------------------------------------------
# Markov-assumption demonstration


def conditional_mutual_information(x, y, z) -> float:
    """Plug-in ``I(X : Y | Z)`` in bits for integer-coded samples."""
    x, y, z = (np.asarray(v, dtype=np.int64) for v in (x, y, z))
    nx, ny, nz = x.max() + 1, y.max() + 1, z.max() + 1
    joint = np.bincount((z * ny + y) * nx + x, minlength=nx * ny * nz).reshape(nz, ny, nx) / x.size
    pz = joint.sum(axis=(1, 2), keepdims=True)
    pxz = joint.sum(axis=1, keepdims=True)
    pyz = joint.sum(axis=2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = joint * np.log2(joint * pz / (pxz * pyz))
    return float(max(0.0, np.nansum(terms)))


def simulate_markov_violation(cfg: ProtocolConfig, samples: int = 1_000_000, correlated: bool = False,
                              x2_bits: int = 2, seed: int | None = None) -> dict:
    """Empirical ``I(X2 : AB | XY)`` for an independent or a leaking device.

    The leaking device copies the first two bits of ``x2`` into its outputs,
    so the conditional mutual information equals their entropy.
    """
    rng = np.random.default_rng(cfg.rng_seed if seed is None else seed)
    device = build_device(cfg.device)
    xs = rng.integers(0, 2, size=(samples, 2))
    x2 = rng.integers(0, 1 << x2_bits, size=samples)
    if correlated:
        outs = np.stack([(x2 >> (x2_bits - 1)) & 1, (x2 >> max(0, x2_bits - 2)) & 1], axis=1)
    else:
        outs = sample_rounds(device, xs, rng)
    mi = conditional_mutual_information(x2, outs[:, 0] * 2 + outs[:, 1], xs[:, 0] * 2 + xs[:, 1])
    return {"samples": samples, "correlated": correlated, "x2_bits": x2_bits,
            "conditional_mutual_information": mi,
            "markov_assumption": "violated" if correlated else "holds by construction"}
