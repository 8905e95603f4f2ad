"""Simulated Bell devices: behaviours, a tiny statevector engine and samplers.

A behaviour for ``p`` parties (2 or 3) with binary inputs and outputs is an
array ``P[x_1, ..., x_p, a_1, ..., a_p] = P(a|x)``.  Inputs and outputs are
bits; for the GHZ game input 0 selects ``σ_x`` and input 1 selects ``σ_y``,
and output 0 is the ``+1`` eigenvalue.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .exceptions import ParameterError, ValidationError

NS_TOL = 1e-10
NORM_TOL = 1e-10
STATE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DeviceBehavior:
    """Conditional box ``P(outputs | inputs)`` for 2 or 3 parties."""

    parties: int
    cond_probs: np.ndarray

    def __post_init__(self):
        if self.parties not in (2, 3):
            raise ValidationError(f"parties must be 2 or 3, got {self.parties}")
        p = np.asarray(self.cond_probs, dtype=float)
        if p.shape != (2,) * (2 * self.parties):
            raise ValidationError(f"cond_probs must have shape {(2,) * (2 * self.parties)}, got {p.shape}")
        if (p < -NORM_TOL).any():
            raise ValidationError("negative probabilities")
        sums = p.reshape(1 << self.parties, -1).sum(axis=1)
        if np.abs(sums - 1).max() > NORM_TOL:
            raise ValidationError(f"conditional distributions do not sum to 1 (max error {np.abs(sums - 1).max():.3g})")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "cond_probs", p)

    def prob(self, outputs, inputs) -> float:
        return float(self.cond_probs[tuple(inputs) + tuple(outputs)])

    def conditional(self, inputs) -> np.ndarray:
        """Distribution over packed outputs (big-endian) for ``inputs``."""
        return self.cond_probs[tuple(inputs)].reshape(-1)

    def table(self) -> np.ndarray:
        """``(2^p inputs, 2^p outputs)`` matrix view."""
        k = 1 << self.parties
        return self.cond_probs.reshape(k, k)

    def mix(self, other: "DeviceBehavior", weight: float) -> "DeviceBehavior":
        """``weight * self + (1 - weight) * other``."""
        if other.parties != self.parties:
            raise ParameterError("cannot mix behaviours with different party counts")
        if not 0 <= weight <= 1:
            raise ParameterError("weight must lie in [0, 1]")
        return DeviceBehavior(self.parties, weight * self.cond_probs + (1 - weight) * other.cond_probs)

    def signalling_error(self) -> float:
        return signalling_error(self)

    def to_csv(self) -> str:
        return behavior_to_csv(self)


def uniform_behavior(parties: int) -> DeviceBehavior:
    return DeviceBehavior(parties, np.full((2,) * (2 * parties), 1.0 / (1 << parties)))


def signalling_error(b: DeviceBehavior) -> float:
    """Largest dependence of any party-subset marginal on an outside input.

    For each party ``i`` the joint distribution of the other parties'
    outputs (party ``i``'s output summed out) must not depend on ``x_i``.
    """
    p = b.parties
    worst = 0.0
    for i in range(p):
        marg = b.cond_probs.sum(axis=p + i)
        diff = np.take(marg, 0, axis=i) - np.take(marg, 1, axis=i)
        worst = max(worst, float(np.abs(diff).max()))
    return worst


def is_non_signalling(b: DeviceBehavior, tol: float = NS_TOL) -> bool:
    return signalling_error(b) <= tol


def check_non_signalling(b: DeviceBehavior, tol: float = NS_TOL) -> DeviceBehavior:
    err = signalling_error(b)
    if err > tol:
        raise ValidationError(f"behaviour is signalling (max marginal difference {err:.3g})")
    return b


# --------------------------------------------------------------------------
# statevector engine


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def basis_measurement(vec0) -> tuple:
    """Projective measurement whose outcome 0 is the ray through ``vec0``."""
    p0 = projector(vec0)
    return (p0, np.eye(2) - p0)


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli_measurement(op) -> tuple:
    """Outcome 0 is the ``+1`` eigenspace of a Pauli operator."""
    op = np.asarray(op, dtype=complex)
    return ((np.eye(2) + op) / 2, (np.eye(2) - op) / 2)


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    """Pure state plus one binary projective measurement per party and input.

    ``measurements[party][input]`` is a pair ``(Π_0, Π_1)`` of 2x2 projectors.
    """

    state: np.ndarray
    measurements: tuple

    def __post_init__(self):
        psi = np.asarray(self.state, dtype=complex).reshape(-1)
        parties = len(self.measurements)
        if parties not in (2, 3) or psi.size != 1 << parties:
            raise ValidationError(f"state of dimension {psi.size} does not match {parties} qubits")
        if abs(np.vdot(psi, psi).real - 1) > STATE_TOL:
            raise ValidationError("state is not normalised")
        for party in self.measurements:
            if len(party) != 2:
                raise ValidationError("each party needs measurements for inputs 0 and 1")
            for p0, p1 in party:
                p0, p1 = np.asarray(p0, complex), np.asarray(p1, complex)
                for P in (p0, p1):
                    if np.abs(P @ P - P).max() > STATE_TOL or np.abs(P - P.conj().T).max() > STATE_TOL:
                        raise ValidationError("measurement operator is not an orthogonal projector")
                if np.abs(p0 @ p1).max() > STATE_TOL or np.abs(p0 + p1 - np.eye(2)).max() > STATE_TOL:
                    raise ValidationError("projectors are not orthogonal or do not sum to identity")
        object.__setattr__(self, "state", psi)

    @property
    def parties(self) -> int:
        return len(self.measurements)


def behavior_from_strategy(s: QuantumStrategy) -> DeviceBehavior:
    """Born-rule behaviour ``P(a|x) = <ψ| ⊗_i Π^{x_i}_{a_i} |ψ>``."""
    p = s.parties
    out = np.zeros((2,) * (2 * p))
    for xs in itertools.product((0, 1), repeat=p):
        for as_ in itertools.product((0, 1), repeat=p):
            op = reduce(np.kron, [s.measurements[i][xs[i]][as_[i]] for i in range(p)])
            out[xs + as_] = np.vdot(s.state, op @ s.state).real
    return DeviceBehavior(p, out)


# --------------------------------------------------------------------------
# named strategies


def hardy_amplitudes():
    """Closed-form amplitudes ``(α, β, γ)`` of the optimal Hardy state.

    ``α² = β² = (3 − √5)/2`` and ``γ² = √5 − 2``; the resulting paradox
    probability is ``(5√5 − 11)/2``.
    """
    a = math.sqrt((3 - math.sqrt(5)) / 2)
    return a, a, math.sqrt(math.sqrt(5) - 2)


HARDY_PROBABILITY = (5 * math.sqrt(5) - 11) / 2


def hardy_probability_numeric() -> float:
    """Maximise ``u²(1 − 2u)/(1 − u)²`` over ``u = α² = β²`` numerically."""
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(lambda u: -(u * u * (1 - 2 * u) / (1 - u) ** 2),
                          bounds=(1e-9, 0.5 - 1e-9), method="bounded",
                          options={"xatol": 1e-12})
    return float(-res.fun)


def hardy_strategy() -> QuantumStrategy:
    """Two-qubit Hardy strategy.

    ``|ψ> = α|01> + β|10> + γ|11>``; input 1 measures the computational
    basis and input 0 has outcome-0 vector ``(γ, −α)`` for Alice and
    ``(γ, −β)`` for Bob, which forces ``P(0,1|0,1) = P(1,0|1,0) =
    P(0,0|1,1) = 0``.
    """
    a, b, g = hardy_amplitudes()
    psi = np.array([0, a, b, g], dtype=complex)
    comp = basis_measurement([1, 0])
    alice = (basis_measurement([g, -a]), comp)
    bob = (basis_measurement([g, -b]), comp)
    return QuantumStrategy(psi, (alice, bob))


def ghz_strategy() -> QuantumStrategy:
    psi = np.zeros(8, dtype=complex)
    psi[0] = psi[7] = 1 / math.sqrt(2)
    meas = (pauli_measurement(PAULI_X), pauli_measurement(PAULI_Y))
    return QuantumStrategy(psi, (meas, meas, meas))


def honest_hardy_device(noise: float = 0.0) -> DeviceBehavior:
    """Ideal Hardy behaviour mixed with white noise of weight ``noise``."""
    if not 0 <= noise <= 1:
        raise ParameterError(f"noise must lie in [0, 1], got {noise}")
    return behavior_from_strategy(hardy_strategy()).mix(uniform_behavior(2), 1 - noise)


def honest_ghz_device(noise: float = 0.0) -> DeviceBehavior:
    if not 0 <= noise <= 1:
        raise ParameterError(f"noise must lie in [0, 1], got {noise}")
    return behavior_from_strategy(ghz_strategy()).mix(uniform_behavior(3), 1 - noise)


def deterministic_box(assignment) -> DeviceBehavior:
    """Local deterministic behaviour.

    ``assignment[i]`` gives party ``i``'s output for inputs 0 and 1, either
    as a pair ``(out_0, out_1)`` or as a callable ``x -> bit``.
    """
    funcs = []
    for f in assignment:
        if callable(f):
            funcs.append((int(f(0)) & 1, int(f(1)) & 1))
        else:
            f = tuple(int(v) for v in f)
            if len(f) != 2 or set(f) - {0, 1}:
                raise ParameterError(f"bad output assignment {f}")
            funcs.append(f)
    p = len(funcs)
    out = np.zeros((2,) * (2 * p))
    for xs in itertools.product((0, 1), repeat=p):
        out[xs + tuple(funcs[i][xs[i]] for i in range(p))] = 1.0
    return DeviceBehavior(p, out)


def all_deterministic_boxes(parties: int):
    """Yield ``(assignment, behaviour)`` for all ``16`` or ``64`` local boxes."""
    for flat in itertools.product((0, 1), repeat=2 * parties):
        assignment = tuple(flat[2 * i:2 * i + 2] for i in range(parties))
        yield assignment, deterministic_box(assignment)


# --------------------------------------------------------------------------
# sampling


def sample_round(b: DeviceBehavior, inputs, rng) -> tuple:
    """Draw one output tuple for ``inputs``."""
    return tuple(int(v) for v in sample_rounds(b, np.atleast_2d(inputs), rng)[0])


def sample_rounds(b: DeviceBehavior, inputs: np.ndarray, rng) -> np.ndarray:
    """Outputs for a batch of rounds, one uniform draw per round in order."""
    inputs = np.asarray(inputs, dtype=np.int64)
    if inputs.ndim != 2 or inputs.shape[1] != b.parties:
        raise ParameterError(f"inputs must have shape (rounds, {b.parties})")
    p = b.parties
    k = 1 << p
    cdf = np.cumsum(b.table(), axis=1)
    cdf[:, -1] = 1.0
    w = 1 << np.arange(p - 1, -1, -1)
    rows = cdf[inputs @ w]
    u = rng.random(inputs.shape[0])
    packed = np.minimum((u[:, None] >= rows).sum(axis=1), k - 1)
    return ((packed[:, None] >> np.arange(p - 1, -1, -1)) & 1).astype(np.uint8)


# --------------------------------------------------------------------------
# CSV


def _names(p):
    return ["x", "y", "z"][:p], ["a", "b", "c"][:p]


def behavior_to_csv(b: DeviceBehavior) -> str:
    ins, outs = _names(b.parties)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ins + outs + ["p"])
    for idx in itertools.product((0, 1), repeat=2 * b.parties):
        w.writerow(list(idx) + [repr(float(b.cond_probs[idx]))])
    return buf.getvalue()


def behavior_from_csv(text: str) -> DeviceBehavior:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValidationError("empty behaviour CSV")
    cols = set(rows[0])
    parties = 3 if {"z", "c"} <= cols else 2
    ins, outs = _names(parties)
    need = set(ins + outs + ["p"])
    if not need <= cols:
        raise ValidationError(f"behaviour CSV needs columns {sorted(need)}")
    out = np.zeros((2,) * (2 * parties))
    for r in rows:
        out[tuple(int(r[c]) for c in ins + outs)] = float(r["p"])
    return DeviceBehavior(parties, out)
