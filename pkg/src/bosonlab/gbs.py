"""Squeezed-light support: the paired-mode embedding, its reduction identity,
and a truncated-Fock oracle for cross-checking the hafnian formula.

The embedding doubles an M0-mode BB* circuit into a 2*M0-mode BB* circuit:
the first layer pairs wire 2k-1 with wire 2k through a balanced beamsplitter,
odd wires then idle (photon counters) while the even wires carry the original
circuit through the interior layers, which split exactly into one BB*(M0)
per wire-parity class.  Feeding every input with an equally squeezed vacuum,
each beamsplitter turns its SMSV pair into a two-mode squeezed state, so the
counters herald a Fock input into the embedded circuit.

Conventions pinned here (and verified by the identity tests): squeezed
amplitudes are tanh(r)^n with no extra phase, and the balanced beamsplitter is
[[1, i], [i, 1]]/sqrt(2).  A real Hadamard-like splitter cannot produce the
paired two-mode squeezed state from equally squeezed inputs (real orthogonal
mixing leaves the squeezing matrix invariant), so the symmetric complex
convention is the one compatible with the equal-squeezing probability formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .architecture import Architecture, Circuit, build_kaleidoscope, circuit_unitary
from .probability import (
    GbsParams,
    as_occupation,
    gbs_probability,
    is_collision_free,
    occupation_vectors,
    transition_amplitude,
)

#: Balanced beamsplitter turning two equal SMSVs into one TMSV.
PAIRING_BEAMSPLITTER = np.array([[1.0, 1.0j], [1.0j, 1.0]], dtype=np.complex128) / math.sqrt(2.0)


def _interior_placement_map(doubled: Architecture, base: Architecture, parity: int):
    """Index into ``doubled`` placements for each ``base`` placement on one parity class.

    Interior layer L+1 of BB*(2 M0) restricted to wires of a fixed parity is
    exactly layer L of BB*(M0) with sub-mode k living on wire 2k - (1 - parity).
    """
    index = {
        (p.layer, p.mode_a, p.mode_b): i for i, p in enumerate(doubled.placements)
    }
    mapping = []
    for p in base.placements:
        wire_a = 2 * p.mode_a - (1 - parity)
        wire_b = 2 * p.mode_b - (1 - parity)
        key = (p.layer + 1, wire_a, wire_b)
        if key not in index:
            raise AssertionError(f"parity embedding missed placement {key}")
        mapping.append(index[key])
    return mapping


def build_tmsv_embedding(base_circuit: Circuit) -> Circuit:
    """Double ``base_circuit`` (on BB*) into the paired-squeezing layout on 2 M0 modes.

    Layer 1 carries the pairing beamsplitters; the even-parity wires carry the
    base circuit's gates through the interior layers; everything else is the
    identity, including the final layer.
    """
    m0 = base_circuit.arch.modes
    if base_circuit.arch.label != "BBstar":
        raise ValueError(
            f"embedding is defined for circuits on BB*, got {base_circuit.arch.label!r}"
        )
    doubled_arch = build_kaleidoscope(2 * m0, 1)
    gates = [np.eye(2, dtype=np.complex128)] * doubled_arch.gate_count
    for i, p in enumerate(doubled_arch.placements):
        if p.layer == 1:
            gates[i] = PAIRING_BEAMSPLITTER
    for slot, gate in zip(
        _interior_placement_map(doubled_arch, base_circuit.arch, parity=1), base_circuit.gates
    ):
        gates[slot] = gate
    return Circuit(doubled_arch, tuple(gates))


def interleave_outcome(counter, circuit_out) -> tuple[int, ...]:
    """Outcome on the doubled layout: counter pattern on odd wires, output on even."""
    out = []
    for c, s in zip(counter, circuit_out):
        out.extend((c, s))
    return tuple(out)


def _smsv_amplitude(r: float, n: int) -> float:
    """Fock amplitude of |2n> in a squeezed vacuum with tanh(r)^n convention."""
    return (
        math.tanh(r) ** n
        * math.sqrt(math.factorial(2 * n))
        / (2**n * math.factorial(n) * math.sqrt(math.cosh(r)))
    )


@dataclass(frozen=True)
class TruncatedFockResult:
    probabilities: dict[tuple[int, ...], float]
    cutoff: int
    max_total: int
    per_mode_truncation_error: float


def truncated_fock_gbs(
    u: np.ndarray, r: float, cutoff: int = 6, max_total: int | None = None
) -> TruncatedFockResult:
    """Squeezed-input outcome probabilities by explicit Fock expansion.

    Expands the product of squeezed vacua over even-photon input patterns,
    pushes each total-photon sector through the circuit with permanent
    transition amplitudes, and reads off |amplitude|^2 per outcome.  Within a
    sector the value is exact; the cutoff only excludes outcomes whose
    per-mode occupation exceeds ``cutoff`` (or totals above ``max_total``),
    with per-mode weight bound tanh(r)^(2 (cutoff+1)) reported.
    """
    u = np.asarray(u, dtype=np.complex128)
    m = u.shape[0]
    if m > 4 or cutoff > 6:
        raise ValueError("truncated oracle limited to M <= 4, cutoff <= 6")
    if max_total is None:
        max_total = min(m * cutoff, 12)
    probs: dict[tuple[int, ...], float] = {}
    for total in range(0, max_total + 1):
        inputs = [
            t
            for t in occupation_vectors(m, total)
            if all(v % 2 == 0 for v in t)
        ]
        if not inputs:
            for s in occupation_vectors(m, total):
                if max(s) <= cutoff:
                    probs[s] = 0.0
            continue
        weights = [
            np.prod([_smsv_amplitude(r, v // 2) for v in t]) for t in inputs
        ]
        for s in occupation_vectors(m, total):
            if max(s) > cutoff:
                continue
            amp = sum(
                w * transition_amplitude(u, s, t) for w, t in zip(weights, inputs)
            )
            probs[s] = float(abs(amp) ** 2)
    return TruncatedFockResult(
        probabilities=probs,
        cutoff=cutoff,
        max_total=max_total,
        per_mode_truncation_error=math.tanh(r) ** (2 * (cutoff + 1)),
    )


def truncated_fock_outcome_probability(u: np.ndarray, r: float, s) -> float:
    """Fock-expansion probability of a single outcome (exact within its sector).

    Photon number is conserved, so only even input patterns with the outcome's
    total contribute; no truncation enters a single-outcome value.
    """
    u = np.asarray(u, dtype=np.complex128)
    m = u.shape[0]
    s = as_occupation(s, m)
    total = sum(s)
    if total % 2:
        return 0.0
    amp = 0.0 + 0.0j
    for t in occupation_vectors(m, total):
        if any(v % 2 for v in t):
            continue
        weight = np.prod([_smsv_amplitude(r, v // 2) for v in t])
        amp += weight * transition_amplitude(u, s, t)
    return float(abs(amp) ** 2)


@dataclass(frozen=True)
class GbsReductionReport:
    lhs: float
    rhs: float
    prefactor: float
    fock_probability: float

    @property
    def abs_diff(self) -> float:
        return abs(self.lhs - self.rhs)


def verify_gbs_reduction(
    base_circuit: Circuit, s0, r: float, herald=None
) -> GbsReductionReport:
    """Check the doubling identity q_s(C) = tanh^(2 N0) r / cosh^(2 M0) r * p.

    The left side is the squeezed-input probability (hafnian path) of the
    interleaved outcome on the doubled circuit; the right side multiplies the
    prefactor by the Fock probability |<s0| U(C0) |herald>|^2 computed on the
    base circuit (permanent path).  ``herald`` is the counter-side pattern and
    defaults to ``s0`` itself, the doubled-outcome form of the identity.
    """
    m0 = base_circuit.arch.modes
    s0 = as_occupation(s0, m0)
    herald = s0 if herald is None else as_occupation(herald, m0)
    if not (is_collision_free(s0) and is_collision_free(herald)):
        raise ValueError("identity is stated for collision-free patterns only")
    if sum(herald) != sum(s0):
        raise ValueError("herald and outcome must carry the same photon number")
    n0 = sum(s0)
    doubled = build_tmsv_embedding(base_circuit)
    u = circuit_unitary(doubled)
    s = interleave_outcome(herald, s0)
    lhs = gbs_probability(u, s, GbsParams(r, 2 * m0))
    amp = transition_amplitude(circuit_unitary(base_circuit), s0, herald)
    fock_probability = float(abs(amp) ** 2)
    prefactor = math.tanh(r) ** (2 * n0) / math.cosh(r) ** (2 * m0)
    return GbsReductionReport(
        lhs=lhs,
        rhs=prefactor * fock_probability,
        prefactor=prefactor,
        fock_probability=fock_probability,
    )


@dataclass(frozen=True)
class BlowupFactor:
    value: float
    log2_value: float
    combinatorial_form: float | None
    consistent: bool


def blowup_factor(m0: int, n0: int, r: float, rel_tol: float = 1e-9) -> BlowupFactor:
    """Imprecision blowup cosh^(2 M0) r / tanh^(2 N0) r of the doubling reduction.

    When the mean-photon relation N = M sinh^2(r) holds (M = 2 M0, N = 2 N0),
    the equivalent combinatorial form ((M+N)/M)^(M0+N0) (M/N)^N0 is evaluated
    and cross-checked; otherwise it is flagged as inconsistent and omitted.
    """
    if r <= 0:
        raise ValueError(f"squeezing must be positive, got {r}")
    value = math.cosh(r) ** (2 * m0) / math.tanh(r) ** (2 * n0)
    log2_value = (2 * m0 * math.log2(math.cosh(r))) - 2 * n0 * math.log2(math.tanh(r))
    m, n = 2 * m0, 2 * n0
    consistent = n0 > 0 and abs(m * math.sinh(r) ** 2 - n) <= rel_tol * n
    combinatorial = None
    if consistent:
        combinatorial = ((m + n) / m) ** (m0 + n0) * (m / n) ** n0
    return BlowupFactor(
        value=value, log2_value=log2_value, combinatorial_form=combinatorial, consistent=consistent
    )
