"""Butterfly-family gate layouts and their circuit unitaries.

An :class:`Architecture` fixes where two-mode gates sit (layer by layer, on
1-based mode pairs); a :class:`Circuit` binds a concrete 2x2 unitary to every
placement.  Three layouts are built here:

* butterfly ``B``: ``log2(M)`` layers; layer ``L`` couples modes
  ``2^L(j-1)+k`` and ``2^L(j-1)+k+2^(L-1)``,
* inverse butterfly ``B*``: the same placements with the layer order reversed,
* ``q``-Kaleidoscope ``(BB*)^q``: ``q`` repeats of B followed by B*.

Layers apply to the optical state in list order, so the circuit matrix is the
product of per-layer block unitaries with layer 1 as the rightmost factor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .linalg import DimensionError, assert_unitary, max_abs

#: Unitarity tolerance for long gate products (looser than single-gate construction).
PRODUCT_TOL = 1e-9


def _log2_exact(m: int) -> int:
    n = int(m).bit_length() - 1
    if m <= 1 or (1 << n) != m:
        raise ValueError(f"mode count must be a power of two >= 2, got {m}")
    return n


@dataclass(frozen=True, order=True)
class GatePlacement:
    """A two-mode gate slot: unit-depth layer index plus its (1-based) mode pair."""

    layer: int
    mode_a: int
    mode_b: int

    def __post_init__(self) -> None:
        if not (self.layer >= 1 and 1 <= self.mode_a < self.mode_b):
            raise ValueError(f"bad placement {self}")


@dataclass(frozen=True)
class Architecture:
    """Gate placements grouped into parallel layers, with a label for provenance."""

    modes: int
    label: str
    layers: tuple[tuple[GatePlacement, ...], ...]

    def __post_init__(self) -> None:
        for layer in self.layers:
            touched: set[int] = set()
            for p in layer:
                if p.mode_b > self.modes:
                    raise ValueError(f"placement {p} exceeds {self.modes} modes")
                if p.mode_a in touched or p.mode_b in touched:
                    raise ValueError(f"layer {p.layer} touches mode twice at {p}")
                touched.update((p.mode_a, p.mode_b))

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def gate_count(self) -> int:
        return sum(len(layer) for layer in self.layers)

    @cached_property
    def placements(self) -> tuple[GatePlacement, ...]:
        """All placements flattened in application order (layer 1 first)."""
        return tuple(p for layer in self.layers for p in layer)


def _butterfly_layers(m: int) -> list[list[tuple[int, int]]]:
    n = _log2_exact(m)
    layers = []
    for level in range(1, n + 1):
        pairs = []
        for j in range(1, 2 ** (n - level) + 1):
            base = 2**level * (j - 1)
            for k in range(1, 2 ** (level - 1) + 1):
                pairs.append((base + k, base + k + 2 ** (level - 1)))
        layers.append(sorted(pairs))
    return layers


def _as_architecture(m: int, label: str, raw_layers: list[list[tuple[int, int]]]) -> Architecture:
    layers = tuple(
        tuple(GatePlacement(i + 1, a, b) for a, b in layer) for i, layer in enumerate(raw_layers)
    )
    return Architecture(m, label, layers)


def build_butterfly(m: int) -> Architecture:
    """Butterfly layout B on ``m = 2^n`` modes: depth ``n``, ``(m/2) n`` gates."""
    return _as_architecture(m, "B", _butterfly_layers(m))


def build_inverse_butterfly(m: int) -> Architecture:
    """Inverse butterfly B*: butterfly layers applied in reverse order."""
    return _as_architecture(m, "B*", list(reversed(_butterfly_layers(m))))


def build_kaleidoscope(m: int, q: int) -> Architecture:
    """``q``-Kaleidoscope (BB*)^q: q copies of B-then-B*, ``q m log2(m)`` gates."""
    if q < 1:
        raise ValueError(f"repetition count must be >= 1, got {q}")
    fwd = _butterfly_layers(m)
    block = fwd + list(reversed(fwd))
    label = "BBstar" if q == 1 else f"Kaleidoscope({q})"
    return _as_architecture(m, label, block * q)


@dataclass(frozen=True)
class Circuit:
    """An architecture with one 2x2 unitary per placement, in application order."""

    arch: Architecture
    gates: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.gates) != self.arch.gate_count:
            raise ValueError(
                f"{self.arch.label} needs {self.arch.gate_count} gates, got {len(self.gates)}"
            )
        stacked = np.asarray(self.gates, dtype=np.complex128)
        if stacked.shape != (len(self.gates), 2, 2):
            raise DimensionError("all bound gates must be 2x2")
        defect = max_abs(np.einsum("gji,gjk->gik", stacked.conj(), stacked) - np.eye(2))
        if defect > 1e-10:
            raise ValueError(f"a bound gate is not unitary: defect {defect:.3e}")
        object.__setattr__(self, "gates", tuple(stacked))

    def replace_gates(self, gates) -> "Circuit":
        return Circuit(self.arch, tuple(gates))


def identity_circuit(arch: Architecture) -> Circuit:
    eye = np.eye(2, dtype=np.complex128)
    return Circuit(arch, tuple(eye for _ in range(arch.gate_count)))


def circuit_unitary(circuit: Circuit, *, check: bool = True) -> np.ndarray:
    """Dense M x M matrix of the circuit (layer 1 acts first on the input modes)."""
    m = circuit.arch.modes
    u = np.eye(m, dtype=np.complex128)
    gate_iter = iter(circuit.gates)
    for layer in circuit.arch.layers:
        for p in layer:
            g = next(gate_iter)
            a, b = p.mode_a - 1, p.mode_b - 1
            rows = u[[a, b], :]
            u[[a, b], :] = g @ rows
    if check:
        defect = max_abs(u.conj().T @ u - np.eye(m))
        if defect > PRODUCT_TOL:
            raise ValueError(f"composed circuit drifted from unitarity: {defect:.3e}")
    return u


def circuit_to_json(circuit: Circuit) -> str:
    """Serialize to the documented JSON schema; floats round-trip bit exactly."""
    gate_iter = iter(circuit.gates)
    layers = []
    for layer in circuit.arch.layers:
        entries = []
        for p in layer:
            g = next(gate_iter)
            flat = [[float(z.real), float(z.imag)] for z in g.reshape(-1)]
            entries.append({"a": p.mode_a, "b": p.mode_b, "gate": flat})
        layers.append(entries)
    doc = {"modes": circuit.arch.modes, "label": circuit.arch.label, "layers": layers}
    return json.dumps(doc)


def circuit_from_json(text: str) -> Circuit:
    doc = json.loads(text)
    raw_layers = []
    gates = []
    for layer in doc["layers"]:
        raw_layers.append([(e["a"], e["b"]) for e in layer])
        for e in layer:
            flat = [complex(re, im) for re, im in e["gate"]]
            gates.append(np.array(flat, dtype=np.complex128).reshape(2, 2))
    arch = _as_architecture(doc["modes"], doc["label"], raw_layers)
    return Circuit(arch, tuple(gates))
