"""Stochastic photon-loss trajectories and no-loss post-selection.

Each two-mode gate is followed by two loss channels, one per participating
mode.  A channel applies the identity with probability 1 - rate, otherwise a
loss event: the normalized annihilation of one photon from its mode (acting
as the identity when the mode is empty, while still counting as a loss draw).
Post-selecting trajectories in which every channel drew the identity
reproduces the ideal circuit exactly, and that event has probability
prod_i (1 - rate_i) independent of the state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .architecture import Circuit
from .cayley import LossModel
from .linalg import as_generator
from .probability import as_occupation, occupation_vectors, output_probability, permanent

MAX_PHOTONS = 10
MAX_MODES = 16


def no_loss_probability(loss: LossModel) -> float:
    """Probability that every channel draws the identity branch."""
    out = 1.0
    for rate in loss.rates:
        out *= 1.0 - rate
    return out


def lossy_outcome_probability(u: np.ndarray, s, t, loss: LossModel) -> float:
    """Joint probability of outcome ``s`` together with the no-loss event.

    For full-photon-sector outcomes (|s| = |t| = N) this is the zero-gain
    post-selection identity: ideal probability times prod (1 - rate_i).
    Sub-sector outcomes have no closed form here; estimate them with
    :func:`lossy_trajectories`.
    """
    s = as_occupation(s)
    t = as_occupation(t)
    if sum(s) != sum(t):
        raise ValueError(
            f"outcome carries {sum(s)} photons but the full sector has {sum(t)}; "
            "sub-sector probabilities are only available by trajectory sampling"
        )
    return output_probability(u, s, t) * no_loss_probability(loss)


class _SectorSpace:
    """Dense Fock-sector simulator for a fixed circuit at state-vector scale."""

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.modes = circuit.arch.modes

    @lru_cache(maxsize=None)
    def basis(self, photons: int) -> tuple[tuple[int, ...], ...]:
        return tuple(occupation_vectors(self.modes, photons))

    @lru_cache(maxsize=None)
    def index(self, photons: int) -> dict[tuple[int, ...], int]:
        return {pattern: i for i, pattern in enumerate(self.basis(photons))}

    @lru_cache(maxsize=None)
    def _pair_transfer(self, gate_index: int, total: int) -> np.ndarray:
        """(total+1)^2 Fock transfer of gate ``gate_index`` on its two modes.

        Entry [out_a, in_a] is <out_a, total-out_a| U(g) |in_a, total-in_a>,
        a 2x2-source permanent with repeated rows/columns.
        """
        g = self.circuit.gates[gate_index]
        dim = total + 1
        t_mat = np.zeros((dim, dim), dtype=np.complex128)
        for in_a in range(dim):
            in_occ = (in_a, total - in_a)
            for out_a in range(dim):
                out_occ = (out_a, total - out_a)
                rows = [i for i, c in enumerate(out_occ) for _ in range(c)]
                cols = [j for j, c in enumerate(in_occ) for _ in range(c)]
                per = permanent(g[np.ix_(rows, cols)])
                norm = math.sqrt(
                    math.factorial(out_occ[0]) * math.factorial(out_occ[1])
                    * math.factorial(in_occ[0]) * math.factorial(in_occ[1])
                )
                t_mat[out_a, in_a] = per / norm
        return t_mat

    @lru_cache(maxsize=None)
    def gate_matrix(self, gate_index: int, photons: int) -> np.ndarray:
        """Action of gate ``gate_index`` on the ``photons``-sector basis."""
        placement = self.circuit.arch.placements[gate_index]
        a, b = placement.mode_a - 1, placement.mode_b - 1
        basis = self.basis(photons)
        index = self.index(photons)
        mat = np.zeros((len(basis), len(basis)), dtype=np.complex128)
        for col, pattern in enumerate(basis):
            total = pattern[a] + pattern[b]
            transfer = self._pair_transfer(gate_index, total)
            for out_a in range(total + 1):
                amp = transfer[out_a, pattern[a]]
                if amp == 0:
                    continue
                target = list(pattern)
                target[a], target[b] = out_a, total - out_a
                mat[index[tuple(target)], col] += amp
        return mat

    @lru_cache(maxsize=None)
    def lowering(self, mode: int, photons: int) -> np.ndarray:
        """sqrt(n_mode)-weighted map from the ``photons`` sector to one photon fewer."""
        src = self.basis(photons)
        dst_index = self.index(photons - 1)
        mat = np.zeros((len(dst_index), len(src)))
        for col, pattern in enumerate(src):
            if pattern[mode] == 0:
                continue
            target = list(pattern)
            target[mode] -= 1
            mat[dst_index[tuple(target)], col] = math.sqrt(pattern[mode])
        return mat


@dataclass(frozen=True)
class TrajectoryResult:
    outcome: tuple[int, ...]
    lost_photons: int
    no_loss: bool


@dataclass
class _LossSimulator:
    """Precomputed stages shared across trajectories of one (circuit, input, loss)."""

    space: _SectorSpace
    loss: LossModel
    input_state: tuple[int, ...]

    def __post_init__(self) -> None:
        circuit = self.space.circuit
        if self.loss.channels != 2 * len(circuit.gates):
            raise ValueError(
                f"loss model has {self.loss.channels} channels; circuit needs "
                f"{2 * len(circuit.gates)} (two per gate)"
            )
        n = sum(self.input_state)
        if n > MAX_PHOTONS or circuit.arch.modes > MAX_MODES:
            raise ValueError(
                f"trajectory simulation limited to N <= {MAX_PHOTONS}, M <= {MAX_MODES}"
            )
        # Channel c sits after gate c // 2 and acts on that gate's (c % 2)-th mode.
        self.channel_modes = []
        for placement in circuit.arch.placements:
            self.channel_modes.extend([placement.mode_a - 1, placement.mode_b - 1])
        # Ideal (no-loss) state after each gate, photon number fixed at N.
        state = np.zeros(len(self.space.basis(n)), dtype=np.complex128)
        state[self.space.index(n)[self.input_state]] = 1.0
        self.prefix_states = [state]
        for gate_index in range(len(circuit.gates)):
            state = self.space.gate_matrix(gate_index, n) @ state
            self.prefix_states.append(state)
        self.ideal_final = self.prefix_states[-1]
        self.photons = n
        self.rates = np.array(self.loss.rates)

    def _finish(self, state: np.ndarray, photons: int, start_gate: int) -> np.ndarray:
        for gate_index in range(start_gate, len(self.space.circuit.gates)):
            state = self.space.gate_matrix(gate_index, photons) @ state
        return state

    def run(self, gen: np.random.Generator) -> TrajectoryResult:
        rates = self.rates
        fires = gen.random(len(rates)) < rates
        if not fires.any():
            state, photons = self.ideal_final, self.photons
            return self._measure(state, photons, gen, no_loss=True)
        first = int(np.argmax(fires))
        photons = self.photons
        state = self.prefix_states[first // 2 + 1].copy()
        gate_cursor = first // 2 + 1
        for channel in range(first, len(rates)):
            # Advance gates that precede this channel.
            while gate_cursor <= channel // 2:
                state = self.space.gate_matrix(gate_cursor, photons) @ state
                gate_cursor += 1
            if not fires[channel]:
                continue
            if photons > 0:
                lowered = self.space.lowering(self.channel_modes[channel], photons) @ state
                norm = np.linalg.norm(lowered)
                if norm > 1e-15:
                    state = lowered / norm
                    photons -= 1
                # Empty mode: the loss event still happened, state untouched.
        state = self._finish(state, photons, gate_cursor)
        return self._measure(state, photons, gen, no_loss=False)

    def _measure(
        self, state: np.ndarray, photons: int, gen: np.random.Generator, no_loss: bool
    ) -> TrajectoryResult:
        probs = np.abs(state) ** 2
        probs = probs / probs.sum()
        idx = int(gen.choice(len(probs), p=probs))
        outcome = self.space.basis(photons)[idx]
        return TrajectoryResult(outcome, self.photons - photons, no_loss)


def lossy_sample(circuit: Circuit, t, loss: LossModel, rng) -> TrajectoryResult:
    """One loss-unraveled trajectory: final outcome, photons lost, no-loss flag."""
    sim = _LossSimulator(_SectorSpace(circuit), loss, as_occupation(t, circuit.arch.modes))
    return sim.run(as_generator(rng))


def lossy_trajectories(circuit: Circuit, t, loss: LossModel, rng, num: int):
    """Batch trajectories sharing precomputed stages; returns TrajectoryResult list."""
    sim = _LossSimulator(_SectorSpace(circuit), loss, as_occupation(t, circuit.arch.modes))
    gen = as_generator(rng)
    return [sim.run(gen) for _ in range(num)]
