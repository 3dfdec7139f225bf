"""Permutation routing into the BB* layout and grid-circuit embeddings into B.

``route_permutation`` treats BB* as a Benes network: the two stride-1 layers
at the ends act as input/output switch columns, and the middle layers split
into two independent half-size BB* networks living on the odd and even wires.
Switch settings come from the standard looping (2-coloring) algorithm, with
loops always started from the lowest-numbered unrouted input so results are
deterministic.

``embed_grid`` realizes a single-parallel d-dimensional grid circuit inside a
lone butterfly B under an explicit mode relabeling built from per-block
ascending-to-descending index reversals, one pass per layer and axis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .architecture import Architecture, Circuit, build_butterfly, build_kaleidoscope, circuit_unitary
from .linalg import DimensionError, RngHandle, as_generator, max_abs

IDENTITY_2 = np.eye(2, dtype=np.complex128)
SWAP_2 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)


@dataclass(frozen=True)
class Permutation:
    """Bijection on 1-based modes; ``image[i-1]`` is where mode ``i`` goes."""

    image: tuple[int, ...]

    def __post_init__(self) -> None:
        m = len(self.image)
        if sorted(self.image) != list(range(1, m + 1)):
            raise ValueError(f"not a permutation of 1..{m}: {self.image}")

    @property
    def size(self) -> int:
        return len(self.image)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Exact 0/1 matrix P with P @ e_i = e_image[i]."""
        m = self.size
        p = np.zeros((m, m), dtype=np.complex128)
        for i, dest in enumerate(self.image):
            p[dest - 1, i] = 1.0
        return p

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for i, dest in enumerate(self.image):
            inv[dest - 1] = i + 1
        return Permutation(tuple(inv))

    def __call__(self, mode: int) -> int:
        return self.image[mode - 1]

    def apply_to_occupation(self, occupation) -> tuple[int, ...]:
        """Permute an occupation vector: new[image[i]] = old[i]."""
        out = [0] * self.size
        for i, dest in enumerate(self.image):
            out[dest - 1] = occupation[i]
        return tuple(out)

    @staticmethod
    def identity(m: int) -> "Permutation":
        return Permutation(tuple(range(1, m + 1)))


def random_permutation(m: int, rng: RngHandle | np.random.Generator) -> Permutation:
    gen = as_generator(rng)
    return Permutation(tuple(int(x) + 1 for x in gen.permutation(m)))


def _benes(targets: list[int]) -> dict[tuple[int, int, int], bool]:
    """Switch settings ``(layer, a, b) -> swap?`` on 0-based BB* for input i -> targets[i].

    Inputs paired as (2j, 2j+1) enter through the first stride-1 layer, the
    middle layers form two independent half-size BB* networks on the even and
    odd wires (subnets 0 and 1), and the last layer collects paired outputs.
    The looping pass 2-colors each constraint cycle, starting every cycle at
    its lowest unrouted input on subnet 0.
    """
    m = len(targets)
    switches: dict[tuple[int, int, int], bool] = {}
    if m == 2:
        swap = targets == [1, 0]
        switches[(1, 0, 1)] = swap
        switches[(2, 0, 1)] = False
        return switches

    inv = [0] * m
    for i, o in enumerate(targets):
        inv[o] = i
    s_in: list[int | None] = [None] * m
    for start in range(m):
        if s_in[start] is not None:
            continue
        i, side = start, 0
        while True:
            if s_in[i] is not None:
                if s_in[i] != side:
                    raise AssertionError("inconsistent Benes loop coloring")
                break
            s_in[i] = side
            mate = inv[targets[i] ^ 1]  # shares an output pair: opposite subnet
            if s_in[mate] is not None:
                if s_in[mate] != 1 - side:
                    raise AssertionError("inconsistent Benes loop coloring")
                break
            s_in[mate] = 1 - side
            i = mate ^ 1  # its input partner continues on `side`

    s_out = [0] * m
    for i, o in enumerate(targets):
        s_out[o] = s_in[i]

    sub_targets = [[0] * (m // 2), [0] * (m // 2)]
    for i, o in enumerate(targets):
        sub_targets[s_in[i]][i // 2] = o // 2

    depth = 2 * (m.bit_length() - 1)
    for j in range(m // 2):
        switches[(1, 2 * j, 2 * j + 1)] = s_in[2 * j] == 1
        switches[(depth, 2 * j, 2 * j + 1)] = s_out[2 * j] == 1
    for parity in (0, 1):
        for (layer, a, b), swap in _benes(sub_targets[parity]).items():
            switches[(layer + 1, 2 * a + parity, 2 * b + parity)] = swap
    return switches


def route_permutation(perm: Permutation) -> Circuit:
    """Realize ``perm`` in BB* using only swap/identity gates.

    The returned circuit sits on ``build_kaleidoscope(M, 1)`` and its unitary
    equals ``perm.matrix`` exactly (every entry 0 or 1).
    """
    m = perm.size
    if m < 2 or m & (m - 1):
        raise ValueError(f"routing needs a power-of-two mode count, got {m}")
    arch = build_kaleidoscope(m, 1)
    switches = _benes([d - 1 for d in perm.image])
    gates = []
    for layer in arch.layers:
        for p in layer:
            swap = switches[(p.layer, p.mode_a - 1, p.mode_b - 1)]
            gates.append(SWAP_2 if swap else IDENTITY_2)
    return Circuit(arch, tuple(gates))


def sample_permutation_circuit(
    m: int, rng: RngHandle | np.random.Generator
) -> tuple[Permutation, Circuit]:
    """Uniform permutation (Fisher-Yates) together with its routed BB* circuit."""
    perm = random_permutation(m, rng)
    return perm, route_permutation(perm)


# ---------------------------------------------------------------------------
# Grid circuits and their embedding into a single butterfly.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """A single-parallel d-dimensional grid circuit on ``prod(shape)`` modes.

    ``shape`` lists per-axis extents (each a power of two); axis 0 varies
    fastest in the mode index.  ``gates`` maps ``(axis, lower_corner)`` to the
    2x2 unitary on the nearest-neighbor edge from ``lower_corner`` to the next
    site along ``axis``; every edge must be present.  Within each axis, edges
    are applied level by level in dyadic order (odd positions first), axes in
    ascending order, which makes each level a genuinely parallel layer.
    """

    shape: tuple[int, ...]
    gates: dict[tuple[int, tuple[int, ...]], np.ndarray]

    def __post_init__(self) -> None:
        for size in self.shape:
            if size < 2 or size & (size - 1):
                raise ValueError(f"grid extents must be powers of two >= 2, got {self.shape}")
        missing = [key for key in self.edges() if key not in self.gates]
        extra = [key for key in self.gates if key not in set(self.edges())]
        if missing or extra:
            raise ValueError(f"gate map mismatch: missing {missing[:3]}, extra {extra[:3]}")

    @property
    def modes(self) -> int:
        out = 1
        for size in self.shape:
            out *= size
        return out

    def edges(self) -> list[tuple[int, tuple[int, ...]]]:
        keys = []
        for axis, size in enumerate(self.shape):
            others = [range(1, s + 1) for a, s in enumerate(self.shape) if a != axis]
            for s in range(1, size):
                for rest in itertools.product(*others):
                    coord = list(rest)
                    coord.insert(axis, s)
                    keys.append((axis, tuple(coord)))
        return keys

    def mode_of(self, coord: tuple[int, ...]) -> int:
        index, stride = 1, 1
        for x, size in zip(coord, self.shape):
            index += (x - 1) * stride
            stride *= size
        return index


def _dyadic_level(s: int) -> int:
    """1-based level of chain edge s: odd s is level 1, s = odd*2^(l-1) is level l."""
    return (s & -s).bit_length()


def _grid_schedule(spec: GridSpec) -> list[list[tuple[int, int, np.ndarray]]]:
    """Parallel layers as (mode_a, mode_b, gate) triples, in application order."""
    layers: list[list[tuple[int, int, np.ndarray]]] = []
    for axis, size in enumerate(spec.shape):
        n_axis = size.bit_length() - 1
        by_level: list[list[tuple[int, int, np.ndarray]]] = [[] for _ in range(n_axis)]
        for s in range(1, size):
            level = _dyadic_level(s)
            others = [range(1, sz + 1) for a, sz in enumerate(spec.shape) if a != axis]
            for rest in itertools.product(*others):
                lo = list(rest)
                lo.insert(axis, s)
                hi = list(lo)
                hi[axis] = s + 1
                gate = spec.gates[(axis, tuple(lo))]
                by_level[level - 1].append((spec.mode_of(tuple(lo)), spec.mode_of(tuple(hi)), gate))
        layers.extend(by_level)
    return layers


def grid_circuit_unitary(spec: GridSpec) -> np.ndarray:
    """Dense unitary of the grid circuit (the embedding target)."""
    m = spec.modes
    u = np.eye(m, dtype=np.complex128)
    for layer in _grid_schedule(spec):
        for a, b, gate in layer:
            rows = u[[a - 1, b - 1], :]
            u[[a - 1, b - 1], :] = gate @ rows
    return u


def _grid_relabeling(spec: GridSpec) -> Permutation:
    """Sequential ascending-to-descending block reversals, axes then layers ascending."""
    m = spec.modes
    pi = list(range(m + 1))  # pi[x] = current label of original mode x, 1-based
    n = m.bit_length() - 1
    nu = 0
    for size in spec.shape:
        n_axis = size.bit_length() - 1
        stride = 1 << nu
        for level in range(nu + 2, nu + n_axis + 1):
            step = list(range(m + 1))
            for j in range(1, 2 ** (n - level) + 1):
                base = 2**level * (j - 1)
                for k in range(1, 2 ** (level - 1 - nu) + 1):
                    for off in range(1, stride + 1):
                        src = base + 2 ** (level - 1) + (k - 1) * stride + off
                        dst = base + 2**level - k * stride + off
                        step[src] = dst
            pi = [step[x] for x in pi]
        nu += n_axis
    return Permutation(tuple(pi[1:]))


def embed_grid(spec: GridSpec) -> tuple[Permutation, Circuit]:
    """Relabeling P and butterfly circuit C' with grid = P * U(C') * P^T.

    The grid's parallel layers land on the butterfly's layers one-to-one; a
    gate whose endpoints come out reversed under the relabeling is conjugated
    by a swap so the identity holds exactly as stated.
    """
    m = spec.modes
    arch = build_butterfly(m)
    perm = _grid_relabeling(spec)
    inverse = perm.inverse()
    placement_index = {
        (p.layer, p.mode_a, p.mode_b): idx for idx, p in enumerate(arch.placements)
    }
    gates: list[np.ndarray] = [IDENTITY_2] * arch.gate_count
    schedule = _grid_schedule(spec)
    if len(schedule) != arch.depth:
        raise DimensionError(f"grid depth {len(schedule)} != butterfly depth {arch.depth}")
    for layer_idx, layer in enumerate(schedule, start=1):
        for a, b, gate in layer:
            ra, rb = inverse(a), inverse(b)
            lo, hi = min(ra, rb), max(ra, rb)
            key = (layer_idx, lo, hi)
            if key not in placement_index:
                raise AssertionError(f"relabeled edge {key} is not a butterfly placement")
            bound = gate if ra < rb else SWAP_2 @ gate @ SWAP_2
            gates[placement_index[key]] = np.asarray(bound, dtype=np.complex128)
    return perm, Circuit(arch, tuple(gates))


def embed_grid_1d(chain_gates) -> tuple[Permutation, Circuit]:
    """Chain special case: gate ``i`` couples modes ``i+1`` and ``i+2``."""
    m = len(chain_gates) + 1
    spec = GridSpec(
        shape=(m,),
        gates={(0, (s,)): np.asarray(g, dtype=np.complex128) for s, g in enumerate(chain_gates, 1)},
    )
    return embed_grid(spec)


def verify_embedding(c_target: np.ndarray, perm: Permutation, circuit: Circuit) -> float:
    """Max-abs residual of ``c_target - P U(C') P^T``."""
    c_target = np.asarray(c_target, dtype=np.complex128)
    if c_target.shape != (perm.size, perm.size) or circuit.arch.modes != perm.size:
        raise DimensionError("target, permutation and circuit dimensions disagree")
    p = perm.matrix
    return max_abs(c_target - p @ circuit_unitary(circuit) @ p.T)
