import itertools

import numpy as np
import pytest

from bosonlab.architecture import circuit_unitary
from bosonlab.linalg import RngHandle, haar_unitary
from bosonlab.routing import (
    GridSpec,
    IDENTITY_2,
    Permutation,
    SWAP_2,
    embed_grid,
    embed_grid_1d,
    grid_circuit_unitary,
    random_permutation,
    route_permutation,
    sample_permutation_circuit,
    verify_embedding,
)
from statutil import chi_square_pvalue, empirical_counts


def test_permutation_validation_and_matrix():
    p = Permutation((3, 1, 2))
    assert p.size == 3
    assert p(1) == 3
    assert np.array_equal(p.matrix @ np.array([1, 0, 0]), np.array([0, 0, 1]))
    assert p.inverse().image == (2, 3, 1)
    with pytest.raises(ValueError):
        Permutation((1, 1, 2))


def test_identity_routes_to_all_identity_gates():
    circuit = route_permutation(Permutation.identity(8))
    assert all(np.array_equal(g, IDENTITY_2) for g in circuit.gates)


def test_m2_swap_single_swap_gate():
    circuit = route_permutation(Permutation((2, 1)))
    assert np.array_equal(circuit.gates[0], SWAP_2)
    assert np.array_equal(circuit.gates[1], IDENTITY_2)


@pytest.mark.parametrize("m", [2, 4, 8])
def test_routing_exhaustive_small(m):
    for image in itertools.permutations(range(1, m + 1)):
        perm = Permutation(image)
        circuit = route_permutation(perm)
        assert len(circuit.gates) == m * (m.bit_length() - 1)
        assert all(
            np.array_equal(g, SWAP_2) or np.array_equal(g, IDENTITY_2) for g in circuit.gates
        )
        assert np.array_equal(circuit_unitary(circuit, check=False), perm.matrix)


def test_routing_random_m16_and_m32():
    gen = RngHandle(21).generator()
    for m, reps in ((16, 1000), (32, 100)):
        for _ in range(reps):
            perm = random_permutation(m, gen)
            circuit = route_permutation(perm)
            assert np.array_equal(circuit_unitary(circuit, check=False), perm.matrix)


def test_routing_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        route_permutation(Permutation((2, 3, 1)))


def test_permutation_sampling_uniform_m4():
    gen = RngHandle(22).generator()
    draws = 100_000
    bins = list(itertools.permutations(range(1, 5)))
    samples = [random_permutation(4, gen).image for _ in range(draws)]
    counts = empirical_counts(samples, bins)
    assert chi_square_pvalue(counts, np.full(24, draws / 24)) > 0.01
    # 5-sigma band per cell
    sigma = np.sqrt(draws * (1 / 24) * (23 / 24))
    assert np.all(np.abs(counts - draws / 24) < 5 * sigma)


def test_permutation_sampling_m2_binomial():
    gen = RngHandle(23).generator()
    draws = 10_000
    swaps = sum(random_permutation(2, gen).image == (2, 1) for _ in range(draws))
    assert abs(swaps - draws / 2) < 5 * np.sqrt(draws * 0.25)


def test_sample_permutation_circuit_delegates():
    gen = RngHandle(24).generator()
    for _ in range(50):
        perm, circuit = sample_permutation_circuit(8, gen)
        assert np.array_equal(circuit_unitary(circuit, check=False), perm.matrix)


# ---------------------------------------------------------------------------
# Grid embeddings.
# ---------------------------------------------------------------------------


def chain_spec(gates) -> GridSpec:
    m = len(gates) + 1
    return GridSpec((m,), {(0, (s,)): np.asarray(g) for s, g in enumerate(gates, 1)})


def random_grid_spec(shape, gen) -> GridSpec:
    spec_keys = []
    for axis, size in enumerate(shape):
        others = [range(1, s + 1) for a, s in enumerate(shape) if a != axis]
        for s in range(1, size):
            for rest in itertools.product(*others):
                coord = list(rest)
                coord.insert(axis, s)
                spec_keys.append((axis, tuple(coord)))
    return GridSpec(shape, {key: haar_unitary(2, gen) for key in spec_keys})


def test_embed_m2_chain_is_trivial():
    gate = haar_unitary(2, RngHandle(30))
    perm, circuit = embed_grid_1d([gate])
    assert perm.image == (1, 2)
    assert np.array_equal(circuit.gates[0], gate)


def test_embed_m4_chain_structure_and_identity():
    gen = RngHandle(31).generator()
    gates = [haar_unitary(2, gen) for _ in range(3)]
    perm, circuit = embed_grid_1d(gates)
    # The one nontrivial second-layer placement couples modes 2 and 4 pre-permutation.
    nontrivial = [
        (p.layer, p.mode_a, p.mode_b)
        for p, g in zip(circuit.arch.placements, circuit.gates)
        if not np.array_equal(g, np.eye(2))
    ]
    assert (2, 2, 4) in nontrivial
    target = grid_circuit_unitary(chain_spec(gates))
    assert verify_embedding(target, perm, circuit) <= 1e-10


def test_embed_identity_gates_gives_identity():
    eye_gates = [np.eye(2)] * 7
    perm, circuit = embed_grid_1d(eye_gates)
    p = perm.matrix
    assert np.array_equal(p @ circuit_unitary(circuit) @ p.T, np.eye(8))


def test_embed_grid_d1_equals_chain_entrypoint():
    gen = RngHandle(32).generator()
    gates = [haar_unitary(2, gen) for _ in range(7)]
    perm_a, circuit_a = embed_grid_1d(gates)
    perm_b, circuit_b = embed_grid(chain_spec(gates))
    assert perm_a.image == perm_b.image
    assert all(np.array_equal(x, y) for x, y in zip(circuit_a.gates, circuit_b.gates))


@pytest.mark.parametrize("shape", [(8,), (4, 4), (2, 2, 4), (4, 2, 2), (2, 8)])
def test_embed_grid_identity_random(shape):
    gen = RngHandle(sum(shape)).generator()
    for _ in range(20):
        spec = random_grid_spec(shape, gen)
        perm, circuit = embed_grid(spec)
        assert verify_embedding(grid_circuit_unitary(spec), perm, circuit) <= 1e-10


def test_verify_embedding_detects_perturbation():
    gen = RngHandle(33).generator()
    spec = random_grid_spec((8,), gen)
    perm, circuit = embed_grid(spec)
    target = grid_circuit_unitary(spec)
    assert verify_embedding(target, perm, circuit) <= 1e-10
    # Nudge one gate by a small unitary rotation (entry change ~1e-3).
    eps = 1e-3
    nudge = np.array([[np.cos(eps), np.sin(eps)], [-np.sin(eps), np.cos(eps)]])
    tampered = list(circuit.gates)
    tampered[0] = nudge @ tampered[0]
    broken = verify_embedding(target, perm, circuit.replace_gates(tampered))
    assert broken >= 1e-4


def test_grid_spec_requires_all_edges():
    with pytest.raises(ValueError):
        GridSpec((4,), {(0, (1,)): np.eye(2)})


def test_grid_spec_rejects_bad_shape():
    with pytest.raises(ValueError):
        GridSpec((3,), {})
