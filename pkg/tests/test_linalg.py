import numpy as np
import pytest

from bosonlab.linalg import (
    DimensionError,
    Eigen2,
    RngHandle,
    UnitarityError,
    assert_unitary,
    compose,
    eig_unitary2,
    haar_unitary,
    max_abs,
)
from statutil import ks_uniform_phase_pvalue, two_sample_chi_square_pvalue


def test_rng_handle_determinism_and_split():
    a = RngHandle(12345).generator().standard_normal(8)
    b = RngHandle(12345).generator().standard_normal(8)
    assert np.array_equal(a, b)
    child = RngHandle(12345).split(3)
    assert child.seed == 12345 ^ 3
    assert not np.array_equal(a, child.generator().standard_normal(8))


def test_rng_handle_rejects_bad_inputs():
    with pytest.raises(ValueError):
        RngHandle(-1)
    with pytest.raises(ValueError):
        RngHandle(3, algorithm="mt19937")


def test_haar_u1_is_a_phase():
    gen = RngHandle(1).generator()
    for _ in range(100):
        u = haar_unitary(1, gen)
        assert abs(abs(u[0, 0]) - 1.0) < 1e-12


def test_haar_u2_unitary():
    gen = RngHandle(2).generator()
    for _ in range(200):
        u = haar_unitary(2, gen)
        assert max_abs(u.conj().T @ u - np.eye(2)) <= 1e-10


def test_haar_rejects_other_dims():
    with pytest.raises(DimensionError):
        haar_unitary(3, RngHandle(0))


def _one_phase_per_draw(matrices: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """One eigenphase per matrix, coin-picked so any eig ordering bias cancels."""
    phases = np.angle(np.linalg.eigvals(matrices))
    picks = gen.integers(2, size=len(matrices))
    return phases[np.arange(len(matrices)), picks]


def test_haar_eigenphases_uniform():
    gen = RngHandle(7).generator()
    draws = 100_000
    stack = np.stack([haar_unitary(2, gen) for _ in range(draws)])
    assert ks_uniform_phase_pvalue(_one_phase_per_draw(stack, gen)) > 0.01


def test_haar_basis_invariance():
    # Eigenphase histograms of H and VH agree for a fixed V.
    gen = RngHandle(8).generator()
    v = haar_unitary(2, gen)
    draws = 100_000
    stack = np.stack([haar_unitary(2, gen) for _ in range(draws)])
    bins = np.linspace(-np.pi, np.pi, 21)
    counts_h = np.histogram(_one_phase_per_draw(stack, gen), bins=bins)[0]
    counts_vh = np.histogram(_one_phase_per_draw(v @ stack, gen), bins=bins)[0]
    assert two_sample_chi_square_pvalue(counts_h, counts_vh) > 0.01


def test_eig_identity():
    eig = eig_unitary2(np.eye(2))
    assert eig.phases == (0.0, 0.0)
    assert np.array_equal(eig.basis, np.eye(2))


def test_eig_swap_phases():
    eig = eig_unitary2(np.array([[0, 1], [1, 0]], dtype=complex))
    assert sorted(round(p, 12) for p in eig.phases) == [0.0, round(np.pi, 12)]


def test_eig_reconstruction_seeded():
    gen = RngHandle(9).generator()
    for _ in range(10_000):
        u = haar_unitary(2, gen)
        eig = eig_unitary2(u)
        assert max_abs(eig.reconstruct() - u) < 1e-10
        assert all(-np.pi < p <= np.pi for p in eig.phases)


def test_eig_rejects_non_unitary():
    with pytest.raises(UnitarityError):
        eig_unitary2(np.array([[1, 0], [0, 2]], dtype=complex))


def test_compose_identity_and_unitarity():
    gen = RngHandle(10).generator()
    a = haar_unitary(2, gen)
    assert np.array_equal(compose(a, np.eye(2)), a)
    ab = compose(a, haar_unitary(2, gen))
    assert max_abs(ab.conj().T @ ab - np.eye(2)) < 1e-9


def test_compose_matches_naive_triple_loop():
    gen = RngHandle(11).generator()
    from bosonlab.linalg import _ginibre_qr

    a, b = _ginibre_qr(8, gen), _ginibre_qr(8, gen)
    naive = np.zeros((8, 8), dtype=complex)
    for i in range(8):
        for j in range(8):
            for k in range(8):
                naive[i, j] += a[i, k] * b[k, j]
    assert max_abs(compose(a, b) - naive) < 1e-12


def test_compose_rejects_mismatch():
    with pytest.raises(DimensionError):
        compose(np.eye(2), np.eye(3))


def test_assert_unitary_returns_validated_array():
    u = assert_unitary([[0, 1], [1, 0]])
    assert u.dtype == np.complex128
    with pytest.raises(DimensionError):
        assert_unitary(np.ones((2, 3)))


def test_eigen2_reconstruct_roundtrip_type():
    eig = Eigen2(np.eye(2, dtype=complex), (0.5, -0.5))
    rec = eig.reconstruct()
    assert rec.shape == (2, 2)
    assert abs(rec[0, 0] - np.exp(0.5j)) < 1e-15
