import math

import numpy as np
import pytest

from bosonlab.architecture import Circuit, build_kaleidoscope, circuit_unitary
from bosonlab.cayley import LossModel
from bosonlab.linalg import RngHandle, haar_unitary
from bosonlab.loss import (
    lossy_outcome_probability,
    lossy_sample,
    lossy_trajectories,
    no_loss_probability,
)
from bosonlab.probability import full_distribution
from bosonlab.sampling import first_modes_input
from statutil import chi_square_pvalue, empirical_counts


def make_circuit(modes=4, q=1, seed=90):
    gen = RngHandle(seed).generator()
    arch = build_kaleidoscope(modes, q)
    return Circuit(arch, tuple(haar_unitary(2, gen) for _ in range(arch.gate_count)))


def test_no_loss_probability_values():
    assert no_loss_probability(LossModel.uniform(0.0, 5)) == 1.0
    assert no_loss_probability(LossModel.uniform(0.1, 8)) == pytest.approx(0.9**8)
    # A rate of exactly 1 is outside the model; just below it crushes the product.
    assert no_loss_probability(LossModel((0.999999,))) == pytest.approx(1e-6, rel=1e-3)


def test_lossy_outcome_probability_factorizes():
    circuit = make_circuit()
    u = circuit_unitary(circuit)
    t = first_modes_input(4, 2)
    loss = LossModel.for_circuit(circuit, 0.1)
    for s in ((1, 1, 0, 0), (0, 0, 1, 1), (2, 0, 0, 0)):
        from bosonlab.probability import output_probability

        expected = output_probability(u, s, t) * 0.9**16
        assert lossy_outcome_probability(u, s, t, loss) == pytest.approx(expected, rel=1e-12)


def test_lossy_outcome_probability_rejects_subsector():
    circuit = make_circuit()
    u = circuit_unitary(circuit)
    loss = LossModel.for_circuit(circuit, 0.1)
    with pytest.raises(ValueError):
        lossy_outcome_probability(u, (1, 0, 0, 0), first_modes_input(4, 2), loss)


def test_zero_loss_matches_ideal_distribution():
    circuit = make_circuit(seed=91)
    t = first_modes_input(4, 2)
    loss = LossModel.for_circuit(circuit, 0.0)
    results = lossy_trajectories(circuit, t, loss, RngHandle(92), 20_000)
    assert all(r.no_loss and r.lost_photons == 0 for r in results)
    ideal = full_distribution(circuit_unitary(circuit), t)
    outcomes = list(ideal)
    counts = empirical_counts([r.outcome for r in results], outcomes)
    expected = np.array([ideal[s] * len(results) for s in outcomes])
    assert chi_square_pvalue(counts, expected) > 0.01


def test_conditional_on_no_loss_matches_ideal():
    circuit = make_circuit(seed=93)
    t = first_modes_input(4, 2)
    loss = LossModel.for_circuit(circuit, 0.15)
    results = lossy_trajectories(circuit, t, loss, RngHandle(94), 60_000)
    kept = [r.outcome for r in results if r.no_loss]
    ideal = full_distribution(circuit_unitary(circuit), t)
    outcomes = list(ideal)
    counts = empirical_counts(kept, outcomes)
    expected = np.array([ideal[s] * len(kept) for s in outcomes])
    assert chi_square_pvalue(counts, expected) > 0.01


def test_flag_rate_matches_product():
    circuit = make_circuit(seed=95)
    t = first_modes_input(4, 2)
    loss = LossModel.for_circuit(circuit, 0.15)
    trials = 60_000
    results = lossy_trajectories(circuit, t, loss, RngHandle(96), trials)
    rate = sum(r.no_loss for r in results) / trials
    expected = no_loss_probability(loss)
    sigma = math.sqrt(expected * (1 - expected) / trials)
    assert abs(rate - expected) <= 3 * sigma


def test_joint_outcome_and_no_loss_frequency():
    circuit = make_circuit(seed=97)
    t = first_modes_input(4, 2)
    u = circuit_unitary(circuit)
    loss = LossModel.for_circuit(circuit, 0.15)
    trials = 60_000
    results = lossy_trajectories(circuit, t, loss, RngHandle(98), trials)
    ideal = full_distribution(u, t)
    s_star = max(ideal, key=ideal.get)
    joint = sum(1 for r in results if r.no_loss and r.outcome == s_star) / trials
    predicted = lossy_outcome_probability(u, s_star, t, loss)
    sigma = math.sqrt(predicted * (1 - predicted) / trials)
    assert abs(joint - predicted) <= 3 * sigma


def test_photon_number_never_increases():
    circuit = make_circuit(seed=99)
    t = first_modes_input(4, 2)
    loss = LossModel.for_circuit(circuit, 0.4)
    results = lossy_trajectories(circuit, t, loss, RngHandle(100), 5000)
    assert all(sum(r.outcome) <= 2 for r in results)
    assert all(sum(r.outcome) + r.lost_photons <= 2 for r in results)
    assert any(r.lost_photons > 0 for r in results)


def test_lossy_sample_single_call():
    circuit = make_circuit(seed=101)
    t = first_modes_input(4, 2)
    result = lossy_sample(circuit, t, LossModel.for_circuit(circuit, 0.2), RngHandle(102))
    assert sum(result.outcome) + result.lost_photons == 2


def test_channel_count_must_match_circuit():
    circuit = make_circuit()
    with pytest.raises(ValueError):
        lossy_sample(circuit, first_modes_input(4, 2), LossModel.uniform(0.1, 3), RngHandle(0))


def test_state_space_guard():
    circuit = make_circuit(modes=16, q=1, seed=103)
    t = first_modes_input(16, 11)
    with pytest.raises(ValueError):
        lossy_sample(circuit, t, LossModel.for_circuit(circuit, 0.1), RngHandle(0))
