"""Unit tests for the density-matrix simulator and noise model."""
import math

import numpy as np
import pytest

from peepopt.circuits import Circuit, cx, rx, u3, unitary_of
from peepopt.noise import (
    DimensionError,
    NoiseModel,
    block_fidelity_score,
    counts_to_distribution,
    frobenius_distance,
    measure_distribution,
    sample_counts,
    simulate_density,
)
from conftest import random_circuit

PI = math.pi


class TestNoiseModel:
    def test_probability_validation(self):
        with pytest.raises(ValueError):
            NoiseModel(p1=-0.1)
        with pytest.raises(ValueError):
            NoiseModel(p2=1.5)
        with pytest.raises(ValueError):
            NoiseModel(readout=(0.1, 2.0))

    def test_gate_prob_by_arity(self):
        noise = NoiseModel(p1=0.001, p2=0.01)
        assert noise.gate_prob((0,)) == 0.001
        assert noise.gate_prob((0, 1)) == 0.01

    def test_override_takes_max(self):
        noise = NoiseModel(p1=0.001, p2=0.01, overrides={1: (0.005, 0.002)})
        assert noise.gate_prob((1,)) == 0.005
        assert noise.gate_prob((0, 1)) == 0.01  # base p2 is larger

    def test_dict_round_trip(self):
        noise = NoiseModel(p1=0.001, p2=0.01, readout=(0.02, 0.03),
                           overrides={2: (0.004, 0.05)})
        assert NoiseModel.from_dict(noise.to_dict()) == noise

    def test_without_readout(self):
        noise = NoiseModel(p1=0.1, readout=(0.2,))
        assert noise.without_readout().readout is None


class TestSimulateDensity:
    def test_empty_circuit(self):
        rho = simulate_density(Circuit(2), NoiseModel.zero())
        expected = np.zeros((4, 4))
        expected[0, 0] = 1
        assert np.allclose(rho, expected)

    def test_depolarized_x_gate(self):
        # X|0> = |1>, then (1-p)|1><1| + p I/2 with p = 0.1.
        circ = Circuit(1, (u3(PI, 0.0, PI, 0),))
        rho = simulate_density(circ, NoiseModel(p1=0.1))
        assert np.allclose(rho, np.diag([0.05, 0.95]), atol=1e-12)

    def test_noiseless_matches_statevector(self):
        rng = np.random.default_rng(21)
        circ = random_circuit(rng, 3, 15)
        rho = simulate_density(circ, NoiseModel.zero())
        psi = unitary_of(circ)[:, 0]
        assert np.allclose(rho, np.outer(psi, psi.conj()), atol=1e-10)

    def test_two_qubit_depolarizing_channel(self):
        # One CX under p2: (1-p) |00><00| + p I/4 (CX fixes |00>).
        circ = Circuit(2, (cx(0, 1),))
        rho = simulate_density(circ, NoiseModel(p2=0.2))
        expected = 0.8 * np.diag([1.0, 0, 0, 0]) + 0.2 * np.eye(4) / 4
        assert np.allclose(rho, expected, atol=1e-12)

    def test_partial_trace_targets_gate_qubits(self):
        # X on qubit 1 of 2 with p1 noise: qubit 0 stays pure |0>.
        circ = Circuit(2, (u3(PI, 0.0, PI, 1),))
        rho = simulate_density(circ, NoiseModel(p1=0.1))
        # |q1 q0>: (1-p)|10><10| + p (I/2 on q1) (x) |0><0| on q0.
        assert np.allclose(np.diag(rho), [0.05, 0.0, 0.95, 0.0], atol=1e-12)

    def test_trace_and_psd_preserved(self):
        rng = np.random.default_rng(22)
        circ = random_circuit(rng, 3, 20)
        rho = simulate_density(circ, NoiseModel(p1=0.01, p2=0.05))
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-10

    def test_dimension_limit(self):
        with pytest.raises(DimensionError):
            simulate_density(Circuit(13), NoiseModel.zero())


class TestMeasureDistribution:
    def test_ground_state(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        assert np.allclose(measure_distribution(rho), [1, 0])

    def test_maximally_mixed(self):
        assert np.allclose(measure_distribution(np.eye(2) / 2), [0.5, 0.5])

    def test_readout_flip(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        assert np.allclose(measure_distribution(rho, (0.1,)), [0.9, 0.1])

    def test_readout_acts_per_qubit(self):
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 1.0
        dist = measure_distribution(rho, (0.1, 0.2))
        # Independent flips: index bit 0 is qubit 0.
        assert dist == pytest.approx([0.9 * 0.8, 0.1 * 0.8, 0.9 * 0.2, 0.1 * 0.2])


class TestSampling:
    def test_deterministic_point_mass(self):
        assert sample_counts(np.array([1.0, 0.0]), 1024, 0) == {"0": 1024}

    def test_total_and_determinism(self):
        dist = np.array([0.5, 0.5])
        counts = sample_counts(dist, 8192, 7)
        assert sum(counts.values()) == 8192
        assert abs(counts["0"] - 4096) < 300  # 6 sigma binomial bound
        assert sample_counts(dist, 8192, 7) == counts

    def test_bitstring_orientation(self):
        # Index 1 = qubit 0 set; the key shows qubit n-1 first.
        dist = np.array([0.0, 1.0, 0.0, 0.0])
        assert sample_counts(dist, 10, 0) == {"01": 10}

    def test_counts_round_trip(self):
        dist = np.array([0.25, 0.5, 0.125, 0.125])
        counts = sample_counts(dist, 4096, 3)
        back = counts_to_distribution(counts, 2)
        assert np.abs(back - dist).max() < 0.05

    def test_empty_counts_rejected(self):
        with pytest.raises(ValueError):
            counts_to_distribution({}, 1)


class TestScores:
    def test_frobenius_worked_value(self):
        a = np.diag([1.0, 0.0]).astype(complex)
        b = np.diag([0.5, 0.5]).astype(complex)
        assert frobenius_distance(a, b) == pytest.approx(math.sqrt(0.5), abs=1e-12)
        assert frobenius_distance(b, a) == frobenius_distance(a, b)

    def test_frobenius_dim_mismatch(self):
        with pytest.raises(DimensionError):
            frobenius_distance(np.eye(2), np.eye(4))

    def test_score_zero_for_identical_noiseless(self):
        circ = Circuit(1, (rx(0.4, 0),))
        assert block_fidelity_score(circ, circ, NoiseModel.zero()) == pytest.approx(0.0)

    def test_score_orthogonal_states(self):
        x_circ = Circuit(1, (u3(PI, 0.0, PI, 0),))
        ident = Circuit(1)
        score = block_fidelity_score(ident, x_circ, NoiseModel.zero())
        assert score == pytest.approx(math.sqrt(2.0), abs=1e-10)

    def test_noise_displaces_exact_candidate(self):
        circ = Circuit(1, (rx(0.4, 0),))
        assert block_fidelity_score(circ, circ, NoiseModel(p1=0.01)) > 0

    def test_readout_ignored_by_score(self):
        circ = Circuit(1, (rx(0.4, 0),))
        with_readout = NoiseModel(p1=0.01, readout=(0.3,))
        without = NoiseModel(p1=0.01)
        assert block_fidelity_score(circ, circ, with_readout) == pytest.approx(
            block_fidelity_score(circ, circ, without), abs=1e-15
        )
