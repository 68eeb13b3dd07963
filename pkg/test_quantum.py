#!/usr/bin/env python3
"""
Tests for the quantum generators: Bell states, Born arrays, Tsirelson, Klyachko and PBR
"""

import math

import numpy as np
import pytest

from bananaworld.correlation_core import chsh_max, expectation, no_signaling_check, product_form_check
from bananaworld.errors import QuantumStateError, SamplingError
from bananaworld.quantum import (StateVector, bell_state, binary_measurement, born_array, inner,
                                 klyachko_bound_chain, klyachko_frame, klyachko_sum,
                                 noncontextual_max, north_pole, pbr_basis,
                                 pbr_basis_is_orthonormal, pbr_contradiction, pbr_probabilities,
                                 qubit_state, random_chsh_sweep, random_klyachko_sweep,
                                 random_two_qubit_states, singlet, tensor, tsirelson_grid_search,
                                 tsirelson_settings)

TSIRELSON = 2 * math.sqrt(2)


class TestStates:

    def test_singlet_amplitudes(self):
        h = 1 / math.sqrt(2)
        assert np.allclose(bell_state(1).amplitudes, [0, h, -h, 0], atol=1e-15)

    def test_bell_states_are_orthonormal(self):
        states = [bell_state(k) for k in range(1, 5)]
        for i, u in enumerate(states):
            for j, v in enumerate(states):
                expected = 1.0 if i == j else 0.0
                assert abs(inner(u, v) - expected) <= 1e-12

    @pytest.mark.parametrize("kind", [0, 5, -1])
    def test_bell_kind_out_of_range(self, kind):
        with pytest.raises(QuantumStateError):
            bell_state(kind)

    def test_unnormalized_state_rejected(self):
        with pytest.raises(QuantumStateError):
            StateVector([1.0, 1.0])

    def test_bad_dimension_rejected(self):
        with pytest.raises(QuantumStateError):
            StateVector([1.0, 0, 0, 0, 0])

    def test_tensor_of_qubits(self):
        state = tensor(qubit_state("0"), qubit_state("+"))
        h = 1 / math.sqrt(2)
        assert np.allclose(state.amplitudes, [h, h, 0, 0])

    def test_state_round_trip(self):
        state = bell_state(2)
        restored = StateVector.from_dict(state.to_dict())
        assert np.allclose(restored.amplitudes, state.amplitudes)


class TestMeasurements:

    @pytest.mark.parametrize("angle", [0.0, 0.3, math.pi / 2, -5 * math.pi / 4, 2.9])
    def test_projector_identities(self, angle):
        assert binary_measurement(angle).check()

    def test_tsirelson_settings_reach_the_bound(self):
        alice, bob = tsirelson_settings().measurements()
        array = born_array(singlet(), alice, bob)
        value, variant = chsh_max(array)
        assert value == pytest.approx(TSIRELSON, abs=1e-9)
        assert variant == 0
        assert no_signaling_check(array, 1e-9).passes

    def test_singlet_same_direction_is_anticorrelated(self):
        m = binary_measurement(0.7)
        array = born_array(singlet(), [m, m], [m, m])
        for x in (0, 1):
            for y in (0, 1):
                assert expectation(array, x, y) == pytest.approx(-1.0, abs=1e-12)

    def test_product_state_has_product_form(self):
        state = tensor(qubit_state("0"), qubit_state("0"))
        alice = [binary_measurement(0.4), binary_measurement(1.9)]
        bob = [binary_measurement(-0.8), binary_measurement(2.5)]
        array = born_array(state, alice, bob)
        assert all(product_form_check(array, 1e-9).values())

    def test_born_array_needs_two_qubits(self):
        m = binary_measurement(0.0)
        with pytest.raises(QuantumStateError):
            born_array(qubit_state("0"), [m, m], [m, m])

    def test_random_born_arrays_are_no_signaling(self):
        rng = np.random.default_rng(11)
        for amplitudes in random_two_qubit_states(rng, 200):
            angles = rng.uniform(0, 2 * math.pi, size=4)
            alice = [binary_measurement(angles[0]), binary_measurement(angles[1])]
            bob = [binary_measurement(angles[2]), binary_measurement(angles[3])]
            array = born_array(StateVector(amplitudes), alice, bob)
            assert no_signaling_check(array, 1e-9).passes
            assert chsh_max(array)[0] <= TSIRELSON + 1e-6
            assert min(array.vector()) >= 0.0


class TestTsirelson:

    def test_grid_search_finds_the_bound(self):
        result = tsirelson_grid_search(72)
        assert result.value == pytest.approx(TSIRELSON, abs=1e-9)
        alice = [binary_measurement(t) for t in result.alice]
        bob = [binary_measurement(t) for t in result.bob]
        assert chsh_max(born_array(singlet(), alice, bob))[0] == pytest.approx(TSIRELSON, abs=1e-9)

    def test_random_sweep_never_exceeds_the_bound(self):
        sweep = random_chsh_sweep(10000, seed=2020)
        assert sweep.maximum <= TSIRELSON + 1e-6
        assert sweep.maximum > 2.0

    def test_grid_needs_four_steps(self):
        with pytest.raises(QuantumStateError):
            tsirelson_grid_search(2)

    @pytest.mark.parametrize("sweep", [random_chsh_sweep, random_klyachko_sweep])
    def test_empty_sweep(self, sweep):
        with pytest.raises(SamplingError):
            sweep(0, seed=1)

    def test_sweep_is_reproducible(self):
        assert random_chsh_sweep(500, seed=3).maximum == random_chsh_sweep(500, seed=3).maximum


class TestKlyachko:

    def setup_method(self):
        self.frame = klyachko_frame()

    def test_frame_invariants(self):
        checks = self.frame.check()
        assert all(checks.values()), checks

    def test_geometry_constants(self):
        assert self.frame.r ** 2 == pytest.approx(1 / math.sqrt(5), abs=1e-12)
        assert self.frame.s == pytest.approx(0.74349, abs=1e-5)
        assert abs(float(np.dot(self.frame.vectors[0], self.frame.vectors[1]))) <= 1e-12

    def test_north_pole_sum(self):
        result = klyachko_sum(self.frame, north_pole())
        assert result.total == pytest.approx(math.sqrt(5), abs=1e-9)
        for p in result.probabilities:
            assert p == pytest.approx(1 / math.sqrt(5), abs=1e-12)

    def test_state_along_a_vertex(self):
        psi = StateVector(self.frame.vectors[0])
        probs = klyachko_sum(self.frame, psi).probabilities
        assert probs[0] == pytest.approx(1.0, abs=1e-12)
        assert probs[1] == pytest.approx(0.0, abs=1e-12)
        assert probs[4] == pytest.approx(0.0, abs=1e-12)

    def test_wrong_dimension(self):
        with pytest.raises(QuantumStateError):
            klyachko_sum(self.frame, qubit_state("0"))

    def test_random_states_stay_below_sqrt5(self):
        assert random_klyachko_sweep(1000, seed=5).maximum <= math.sqrt(5) + 1e-6

    def test_noncontextual_bound(self):
        result = noncontextual_max()
        assert result.maximum == 2
        assert len(result.feasible) == 11
        assert (0, 0, 0, 0, 0) in result.feasible
        assert sum(result.witness) == 2

    def test_bound_chain(self):
        chain = klyachko_bound_chain()
        assert chain["classical"] < chain["quantum"] < chain["bananaworld"]
        assert chain["quantum_operator_norm"] == pytest.approx(math.sqrt(5), abs=1e-9)


class TestPbr:

    def test_basis_is_orthonormal(self):
        assert pbr_basis_is_orthonormal(pbr_basis())

    @pytest.mark.parametrize("prep,blocked", [
        (("0", "0"), 0), (("0", "+"), 1), (("+", "0"), 2), (("+", "+"), 3),
    ])
    def test_blocked_outcomes(self, prep, blocked):
        outcome = pbr_probabilities(*prep)
        assert outcome.blocked == blocked
        assert outcome.probabilities[blocked] <= 1e-12
        assert sum(outcome.probabilities) == pytest.approx(1.0, abs=1e-12)

    def test_probabilities_for_zero_zero(self):
        probs = pbr_probabilities("0", "0").probabilities
        assert probs == pytest.approx((0.0, 0.25, 0.25, 0.5), abs=1e-12)

    def test_bad_preparation(self):
        with pytest.raises(QuantumStateError):
            pbr_probabilities("1", "0")

    def test_contradiction(self):
        verdict = pbr_contradiction()
        assert verdict["every_outcome_blocked"]
        assert verdict["normalized"]
