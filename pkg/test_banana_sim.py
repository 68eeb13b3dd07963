#!/usr/bin/env python3
"""
Tests for the seeded banana simulations and the inference demonstrations
"""

import itertools
from fractions import Fraction

import pytest

from bananaworld.banana_sim import (EprPairSource, KlyachkoBunch, LhvSource, PureBananaState,
                                    PureProductSource, RandomSource, empirical_array,
                                    epr_counterfactual_assignments, estimate_klyachko_sum,
                                    infer_peeling_from_clone, klyachko_banana_value,
                                    lhv_model_from_vertices, peel_epr, peel_klyachko, peel_pure,
                                    sample_lhv, sub_seed)
from bananaworld.correlation_core import (Outcome, Setting, chsh, chsh_max, marginals,
                                          no_signaling_check, product_form_check, table,
                                          uniform_array)
from bananaworld.errors import (BunchStateError, InedibleBunchError, InvalidModelError,
                                SamplingError)
from bananaworld.polytopes import DeterministicVertex, LhvModel, enumerate_deterministic, membership

TRIALS = 100000
SEED = 20121


@pytest.fixture(scope="module")
def epr_run():
    return empirical_array(EprPairSource(), TRIALS, SEED)


@pytest.fixture(scope="module")
def uniform_lhv_run():
    model = LhvModel.uniform(enumerate_deterministic("local"))
    return empirical_array(LhvSource(model), TRIALS, SEED)


class TestRandomSource:

    def test_same_seed_same_stream(self):
        a, b = RandomSource(42), RandomSource(42)
        assert list(a.bits(100)) == list(b.bits(100))

    @pytest.mark.parametrize("seed", [-1, 2 ** 64, 1.5, "7", True])
    def test_invalid_seed(self, seed):
        with pytest.raises(SamplingError):
            RandomSource(seed)

    def test_sub_seeds_differ_per_context_and_block(self):
        seeds = {sub_seed(SEED, x, y, block) for x in (0, 1) for y in (0, 1) for block in range(3)}
        assert len(seeds) == 12


class TestPureBananas:

    def setup_method(self):
        self.rng = RandomSource(1)

    @pytest.mark.parametrize("state,peeling,taste", [
        (PureBananaState.Y0, Setting.Y, Outcome.ORDINARY),
        (PureBananaState.Y1, Setting.Y, Outcome.INTENSE),
        (PureBananaState.B0, Setting.B, Outcome.ORDINARY),
        (PureBananaState.B1, Setting.B, Outcome.INTENSE),
    ])
    def test_matching_peel_is_deterministic(self, state, peeling, taste):
        assert all(peel_pure(state, peeling, self.rng) == taste for _ in range(200))

    def test_mismatched_peel_is_a_fair_coin(self):
        intense = sum(int(peel_pure(PureBananaState.Y0, Setting.B, self.rng)) for _ in range(TRIALS))
        assert intense / TRIALS == pytest.approx(0.5, abs=0.01)

    def test_product_source_has_product_form(self):
        source = PureProductSource(PureBananaState.Y0, PureBananaState.Y0)
        run = empirical_array(source, 20000, SEED)
        assert all(product_form_check(run.array, 0.02).values())


class TestEprPairs:

    def test_single_draws_follow_the_rule(self):
        rng = RandomSource(3)
        for x, y in itertools.product(Setting, Setting):
            for _ in range(50):
                a, b = peel_epr(x, y, rng)
                assert int(a) ^ int(b) == int(x) & int(y)

    def test_empirical_array_close_to_table_one(self, epr_run):
        assert epr_run.array.allclose(table(1), 0.01)

    def test_only_matching_tastes_for_yy(self, epr_run):
        assert epr_run.counts[(0, 1, 0, 0)] == 0
        assert epr_run.counts[(1, 0, 0, 0)] == 0
        assert epr_run.counts[(0, 0, 1, 1)] == 0
        assert epr_run.counts[(1, 1, 1, 1)] == 0

    def test_statistical_no_signaling(self, epr_run):
        assert no_signaling_check(epr_run.array, 1.0).max_residual <= 0.02
        m = marginals(epr_run.array)
        for value in list(m.alice.values()) + list(m.bob.values()):
            assert value == pytest.approx(0.5, abs=0.01)

    def test_empirical_chsh(self, epr_run):
        value = chsh(epr_run.array, 0)
        assert 3.95 <= value <= 4.0 + 1e-9

    def test_counts_sum_per_context(self, epr_run):
        for x, y in itertools.product((0, 1), repeat=2):
            total = sum(epr_run.counts[(a, b, x, y)] for a in (0, 1) for b in (0, 1))
            assert total == TRIALS

    def test_same_seed_same_counts(self):
        first = empirical_array(EprPairSource(), 25000, 99, block_size=4000, max_workers=1)
        second = empirical_array(EprPairSource(), 25000, 99, block_size=4000, max_workers=4)
        assert first.counts == second.counts

    def test_different_seed_different_counts(self):
        first = empirical_array(EprPairSource(), 5000, 1)
        second = empirical_array(EprPairSource(), 5000, 2)
        assert first.counts != second.counts

    def test_zero_trials(self):
        with pytest.raises(SamplingError):
            empirical_array(EprPairSource(), 0, SEED)

    def test_rational_view_and_json(self):
        run = empirical_array(EprPairSource(), 1000, 5)
        exact = run.to_rational()
        assert exact.p(0, 0, 0, 0) == Fraction(run.counts[(0, 0, 0, 0)], 1000)
        payload = run.to_dict()
        assert payload["seed"] == 5
        assert payload["trials"] == 1000
        assert len(payload["counts"]) == 16
        assert len(payload["entries"]) == 16


class TestKlyachkoBunches:

    def setup_method(self):
        self.rng = RandomSource(8)

    @pytest.mark.parametrize("i,j", [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 0)])
    def test_adjacent_pairs_taste_different(self, i, j):
        for _ in range(100):
            bunch = KlyachkoBunch()
            outcome = peel_klyachko(bunch, i, j, self.rng)
            assert tuple(int(t) for t in outcome) in {(0, 1), (1, 0)}
            assert not bunch.edible
            assert bunch.peeled == {i, j}

    @pytest.mark.parametrize("i,j", [(0, 2), (0, 3), (1, 3), (2, 4), (1, 4), (2, 2)])
    def test_non_adjacent_pairs_are_inedible(self, i, j):
        bunch = KlyachkoBunch()
        with pytest.raises(InedibleBunchError):
            peel_klyachko(bunch, i, j, self.rng)
        assert not bunch.edible

    def test_second_peel_is_a_state_error(self):
        bunch = KlyachkoBunch()
        peel_klyachko(bunch, 0, 1, self.rng)
        with pytest.raises(BunchStateError):
            peel_klyachko(bunch, 2, 3, self.rng)

    def test_monte_carlo_sum(self):
        estimate = estimate_klyachko_sum(TRIALS, SEED)
        assert estimate.total == pytest.approx(2.5, abs=0.02)
        for p in estimate.per_banana:
            assert p == pytest.approx(0.5, abs=0.01)

    def test_exact_value(self):
        assert klyachko_banana_value() == Fraction(5, 2)


class TestLhvSampling:

    def test_point_mass_always_ordinary(self):
        model = LhvModel.point_mass(DeterministicVertex.from_index(0))
        rng = RandomSource(4)
        for x, y in itertools.product(Setting, Setting):
            for _ in range(20):
                assert sample_lhv(model, x, y, rng) == (Outcome.ORDINARY, Outcome.ORDINARY)

    def test_uniform_model_respects_chsh(self, uniform_lhv_run):
        assert chsh_max(uniform_lhv_run.array)[0] <= 2.05

    def test_empirical_no_signaling(self, uniform_lhv_run):
        assert no_signaling_check(uniform_lhv_run.array, 1.0).max_residual <= 0.02

    def test_empirical_array_accepted_by_membership(self, uniform_lhv_run):
        result = membership(uniform_lhv_run.array, "local", tolerance=0.05)
        assert result.is_in

    def test_deterministic_vertex_model_is_exact(self):
        model = lhv_model_from_vertices([0])
        run = empirical_array(LhvSource(model), 500, 3)
        assert run.to_rational() == table(2)

    def test_mixed_component_model(self):
        model = LhvModel(((table(1), Fraction(1, 2)), (table(4), Fraction(1, 2))))
        run = empirical_array(LhvSource(model), 40000, 12)
        assert run.array.allclose(uniform_array("float"), 0.02)

    def test_source_rejects_non_models(self):
        with pytest.raises(InvalidModelError):
            LhvSource(table(1))


class TestInference:

    @pytest.mark.parametrize("j,k,expected", [
        (0, 0, Setting.Y), (0, 1, Setting.B), (1, 0, Setting.B), (1, 1, Setting.Y),
    ])
    def test_infer_peeling_from_clone(self, j, k, expected):
        assert infer_peeling_from_clone(Outcome(j), Outcome(k)) == expected

    def test_counterfactual_examples(self):
        assert epr_counterfactual_assignments(Setting.Y, Outcome.ORDINARY) == {(0, 0)}
        assert epr_counterfactual_assignments(Setting.B, Outcome.ORDINARY) == {(0, 1)}

    def test_counterfactuals_exhaustive(self):
        for x, a in itertools.product(Setting, Outcome):
            assignments = epr_counterfactual_assignments(x, a)
            assert len(assignments) == 1
            (j, k), = assignments
            assert (j == k) == (x == Setting.Y)
            assert infer_peeling_from_clone(j, k) == x
