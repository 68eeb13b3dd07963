#!/usr/bin/env python3
"""
Tests for correlation arrays: validation, marginals, no-signaling, CHSH and relabelings
"""

import random
from fractions import Fraction

import pytest

from bananaworld.correlation_core import (FLOAT, RATIONAL, CorrelationArray, Outcome, Relabeling,
                                          all_relabelings, apply_relabeling, chsh, chsh_max,
                                          chsh_values, expectation, marginals, mix,
                                          no_signaling_check, product_form_check,
                                          relabeling_orbit, table, uniform_array, validate,
                                          variant_relabeling)
from bananaworld.errors import InvalidArrayError, RepresentationError


class TestConstruction:
    """CorrelationArray construction and the reference tables"""

    def test_reference_tables_are_valid(self, tables):
        for array in tables.values():
            assert validate(array) == []
            assert array.representation == RATIONAL

    def test_entry_access_matches_rule(self, tables):
        assert tables[1].p(0, 0, 0, 0) == Fraction(1, 2)
        assert tables[1].p(0, 1, 1, 1) == Fraction(1, 2)
        assert tables[1].p(0, 0, 1, 1) == 0
        assert tables[3][(1, 0, 0, 1)] == 1

    def test_wrong_entry_count_rejected(self):
        with pytest.raises(InvalidArrayError):
            CorrelationArray([Fraction(1, 4)] * 15)

    def test_float_in_rational_array_rejected(self):
        values = [Fraction(1, 4)] * 15 + [0.25]
        with pytest.raises(RepresentationError):
            CorrelationArray(values, representation=RATIONAL)

    def test_mix_rejects_mixed_representations(self, tables):
        with pytest.raises(RepresentationError):
            mix([tables[1], tables[2].to_float()], [0.5, 0.5])

    def test_mix_of_tables(self, tables):
        mixed = mix([tables[1], tables[4]], [Fraction(1, 2), Fraction(1, 2)])
        assert mixed == uniform_array()

    def test_equality_and_hash(self, tables):
        assert table(1) == tables[1]
        assert hash(table(1)) == hash(tables[1])
        assert tables[1] != tables[1].to_float()
        assert tables[1].allclose(tables[1].to_float(), 1e-12)

    def test_signed_outcomes(self):
        assert Outcome.ORDINARY.signed == -1
        assert Outcome.INTENSE.signed == 1
        assert Outcome.from_signed(1) is Outcome.INTENSE


class TestValidation:

    def test_range_violation_reported(self):
        values = [Fraction(1, 4)] * 16
        values[0] = Fraction(-1, 4)
        values[1] = Fraction(3, 4)
        violations = validate(CorrelationArray(values))
        kinds = {v.kind for v in violations}
        assert "range" in kinds
        assert any(v.location == (0, 0, 0, 0) for v in violations)

    def test_normalization_violation_reported(self):
        values = [Fraction(1, 4)] * 16
        values[15] = Fraction(1, 2)
        violations = validate(CorrelationArray(values))
        assert [v.kind for v in violations] == ["normalization"]
        assert violations[0].location == (1, 1)
        assert violations[0].magnitude == Fraction(1, 4)

    def test_float_tolerance(self):
        values = [0.25] * 16
        values[0] += 1e-12
        array = CorrelationArray(values, representation=FLOAT)
        assert validate(array) == []
        assert validate(array, 1e-15) != []

    def test_all_zero_array_breaks_every_context(self):
        violations = validate(CorrelationArray([Fraction(0)] * 16))
        assert len(violations) == 4
        assert {v.kind for v in violations} == {"normalization"}
        assert {v.location for v in violations} == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_single_raised_entry(self, tables):
        entries = tables[1].entries()
        entries[(0, 0, 0, 0)] = Fraction(3, 5)
        violations = validate(CorrelationArray(entries))
        assert len(violations) == 1
        assert violations[0].location == (0, 0)
        assert violations[0].magnitude == Fraction(1, 10)

    def test_invalid_array_raises_in_functionals(self):
        values = [Fraction(1, 4)] * 16
        values[15] = Fraction(1, 2)
        with pytest.raises(InvalidArrayError) as info:
            chsh(CorrelationArray(values))
        assert info.value.to_dict()["violations"]


class TestMarginalsAndSignaling:

    def test_epr_marginals_are_uniform(self, tables):
        m = marginals(tables[1])
        assert set(m.alice.values()) == {Fraction(1, 2)}
        assert set(m.bob.values()) == {Fraction(1, 2)}

    @pytest.mark.parametrize("number,expected", [(1, True), (2, True), (3, False), (4, True)])
    def test_no_signaling(self, tables, number, expected):
        assert no_signaling_check(tables[number]).passes is expected

    def test_signaling_residual_of_table_three(self, tables):
        report = no_signaling_check(tables[3])
        assert report.max_residual == 1

    def test_expectations_of_epr(self, tables):
        assert expectation(tables[1], 0, 0) == 1
        assert expectation(tables[1], 1, 1) == -1

    def test_deterministic_marginals_of_table_two(self, tables):
        m = marginals(tables[2])
        for x in (0, 1):
            for y in (0, 1):
                assert m.alice_p(0, x, y) == 1
                assert m.bob_p(0, x, y) == 1
                assert m.alice_p(1, x, y) == 0

    def test_signaling_marginals_of_table_three(self, tables):
        # Alice's taste follows Bob's peeling and vice versa
        m = marginals(tables[3])
        for x in (0, 1):
            for y in (0, 1):
                assert m.alice_p(y, x, y) == 1
                assert m.bob_p(x, x, y) == 1
        assert m.alice_p(1, 0, 0) != m.alice_p(1, 0, 1)

    def test_expectation_identity(self, tables):
        for array in tables.values():
            for x in (0, 1):
                for y in (0, 1):
                    same = array.p(0, 0, x, y) + array.p(1, 1, x, y)
                    assert expectation(array, x, y) == 2 * same - 1

    def test_uniform_expectations_vanish(self):
        for x in (0, 1):
            for y in (0, 1):
                assert expectation(uniform_array(), x, y) == 0

    def test_random_mixtures_stay_no_signaling(self, tables, local_vertex_arrays):
        rng = random.Random(7)
        pool = local_vertex_arrays + [tables[1], tables[4]]
        for _ in range(200):
            chosen = rng.sample(pool, rng.randint(1, 5))
            raw = [rng.randint(1, 9) for _ in chosen]
            weights = [Fraction(r, sum(raw)) for r in raw]
            assert no_signaling_check(mix(chosen, weights)).passes

    def test_product_form(self, tables):
        assert all(product_form_check(tables[2]).values())
        assert not any(product_form_check(tables[1]).values())


class TestChsh:

    def test_epr_reaches_four(self, tables):
        assert chsh(tables[1], 0) == 4
        assert chsh_max(tables[1]) == (4, 0)

    def test_relabeled_epr_uses_variant_four(self, tables):
        assert chsh(tables[4], 0) == -4
        assert chsh_max(tables[4]) == (4, 4)

    def test_deterministic_tables(self, tables):
        assert chsh(tables[2], 0) == 2
        assert chsh(tables[3], 0) == -2
        assert chsh_max(tables[3])[0] == 2

    def test_values_are_symmetric(self, tables):
        values = chsh_values(tables[1])
        assert len(values) == 8
        for v in range(4):
            assert values[v] == -values[v + 4]

    def test_variant_out_of_range(self, tables):
        with pytest.raises(ValueError):
            chsh(tables[1], 8)


class TestRelabelings:

    def test_group_size(self):
        relabelings = all_relabelings()
        assert len(relabelings) == 64
        assert relabelings[0].is_identity()

    def test_identity_is_noop(self, tables):
        assert apply_relabeling(tables[3], Relabeling()) == tables[3]

    @pytest.mark.parametrize("variant", range(8))
    def test_variant_relabeling_moves_variant_to_zero(self, tables, variant):
        skewed = mix([tables[1], tables[3], tables[2]],
                     [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)])
        for array in (tables[1], tables[4], skewed):
            moved = apply_relabeling(array, variant_relabeling(variant))
            assert chsh(moved, 0) == chsh(array, variant)

    def test_orbit_of_deterministic_local_vertex(self, tables, local_vertex_arrays):
        orbit = relabeling_orbit(tables[2])
        assert len(orbit) == 16
        assert set(orbit) == set(local_vertex_arrays)

    def test_orbit_of_epr_is_the_pr_boxes(self, tables):
        orbit = relabeling_orbit(tables[1])
        assert len(orbit) == 8
        assert tables[4] in orbit
        for array in orbit:
            assert chsh_max(array)[0] == 4
