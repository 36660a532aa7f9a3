import unittest
from fractions import Fraction

import pytest
from sympy import divisors as integer_divisors
from sympy import factorint, legendre_symbol

from core.errors import ConfigError, HMFError
from core.ideals import (
    divisors,
    embedding_bounds,
    factor_ideal,
    generator,
    ideal_from_factors,
    ideal_from_json,
    ideal_from_label,
    ideal_norm,
    ideal_to_json,
    ideals_up_to,
    narrow_class_group,
    narrow_class_number,
    points_in_box,
    prime_ideals_up_to,
    primes_above,
    principal_ideal,
    totally_positive_generator,
    unit_ideal,
)
from core.quad_field import QuadraticField, embedding_sign, is_totally_positive


def _kronecker(disc: int, m: int) -> int:
    value = 1
    for p, exponent in factorint(m).items():
        if p == 2:
            local = 0 if disc % 2 == 0 else (1 if disc % 8 in (1, 7) else -1)
        else:
            local = int(legendre_symbol(disc % p, p)) if disc % p else 0
        value *= local**exponent
    return value


def _ideal_count(disc: int, n: int) -> int:
    """Number of integral ideals of norm n, from the Dedekind zeta function."""
    return sum(_kronecker(disc, m) for m in integer_divisors(n))


class TestIdealArithmetic(unittest.TestCase):
    """Unit tests for labels, products and factorisation."""

    def setUp(self):
        self.field = QuadraticField(6)

    def test_labels_round_trip(self):
        for ideal in ideals_up_to(self.field, 30):
            self.assertEqual(ideal_from_label(self.field, ideal.label), ideal)
            self.assertEqual(ideal_from_json(self.field, ideal_to_json(ideal)), ideal)

    def test_unit_ideal_label(self):
        self.assertEqual(unit_ideal(self.field).label, "1.0.1")

    def test_non_canonical_labels_are_rejected(self):
        for label in ("5.2.1", "2.3.1", "0.0.1", "abc", "5.1"):
            with self.assertRaises(ConfigError):
                ideal_from_label(self.field, label)

    def test_primes_of_small_norm(self):
        """2 and 3 ramify, 5 splits and 7 is inert in Q(sqrt 6)."""
        self.assertEqual([q.label for q, _, _ in primes_above(self.field, 2)], ["2.0.1"])
        self.assertEqual(primes_above(self.field, 3)[0][1:], (2, 1))
        self.assertEqual([q.label for q, _, _ in primes_above(self.field, 5)], ["5.1.1", "5.4.1"])
        self.assertEqual(primes_above(self.field, 7)[0][0].label, "1.0.7")
        self.assertEqual(primes_above(self.field, 7)[0][1:], (1, 2))

    def test_products_and_conjugates(self):
        p5 = ideal_from_label(self.field, "5.1.1")
        q5 = p5.conjugate()
        self.assertEqual(q5.label, "5.4.1")
        self.assertEqual((p5 * q5).label, "1.0.5")
        p2 = ideal_from_label(self.field, "2.0.1")
        self.assertEqual((p2 * p2).label, "1.0.2")
        self.assertEqual(p5 * p5.inverse(), unit_ideal(self.field))

    def test_principal_ideal_of_a_generator(self):
        """(1 + w) has norm 5 and is the prime 5.1.1."""
        self.assertEqual(principal_ideal(self.field.element(1, 1)).label, "5.1.1")
        self.assertEqual(principal_ideal(self.field.element(2, -1)).label, "2.0.1")

    def test_norm_is_multiplicative(self):
        ideals = ideals_up_to(self.field, 20)
        for left in ideals:
            for right in ideals:
                self.assertEqual(ideal_norm(left * right), ideal_norm(left) * ideal_norm(right))

    def test_norm_of_a_fractional_ideal(self):
        p3 = ideal_from_label(self.field, "3.0.1")
        self.assertEqual(ideal_norm(unit_ideal(self.field) / p3), Fraction(1, 3))

    def test_factorisation_reconstructs_the_ideal(self):
        for ideal in ideals_up_to(self.field, 60):
            self.assertEqual(ideal_from_factors(self.field, factor_ideal(ideal)), ideal)

    def test_divisors_of_six(self):
        """(6) = p2^2 p3^2 has nine divisors, all dividing it."""
        six = principal_ideal(self.field.element(6))
        found = divisors(six)
        self.assertEqual(len(found), 9)
        self.assertTrue(all(d.divides(six) for d in found))

    def test_factor_rejects_fractional_ideals(self):
        with self.assertRaises(HMFError):
            factor_ideal(ideal_from_label(self.field, "2.0.1").inverse())


class TestEnumeration:
    """Ideal enumeration against the Dedekind zeta coefficients."""

    @pytest.mark.parametrize("d", [2, 5, 6, 13])
    def test_counts_per_norm(self, d):
        """Every ideal of norm below the bound appears exactly once."""
        field = QuadraticField(d)
        ideals = ideals_up_to(field, 80)
        assert len(set(ideals)) == len(ideals)
        for n in range(1, 80):
            found = sum(1 for ideal in ideals if ideal.norm() == n)
            assert found == _ideal_count(field.discriminant, n), f"norm {n}"

    def test_sorted_by_norm_then_label(self, field6):
        ideals = ideals_up_to(field6, 50)
        assert [i.sort_key for i in ideals] == sorted(i.sort_key for i in ideals)
        assert ideals[0].label == "1.0.1"

    def test_strict_bound(self, field6):
        """Norm B itself is excluded."""
        assert all(ideal.norm() < 10 for ideal in ideals_up_to(field6, 10))
        assert any(ideal.norm() == 10 for ideal in ideals_up_to(field6, 11))

    def test_prime_ideals_up_to(self, field5):
        labels = [p.label for p in prime_ideals_up_to(field5, 12)]
        assert labels == ["1.0.2", "5.2.1", "1.0.3", "11.3.1", "11.7.1"]


class TestGeneratorsAndBoxes:
    """Totally positive generators and box enumeration."""

    def test_totally_positive_generator(self, field6):
        for ideal in ideals_up_to(field6, 40):
            xi = totally_positive_generator(ideal)
            if xi is None:
                continue
            assert is_totally_positive(xi)
            assert principal_ideal(xi) == ideal

    def test_prime_above_two_is_not_narrowly_principal(self, field6):
        """Every generator of the prime above 2 has norm -2."""
        p2 = ideal_from_label(field6, "2.0.1")
        assert totally_positive_generator(p2) is None
        assert abs(generator(p2).norm()) == 2

    def test_generators_with_a_large_unit(self):
        """Q(sqrt 31) has eps = 1520 + 273w; (6 + w) lies over 5 and is totally positive."""
        field = QuadraticField(31)
        for prime, _, _ in primes_above(field, 5):
            xi = totally_positive_generator(prime)
            assert xi.norm() == 5
            assert xi.trace() == 12
            assert principal_ideal(xi) == prime

    def test_generators_with_a_very_large_unit(self):
        """In Q(sqrt 46), eps = 24335 + 3588w and 61 + 9w has norm -5; 5 is no norm mod 23."""
        field = QuadraticField(46)
        p5 = primes_above(field, 5)[0][0]
        assert totally_positive_generator(p5) is None
        assert abs(generator(p5).norm()) == 5
        square = totally_positive_generator(p5 * p5)
        assert is_totally_positive(square)
        assert principal_ideal(square) == p5 * p5
        classes = narrow_class_group(field)
        assert classes.h_plus == 2
        assert classes.class_of(p5) == 1

    def test_points_in_box_match_brute_force(self, field5):
        """Decompositions xi = xi1 + xi2 into totally positive integers."""
        lattice = unit_ideal(field5)
        for xi in (field5.element(4, 1), field5.element(7, 3), field5.element(6)):
            expected = {
                field5.element(x, y)
                for x in range(-40, 41)
                for y in range(-40, 41)
                if is_totally_positive(field5.element(x, y)) and is_totally_positive(xi - field5.element(x, y))
            }
            assert set(points_in_box(lattice, xi)) == expected

    def test_embedding_bounds_bracket_the_embeddings(self, field6):
        xi = field6.element(5, 2)
        for i in (1, 2):
            low, high = embedding_bounds(xi, i)
            assert high - low < Fraction(1, 10**12)
            assert embedding_sign(xi - field6.element(low), i) == 1
            assert embedding_sign(xi - field6.element(high), i) == -1

    def test_points_in_box_of_a_fractional_lattice(self, field5):
        """(1/2) O holds the halves of the decompositions of 2 xi."""
        half = unit_ideal(field5) * Fraction(1, 2)
        xi = field5.element(4, 1)
        expected = {point * Fraction(1, 2) for point in points_in_box(unit_ideal(field5), xi * 2)}
        assert set(points_in_box(half, xi)) == expected

    def test_points_in_box_respect_the_lattice(self, field6):
        lattice = ideal_from_label(field6, "2.0.1")
        xi = field6.element(12, 3)
        points = points_in_box(lattice, xi)
        assert points
        assert all(lattice.contains(point) for point in points)


class TestNarrowClassGroup:
    """Narrow class numbers and representatives."""

    @pytest.mark.parametrize(
        "d, h_plus", [(2, 1), (3, 2), (5, 1), (6, 2), (7, 2), (10, 2), (13, 1), (15, 4), (21, 2)]
    )
    def test_narrow_class_numbers(self, d, h_plus):
        assert narrow_class_number(QuadraticField(d)) == h_plus

    def test_representatives_of_q_sqrt_6(self, classes6):
        """Trivial class first, then the least prime outside it."""
        assert classes6.labels == ["1.0.1", "2.0.1"]

    def test_class_lookup_is_a_homomorphism(self, field6, classes6):
        ideals = ideals_up_to(field6, 30)
        for left in ideals:
            for right in ideals:
                expected = classes6.multiply(classes6.class_of(left), classes6.class_of(right))
                assert classes6.class_of(left * right) == expected

    def test_classes_of_small_primes(self, field6, classes6):
        """(3 + w) is totally positive while (1 + w) has norm -5."""
        assert classes6.class_of(ideal_from_label(field6, "3.0.1")) == 0
        assert classes6.class_of(ideal_from_label(field6, "5.1.1")) == 1
        assert classes6.class_of(ideal_from_label(field6, "5.4.1")) == 1

    def test_geometric_generator(self, field6, classes6):
        for ideal in ideals_up_to(field6, 30):
            index = classes6.matching_class(ideal)
            xi = classes6.geometric_generator(ideal, index)
            assert is_totally_positive(xi)
            assert principal_ideal(xi) == ideal * classes6.representatives[index]

    def test_with_representatives_checks_classes(self, field6, classes6):
        p3 = ideal_from_label(field6, "3.0.1")
        p5 = ideal_from_label(field6, "5.1.1")
        moved = classes6.with_representatives([p3, p5])
        assert moved.labels == ["3.0.1", "5.1.1"]
        with pytest.raises(ConfigError):
            classes6.with_representatives([p5, p3])
