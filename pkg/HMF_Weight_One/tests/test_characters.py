import unittest

import pytest

from core.characters import (
    ProductCharacter,
    char_eval,
    check_order,
    check_ray_class_consistency,
    narrow_class_character,
    quadratic_character,
    table_character,
    trivial_character,
)
from core.coeff_ring import PrimeField, RationalField
from core.errors import CharacterConstructionError, ConfigError, InsufficientDataError
from core.ideals import (
    are_coprime,
    ideal_from_label,
    ideals_up_to,
    narrow_class_group,
    prime_ideals_up_to,
    unit_ideal,
)
from core.quad_field import QuadraticField


class TestTrivialAndClassCharacters(unittest.TestCase):
    """Unit tests for the trivial character and narrow class group characters."""

    def setUp(self):
        self.field = QuadraticField(6)
        self.classes = narrow_class_group(self.field)
        self.ring = RationalField()

    def test_trivial_character(self):
        chi = trivial_character(self.field, self.ring)
        self.assertTrue(chi.is_trivial)
        self.assertEqual(chi.order, 1)
        for ideal in ideals_up_to(self.field, 30):
            self.assertEqual(char_eval(chi, ideal), self.ring.one)

    def test_trivial_character_vanishes_off_the_modulus(self):
        modulus = ideal_from_label(self.field, "3.0.1")
        chi = trivial_character(self.field, self.ring, modulus)
        self.assertEqual(chi(ideal_from_label(self.field, "3.0.1")), self.ring.zero)
        self.assertEqual(chi(ideal_from_label(self.field, "5.1.1")), self.ring.one)

    def test_class_character_values(self):
        """-1 on the class of the prime above 2, which contains both primes above 5."""
        chi = narrow_class_character(self.classes, ring=self.ring)
        self.assertEqual(chi(ideal_from_label(self.field, "3.0.1")), self.ring.one)
        self.assertEqual(chi(ideal_from_label(self.field, "5.1.1")), self.ring.from_int(-1))
        self.assertEqual(chi(ideal_from_label(self.field, "1.0.5")), self.ring.one)
        self.assertEqual(chi.order, 2)
        self.assertFalse(chi.is_trivial)

    def test_class_character_is_multiplicative(self):
        chi = narrow_class_character(self.classes, ring=self.ring)
        ideals = ideals_up_to(self.field, 25)
        for left in ideals:
            for right in ideals:
                self.assertEqual(chi(left * right), chi(left) * chi(right))

    def test_non_multiplicative_class_values(self):
        with self.assertRaises(CharacterConstructionError):
            narrow_class_character(self.classes, (1, 2), self.ring)
        with self.assertRaises(ConfigError):
            narrow_class_character(self.classes, (1,), self.ring)

    def test_evaluation_needs_integral_ideals(self):
        chi = trivial_character(self.field, self.ring)
        with self.assertRaises(ConfigError):
            chi(ideal_from_label(self.field, "2.0.1").inverse())


class TestQuadraticCharacter:
    """Quadratic characters modulo prime ideals of odd norm."""

    def test_rejects_modulus_where_the_unit_is_not_a_square(self, field6, classes6):
        """5 + 2w maps to 3 modulo the prime 5.1.1, a non-square."""
        with pytest.raises(CharacterConstructionError):
            quadratic_character(ideal_from_label(field6, "5.1.1"), classes6)

    def test_rejects_composite_and_even_moduli(self, field6, classes6):
        with pytest.raises(ConfigError):
            quadratic_character(ideal_from_label(field6, "1.0.5"), classes6)
        with pytest.raises(ConfigError):
            quadratic_character(ideal_from_label(field6, "2.0.1"), classes6)

    @pytest.mark.parametrize("d, label", [(5, "11.3.1"), (6, "23.12.1")])
    def test_symbol_agrees_with_evaluation_on_composite_ideals(self, d, label):
        """The symbol of a generator matches the product of prime values."""
        field = QuadraticField(d)
        classes = narrow_class_group(field)
        modulus = ideal_from_label(field, label)
        chi = quadratic_character(modulus, classes)
        checked = 0
        for ideal in ideals_up_to(field, 80):
            if not are_coprime(ideal, modulus):
                assert chi(ideal) == chi.ring.zero
                continue
            assert chi(ideal) == chi.ring.from_int(chi.symbol_value(ideal)), ideal.label
            checked += 1
        assert checked > 20

    @pytest.mark.parametrize("d, label", [(5, "11.3.1"), (6, "23.12.1")])
    def test_ray_class_check_and_order(self, d, label):
        field = QuadraticField(d)
        chi = quadratic_character(ideal_from_label(field, label), narrow_class_group(field))
        assert chi.order == 2
        assert check_ray_class_consistency(chi, samples=40, seed=1) == 40
        assert check_order(chi, prime_ideals_up_to(field, 100))

    def test_values_are_zero_on_the_modulus(self, field5, classes5):
        modulus = ideal_from_label(field5, "11.3.1")
        chi = quadratic_character(modulus, classes5)
        assert chi(modulus) == chi.ring.zero
        assert chi(ideal_from_label(field5, "1.0.11")) == chi.ring.zero

    def test_moving_to_a_residue_field(self, field5, classes5):
        chi = quadratic_character(ideal_from_label(field5, "11.3.1"), classes5)
        reduced = chi.over(PrimeField(3))
        for prime in prime_ideals_up_to(field5, 60):
            if prime != chi.modulus:
                assert reduced(prime) == PrimeField(3).from_int(chi.symbol_value(prime))

    def test_class_values_must_be_signs(self, field6, classes6):
        with pytest.raises(CharacterConstructionError):
            quadratic_character(ideal_from_label(field6, "23.12.1"), classes6, class_values=[3])
        with pytest.raises(ConfigError):
            quadratic_character(ideal_from_label(field6, "23.12.1"), classes6, class_values=[1, -1])


class TestTableAndProductCharacters:
    """Characters given by tables of prime values and their products."""

    def test_table_character_evaluation(self, field5, rationals):
        p2 = ideal_from_label(field5, "1.0.2")
        p5 = ideal_from_label(field5, "5.2.1")
        chi = table_character(unit_ideal(field5), {p2: -1, p5: 1}, rationals)
        # (10) = (2) p5^2
        assert chi(p2 * p5 * p5) == rationals.from_int(-1)
        assert chi.order == 2
        with pytest.raises(InsufficientDataError):
            chi(ideal_from_label(field5, "1.0.3"))

    def test_table_validation(self, field5, rationals):
        p2 = ideal_from_label(field5, "1.0.2")
        p11 = ideal_from_label(field5, "11.3.1")
        with pytest.raises(CharacterConstructionError):
            table_character(unit_ideal(field5), {p2: 2}, rationals)
        with pytest.raises(ConfigError):
            table_character(unit_ideal(field5), {p2 * p2: 1}, rationals)
        with pytest.raises(ConfigError):
            table_character(p11, {p11: 1}, rationals)

    def test_ray_class_check_catches_a_bad_table(self, field5, rationals):
        """-1 on every prime is not trivial on elements that are 1 modulo N."""
        modulus = ideal_from_label(field5, "11.3.1")
        table = {prime: -1 for prime in prime_ideals_up_to(field5, 5000) if prime != modulus}
        chi = table_character(modulus, table, rationals, order=2)
        with pytest.raises(CharacterConstructionError):
            check_ray_class_consistency(chi, samples=50, seed=0)

    def test_product_character(self, field6, classes6, class_character6):
        modulus = ideal_from_label(field6, "23.12.1")
        quadratic = quadratic_character(modulus, classes6)
        product = class_character6 * quadratic
        assert isinstance(product, ProductCharacter)
        assert product.modulus == modulus
        assert product.order == 2
        assert not product.is_trivial
        assert product(modulus) == product.ring.zero
        for ideal in ideals_up_to(field6, 40):
            assert product(ideal) == class_character6(ideal) * quadratic(ideal)

    def test_product_moves_between_rings(self, classes6, class_character6):
        product = ProductCharacter((class_character6, trivial_character(classes6.field)))
        reduced = product.over(PrimeField(5))
        p5 = ideal_from_label(classes6.field, "5.1.1")
        assert reduced(p5) == PrimeField(5).from_int(4)
