import unittest
from fractions import Fraction

import pytest

from core.coeff_ring import (
    ExtensionField,
    IntegerRing,
    LocalizedIntegers,
    PrimeField,
    RationalField,
    finite_field,
    parse_ring,
    reduce_mod,
    validate_ring_weight_compat,
)
from core.errors import ConfigError, InvalidPrimeError, NotInvertibleError
from core.quad_field import QuadraticField


class TestRingDescriptors(unittest.TestCase):
    """Unit tests for parsing ring descriptors."""

    def test_basic_descriptors(self):
        self.assertIsInstance(parse_ring("q"), RationalField)
        self.assertIsInstance(parse_ring("z"), IntegerRing)
        self.assertEqual(parse_ring("fp:7"), PrimeField(7))

    def test_finite_field_with_and_without_polynomial(self):
        """fq:3,2 picks the first irreducible quadratic; an explicit one is kept."""
        default = parse_ring("fq:3,2")
        self.assertIsInstance(default, ExtensionField)
        self.assertEqual(default.degree, 2)
        explicit = parse_ring("fq:3,2;x^2+1")
        self.assertEqual(explicit.descriptor, "fq:3,2;x^2+1")

    def test_number_field_and_localisation(self):
        self.assertEqual(parse_ring("nf:x^2-6").descriptor, "nf:x^2-6")
        loc = parse_ring("loc:x;inv=331")
        self.assertIsInstance(loc, LocalizedIntegers)
        self.assertEqual(loc.inverted_primes(), frozenset({331}))

    def test_malformed_descriptors(self):
        for descriptor in ("fp:4", "fq:3", "nf:x^2-4", "r", "loc:x;inv="):
            with self.assertRaises(ConfigError, msg=descriptor):
                parse_ring(descriptor)


class TestRingArithmetic(unittest.TestCase):
    """Unit tests for exact element arithmetic."""

    def test_prime_field_parses_fractions(self):
        f3 = PrimeField(3)
        self.assertEqual(f3.format(f3.parse("1/2")), "2")
        self.assertEqual(f3.format(f3.parse("-1")), "2")
        with self.assertRaises(InvalidPrimeError):
            f3.parse("1/3")

    def test_integer_units(self):
        z = IntegerRing()
        self.assertTrue(z.is_unit(z.from_int(-1)))
        self.assertFalse(z.is_unit(z.from_int(2)))
        with self.assertRaises(NotInvertibleError):
            z.inv(z.from_int(2))
        with self.assertRaises(ConfigError):
            z.parse("1/2")

    def test_localised_units_and_sizes(self):
        loc = LocalizedIntegers(frozenset({2, 3}))
        self.assertTrue(loc.is_unit(loc.parse("12")))
        self.assertFalse(loc.is_unit(loc.parse("10")))
        self.assertEqual(loc.format(loc.inv(loc.parse("6"))), "1/6")
        self.assertEqual(loc.size(loc.parse("20")), 5)
        with self.assertRaises(InvalidPrimeError):
            loc.parse("1/5")

    def test_localised_division_with_remainder(self):
        """left = q * right + r with r smaller than right."""
        loc = LocalizedIntegers(frozenset({2}))
        left, right = loc.parse("17/4"), loc.parse("6")
        quotient, remainder = loc.divmod(left, right)
        self.assertTrue(loc.equal(quotient * right + remainder, left))
        self.assertLess(loc.size(remainder), loc.size(right))

    def test_f9_generator_and_frobenius(self):
        """In F_3[x]/(x^2 + 1) the generator squares to -1 and Frobenius negates it."""
        f9 = parse_ring("fq:3,2;x^2+1")
        zeta = f9.generator
        self.assertEqual(zeta * zeta, f9.from_int(-1))
        self.assertEqual(f9.frobenius(zeta), -zeta)
        self.assertEqual(len(f9.elements()), 9)
        self.assertEqual(f9.format(zeta), "[0,1]")
        self.assertEqual(f9.parse("[0,1]"), zeta)

    def test_extension_inverse(self):
        k = parse_ring("nf:x^2-6")
        xi = k.parse("[2,1]")
        self.assertEqual(xi * k.inv(xi), k.one)

    def test_number_field_contains_image_of_k(self):
        k = parse_ring("nf:x^2-6")
        field = QuadraticField(6)
        image = k.embed_field_element(field.omega)
        self.assertEqual(image * image, k.from_int(6))
        self.assertFalse(RationalField().contains_image_of(field))
        self.assertFalse(parse_ring("nf:x^2-5").contains_image_of(field))

    def test_finite_field_helper(self):
        self.assertEqual(finite_field(5, 1), PrimeField(5))
        self.assertEqual(finite_field(2, 3).degree, 3)


class TestReduction:
    """Reduction modulo primes."""

    def test_reduce_rational(self):
        assert reduce_mod(RationalField().parse("3/2"), RationalField(), 5) == PrimeField(5).parse("4")

    def test_reduce_matrix(self):
        z = IntegerRing()
        matrix = [[z.from_int(7), z.from_int(-1)], [z.from_int(10), z.from_int(3)]]
        reduced = reduce_mod(matrix, z, 5)
        assert [[PrimeField(5).format(v) for v in row] for row in reduced] == [["2", "4"], ["0", "3"]]

    def test_reduction_fails_at_denominators(self):
        with pytest.raises(InvalidPrimeError):
            reduce_mod(RationalField().parse("1/5"), RationalField(), 5)

    def test_reduction_fails_at_inverted_primes(self):
        loc = LocalizedIntegers(frozenset({331}))
        with pytest.raises(InvalidPrimeError):
            loc.residue_field(331)
        assert loc.residue_field(3) == PrimeField(3)


class TestRingWeightCompatibility:
    """The two conditions a ring must meet for the weights of a run."""

    def test_parallel_weights_over_finite_fields(self):
        report = validate_ring_weight_compat(PrimeField(3), [[1, 1], [2, 2]], QuadraticField(6), 331)
        assert report.ok

    def test_level_norm_must_be_a_unit(self):
        report = validate_ring_weight_compat(PrimeField(331), [[1, 1]], QuadraticField(6), 331)
        assert not report.ok
        assert report.condition == 1
        assert not validate_ring_weight_compat(IntegerRing(), [[1, 1]], QuadraticField(6), 331).ok
        assert validate_ring_weight_compat(parse_ring("loc:x;inv=331"), [[1, 1]], QuadraticField(6), 331).ok

    def test_non_parallel_weight_needs_characteristic_zero(self):
        report = validate_ring_weight_compat(PrimeField(5), [[1, 3]], QuadraticField(6))
        assert not report.ok
        assert report.condition == 2
        assert report.weight == [1, 3]

    def test_non_parallel_weight_needs_an_image_of_k(self):
        field = QuadraticField(6)
        assert not validate_ring_weight_compat(RationalField(), [[1, 3]], field).ok
        assert validate_ring_weight_compat(parse_ring("nf:x^2-6"), [[1, 3]], field).ok

    def test_non_paritious_weight(self):
        report = validate_ring_weight_compat(RationalField(), [[1, 2]], QuadraticField(6))
        assert not report.ok
        assert report.condition == 2

    def test_fraction_parsing_uses_exact_rationals(self):
        assert RationalField().format(RationalField().from_fraction(Fraction(6, 4))) == "3/2"
