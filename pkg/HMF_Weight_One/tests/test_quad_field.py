import random
import unittest
from fractions import Fraction

import mpmath

from core.errors import ConfigError, NotInvertibleError
from core.quad_field import (
    QuadraticField,
    element_from_json,
    element_to_json,
    embedding_sign,
    format_element,
    fundamental_unit,
    is_totally_positive,
)


def _high_precision_embedding(xi, i):
    """xi under the i-th embedding, with w evaluated to 60 digits."""
    with mpmath.workdps(60):
        root = mpmath.sqrt(xi.field.discriminant)
        w = (xi.field.t + root) / 2 if i == 1 else (xi.field.t - root) / 2
        return mpmath.mpf(xi.x.numerator) / xi.x.denominator + mpmath.mpf(xi.y.numerator) / xi.y.denominator * w


class TestQuadraticField(unittest.TestCase):
    """Unit tests for field elements, embeddings and units."""

    def test_integral_basis_depends_on_d_mod_4(self):
        """w is (1 + sqrt d)/2 for d = 1 mod 4 and sqrt d otherwise."""
        five, six = QuadraticField(5), QuadraticField(6)
        self.assertEqual((five.t, five.n, five.discriminant), (1, 1, 5))
        self.assertEqual((six.t, six.n, six.discriminant), (0, 6, 24))

    def test_rejects_non_squarefree_or_small_d(self):
        """d must be squarefree and larger than one."""
        for d in (1, 4, 12, -5):
            with self.assertRaises(ConfigError):
                QuadraticField(d)

    def test_omega_satisfies_its_minimal_polynomial(self):
        """w^2 = t w + n in both families."""
        for d in (5, 6, 13, 15):
            field = QuadraticField(d)
            w = field.omega
            self.assertEqual(w * w, w * field.t + field.n)

    def test_norm_and_trace(self):
        """N(2 - w) = -2 and Tr(2 - w) = 4 in Q(sqrt 6)."""
        xi = QuadraticField(6).element(2, -1)
        self.assertEqual(xi.norm(), -2)
        self.assertEqual(xi.trace(), 4)
        self.assertEqual(xi * xi.conjugate(), xi.field.element(-2))

    def test_inverse(self):
        """xi * xi^-1 = 1, and zero has no inverse."""
        field = QuadraticField(5)
        xi = field.element(3, 7)
        self.assertEqual(xi * xi.inverse(), field.one)
        with self.assertRaises(NotInvertibleError):
            field.zero.inverse()

    def test_embedding_signs_agree_with_high_precision_values(self):
        """Exact signs match 60 digit evaluations on elements close to zero."""
        rng = random.Random(7)
        for d in (2, 5, 6, 7, 13):
            field = QuadraticField(d)
            for _ in range(200):
                xi = field.element(Fraction(rng.randint(-400, 400), rng.randint(1, 5)), rng.randint(-150, 150))
                for i in (1, 2):
                    value = _high_precision_embedding(xi, i)
                    expected = (value > 0) - (value < 0)
                    self.assertEqual(embedding_sign(xi, i), expected, f"{xi} at embedding {i}")

    def test_signs_of_units_close_to_zero(self):
        """5 - 2 sqrt 6 is about 0.1 and still totally positive."""
        field = QuadraticField(6)
        self.assertTrue(is_totally_positive(field.element(5, -2)))
        self.assertFalse(is_totally_positive(field.element(2, -1)))
        self.assertEqual(embedding_sign(field.element(2, -1), 1), -1)
        self.assertEqual(embedding_sign(field.element(2, -1), 2), 1)

    def test_fundamental_units(self):
        """Known units: w of norm -1 for d = 5, 5 + 2 sqrt 6 of norm 1 for d = 6."""
        five = fundamental_unit(QuadraticField(5))
        self.assertEqual(five.fundamental_unit, QuadraticField(5).element(0, 1))
        self.assertEqual(five.norm_of_unit, -1)
        self.assertEqual(five.totally_positive_fundamental_unit, QuadraticField(5).element(1, 1))

        six = fundamental_unit(QuadraticField(6))
        self.assertEqual(six.fundamental_unit, QuadraticField(6).element(5, 2))
        self.assertEqual(six.norm_of_unit, 1)
        self.assertTrue(is_totally_positive(six.totally_positive_fundamental_unit))

    def test_units_have_norm_plus_or_minus_one(self):
        for d in (2, 3, 7, 10, 13, 15, 21, 34):
            data = fundamental_unit(QuadraticField(d))
            self.assertIn(data.fundamental_unit.norm(), (1, -1))
            self.assertEqual(data.totally_positive_fundamental_unit.norm(), 1)
            self.assertTrue(is_totally_positive(data.totally_positive_fundamental_unit))

    def test_format_element(self):
        field = QuadraticField(6)
        self.assertEqual(format_element(field.element(2, -1)), "2-w")
        self.assertEqual(format_element(field.element(1, 2)), "1+2*w")
        self.assertEqual(format_element(field.element(0, -1)), "-w")
        self.assertEqual(format_element(field.element(3)), "3")

    def test_json_form_is_exact(self):
        field = QuadraticField(13)
        xi = field.element(Fraction(1, 3), Fraction(-7, 2))
        self.assertEqual(element_to_json(xi), {"x": "1/3", "y": "-7/2"})
        self.assertEqual(element_from_json(field, element_to_json(xi)), xi)
        with self.assertRaises(ConfigError):
            element_from_json(field, {"y": "1"})


if __name__ == "__main__":
    unittest.main()
