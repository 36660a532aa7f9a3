import pytest

from core.characters import trivial_character
from core.eisenstein import EisensteinSpec, eisenstein_series
from core.errors import OutOfPrecisionError
from core.hecke import HeckeContext, basis_rows, hecke_apply, hecke_commutes, hecke_images, hecke_matrix
from core.ideals import ideal_from_label, unit_ideal
from core.linalg import to_columns
from tests.conftest import random_series


@pytest.fixture
def level_one6(classes6, rationals):
    """Level O and trivial character over Q(sqrt 6)."""
    return HeckeContext(unit_ideal(classes6.field), trivial_character(classes6.field, rationals), classes6)


class TestHeckeApply:
    """The action of T_a on truncated series."""

    def test_unit_ideal_acts_as_identity(self, classes6, rationals, level_one6):
        f = random_series(classes6, rationals, 30, seed=1)
        assert hecke_apply(level_one6, unit_ideal(classes6.field), f) == f

    def test_output_precision_is_floored(self, classes6, rationals, level_one6):
        f = random_series(classes6, rationals, 30, seed=2)
        assert hecke_apply(level_one6, ideal_from_label(classes6.field, "2.0.1"), f).bound == 15
        assert hecke_apply(level_one6, ideal_from_label(classes6.field, "5.1.1"), f).bound == 6
        assert hecke_apply(level_one6, ideal_from_label(classes6.field, "3.0.1"), f).bound == 10

    def test_needs_norm_below_the_bound(self, classes6, rationals, level_one6):
        f = random_series(classes6, rationals, 5, seed=3)
        with pytest.raises(OutOfPrecisionError):
            hecke_apply(level_one6, ideal_from_label(classes6.field, "5.1.1"), f)

    def test_primes_dividing_the_level_shift_coefficients(self, classes6, rationals):
        """With p | N only the trivial divisor contributes: a_m(T_p f) = a_(mp)(f)."""
        field = classes6.field
        p3 = ideal_from_label(field, "3.0.1")
        ctx = HeckeContext(p3, trivial_character(field, rationals, p3), classes6)
        f = random_series(classes6, rationals, 60, seed=4)
        image = hecke_apply(ctx, p3, f)
        for ideal in image.ideals:
            assert image.coefficient(ideal) == f.coefficient(ideal * p3)

    def test_constant_terms_follow_the_class_of_the_prime(self, classes6, rationals, level_one6):
        """Both divisors of p2 move a constant to the other class."""
        f = random_series(classes6, rationals, 20, seed=5, density=0.0)
        image = hecke_apply(level_one6, ideal_from_label(classes6.field, "2.0.1"), f)
        assert list(image.constant) == [f.constant[1] + f.constant[1], f.constant[0] + f.constant[0]]


class TestCommutation:
    """Hecke operators commute and are multiplicative on coprime ideals."""

    @pytest.mark.parametrize("first, second", [("2.0.1", "3.0.1"), ("2.0.1", "5.1.1"), ("5.1.1", "5.4.1"), ("2.0.1", "2.0.1")])
    def test_on_random_series(self, classes6, rationals, level_one6, first, second):
        field = classes6.field
        f = random_series(classes6, rationals, 120, seed=6)
        assert hecke_commutes(level_one6, ideal_from_label(field, first), ideal_from_label(field, second), f)

    def test_on_an_eisenstein_series(self, classes6, class_character6, level_one6):
        spec = EisensteinSpec(class_character6, class_character6, 1, (1, -1), 120)
        series = eisenstein_series(spec, classes6)
        field = classes6.field
        assert hecke_commutes(level_one6, ideal_from_label(field, "3.0.1"), ideal_from_label(field, "5.1.1"), series)


class TestHeckeMatrix:
    """Matrices of T_a on a list of series."""

    def test_columns_are_images(self, classes6, rationals, level_one6):
        basis = [random_series(classes6, rationals, 30, seed=s) for s in (7, 8, 9)]
        p2 = ideal_from_label(classes6.field, "2.0.1")
        matrix = hecke_matrix(level_one6, p2, basis)
        images = hecke_images(level_one6, p2, basis)
        assert len(matrix) == basis_rows(classes6, 15)
        assert to_columns(matrix, 3) == [image.to_vector() for image in images]

    def test_empty_basis(self, classes6, level_one6):
        p2 = ideal_from_label(classes6.field, "2.0.1")
        assert hecke_matrix(level_one6, p2, []) == []
        rows = hecke_matrix(level_one6, p2, [], bound=30)
        assert len(rows) == basis_rows(classes6, 15)
        assert all(row == [] for row in rows)
