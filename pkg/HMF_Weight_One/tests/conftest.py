import random
from pathlib import Path
from typing import Any, Optional

import pytest

from core.characters import narrow_class_character, trivial_character
from core.coeff_ring import CoefficientRing, ExtensionField, RationalField
from core.eisenstein import EisensteinSpec, eisenstein_series
from core.hecke import HeckeContext
from core.ideals import ideal_from_label, ideal_index, narrow_class_group, unit_ideal
from core.ingestion import write_basis
from core.qexp import AdelicSeries, WeightVector
from core.quad_field import QuadraticField
from core.serialization import write_json


def random_element(ring: CoefficientRing, rng: random.Random, nonzero: bool = False):
    """A small random ring element; extension elements get two coordinates."""
    while True:
        if isinstance(ring, ExtensionField):
            value = ring.parse(f"[{rng.randint(-3, 3)},{rng.randint(-3, 3)}]")
        else:
            value = ring.from_int(rng.randint(-4, 4))
        if not nonzero or not ring.is_zero(value):
            return value


def random_series(
    classes,
    ring: CoefficientRing,
    bound: int,
    weight: Optional[WeightVector] = None,
    seed: int = 0,
    density: float = 0.6,
    unit_constant: bool = False,
) -> AdelicSeries:
    """A random sparse series modulo q^bound."""
    rng = random.Random(seed)
    weight = weight or WeightVector(1, 1)
    constant = [random_element(ring, rng, nonzero=unit_constant) for _ in range(classes.h_plus)]
    coeffs = {
        ideal: random_element(ring, rng)
        for ideal in ideal_index(classes.field, bound).ideals
        if rng.random() < density
    }
    return AdelicSeries.build(classes, ring, weight, bound, constant, coeffs)


def indicator_series(classes, ring: CoefficientRing, bound: int, label: str) -> AdelicSeries:
    """Weight one series with coefficient 1 at one ideal and nothing else."""
    ideal = ideal_from_label(classes.field, label)
    return AdelicSeries.build(
        classes, ring, WeightVector(1, 1), bound, [ring.zero] * classes.h_plus, {ideal: ring.one}
    )


@pytest.fixture
def field5():
    return QuadraticField(5)


@pytest.fixture
def field6():
    return QuadraticField(6)


@pytest.fixture
def classes5(field5):
    return narrow_class_group(field5)


@pytest.fixture
def classes6(field6):
    """Q(sqrt 6): h+ = 2, classes represented by O and the prime above 2."""
    return narrow_class_group(field6)


@pytest.fixture
def rationals():
    return RationalField()


@pytest.fixture
def class_character6(classes6, rationals):
    """The character of the narrow class group of Q(sqrt 6) with values (1, -1)."""
    return narrow_class_character(classes6, ring=rationals)


@pytest.fixture
def eisenstein_pair6(classes6, class_character6, rationals):
    """E_1(1, 1) with constants (1, 1) and E_1(psi, psi) with constants (1, -1), modulo q^40."""
    trivial = trivial_character(classes6.field, rationals)
    plain = EisensteinSpec(trivial, trivial, 1, (1, 1), 40)
    twisted = EisensteinSpec(class_character6, class_character6, 1, (1, -1), 40)
    return eisenstein_series(plain, classes6), eisenstein_series(twisted, classes6)


@pytest.fixture
def synthetic_run6(classes6, rationals, eisenstein_pair6):
    """A weight one problem over Q(sqrt 6) with a known answer.

    The weight two basis E*E, E_psi*E and E*J, with J the indicator of the
    prime 5.1.1, gives the candidate space spanned by E, E_psi and J. T_p2
    moves J off that span, so the stable part is spanned by E and E_psi.
    Returns (multiplier, basis, context, square basis).
    """
    plain, twisted = eisenstein_pair6
    indicator = indicator_series(classes6, rationals, 40, "5.1.1")
    basis = [plain * plain, twisted * plain, plain * indicator]
    ctx = HeckeContext(unit_ideal(classes6.field), trivial_character(classes6.field, rationals), classes6)
    return plain, basis, ctx, basis[:2]


def write_synthetic_config(directory: Path, **overrides: Any) -> Path:
    """Writes the Q(sqrt 6) run of ``synthetic_run6`` as config.json plus basis.json.

    The multiplier and the first two basis vectors come from the product
    basis; basis.json holds E*J. Keyword arguments replace config keys.
    """
    field = QuadraticField(6)
    classes = narrow_class_group(field)
    ring = RationalField()
    trivial = trivial_character(field, ring)
    plain = eisenstein_series(EisensteinSpec(trivial, trivial, 1, (1, 1), 40), classes)
    write_basis(directory / "basis.json", [plain * indicator_series(classes, ring, 40, "5.1.1")], unit_ideal(field))
    config = {
        "field": 6,
        "bound": 40,
        "ring": "q",
        "weight": [1, 1],
        "multiplier_weight": [1, 1],
        "characters": {"psi": {"kind": "class"}},
        "multiplier": {"constant": [1, 1]},
        "product_basis": [{"constant": [1, 1]}, {"eta": "psi", "psi": "psi", "constant": [1, -1]}],
        "basis_file": "basis.json",
        "square_basis_from_products": True,
        "extra_primes": [5, 7],
    }
    config.update(overrides)
    return write_json(directory / "config.json", config)
