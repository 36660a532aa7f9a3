"""Characters on the ideal group, evaluated on integral ideals.

A character stores raw values (integers or ring-element strings) and binds
them to a coefficient ring on evaluation, so the same character can be
moved between Q, a localisation and its residue fields with ``over``.
"""

import abc
import functools
import logging
import math
import random
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import attrs
from sympy import legendre_symbol

from core.coeff_ring import CoefficientRing, Element, RationalField
from core.errors import CharacterConstructionError, ConfigError, InsufficientDataError
from core.ideals import (
    IdealHNF,
    NarrowClassData,
    are_coprime,
    factor_ideal,
    generator,
    prime_ideals_up_to,
    principal_ideal,
    totally_positive_generator,
    unit_ideal,
)
from core.quad_field import FieldElement, embedding_sign, fundamental_unit, is_totally_positive

logger = logging.getLogger(__name__)

RawValue = Union[int, str]

# largest exponent tried when computing the order of a character value
_ORDER_LIMIT = 10_000


def raw_value(ring: CoefficientRing, value: RawValue) -> Element:
    return ring.from_int(value) if isinstance(value, int) else ring.parse(value)


def _element_order(ring: CoefficientRing, value: Element) -> int:
    power = value
    for exponent in range(1, _ORDER_LIMIT + 1):
        if ring.equal(power, ring.one):
            return exponent
        power = power * value
    raise CharacterConstructionError("character value has no finite order", value=ring.format(value))


class IdealCharacter(abc.ABC):
    """A character of the ray class group of modulus N times both infinite places."""

    ring: CoefficientRing
    modulus: IdealHNF

    @abc.abstractmethod
    def prime_value(self, prime: IdealHNF) -> Element:
        """Value at a prime ideal coprime to the modulus."""

    @property
    @abc.abstractmethod
    def order(self) -> int:
        ...

    @abc.abstractmethod
    def over(self, ring: CoefficientRing) -> "IdealCharacter":
        """The same character with values in another ring."""

    @property
    def field(self):
        return self.modulus.field

    @property
    def is_trivial(self) -> bool:
        return False

    def __call__(self, ideal: IdealHNF) -> Element:
        return char_eval(self, ideal)

    def __mul__(self, other: "IdealCharacter") -> "IdealCharacter":
        return ProductCharacter((self, other))


def char_eval(chi: IdealCharacter, ideal: IdealHNF) -> Element:
    """Evaluates a character on an integral ideal.

    Zero on ideals sharing a prime with the modulus, otherwise the product
    of the prime values over the factorisation.
    """
    if not ideal.is_integral:
        raise ConfigError("characters are evaluated on integral ideals", ideal=ideal.label)
    ring = chi.ring
    if not are_coprime(ideal, chi.modulus):
        return ring.zero
    value = ring.one
    for prime, exponent in factor_ideal(ideal):
        value = value * ring.power(chi.prime_value(prime), exponent)
    return value


@attrs.frozen
class TrivialCharacter(IdealCharacter):
    """The trivial character modulo N, 1 on every ideal coprime to N."""

    modulus: IdealHNF
    ring: CoefficientRing = attrs.field(factory=RationalField)

    def prime_value(self, prime: IdealHNF) -> Element:
        return self.ring.one

    @property
    def order(self) -> int:
        return 1

    @property
    def is_trivial(self) -> bool:
        return True

    def over(self, ring: CoefficientRing) -> "TrivialCharacter":
        return TrivialCharacter(self.modulus, ring)


def trivial_character(field, ring: Optional[CoefficientRing] = None, modulus: Optional[IdealHNF] = None) -> TrivialCharacter:
    return TrivialCharacter(modulus or unit_ideal(field), ring or RationalField())


# --- Quadratic residue symbol ---


def _residue_prime(modulus: IdealHNF) -> Tuple[int, bool]:
    """(p, split) for a prime ideal of norm p or p^2."""
    norm = int(modulus.norm())
    root = math.isqrt(norm)
    if root * root == norm and modulus.a == 1:
        return root, False
    return norm, True


def _mod_p(value: Fraction, p: int) -> int:
    return value.numerator * pow(value.denominator, -1, p) % p


def residue_symbol(modulus: IdealHNF, beta: FieldElement) -> int:
    """Quadratic residue symbol of beta modulo a prime ideal of odd norm.

    Residue fields of degree one map w to -b; for inert primes beta is a
    square exactly when its norm is a square modulo p.
    """
    p, split = _residue_prime(modulus)
    if split:
        residue = _mod_p(beta.x, p) - modulus.b * _mod_p(beta.y, p)
    else:
        residue = _mod_p(beta.norm(), p)
    return int(legendre_symbol(residue % p, p))


@attrs.frozen
class QuadraticCharacter(IdealCharacter):
    """The quadratic character modulo a prime ideal N.

    On the trivial narrow class it is the residue symbol of a totally
    positive generator. A nontrivial class lambda is anchored at an ideal
    a_lambda coprime to N and its conjugate with declared value v_lambda;
    an ideal b of class lambda then gets symbol(beta) * v_lambda *
    symbol(N a_lambda), beta a totally positive generator of b * conj(a_lambda).
    """

    modulus: IdealHNF
    classes: NarrowClassData
    anchors: Tuple[IdealHNF, ...]
    class_values: Tuple[int, ...]
    ring: CoefficientRing = attrs.field(factory=RationalField)
    _values: Dict[IdealHNF, int] = attrs.field(factory=dict, eq=False, hash=False, repr=False)

    def symbol_value(self, ideal: IdealHNF) -> int:
        """The value as +-1, for an ideal coprime to N and its conjugate or of trivial class."""
        index = self.classes.class_of(ideal)
        anchor = self.anchors[index]
        beta = totally_positive_generator(ideal * anchor.conjugate())
        if beta is None:
            raise CharacterConstructionError("no totally positive generator", ideal=ideal.label, index=index)
        value = residue_symbol(self.modulus, beta)
        if index:
            value *= self.class_values[index] * residue_symbol(self.modulus, self.field.element(anchor.norm()))
        return value

    def prime_value(self, prime: IdealHNF) -> Element:
        if prime not in self._values:
            self._values[prime] = self.symbol_value(prime)
        return self.ring.from_int(self._values[prime])

    @property
    def order(self) -> int:
        return 2

    def over(self, ring: CoefficientRing) -> "QuadraticCharacter":
        return QuadraticCharacter(self.modulus, self.classes, self.anchors, self.class_values, ring)


def _class_anchor(modulus: IdealHNF, classes: NarrowClassData, index: int) -> IdealHNF:
    """The class representative, or the least prime of the class, coprime to N and conj(N)."""
    p, _ = _residue_prime(modulus)
    rep = classes.representatives[index]
    if int(rep.norm()) % p:
        return rep
    limit = 64
    while True:
        for prime in prime_ideals_up_to(modulus.field, limit):
            if int(prime.norm()) % p and classes.class_of(prime) == index:
                return prime
        limit *= 2


def _default_class_value(modulus: IdealHNF, anchor: IdealHNF, index: int) -> int:
    g = generator(anchor)
    if g is None:
        raise CharacterConstructionError(
            "class is not principal; declare its value", index=index, ideal=anchor.label
        )
    if embedding_sign(g, 1) < 0:
        g = -g
    return residue_symbol(modulus, g)


def quadratic_character(
    modulus: IdealHNF,
    classes: NarrowClassData,
    ring: Optional[CoefficientRing] = None,
    class_values: Optional[Sequence[int]] = None,
) -> QuadraticCharacter:
    """Builds the quadratic character modulo a prime ideal of odd norm.

    Args:
        modulus: The prime ideal N.
        classes: Narrow class data of the field.
        ring: Value ring, Q by default.
        class_values: +-1 for each nontrivial narrow class, in class order,
            giving the value at the class anchor. Defaults to the residue
            symbol of the anchor's generator that is positive at the first
            embedding, when the anchor is principal.

    Returns:
        The validated character.

    Raises:
        CharacterConstructionError: When a totally positive unit is not a
            square modulo N, or the declared values are not multiplicative.
    """
    factors = factor_ideal(modulus)
    if len(factors) != 1 or factors[0][1] != 1:
        raise ConfigError("modulus of a quadratic character must be prime", ideal=modulus.label)
    p, _ = _residue_prime(modulus)
    if p == 2:
        raise ConfigError("quadratic characters need a residue field of odd size", ideal=modulus.label)
    unit = fundamental_unit(modulus.field).totally_positive_fundamental_unit
    if residue_symbol(modulus, unit) != 1:
        raise CharacterConstructionError(
            "totally positive unit is not a square modulo N", witness=str(unit), ideal=modulus.label
        )
    anchors = tuple(
        unit_ideal(modulus.field) if index == 0 else _class_anchor(modulus, classes, index)
        for index in range(classes.h_plus)
    )
    if class_values is None:
        values = [1] + [
            _default_class_value(modulus, anchors[index], index) for index in range(1, classes.h_plus)
        ]
    else:
        if len(class_values) != classes.h_plus - 1:
            raise ConfigError("one value per nontrivial narrow class is required", expected=classes.h_plus - 1)
        values = [1] + [int(v) for v in class_values]
        if any(v not in (1, -1) for v in values):
            raise CharacterConstructionError("quadratic class values must be +1 or -1", values=values)
    chi = QuadraticCharacter(modulus, classes, anchors, tuple(values), ring or RationalField())
    for left in range(1, classes.h_plus):
        for right in range(left, classes.h_plus):
            product = anchors[left] * anchors[right]
            if chi.symbol_value(product) != values[left] * values[right]:
                raise CharacterConstructionError(
                    "class values are not multiplicative", witness=(left, right), ideal=product.label
                )
    logger.info("---CHARACTER: quadratic mod %s, class values %s---", modulus.label, values)
    return chi


# --- Table and class group characters ---


@attrs.frozen
class TableCharacter(IdealCharacter):
    """A character given by its values on finitely many primes."""

    modulus: IdealHNF
    table: Dict[IdealHNF, RawValue] = attrs.field(eq=False)
    declared_order: Optional[int] = None
    ring: CoefficientRing = attrs.field(factory=RationalField)

    def prime_value(self, prime: IdealHNF) -> Element:
        if prime not in self.table:
            raise InsufficientDataError("character value missing for prime", prime=prime.label)
        return raw_value(self.ring, self.table[prime])

    @property
    def order(self) -> int:
        if self.declared_order is not None:
            return self.declared_order
        exponents = [_element_order(self.ring, raw_value(self.ring, v)) for v in self.table.values()]
        return functools.reduce(math.lcm, exponents, 1)

    def over(self, ring: CoefficientRing) -> "TableCharacter":
        return TableCharacter(self.modulus, self.table, self.declared_order, ring)


def table_character(
    modulus: IdealHNF,
    table: Dict[IdealHNF, RawValue],
    ring: Optional[CoefficientRing] = None,
    order: Optional[int] = None,
) -> TableCharacter:
    ring = ring or RationalField()
    for prime, value in table.items():
        factors = factor_ideal(prime)
        if len(factors) != 1 or factors[0][1] != 1:
            raise ConfigError("character table keys must be prime ideals", ideal=prime.label)
        if not are_coprime(prime, modulus):
            raise ConfigError("character table lists a prime dividing the modulus", ideal=prime.label)
        if not ring.is_unit(raw_value(ring, value)):
            raise CharacterConstructionError("character values must be units", prime=prime.label, value=value)
    return TableCharacter(modulus, dict(table), order, ring)


@attrs.frozen
class ClassGroupCharacter(IdealCharacter):
    """A character of the narrow class group, of modulus O."""

    classes: NarrowClassData
    values: Tuple[RawValue, ...]
    ring: CoefficientRing = attrs.field(factory=RationalField)

    @property
    def modulus(self) -> IdealHNF:
        return unit_ideal(self.classes.field)

    def prime_value(self, prime: IdealHNF) -> Element:
        return raw_value(self.ring, self.values[self.classes.class_of(prime)])

    def class_value(self, index: int) -> Element:
        return raw_value(self.ring, self.values[index])

    @property
    def order(self) -> int:
        return functools.reduce(math.lcm, (_element_order(self.ring, self.class_value(i)) for i in range(len(self.values))), 1)

    @property
    def is_trivial(self) -> bool:
        return all(self.ring.equal(self.class_value(i), self.ring.one) for i in range(len(self.values)))

    def over(self, ring: CoefficientRing) -> "ClassGroupCharacter":
        return ClassGroupCharacter(self.classes, self.values, ring)


def narrow_class_character(
    classes: NarrowClassData, values: Optional[Sequence[RawValue]] = None, ring: Optional[CoefficientRing] = None
) -> ClassGroupCharacter:
    """A narrow class group character; by default -1 off the trivial class when h+ = 2."""
    if values is None:
        if classes.h_plus != 2:
            raise ConfigError("default class character needs h+ = 2", h_plus=classes.h_plus)
        values = (1, -1)
    if len(values) != classes.h_plus:
        raise ConfigError("one value per narrow class is required", expected=classes.h_plus)
    chi = ClassGroupCharacter(classes, tuple(values), ring or RationalField())
    ring = chi.ring
    for left in range(classes.h_plus):
        for right in range(classes.h_plus):
            product = classes.multiply(left, right)
            if not ring.equal(chi.class_value(left) * chi.class_value(right), chi.class_value(product)):
                raise CharacterConstructionError("class values are not multiplicative", witness=(left, right))
    return chi


@attrs.frozen
class ProductCharacter(IdealCharacter):
    """Pointwise product of characters; its modulus is the product of the moduli."""

    factors: Tuple[IdealCharacter, ...]

    @property
    def ring(self) -> CoefficientRing:
        return self.factors[0].ring

    @property
    def modulus(self) -> IdealHNF:
        result = unit_ideal(self.factors[0].field)
        for factor in self.factors:
            result = result * factor.modulus
        return result

    def prime_value(self, prime: IdealHNF) -> Element:
        value = self.ring.one
        for factor in self.factors:
            if not are_coprime(prime, factor.modulus):
                return self.ring.zero
            value = value * self.ring.coerce(factor.prime_value(prime), factor.ring)
        return value

    @property
    def order(self) -> int:
        return functools.reduce(math.lcm, (factor.order for factor in self.factors), 1)

    @property
    def is_trivial(self) -> bool:
        return all(factor.is_trivial for factor in self.factors)

    def over(self, ring: CoefficientRing) -> "ProductCharacter":
        return ProductCharacter(tuple(factor.over(ring) for factor in self.factors))


# --- Consistency checks ---


def check_ray_class_consistency(chi: IdealCharacter, samples: int = 50, seed: int = 0) -> int:
    """Checks chi((xi)) = 1 for sampled totally positive xi = 1 mod N.

    Samples whose primes are missing from a table character are skipped.

    Returns:
        The number of samples actually checked.

    Raises:
        CharacterConstructionError: With the failing element as witness.
    """
    rng = random.Random(seed)
    first, second = chi.modulus.basis()
    one = chi.field.one
    checked = 0
    attempts = 0
    while checked < samples and attempts < 20 * samples + 100:
        attempts += 1
        nu = first * rng.randint(-4, 4) + second * rng.randint(-4, 4)
        xi = one + nu
        if not is_totally_positive(xi):
            continue
        try:
            value = char_eval(chi, principal_ideal(xi))
        except InsufficientDataError:
            continue
        if not chi.ring.equal(value, chi.ring.one):
            raise CharacterConstructionError("character is not trivial on 1 + N", witness=str(xi))
        checked += 1
    logger.debug("ray class check passed on %d samples", checked)
    return checked


def check_order(chi: IdealCharacter, primes: List[IdealHNF]) -> bool:
    """chi^order is trivial on each listed prime coprime to the modulus."""
    ring = chi.ring
    for prime in primes:
        if not are_coprime(prime, chi.modulus):
            continue
        try:
            value = chi.prime_value(prime)
        except InsufficientDataError:
            continue
        if not ring.equal(ring.power(value, chi.order), ring.one):
            return False
    return True
