"""Exact coefficient rings and their descriptors.

Elements of the rings below are sympy domain elements (QQ, ZZ, GF(p)) or
``ExtElement`` values for finite extensions, so they all support the usual
arithmetic operators. A ring object supplies constructors, parsing,
predicates, unit inversion and, for principal ideal domains, the Euclidean
data used by the Smith normal form.
"""

import abc
import functools
import itertools
import logging
import re
from fractions import Fraction
from typing import Any, FrozenSet, List, Optional, Sequence, Tuple

import attrs
from pydantic import BaseModel, Field
from sympy import Poly, Symbol, factorint, integer_nthroot, isprime, sympify
from sympy.polys.densearith import dup_add, dup_mul, dup_neg, dup_rem, dup_sub
from sympy.polys.densebasic import dup_strip
from sympy.polys.domains import GF, QQ, ZZ
from sympy.polys.euclidtools import dup_invert
from sympy.polys.polyerrors import NotInvertible

from core.errors import ConfigError, InvalidPrimeError, NotInvertibleError, UnsupportedError
from core.quad_field import FieldElement, QuadraticField

logger = logging.getLogger(__name__)

X = Symbol("x")

Element = Any


class CoefficientRing(abc.ABC):
    """Common interface of all coefficient rings."""

    is_field = False
    is_pid = False

    @property
    @abc.abstractmethod
    def descriptor(self) -> str:
        ...

    @property
    @abc.abstractmethod
    def characteristic(self) -> int:
        ...

    @property
    def zero(self) -> Element:
        return self.from_int(0)

    @property
    def one(self) -> Element:
        return self.from_int(1)

    @abc.abstractmethod
    def from_int(self, value: int) -> Element:
        ...

    @abc.abstractmethod
    def from_fraction(self, value: Fraction) -> Element:
        """Image of a rational number; raises when it is not in the ring."""

    @abc.abstractmethod
    def parse(self, text: str) -> Element:
        ...

    @abc.abstractmethod
    def format(self, value: Element) -> str:
        ...

    def is_zero(self, value: Element) -> bool:
        return not value

    def equal(self, left: Element, right: Element) -> bool:
        return self.is_zero(left - right)

    def is_unit(self, value: Element) -> bool:
        return not self.is_zero(value)

    def inv(self, value: Element) -> Element:
        if self.is_zero(value):
            raise NotInvertibleError("zero is not invertible", ring=self.descriptor)
        return self.one / value

    def power(self, value: Element, exponent: int) -> Element:
        if exponent < 0:
            return self.inv(value) ** (-exponent)
        return value**exponent

    def coerce(self, value: Element, source: "CoefficientRing") -> Element:
        """Maps an element of a subring (or the same ring) into this ring."""
        if source == self:
            return value
        return self.parse(source.format(value))

    def accepts(self, text: str) -> bool:
        try:
            self.parse(text)
        except (ConfigError, InvalidPrimeError):
            return False
        return True

    def fraction_field(self) -> "CoefficientRing":
        return self

    def embed_field_element(self, xi: FieldElement) -> Element:
        """Image of a field element; only rationals map into rings without K."""
        if xi.y:
            raise UnsupportedError("ring does not contain an image of K", ring=self.descriptor)
        return self.from_fraction(xi.x)

    def contains_image_of(self, field: QuadraticField) -> bool:
        try:
            self.embed_field_element(field.omega)
        except UnsupportedError:
            return False
        return True

    # --- Euclidean data for principal ideal domains ---

    def size(self, value: Element) -> int:
        return 0 if self.is_zero(value) else 1

    def divmod(self, left: Element, right: Element) -> Tuple[Element, Element]:
        return left * self.inv(right), self.zero

    def canonical(self, value: Element) -> Tuple[Element, Element]:
        """Returns (unit, associate) with value = unit * associate."""
        if self.is_zero(value):
            return self.one, value
        return value, self.one

    def nonunit_primes(self, value: Element) -> FrozenSet[int]:
        """Rational primes dividing a nonzero non-unit, for pivot bookkeeping."""
        return frozenset()

    def inverted_primes(self) -> FrozenSet[int]:
        return frozenset()

    def residue_field(self, p: int) -> "PrimeField":
        raise UnsupportedError("reduction is not supported for this ring", ring=self.descriptor)

    def reduce(self, value: Element, target: "PrimeField") -> Element:
        raise UnsupportedError("reduction is not supported for this ring", ring=self.descriptor)

    def __str__(self) -> str:
        return self.descriptor


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError("not an exact rational", value=text) from exc


def _format_rational(value) -> str:
    numerator, denominator = int(QQ.numer(value)), int(QQ.denom(value))
    return str(numerator) if denominator == 1 else f"{numerator}/{denominator}"


@attrs.frozen
class RationalField(CoefficientRing):
    is_field = True
    is_pid = True

    @property
    def descriptor(self) -> str:
        return "q"

    @property
    def characteristic(self) -> int:
        return 0

    @property
    def domain(self):
        return QQ

    def from_int(self, value: int) -> Element:
        return QQ(int(value))

    def from_fraction(self, value: Fraction) -> Element:
        return QQ(value.numerator, value.denominator)

    def parse(self, text: str) -> Element:
        return self.from_fraction(_parse_fraction(text))

    def format(self, value: Element) -> str:
        return _format_rational(value)

    def residue_field(self, p: int) -> "PrimeField":
        return PrimeField(p)

    def reduce(self, value: Element, target: "PrimeField") -> Element:
        return _reduce_rational(value, target)


def _reduce_rational(value, target: "PrimeField"):
    numerator, denominator = int(QQ.numer(value)), int(QQ.denom(value))
    if denominator % target.p == 0:
        raise InvalidPrimeError("prime divides a denominator", p=target.p, value=_format_rational(value))
    return target.from_int(numerator) / target.from_int(denominator)


@attrs.frozen
class IntegerRing(CoefficientRing):
    is_pid = True

    @property
    def descriptor(self) -> str:
        return "z"

    @property
    def characteristic(self) -> int:
        return 0

    @property
    def domain(self):
        return ZZ

    def from_int(self, value: int) -> Element:
        return ZZ(int(value))

    def from_fraction(self, value: Fraction) -> Element:
        if value.denominator != 1:
            raise ConfigError("not an integer", value=str(value))
        return ZZ(value.numerator)

    def parse(self, text: str) -> Element:
        return self.from_fraction(_parse_fraction(text))

    def format(self, value: Element) -> str:
        return str(int(value))

    def is_unit(self, value: Element) -> bool:
        return abs(int(value)) == 1

    def inv(self, value: Element) -> Element:
        if not self.is_unit(value):
            raise NotInvertibleError("not a unit of Z", value=int(value))
        return value

    def fraction_field(self) -> CoefficientRing:
        return RationalField()

    def size(self, value: Element) -> int:
        return abs(int(value))

    def divmod(self, left: Element, right: Element) -> Tuple[Element, Element]:
        quotient, remainder = divmod(int(left), int(right))
        return ZZ(quotient), ZZ(remainder)

    def canonical(self, value: Element) -> Tuple[Element, Element]:
        if int(value) < 0:
            return ZZ(-1), -value
        return ZZ(1), value

    def nonunit_primes(self, value: Element) -> FrozenSet[int]:
        return frozenset(factorint(abs(int(value)))) if int(value) else frozenset()

    def residue_field(self, p: int) -> "PrimeField":
        return PrimeField(p)

    def reduce(self, value: Element, target: "PrimeField") -> Element:
        return target.from_int(int(value))


def _split_off(value: int, primes: FrozenSet[int]) -> Tuple[int, int]:
    """Writes |value| = s * r with s supported on the primes and r free of them."""
    value = abs(value)
    unit_part = 1
    for p in primes:
        while value % p == 0:
            value //= p
            unit_part *= p
    return unit_part, value


@attrs.frozen
class LocalizedIntegers(CoefficientRing):
    """Z[1/S] for a finite set S of rational primes."""

    inverted: FrozenSet[int] = attrs.field(converter=frozenset)
    inverted_labels: Tuple[int, ...] = attrs.field(default=(), eq=False, hash=False)

    is_pid = True

    @property
    def descriptor(self) -> str:
        labels = self.inverted_labels or tuple(sorted(self.inverted))
        return "loc:x;inv=" + ",".join(str(v) for v in labels)

    @property
    def characteristic(self) -> int:
        return 0

    @property
    def domain(self):
        return QQ

    def from_int(self, value: int) -> Element:
        return QQ(int(value))

    def from_fraction(self, value: Fraction) -> Element:
        _, rest = _split_off(value.denominator, self.inverted)
        if rest != 1:
            raise InvalidPrimeError("denominator is not invertible", value=str(value), ring=self.descriptor)
        return QQ(value.numerator, value.denominator)

    def parse(self, text: str) -> Element:
        return self.from_fraction(_parse_fraction(text))

    def format(self, value: Element) -> str:
        return _format_rational(value)

    def is_unit(self, value: Element) -> bool:
        numerator = int(QQ.numer(value))
        return numerator != 0 and _split_off(numerator, self.inverted)[1] == 1

    def inv(self, value: Element) -> Element:
        if not self.is_unit(value):
            raise NotInvertibleError("not a unit", value=_format_rational(value), ring=self.descriptor)
        return QQ.one / value

    def fraction_field(self) -> CoefficientRing:
        return RationalField()

    def inverted_primes(self) -> FrozenSet[int]:
        return self.inverted

    def size(self, value: Element) -> int:
        numerator = int(QQ.numer(value))
        return _split_off(numerator, self.inverted)[1] if numerator else 0

    def canonical(self, value: Element) -> Tuple[Element, Element]:
        if self.is_zero(value):
            return QQ.one, value
        associate = QQ(self.size(value))
        return value / associate, associate

    def divmod(self, left: Element, right: Element) -> Tuple[Element, Element]:
        unit, modulus = self.canonical(right)
        modulus = int(modulus)
        shifted = left / unit
        numerator, denominator = int(QQ.numer(shifted)), int(QQ.denom(shifted))
        residue = (numerator * pow(denominator, -1, modulus)) % modulus if modulus > 1 else 0
        quotient = (shifted - QQ(residue)) / QQ(modulus)
        return quotient, unit * QQ(residue)

    def nonunit_primes(self, value: Element) -> FrozenSet[int]:
        size = self.size(value)
        return frozenset(factorint(size)) if size > 1 else frozenset()

    def residue_field(self, p: int) -> "PrimeField":
        if p in self.inverted:
            raise InvalidPrimeError("prime is inverted in the ring", p=p, ring=self.descriptor)
        return PrimeField(p)

    def reduce(self, value: Element, target: "PrimeField") -> Element:
        if target.p in self.inverted:
            raise InvalidPrimeError("prime is inverted in the ring", p=target.p, ring=self.descriptor)
        return _reduce_rational(value, target)


@attrs.frozen
class PrimeField(CoefficientRing):
    p: int = attrs.field()

    is_field = True
    is_pid = True

    @p.validator
    def _check_prime(self, attribute, value):
        if not isprime(value):
            raise ConfigError("characteristic must be prime", p=value)

    @property
    def descriptor(self) -> str:
        return f"fp:{self.p}"

    @property
    def characteristic(self) -> int:
        return self.p

    @property
    def domain(self):
        return _gf(self.p)

    def from_int(self, value: int) -> Element:
        return self.domain(int(value) % self.p)

    def from_fraction(self, value: Fraction) -> Element:
        if value.denominator % self.p == 0:
            raise InvalidPrimeError("prime divides a denominator", p=self.p, value=str(value))
        return self.from_int(value.numerator) / self.from_int(value.denominator)

    def parse(self, text: str) -> Element:
        return self.from_fraction(_parse_fraction(text))

    def format(self, value: Element) -> str:
        return str(int(value) % self.p)

    def elements(self) -> List[Element]:
        return [self.from_int(v) for v in range(self.p)]


@functools.lru_cache(maxsize=None)
def _gf(p: int):
    return GF(p)


@attrs.frozen(eq=False)
class ExtElement:
    """An element of base[x]/(g), coefficients listed from the constant term."""

    ring: "ExtensionField"
    coeffs: Tuple[Any, ...]

    def __eq__(self, other) -> bool:
        if isinstance(other, ExtElement):
            return self.ring == other.ring and self.ring.is_zero(self - other)
        if isinstance(other, int):
            return self.ring.is_zero(self - other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.ring, tuple(self.ring.base.format(c) for c in self.coeffs)))

    def _lift(self, other) -> Optional["ExtElement"]:
        if isinstance(other, ExtElement):
            return other
        if isinstance(other, int):
            return self.ring.from_int(other)
        try:
            return self.ring.from_base(self.ring.base.domain.convert(other))
        except Exception:
            return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self.ring._from_dup(dup_add(self.ring._dup(self), self.ring._dup(other), self.ring.base.domain))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self.ring._from_dup(dup_sub(self.ring._dup(self), self.ring._dup(other), self.ring.base.domain))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self.ring._from_dup(dup_neg(self.ring._dup(self), self.ring.base.domain))

    def __mul__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        domain = self.ring.base.domain
        product = dup_mul(self.ring._dup(self), self.ring._dup(other), domain)
        return self.ring._from_dup(dup_rem(product, self.ring._modulus_dup(), domain))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self * self.ring.inv(other)

    def __rtruediv__(self, other):
        return self.ring.inv(self) * other

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.ring.inv(self) ** (-exponent)
        result = self.ring.one
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __bool__(self) -> bool:
        return any(bool(c) for c in self.coeffs)

    def __repr__(self) -> str:
        return self.ring.format(self)


@attrs.frozen
class ExtensionField(CoefficientRing):
    """A simple extension base[x]/(g) of Q or F_p by a monic irreducible g.

    Attributes:
        base: the prime field.
        modulus: coefficients of g as base-ring strings, constant term first,
            leading 1 included.
    """

    base: CoefficientRing
    modulus: Tuple[str, ...]

    is_field = True
    is_pid = True

    @property
    def degree(self) -> int:
        return len(self.modulus) - 1

    @property
    def descriptor(self) -> str:
        poly = format_polynomial([self.base.parse(c) for c in self.modulus], self.base)
        if isinstance(self.base, PrimeField):
            return f"fq:{self.base.p},{self.degree};{poly}"
        return f"nf:{poly}"

    @property
    def characteristic(self) -> int:
        return self.base.characteristic

    def _modulus_dup(self) -> list:
        return _modulus_dup(self)

    def _dup(self, value: ExtElement) -> list:
        return dup_strip(list(reversed(value.coeffs)))

    def _from_dup(self, coefficients: list) -> ExtElement:
        domain = self.base.domain
        low_first = list(reversed(coefficients))[: self.degree]
        low_first += [domain.zero] * (self.degree - len(low_first))
        return ExtElement(self, tuple(low_first))

    def from_base(self, value) -> ExtElement:
        return self._from_dup([value])

    def from_int(self, value: int) -> ExtElement:
        return self.from_base(self.base.from_int(value))

    def from_fraction(self, value: Fraction) -> ExtElement:
        return self.from_base(self.base.from_fraction(value))

    @property
    def generator(self) -> ExtElement:
        if self.degree == 1:
            return self._from_dup([-self.base.parse(self.modulus[0])])
        return self._from_dup([self.base.one, self.base.zero])

    def from_coefficients(self, coefficients: Sequence[Any]) -> ExtElement:
        return self._from_dup(dup_strip(list(reversed(list(coefficients)))))

    def parse(self, text: str) -> ExtElement:
        text = str(text).strip()
        if text.startswith("[") and text.endswith("]"):
            parts = [part for part in text[1:-1].split(",") if part.strip()]
            if len(parts) > self.degree:
                raise ConfigError("too many coefficients", value=text, ring=self.descriptor)
            return self.from_coefficients([self.base.parse(part) for part in parts])
        return self.from_base(self.base.parse(text))

    def format(self, value: ExtElement) -> str:
        return "[" + ",".join(self.base.format(c) for c in value.coeffs) + "]"

    def coerce(self, value, source: CoefficientRing):
        if source == self:
            return value
        if source == self.base:
            return self.from_base(value)
        return self.parse(source.format(value))

    def inv(self, value: ExtElement) -> ExtElement:
        if not value:
            raise NotInvertibleError("zero is not invertible", ring=self.descriptor)
        try:
            inverse = dup_invert(self._dup(value), self._modulus_dup(), self.base.domain)
        except NotInvertible as exc:
            raise NotInvertibleError("element is not invertible", ring=self.descriptor) from exc
        return self._from_dup(inverse)

    def frobenius(self, value: ExtElement) -> ExtElement:
        """The p-th power map; only meaningful for finite fields."""
        return value ** self.characteristic

    def elements(self) -> List[ExtElement]:
        """All elements of a finite extension."""
        base = self.base.elements()
        return [self.from_coefficients(c) for c in itertools.product(base, repeat=self.degree)]

    def embed_field_element(self, xi: FieldElement) -> ExtElement:
        root = _omega_image(self, xi.field)
        if root is None:
            raise UnsupportedError("ring does not contain an image of K", ring=self.descriptor, d=xi.field.d)
        return self.from_fraction(xi.x) + self.from_fraction(xi.y) * root

    def roots_in(self, target: "ExtensionField") -> List[ExtElement]:
        """Roots of this field's modulus inside a finite target field."""
        coefficients = [target.coerce(self.base.parse(c), self.base) for c in self.modulus]
        found = []
        for candidate in target.elements():
            value = target.zero
            for c in reversed(coefficients):
                value = value * candidate + c
            if not value:
                found.append(candidate)
        return found

    def hom_to(self, target: "ExtensionField", root: ExtElement):
        """The field map sending the generator to the given root."""

        def apply(value: ExtElement) -> ExtElement:
            image = target.zero
            for c in reversed(value.coeffs):
                image = image * root + target.coerce(c, self.base)
            return image

        return apply


@functools.lru_cache(maxsize=None)
def _modulus_dup(ring: ExtensionField) -> list:
    return [ring.base.parse(c) for c in reversed(ring.modulus)]


@functools.lru_cache(maxsize=None)
def _omega_image(ring: ExtensionField, field: QuadraticField) -> Optional[ExtElement]:
    """Image of w under the embedding chosen for a quadratic extension of Q."""
    if ring.characteristic != 0 or ring.degree != 2:
        return None
    q, p, _ = (_parse_fraction(c) for c in ring.modulus)
    own_disc = p * p - 4 * q
    ratio = Fraction(field.discriminant) / own_disc
    root_num, root_den = _rational_sqrt(ratio.numerator), _rational_sqrt(ratio.denominator)
    if root_num is None or root_den is None:
        return None
    scale = ring.from_fraction(Fraction(root_num, root_den))
    sqrt_disc = scale * (ring.generator * 2 + ring.from_fraction(p))
    return (sqrt_disc + field.t) / 2


def _rational_sqrt(value: int) -> Optional[int]:
    if value < 0:
        return None
    root, exact = integer_nthroot(value, 2)
    return int(root) if exact else None


@attrs.frozen
class LocalizedOrder(ExtensionField):
    """O[1/S] for a number field O of degree > 1.

    Arithmetic happens in the number field. Only power-basis denominators
    are checked for membership and no Smith form is available.
    """

    inverted: FrozenSet[int] = attrs.field(default=frozenset(), converter=frozenset)

    is_field = False
    is_pid = False

    @property
    def descriptor(self) -> str:
        poly = format_polynomial([self.base.parse(c) for c in self.modulus], self.base)
        return f"loc:{poly};inv=" + ",".join(str(p) for p in sorted(self.inverted))

    def is_unit(self, value) -> bool:
        return bool(value)

    def parse(self, text: str) -> ExtElement:
        value = ExtensionField.parse(self, text)
        for c in value.coeffs:
            _, rest = _split_off(int(QQ.denom(c)), self.inverted)
            if rest != 1:
                raise InvalidPrimeError("denominator is not invertible", value=text, ring=self.descriptor)
        return value

    def fraction_field(self) -> CoefficientRing:
        return ExtensionField(self.base, self.modulus)

    def inverted_primes(self) -> FrozenSet[int]:
        return self.inverted


# --- Descriptors ---


def format_polynomial(coefficients: Sequence[Any], base: CoefficientRing) -> str:
    """Formats constant-first coefficients as text like ``x^2+1``."""
    terms = []
    for power in range(len(coefficients) - 1, -1, -1):
        text = base.format(coefficients[power])
        if text == "0":
            continue
        if power == 0:
            terms.append(text)
            continue
        monomial = "x" if power == 1 else f"x^{power}"
        if text == "1":
            terms.append(monomial)
        elif text == "-1":
            terms.append("-" + monomial)
        else:
            terms.append(f"{text}*{monomial}")
    return "+".join(terms).replace("+-", "-") or "0"


def _parse_polynomial(text: str, base: CoefficientRing) -> Tuple[str, ...]:
    try:
        expression = sympify(text.replace("^", "**"), locals={"x": X})
        if isinstance(base, PrimeField):
            poly = Poly(expression, X, modulus=base.p)
        else:
            poly = Poly(expression, X, domain="QQ")
    except Exception as exc:
        raise ConfigError("cannot parse polynomial", text=text) from exc
    if poly.degree() < 1:
        raise ConfigError("polynomial must have positive degree", text=text)
    if not poly.is_irreducible:
        raise ConfigError("polynomial is not irreducible", text=text)
    leading = poly.LC()
    coefficients = [base.parse(str(c / leading if not isinstance(base, PrimeField) else c)) for c in poly.all_coeffs()]
    if isinstance(base, PrimeField):
        inverse = base.inv(coefficients[0])
        coefficients = [c * inverse for c in coefficients]
    return tuple(base.format(c) for c in reversed(coefficients))


def smallest_irreducible(p: int, degree: int) -> Tuple[str, ...]:
    """The lexicographically first monic irreducible of the given degree over F_p."""
    for tail in itertools.product(range(p), repeat=degree):
        coefficients = [1] + list(tail)
        if Poly(coefficients, X, modulus=p).is_irreducible:
            return tuple(str(c) for c in reversed(coefficients))
    raise ConfigError("no irreducible polynomial found", p=p, degree=degree)


def finite_field(p: int, degree: int) -> CoefficientRing:
    if degree == 1:
        return PrimeField(p)
    return ExtensionField(PrimeField(p), smallest_irreducible(p, degree))


_LOC = re.compile(r"^loc:(?P<poly>[^;]+);inv=(?P<inv>[0-9, ]+)$")


@functools.lru_cache(maxsize=None)
def parse_ring(descriptor: str) -> CoefficientRing:
    """Parses a ring descriptor such as ``q``, ``fp:3``, ``fq:3,2`` or ``nf:x^2-6``."""
    text = descriptor.strip()
    try:
        if text in ("q", "Q"):
            return RationalField()
        if text in ("z", "Z"):
            return IntegerRing()
        if text.startswith("fp:"):
            return PrimeField(int(text[3:]))
        if text.startswith("fq:"):
            body, _, poly = text[3:].partition(";")
            p_text, k_text = body.split(",")
            p, k = int(p_text), int(k_text)
            if not poly:
                return finite_field(p, k)
            base = PrimeField(p)
            modulus = _parse_polynomial(poly, base)
            if len(modulus) - 1 != k:
                raise ConfigError("polynomial degree does not match", descriptor=text)
            return ExtensionField(base, modulus) if k > 1 else base
        if text.startswith("nf:"):
            modulus = _parse_polynomial(text[3:], RationalField())
            if len(modulus) == 2:
                return RationalField()
            return ExtensionField(RationalField(), modulus)
        match = _LOC.match(text)
        if match:
            labels = tuple(int(v) for v in match.group("inv").split(",") if v.strip())
            primes = frozenset(p for v in labels for p in factorint(v))
            modulus = _parse_polynomial(match.group("poly"), RationalField())
            if len(modulus) == 2:
                return LocalizedIntegers(primes, labels)
            return LocalizedOrder(RationalField(), modulus, primes)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError("malformed ring descriptor", descriptor=descriptor) from exc
    raise ConfigError("unknown ring descriptor", descriptor=descriptor)


def reduce_mod(value, ring: CoefficientRing, p: int):
    """Reduces an element, or a matrix given as a list of rows, modulo p."""
    target = ring.residue_field(p)
    if isinstance(value, list):
        return [[ring.reduce(entry, target) for entry in row] for row in value]
    return ring.reduce(value, target)


# --- Ring and weight compatibility ---


class CompatibilityReport(BaseModel):
    """Outcome of checking the coefficient ring conditions for a weight set."""

    ok: bool = Field(description="True when every weight is supported over the ring.")
    condition: Optional[int] = Field(default=None, description="The failing condition, 1 or 2.")
    weight: Optional[List[int]] = Field(default=None, description="The offending weight.")
    message: str = Field(default="", description="Explanation of the violation.")


def validate_ring_weight_compat(
    ring: CoefficientRing, weights: Sequence[Sequence[int]], field: Optional[QuadraticField] = None, level_norm: int = 1
) -> CompatibilityReport:
    """Checks the two conditions a coefficient ring must meet for a weight set.

    Condition (1): the level norm is invertible. Condition (2): the factors
    xi^((k0 - k)/2) make sense, which for non-parallel weights needs
    characteristic zero and an image of K in the ring.

    Args:
        ring: The coefficient ring.
        weights: Weight vectors (k1, k2) used in the computation.
        field: The quadratic field, needed to test for an image of K.
        level_norm: Norm of the level.

    Returns:
        A report naming the first failing condition, if any.
    """
    if level_norm != 1:
        try:
            if not ring.is_unit(ring.from_int(level_norm)):
                return CompatibilityReport(ok=False, condition=1, message=f"{level_norm} is not a unit")
        except InvalidPrimeError:
            return CompatibilityReport(ok=False, condition=1, message=f"{level_norm} is not a unit")
    for weight in weights:
        k1, k2 = int(weight[0]), int(weight[1])
        if k1 == k2:
            continue
        if (k1 - k2) % 2:
            return CompatibilityReport(
                ok=False, condition=2, weight=[k1, k2], message="weight is not paritious"
            )
        if ring.characteristic > 0:
            return CompatibilityReport(
                ok=False,
                condition=2,
                weight=[k1, k2],
                message="non-parallel weight needs totally positive elements to be units",
            )
        if field is not None and not ring.contains_image_of(field):
            return CompatibilityReport(
                ok=False, condition=2, weight=[k1, k2], message="ring does not contain an image of K"
            )
    return CompatibilityReport(ok=True)
