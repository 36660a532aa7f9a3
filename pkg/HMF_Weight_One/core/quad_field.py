"""Exact arithmetic in real quadratic fields K = Q(sqrt d).

Elements are written x + y*w in the integral basis 1, w of the maximal
order, with w = sqrt(d) for d = 2, 3 mod 4 and w = (1 + sqrt d)/2 otherwise.
Signs under the two real embeddings are decided with integer arithmetic only.
"""

import functools
import logging
from fractions import Fraction
from typing import Tuple, Union

import attrs
from sympy import factorint
from sympy.ntheory.continued_fraction import continued_fraction_periodic

from core.errors import ConfigError, NotInvertibleError

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


def _to_fraction(value: Rational) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def _squarefree(d: int) -> bool:
    return all(exponent == 1 for exponent in factorint(d).values())


@attrs.frozen
class QuadraticField:
    """The real quadratic field Q(sqrt d) with its maximal order Z[w].

    Attributes:
        d: squarefree integer greater than one.
    """

    d: int = attrs.field(converter=int)

    @d.validator
    def _check_d(self, attribute, value):
        if value <= 1 or not _squarefree(value):
            raise ConfigError("field parameter must be a squarefree integer > 1", d=value)

    @property
    def t(self) -> int:
        """Trace of w; w satisfies w^2 = t*w + n."""
        return 1 if self.d % 4 == 1 else 0

    @property
    def n(self) -> int:
        return (self.d - 1) // 4 if self.d % 4 == 1 else self.d

    @property
    def discriminant(self) -> int:
        return self.d if self.d % 4 == 1 else 4 * self.d

    @property
    def omega_label(self) -> str:
        return "(1+sqrt(%d))/2" % self.d if self.t else "sqrt(%d)" % self.d

    def element(self, x: Rational, y: Rational = 0) -> "FieldElement":
        return FieldElement(self, _to_fraction(x), _to_fraction(y))

    @property
    def zero(self) -> "FieldElement":
        return self.element(0)

    @property
    def one(self) -> "FieldElement":
        return self.element(1)

    @property
    def omega(self) -> "FieldElement":
        return self.element(0, 1)


@attrs.frozen
class FieldElement:
    """An element x + y*w of a quadratic field with exact rational coordinates."""

    field: QuadraticField
    x: Fraction = attrs.field(converter=_to_fraction)
    y: Fraction = attrs.field(converter=_to_fraction, default=Fraction(0))

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ConfigError("elements of different fields", left=self.field.d, right=other.field.d)
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, other, 0)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, self.x + other.x, self.y + other.y)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, -self.x, -self.y)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, self.x - other.x, self.y - other.y)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t, n = self.field.t, self.field.n
        yy = self.y * other.y
        return FieldElement(
            self.field,
            self.x * other.x + yy * n,
            self.x * other.y + self.y * other.x + yy * t,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = self.field.one
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __bool__(self) -> bool:
        return bool(self.x) or bool(self.y)

    def conjugate(self) -> "FieldElement":
        return FieldElement(self.field, self.x + self.y * self.field.t, -self.y)

    def norm(self) -> Fraction:
        t, n = self.field.t, self.field.n
        return self.x * self.x + t * self.x * self.y - n * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x + self.field.t * self.y

    def inverse(self) -> "FieldElement":
        norm = self.norm()
        if norm == 0:
            raise NotInvertibleError("zero has no inverse in the field")
        conj = self.conjugate()
        return FieldElement(self.field, conj.x / norm, conj.y / norm)

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def is_rational(self) -> bool:
        return self.y == 0

    def embedding_parts(self, i: int) -> Tuple[Fraction, Fraction]:
        """Returns (u, v) with the i-th embedding equal to u + v*sqrt(d)."""
        u = self.x + self.y * Fraction(self.field.t, 2)
        w = self.y / 2 if self.field.t else self.y
        return u, (w if i == 1 else -w)

    def __str__(self) -> str:
        return format_element(self)


def _sign(value) -> int:
    return (value > 0) - (value < 0)


def embedding_sign(xi: FieldElement, i: int) -> int:
    """Sign of the i-th real embedding of xi, decided without floating point.

    Args:
        xi: The field element.
        i: Embedding index, 1 or 2.

    Returns:
        -1, 0 or +1.
    """
    u, v = xi.embedding_parts(i)
    if v == 0:
        return _sign(u)
    if u == 0:
        return _sign(v)
    if (u > 0) == (v > 0):
        return _sign(u)
    # opposite signs: compare u^2 with v^2 d
    gap = u * u - v * v * xi.field.d
    return _sign(u) if gap > 0 else _sign(v)


def is_totally_positive(xi: FieldElement) -> bool:
    return embedding_sign(xi, 1) > 0 and embedding_sign(xi, 2) > 0


@attrs.frozen
class UnitData:
    """The fundamental unit and the generator of the totally positive units."""

    fundamental_unit: FieldElement
    norm_of_unit: int
    totally_positive_fundamental_unit: FieldElement


def _convergents(field: QuadraticField):
    """Yields continued fraction convergents p/q of w, repeating the period."""
    if field.t:
        expansion = continued_fraction_periodic(1, 2, field.d)
    else:
        expansion = continued_fraction_periodic(0, 1, field.d)
    head = [term for term in expansion if not isinstance(term, list)]
    period = expansion[-1] if isinstance(expansion[-1], list) else []
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    terms = head
    while True:
        for a in terms:
            p_prev, p = p, a * p + p_prev
            q_prev, q = q, a * q + q_prev
            yield p, q
        terms = period


@functools.lru_cache(maxsize=None)
def fundamental_unit(field: QuadraticField) -> UnitData:
    """Finds the fundamental unit from the continued fraction of w.

    The unit is normalised to be larger than one at the first embedding.
    """
    for p, q in _convergents(field):
        candidate = field.element(p, -q)
        if abs(candidate.norm()) == 1:
            break
    one = field.one
    options = [candidate, -candidate, candidate.inverse(), -candidate.inverse()]
    unit = next(u for u in options if embedding_sign(u - one, 1) > 0)
    norm = int(unit.norm())
    positive = unit if norm == 1 else unit * unit
    logger.debug("fundamental unit of Q(sqrt %d): %s (norm %d)", field.d, unit, norm)
    return UnitData(fundamental_unit=unit, norm_of_unit=norm, totally_positive_fundamental_unit=positive)


def format_element(xi: FieldElement, symbol: str = "w") -> str:
    """Human readable form such as ``2-w`` or ``1/2+3/2*w``."""
    if not xi.y:
        return str(xi.x)
    if xi.y == 1:
        tail = symbol
    elif xi.y == -1:
        tail = "-" + symbol
    else:
        tail = f"{xi.y}*{symbol}"
    if not xi.x:
        return tail
    return f"{xi.x}{tail}" if tail.startswith("-") else f"{xi.x}+{tail}"


def element_to_json(xi: FieldElement) -> dict:
    return {"x": str(xi.x), "y": str(xi.y)}


def element_from_json(field: QuadraticField, payload: dict) -> FieldElement:
    try:
        return field.element(Fraction(payload["x"]), Fraction(payload.get("y", "0")))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError("malformed field element", payload=payload) from exc
