"""Ideals of real quadratic fields, the narrow class group and box enumeration.

An ideal is stored as c * (Z a + Z (b + w)) with the primitive part in
Hermite normal form, so equality of ideals is structural equality.
"""

import functools
import logging
import math
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import attrs
from sympy import factorint, primerange
from sympy.core.intfunc import igcdex
from sympy.ntheory.residue_ntheory import sqrt_mod

from core.errors import ConfigError, HMFError
from core.quad_field import (
    FieldElement,
    QuadraticField,
    Rational,
    embedding_sign,
    fundamental_unit,
    is_totally_positive,
)

logger = logging.getLogger(__name__)

# square roots are enclosed between multiples of 2^-48
_ROOT_SCALE = 1 << 48


@attrs.frozen(order=False)
class IdealHNF:
    """A nonzero fractional ideal c * (Z a + Z (b + w)).

    Attributes:
        field: the quadratic field.
        a: positive integer, the norm of the primitive part.
        b: residue with 0 <= b < a and a | N(b + w).
        c: positive rational scale.
    """

    field: QuadraticField
    a: int
    b: int
    c: Fraction = attrs.field(converter=Fraction)

    @property
    def is_integral(self) -> bool:
        return self.c.denominator == 1

    @property
    def label(self) -> str:
        return f"{self.a}.{self.b}.{self.c}"

    @property
    def sort_key(self) -> Tuple:
        return (self.norm(), self.a, self.b, self.c)

    def norm(self) -> Fraction:
        return self.a * self.c * self.c

    def basis(self) -> Tuple[FieldElement, FieldElement]:
        return (
            self.field.element(self.a * self.c, 0),
            self.field.element(self.b * self.c, self.c),
        )

    def contains(self, xi: FieldElement) -> bool:
        n = xi.y / self.c
        if n.denominator != 1:
            return False
        m = (xi.x / self.c - n * self.b) / self.a
        return m.denominator == 1

    def __mul__(self, other):
        if isinstance(other, IdealHNF):
            return ideal_product(self, other)
        if isinstance(other, FieldElement):
            return ideal_product(self, principal_ideal(other))
        if isinstance(other, (int, Fraction)):
            return scale_ideal(self, Fraction(other))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other: "IdealHNF") -> "IdealHNF":
        return ideal_product(self, other.inverse())

    def __pow__(self, exponent: int) -> "IdealHNF":
        base = self if exponent >= 0 else self.inverse()
        result = unit_ideal(self.field)
        for _ in range(abs(exponent)):
            result = ideal_product(result, base)
        return result

    def conjugate(self) -> "IdealHNF":
        return IdealHNF(self.field, self.a, (-self.b - self.field.t) % self.a, self.c)

    def inverse(self) -> "IdealHNF":
        conj = self.conjugate()
        return IdealHNF(self.field, conj.a, conj.b, 1 / (self.a * self.c))

    def divides(self, other: "IdealHNF") -> bool:
        """True when other is contained in self."""
        return (other / self).is_integral

    def primitive(self) -> "IdealHNF":
        return IdealHNF(self.field, self.a, self.b, 1)

    def __str__(self) -> str:
        return self.label


def unit_ideal(field: QuadraticField) -> IdealHNF:
    return IdealHNF(field, 1, 0, 1)


def scale_ideal(ideal: IdealHNF, q: Fraction) -> IdealHNF:
    if q == 0:
        raise HMFError("the zero ideal is not supported")
    return IdealHNF(ideal.field, ideal.a, ideal.b, ideal.c * abs(q))


def _lattice_hnf(vectors: Sequence[Tuple[int, int]]) -> Tuple[int, int, int]:
    """Reduces integer vectors (x, y) to a basis (e, 0), (f, g) with g > 0."""
    pivot: Optional[Tuple[int, int]] = None
    e = 0
    for x, y in vectors:
        if y == 0:
            e = math.gcd(e, x)
            continue
        if pivot is None:
            pivot = (x, y)
            continue
        px, py = pivot
        s, t, g = igcdex(py, y)
        pivot = (s * px + t * x, g)
        e = math.gcd(e, (y // g) * px - (py // g) * x)
    if pivot is None or e == 0:
        raise HMFError("generators do not span a lattice of rank two")
    f, g = pivot
    if g < 0:
        f, g = -f, -g
    return abs(e), f % abs(e), g


def ideal_from_generators(field: QuadraticField, generators: Sequence[FieldElement]) -> IdealHNF:
    """Returns the ideal generated by the given elements."""
    elements = [xi for xi in generators if xi]
    if not elements:
        raise HMFError("the zero ideal is not supported")
    omega = field.omega
    spanning = elements + [xi * omega for xi in elements]
    denominator = 1
    for xi in spanning:
        denominator = math.lcm(denominator, xi.x.denominator, xi.y.denominator)
    vectors = [(int(xi.x * denominator), int(xi.y * denominator)) for xi in spanning]
    e, f, g = _lattice_hnf(vectors)
    # Z[w]-stability forces g | e and g | f
    a, b = e // g, (f // g) % (e // g)
    return IdealHNF(field, a, b, Fraction(g, denominator))


def principal_ideal(xi: FieldElement) -> IdealHNF:
    return ideal_from_generators(xi.field, [xi])


def ideal_product(left: IdealHNF, right: IdealHNF) -> IdealHNF:
    if left.field != right.field:
        raise ConfigError("ideals of different fields")
    u1, u2 = left.basis()
    v1, v2 = right.basis()
    return ideal_from_generators(left.field, [u1 * v1, u1 * v2, u2 * v1, u2 * v2])


def ideal_norm(ideal: IdealHNF) -> Fraction:
    return ideal.norm()


def ideal_from_label(field: QuadraticField, label: str) -> IdealHNF:
    """Parses an ``a.b.c`` label and checks that it is in canonical form."""
    try:
        a_text, b_text, c_text = label.split(".", 2)
        a, b, c = int(a_text), int(b_text), Fraction(c_text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError("malformed ideal label", label=label) from exc
    if a <= 0 or c <= 0 or not 0 <= b < a or (b * b + field.t * b - field.n) % a:
        raise ConfigError("label is not a canonical ideal", label=label)
    return IdealHNF(field, a, b, c)


def ideal_to_json(ideal: IdealHNF) -> dict:
    return {"a": ideal.a, "b": ideal.b, "c": str(ideal.c)}


def ideal_from_json(field: QuadraticField, payload) -> IdealHNF:
    if isinstance(payload, str):
        return ideal_from_label(field, payload)
    try:
        label = f"{int(payload['a'])}.{int(payload['b'])}.{Fraction(payload.get('c', '1'))}"
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("malformed ideal", payload=payload) from exc
    return ideal_from_label(field, label)


# --- Primes ---


def _omega_roots_mod(field: QuadraticField, p: int) -> List[int]:
    """Roots of x^2 - t x - n modulo p."""
    if p == 2:
        return [r for r in range(2) if (r * r - field.t * r - field.n) % 2 == 0]
    disc = field.discriminant % p
    if disc == 0:
        roots = [0]
    else:
        roots = sqrt_mod(disc, p, all_roots=True) or []
    half = pow(2, -1, p)
    return sorted({((field.t + s) * half) % p for s in roots})


@functools.lru_cache(maxsize=None)
def primes_above(field: QuadraticField, p: int) -> Tuple[Tuple[IdealHNF, int, int], ...]:
    """Prime ideals above the rational prime p as (prime, e, f) triples."""
    roots = _omega_roots_mod(field, p)
    if not roots:
        return ((IdealHNF(field, 1, 0, p), 1, 2),)
    if field.discriminant % p == 0:
        return ((IdealHNF(field, p, (-roots[0]) % p, 1), 2, 1),)
    primes = sorted((IdealHNF(field, p, (-r) % p, 1) for r in roots), key=lambda q: q.b)
    return tuple((prime, 1, 1) for prime in primes)


def prime_ideals_up_to(field: QuadraticField, bound: int) -> List[IdealHNF]:
    """Prime ideals of norm strictly below the bound, by norm then label."""
    found = []
    for p in primerange(2, bound):
        for prime, _, f in primes_above(field, p):
            if p**f < bound:
                found.append(prime)
    return sorted(found, key=lambda q: q.sort_key)


def factor_ideal(ideal: IdealHNF) -> Tuple[Tuple[IdealHNF, int], ...]:
    """Prime factorisation of an integral ideal, sorted by prime."""
    if not ideal.is_integral:
        raise HMFError("only integral ideals can be factored", ideal=ideal.label)
    factors = []
    remaining = ideal
    for p in sorted(factorint(int(ideal.norm()))):
        for prime, _, _ in primes_above(ideal.field, p):
            exponent = 0
            while prime.divides(remaining):
                remaining = remaining / prime
                exponent += 1
            if exponent:
                factors.append((prime, exponent))
    return tuple(sorted(factors, key=lambda item: item[0].sort_key))


def ideal_from_factors(field: QuadraticField, factors) -> IdealHNF:
    result = unit_ideal(field)
    for prime, exponent in factors:
        result = result * prime**exponent
    return result


def divisors(ideal: IdealHNF) -> List[IdealHNF]:
    """All integral ideals containing the given integral ideal, by norm."""
    found = [unit_ideal(ideal.field)]
    for prime, exponent in factor_ideal(ideal):
        powers = [prime**k for k in range(exponent + 1)]
        found = [d * power for d in found for power in powers]
    return sorted(found, key=lambda q: q.sort_key)


def ideal_gcd(left: IdealHNF, right: IdealHNF) -> IdealHNF:
    """The sum of two integral ideals."""
    right_factors = dict(factor_ideal(right))
    common = [
        (prime, min(exponent, right_factors[prime]))
        for prime, exponent in factor_ideal(left)
        if prime in right_factors
    ]
    return ideal_from_factors(left.field, common)


def are_coprime(left: IdealHNF, right: IdealHNF) -> bool:
    return ideal_gcd(left, right) == unit_ideal(left.field)


# --- Enumeration by norm ---


@attrs.frozen
class IdealIndex:
    """All integral ideals of norm below a bound, with their factorisations."""

    field: QuadraticField
    bound: int
    ideals: Tuple[IdealHNF, ...]
    factorizations: Dict[IdealHNF, Tuple[Tuple[IdealHNF, int], ...]] = attrs.field(eq=False, hash=False)
    positions: Dict[IdealHNF, int] = attrs.field(eq=False, hash=False)

    def __len__(self) -> int:
        return len(self.ideals)

    def __contains__(self, ideal: IdealHNF) -> bool:
        return ideal in self.positions

    def position(self, ideal: IdealHNF) -> int:
        return self.positions[ideal]


@functools.lru_cache(maxsize=64)
def ideal_index(field: QuadraticField, bound: int) -> IdealIndex:
    primes = prime_ideals_up_to(field, bound)
    found: List[Tuple[IdealHNF, Tuple]] = []

    def extend(start: int, current: IdealHNF, factors: Tuple) -> None:
        found.append((current, factors))
        for i in range(start, len(primes)):
            prime = primes[i]
            if current.norm() * prime.norm() >= bound:
                break
            power, exponent = current, 0
            while power.norm() * prime.norm() < bound:
                power = power * prime
                exponent += 1
                extend(i + 1, power, factors + ((prime, exponent),))

    extend(0, unit_ideal(field), ())
    found.sort(key=lambda item: item[0].sort_key)
    ideals = tuple(item[0] for item in found)
    logger.debug("enumerated %d ideals of norm < %d in Q(sqrt %d)", len(ideals), bound, field.d)
    return IdealIndex(
        field=field,
        bound=bound,
        ideals=ideals,
        factorizations={ideal: factors for ideal, factors in found},
        positions={ideal: i for i, ideal in enumerate(ideals)},
    )


def ideals_up_to(field: QuadraticField, bound: int) -> List[IdealHNF]:
    """Integral ideals of norm strictly below the bound, each exactly once."""
    if bound < 1:
        raise HMFError("bound must be at least 1", bound=bound)
    return list(ideal_index(field, bound).ideals)


# --- Lattice points in boxes ---


@functools.lru_cache(maxsize=None)
def _root_bounds(n: int) -> Tuple[Fraction, Fraction]:
    """Rationals lo < sqrt(n) < hi from an integer square root."""
    r = math.isqrt(n * _ROOT_SCALE * _ROOT_SCALE)
    return Fraction(r - 1, _ROOT_SCALE), Fraction(r + 1, _ROOT_SCALE)


def _times_root(coefficient: Fraction, n: int) -> Tuple[Fraction, Fraction]:
    """Rational bounds on coefficient * sqrt(n)."""
    lo, hi = _root_bounds(n)
    if coefficient >= 0:
        return coefficient * lo, coefficient * hi
    return coefficient * hi, coefficient * lo


def embedding_bounds(xi: FieldElement, i: int) -> Tuple[Fraction, Fraction]:
    """Rational bounds on the i-th real embedding of xi."""
    u, v = xi.embedding_parts(i)
    lo, hi = _times_root(v, xi.field.d)
    return u + lo, u + hi


def lattice_points(
    ideal: IdealHNF, low1: Rational, high1: Rational, low2: Rational, high2: Rational
) -> Iterator[FieldElement]:
    """Yields a superset of the lattice points with low_i < xi^(i) < high_i.

    The ranges come from rational enclosures of sqrt(disc), never from floats.
    """
    field = ideal.field
    disc = field.discriminant
    low1, high1, low2, high2 = (Fraction(bound) for bound in (low1, high1, low2, high2))
    # xi^(1) - xi^(2) = y * sqrt(disc)
    y_low = _times_root((low1 - high2) / disc, disc)[0]
    y_high = _times_root((high1 - low2) / disc, disc)[1]
    c = ideal.c
    for n in range(math.floor(y_low / c), math.ceil(y_high / c) + 1):
        y = c * n
        base = y * Fraction(field.t, 2)
        spread_lo, spread_hi = _times_root(y / 2, disc)
        x_low = max(low1 - base - spread_hi, low2 - base + spread_lo)
        x_high = min(high1 - base - spread_lo, high2 - base + spread_hi)
        if x_low > x_high:
            continue
        m_low = math.floor((x_low / c - n * ideal.b) / ideal.a)
        m_high = math.ceil((x_high / c - n * ideal.b) / ideal.a)
        for m in range(m_low, m_high + 1):
            yield field.element(c * (m * ideal.a + n * ideal.b), y)


def points_in_box(lattice: IdealHNF, xi: FieldElement) -> List[FieldElement]:
    """Totally positive points xi1 of the lattice with xi - xi1 totally positive.

    The box corners are the embeddings of xi, so the result is exact.
    """
    if embedding_sign(xi, 1) <= 0 or embedding_sign(xi, 2) <= 0:
        return []
    high1 = embedding_bounds(xi, 1)[1]
    high2 = embedding_bounds(xi, 2)[1]
    found = {
        point
        for point in lattice_points(lattice, 0, high1, 0, high2)
        if is_totally_positive(point) and is_totally_positive(xi - point)
    }
    return sorted(found, key=lambda point: (point.x, point.y))


# --- Generators of principal ideals ---


def _window_generators(primitive: IdealHNF) -> List[FieldElement]:
    """Generators of a primitive ideal up to units, or [] when it is not principal.

    Every generator has a unit multiple with 1/eps < xi^(1)/|xi^(2)| < eps for the
    fundamental unit eps, and then |y| * sqrt(disc) <= 2 sqrt(a * eps). For each
    such y the norm equation x^2 + t x y - n y^2 = +-a is solved with isqrt.
    """
    field = primitive.field
    a, disc = primitive.a, field.discriminant
    unit = fundamental_unit(field).fundamental_unit
    eps_high = embedding_bounds(unit, 1)[1]
    y_max = math.isqrt(math.floor(4 * a * eps_high / disc)) + 1
    found = []
    for y in range(-y_max, y_max + 1):
        for sign in (1, -1):
            delta = y * y * disc + 4 * sign * a
            if delta < 0:
                continue
            r = math.isqrt(delta)
            if r * r != delta:
                continue
            for numerator in {-field.t * y + r, -field.t * y - r}:
                if numerator % 2:
                    continue
                x = numerator // 2
                if (x - y * primitive.b) % a == 0:
                    found.append(field.element(x, y))
    return found


def _trace_key(point: FieldElement) -> Tuple:
    return (point.trace(), -point.y)


def _least_trace(xi: FieldElement, unit: FieldElement) -> FieldElement:
    """The unit multiple xi * unit^k of least trace; the trace is convex in k."""
    inverse = unit.inverse()
    while True:
        step = min(xi * unit, xi * inverse, key=_trace_key)
        if _trace_key(step) >= _trace_key(xi):
            return xi
        xi = step


def totally_positive_generator(ideal: IdealHNF) -> Optional[FieldElement]:
    """A totally positive generator of the ideal, or None.

    Among all such generators the one of least trace is returned, ties broken
    by the larger first embedding.
    """
    primitive = ideal.primitive()
    units = fundamental_unit(ideal.field)
    candidates = []
    for xi in _window_generators(primitive):
        if xi.norm() < 0:
            if units.norm_of_unit == 1:
                continue
            xi = xi * units.fundamental_unit
        if embedding_sign(xi, 1) < 0:
            xi = -xi
        candidates.append(_least_trace(xi, units.totally_positive_fundamental_unit))
    if not candidates:
        return None
    return min(candidates, key=_trace_key) * ideal.c


def generator(ideal: IdealHNF) -> Optional[FieldElement]:
    """Some generator of the ideal, chosen small for display, or None."""
    unit = fundamental_unit(ideal.field).fundamental_unit
    candidates = [
        sign * xi * power
        for xi in _window_generators(ideal.primitive())
        for power in (unit, ideal.field.one, unit.inverse())
        for sign in (1, -1)
    ]
    if not candidates:
        return None
    best = min(candidates, key=lambda p: (abs(p.x) + abs(p.y), p.x < 0, p.y > 0, p.x, p.y))
    return best * ideal.c


# --- Narrow class group ---


def _below_root(value: int, disc: int) -> bool:
    """value < sqrt(disc)."""
    return value < 0 or value * value < disc


def _above_root(value: int, disc: int) -> bool:
    """value > sqrt(disc)."""
    return value > 0 and value * value > disc


def reduced_forms(disc: int) -> List[Tuple[int, int, int]]:
    """Reduced indefinite binary quadratic forms (a, b, c) of the discriminant."""
    forms = []
    b = 1
    while _below_root(b, disc):
        if (b - disc) % 2 == 0:
            product = (b * b - disc) // 4
            for a_abs in range(1, abs(product) + 1):
                if product % a_abs:
                    continue
                if not (_above_root(2 * a_abs + b, disc) and _below_root(2 * a_abs - b, disc)):
                    continue
                for a in (a_abs, -a_abs):
                    forms.append((a, b, product // a))
        b += 1
    return sorted(forms)


def _rho(form: Tuple[int, int, int], disc: int) -> Tuple[int, int, int]:
    a, b, c = form
    step = 2 * abs(c)
    b_new = -b % step
    while _below_root(b_new + step, disc):
        b_new += step
    while not _below_root(b_new, disc):
        b_new -= step
    return (c, b_new, (b_new * b_new - disc) // (4 * c))


def narrow_class_number(field: QuadraticField) -> int:
    """Counts cycles of reduced forms of the field discriminant."""
    disc = field.discriminant
    remaining = set(reduced_forms(disc))
    cycles = 0
    while remaining:
        start = min(remaining)
        form = start
        while True:
            remaining.discard(form)
            form = _rho(form, disc)
            if form == start or form not in remaining:
                break
        cycles += 1
    return cycles


@attrs.frozen
class NarrowClassData:
    """Representatives of the narrow class group and class lookups.

    Representatives are indexed by lambda = 0 .. h_plus - 1 with the trivial
    class first. Lookups are memoised per instance.
    """

    field: QuadraticField
    representatives: Tuple[IdealHNF, ...]
    _classes: Dict[IdealHNF, int] = attrs.field(factory=dict, eq=False, hash=False, repr=False)
    _table: Dict[Tuple[int, int], int] = attrs.field(factory=dict, eq=False, hash=False, repr=False)

    @property
    def h_plus(self) -> int:
        return len(self.representatives)

    @property
    def labels(self) -> List[str]:
        return [rep.label for rep in self.representatives]

    def _direct_class(self, ideal: IdealHNF) -> int:
        for index, rep in enumerate(self.representatives):
            if totally_positive_generator(ideal / rep) is not None:
                return index
        raise HMFError("ideal matches no narrow class representative", ideal=ideal.label)

    def class_of(self, ideal: IdealHNF) -> int:
        """Index lambda with [ideal] = [t_lambda]."""
        if ideal not in self._classes:
            if ideal.is_integral and ideal.norm() > 1 and not _is_prime(ideal):
                index = 0
                for prime, exponent in factor_ideal(ideal):
                    for _ in range(exponent):
                        index = self.multiply(index, self.class_of(prime))
                self._classes[ideal] = index
            else:
                self._classes[ideal] = self._direct_class(ideal)
        return self._classes[ideal]

    def multiply(self, left: int, right: int) -> int:
        key = (min(left, right), max(left, right))
        if key not in self._table:
            if left == 0 or right == 0:
                self._table[key] = left + right
            else:
                product = self.representatives[left] * self.representatives[right]
                self._table[key] = self._direct_class(product)
        return self._table[key]

    def inverse(self, index: int) -> int:
        if index == 0:
            return 0
        return self.class_of(self.representatives[index].conjugate())

    def power(self, index: int, exponent: int) -> int:
        base = index if exponent >= 0 else self.inverse(index)
        result = 0
        for _ in range(abs(exponent)):
            result = self.multiply(result, base)
        return result

    def matching_class(self, ideal: IdealHNF) -> int:
        """Index lambda with ideal * t_lambda narrowly principal."""
        return self.inverse(self.class_of(ideal))

    def geometric_generator(self, ideal: IdealHNF, index: int) -> FieldElement:
        """Totally positive xi with (xi) = ideal * t_lambda."""
        xi = totally_positive_generator(ideal * self.representatives[index])
        if xi is None:
            raise HMFError("ideal does not lie in the inverse class", ideal=ideal.label, index=index)
        return xi

    def with_representatives(self, representatives: Sequence[IdealHNF]) -> "NarrowClassData":
        """The same group with other representatives, in the same class order."""
        if len(representatives) != self.h_plus:
            raise ConfigError("wrong number of class representatives", expected=self.h_plus)
        for index, rep in enumerate(representatives):
            if self.class_of(rep) != index:
                raise ConfigError("representative lies in the wrong class", ideal=rep.label, index=index)
        return NarrowClassData(self.field, tuple(representatives))


def _is_prime(ideal: IdealHNF) -> bool:
    factors = factor_ideal(ideal)
    return len(factors) == 1 and factors[0][1] == 1


@functools.lru_cache(maxsize=None)
def narrow_class_group(field: QuadraticField) -> NarrowClassData:
    """Narrow class group with least-norm prime representatives per class."""
    h_plus = narrow_class_number(field)
    representatives = [unit_ideal(field)]
    limit = 64
    scanned = 0
    while len(representatives) < h_plus:
        for prime in prime_ideals_up_to(field, limit):
            if prime.sort_key <= (scanned,) or len(representatives) == h_plus:
                continue
            if all(totally_positive_generator(prime / rep) is None for rep in representatives):
                representatives.append(prime)
        scanned = limit
        limit *= 2
    logger.info("---CLASS GROUP: Q(sqrt %d) has h+ = %d---", field.d, h_plus)
    return NarrowClassData(field, tuple(representatives))
