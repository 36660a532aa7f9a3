"""Truncated adelic q-expansions.

A series carries one constant per narrow class and coefficients keyed by
integral ideals of norm below the bound. Products go through the geometric
side: for a target ideal m of class inverse to t_lambda, with m * t_lambda =
(xi) and xi totally positive, the geometric coefficient at xi is a sum over
the totally positive points of t_lambda inside the box below xi.
"""

import functools
import logging
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import attrs
from tqdm import tqdm

from core.coeff_ring import CoefficientRing, Element
from core.errors import (
    BoundMismatchError,
    ConfigError,
    InvalidRepresentativeError,
    NotInvertibleError,
    OutOfPrecisionError,
    UnsupportedError,
)
from core.ideals import (
    IdealHNF,
    NarrowClassData,
    ideal_index,
    points_in_box,
    principal_ideal,
)
from core.quad_field import FieldElement, QuadraticField, is_totally_positive

logger = logging.getLogger(__name__)


@attrs.frozen
class WeightVector:
    """A paritious weight (k1, k2)."""

    k1: int
    k2: int

    def __attrs_post_init__(self):
        if (self.k1 - self.k2) % 2:
            raise UnsupportedError("weights must be paritious", weight=self.as_list())

    @classmethod
    def parallel_weight(cls, k: int) -> "WeightVector":
        return cls(k, k)

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "WeightVector":
        if len(values) != 2:
            raise ConfigError("a weight has two components", weight=list(values))
        return cls(int(values[0]), int(values[1]))

    @property
    def k0(self) -> int:
        return max(self.k1, self.k2)

    @property
    def parallel(self) -> bool:
        return self.k1 == self.k2

    @property
    def paritious(self) -> bool:
        return (self.k1 - self.k2) % 2 == 0

    def as_list(self) -> List[int]:
        return [self.k1, self.k2]

    def __add__(self, other: "WeightVector") -> "WeightVector":
        return WeightVector(self.k1 + other.k1, self.k2 + other.k2)

    def __sub__(self, other: "WeightVector") -> "WeightVector":
        return WeightVector(self.k1 - other.k1, self.k2 - other.k2)

    def __neg__(self) -> "WeightVector":
        return WeightVector(-self.k1, -self.k2)

    def __mul__(self, scalar: int) -> "WeightVector":
        return WeightVector(self.k1 * scalar, self.k2 * scalar)

    def __str__(self) -> str:
        return f"({self.k1},{self.k2})"


def _xi_power(ring: CoefficientRing, xi: FieldElement, exponents: Tuple[int, int]) -> Element:
    """xi^(v1, v2) = xi^(1)^v1 * xi^(2)^v2 inside the ring."""
    if exponents == (0, 0):
        return ring.one
    first = ring.embed_field_element(xi)
    second = ring.embed_field_element(xi.conjugate())
    return ring.power(first, exponents[0]) * ring.power(second, exponents[1])


def phi_factor(ring: CoefficientRing, weight: WeightVector, xi: FieldElement) -> Element:
    """xi^((k - k0)/2), the factor from adelic to geometric coefficients."""
    k0 = weight.k0
    return _xi_power(ring, xi, ((weight.k1 - k0) // 2, (weight.k2 - k0) // 2))


def psi_factor(ring: CoefficientRing, weight: WeightVector, xi: FieldElement) -> Element:
    """xi^((k0 - k)/2), the inverse of phi_factor."""
    k0 = weight.k0
    return _xi_power(ring, xi, ((k0 - weight.k1) // 2, (k0 - weight.k2) // 2))


@attrs.define(frozen=True, eq=False)
class AdelicSeries:
    """An adelic q-expansion modulo q^bound.

    Attributes:
        field: The quadratic field.
        classes: Narrow class representatives indexing the constant tuple.
        ring: The coefficient ring.
        weight: The weight of the form.
        bound: Coefficients are kept for ideals of norm strictly below it.
        constant: One constant per narrow class, in class order.
        coeffs: Nonzero coefficients keyed by integral ideals.
    """

    field: QuadraticField
    classes: NarrowClassData
    ring: CoefficientRing
    weight: WeightVector
    bound: int
    constant: Tuple[Element, ...]
    coeffs: Dict[IdealHNF, Element]

    @classmethod
    def build(
        cls,
        classes: NarrowClassData,
        ring: CoefficientRing,
        weight: WeightVector,
        bound: int,
        constant: Sequence[Element],
        coeffs: Dict[IdealHNF, Element],
    ) -> "AdelicSeries":
        """Validates keys and drops zero coefficients."""
        if bound < 1:
            raise ConfigError("bound must be at least 1", bound=bound)
        if len(constant) != classes.h_plus:
            raise ConfigError("constant tuple needs one entry per narrow class", expected=classes.h_plus)
        kept = {}
        for ideal, value in coeffs.items():
            if not ideal.is_integral:
                raise ConfigError("coefficients are keyed by integral ideals", ideal=ideal.label)
            if ideal.norm() >= bound:
                raise OutOfPrecisionError("coefficient beyond the bound", ideal=ideal.label, bound=bound)
            if not ring.is_zero(value):
                kept[ideal] = value
        return cls(classes.field, classes, ring, weight, bound, tuple(constant), kept)

    @property
    def ideals(self) -> Tuple[IdealHNF, ...]:
        return ideal_index(self.field, self.bound).ideals

    def coefficient(self, ideal: IdealHNF) -> Element:
        if ideal.norm() >= self.bound:
            raise OutOfPrecisionError("coefficient beyond the bound", ideal=ideal.label, bound=self.bound)
        return self.coeffs.get(ideal, self.ring.zero)

    def __getitem__(self, ideal: IdealHNF) -> Element:
        return self.coefficient(ideal)

    def is_zero(self) -> bool:
        return not self.coeffs and all(self.ring.is_zero(c) for c in self.constant)

    def _check_compatible(self, other: "AdelicSeries") -> None:
        if self.field != other.field or self.classes.representatives != other.classes.representatives:
            raise BoundMismatchError("series live over different fields or class representatives")
        if self.ring != other.ring:
            raise BoundMismatchError("series have different rings", left=self.ring.descriptor, right=other.ring.descriptor)
        if self.bound != other.bound:
            raise BoundMismatchError("series have different bounds", left=self.bound, right=other.bound)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AdelicSeries):
            return NotImplemented
        if (
            self.field != other.field
            or self.ring != other.ring
            or self.weight != other.weight
            or self.bound != other.bound
            or self.classes.representatives != other.classes.representatives
        ):
            return False
        ring = self.ring
        if not all(ring.equal(a, b) for a, b in zip(self.constant, other.constant)):
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(ring.equal(self.coeffs.get(k, ring.zero), other.coeffs.get(k, ring.zero)) for k in keys)

    def _combine(self, other: "AdelicSeries", op: Callable) -> "AdelicSeries":
        self._check_compatible(other)
        if self.weight != other.weight:
            raise UnsupportedError("cannot add series of different weights", left=str(self.weight), right=str(other.weight))
        zero = self.ring.zero
        keys = set(self.coeffs) | set(other.coeffs)
        coeffs = {k: op(self.coeffs.get(k, zero), other.coeffs.get(k, zero)) for k in keys}
        constant = [op(a, b) for a, b in zip(self.constant, other.constant)]
        return AdelicSeries.build(self.classes, self.ring, self.weight, self.bound, constant, coeffs)

    def __add__(self, other: "AdelicSeries") -> "AdelicSeries":
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other: "AdelicSeries") -> "AdelicSeries":
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self) -> "AdelicSeries":
        return self.scale(-self.ring.one)

    def scale(self, scalar: Element) -> "AdelicSeries":
        return AdelicSeries.build(
            self.classes,
            self.ring,
            self.weight,
            self.bound,
            [scalar * c for c in self.constant],
            {k: scalar * v for k, v in self.coeffs.items()},
        )

    def __mul__(self, other: "AdelicSeries") -> "AdelicSeries":
        return series_mul(self, other)

    def to_vector(self) -> List[Element]:
        """Coordinates: constant slots, then ideals by norm and label."""
        zero = self.ring.zero
        return list(self.constant) + [self.coeffs.get(ideal, zero) for ideal in self.ideals]

    @classmethod
    def from_vector(
        cls, classes: NarrowClassData, ring: CoefficientRing, weight: WeightVector, bound: int, vector: Sequence[Element]
    ) -> "AdelicSeries":
        ideals = ideal_index(classes.field, bound).ideals
        h_plus = classes.h_plus
        if len(vector) != h_plus + len(ideals):
            raise ConfigError("vector length does not match the layout", expected=h_plus + len(ideals), got=len(vector))
        coeffs = {ideal: vector[h_plus + i] for i, ideal in enumerate(ideals)}
        return cls.build(classes, ring, weight, bound, vector[:h_plus], coeffs)

    def over(self, ring: CoefficientRing, convert: Optional[Callable[[Element], Element]] = None) -> "AdelicSeries":
        """The series with coefficients mapped into another ring."""
        convert = convert or (lambda value: ring.coerce(value, self.ring))
        return AdelicSeries.build(
            self.classes,
            ring,
            self.weight,
            self.bound,
            [convert(c) for c in self.constant],
            {k: convert(v) for k, v in self.coeffs.items()},
        )


def series_layout(classes: NarrowClassData, bound: int) -> int:
    """Number of coordinates of a series modulo q^bound."""
    return classes.h_plus + len(ideal_index(classes.field, bound))


def zero_series(classes: NarrowClassData, ring: CoefficientRing, weight: WeightVector, bound: int) -> AdelicSeries:
    return AdelicSeries.build(classes, ring, weight, bound, [ring.zero] * classes.h_plus, {})


def one_series(classes: NarrowClassData, ring: CoefficientRing, bound: int) -> AdelicSeries:
    return AdelicSeries.build(classes, ring, WeightVector(0, 0), bound, [ring.one] * classes.h_plus, {})


def constant_series(
    classes: NarrowClassData, ring: CoefficientRing, bound: int, constant: Sequence[Element]
) -> AdelicSeries:
    return AdelicSeries.build(classes, ring, WeightVector(0, 0), bound, constant, {})


# --- Geometric side ---


def _key(xi: FieldElement, representative: IdealHNF) -> IdealHNF:
    return principal_ideal(xi) / representative


def phi_coefficient(f: AdelicSeries, index: int, xi: FieldElement) -> Element:
    """The geometric coefficient a_{lambda, xi} = a_{xi t_lambda^-1} * xi^((k - k0)/2)."""
    representative = f.classes.representatives[index]
    if not is_totally_positive(xi) or not representative.contains(xi):
        raise ConfigError("xi must be a totally positive element of t_lambda", xi=str(xi), index=index)
    return f.coefficient(_key(xi, representative)) * phi_factor(f.ring, f.weight, xi)


@attrs.frozen
class GeometricView:
    """Per-class geometric coefficients at the chosen generators."""

    weight: WeightVector
    values: Tuple[Dict[FieldElement, Element], ...] = attrs.field(eq=False)


def phi(f: AdelicSeries) -> GeometricView:
    """Geometric coefficients of every key, at the generator chosen by the class data."""
    values: List[Dict[FieldElement, Element]] = [dict() for _ in range(f.classes.h_plus)]
    for ideal in f.ideals:
        index = f.classes.matching_class(ideal)
        xi = f.classes.geometric_generator(ideal, index)
        values[index][xi] = phi_coefficient(f, index, xi)
    return GeometricView(f.weight, tuple(values))


def psi(
    view: GeometricView, classes: NarrowClassData, ring: CoefficientRing, bound: int, constant: Sequence[Element]
) -> AdelicSeries:
    """Adelic coefficients from geometric ones: a_m = a_{lambda, xi} * xi^((k0 - k)/2)."""
    coeffs = {}
    for index, values in enumerate(view.values):
        representative = classes.representatives[index]
        for xi, value in values.items():
            coeffs[_key(xi, representative)] = value * psi_factor(ring, view.weight, xi)
    return AdelicSeries.build(classes, ring, view.weight, bound, constant, coeffs)


@attrs.frozen
class ConvolutionTerm:
    target: IdealHNF
    index: int
    xi: FieldElement
    # (xi1, key of xi1, xi - xi1, key of xi - xi1)
    pairs: Tuple[Tuple[FieldElement, IdealHNF, FieldElement, IdealHNF], ...]


@functools.lru_cache(maxsize=16)
def convolution_plan(classes: NarrowClassData, bound: int) -> Tuple[ConvolutionTerm, ...]:
    """Box decompositions of every target ideal, in layout order."""
    terms = []
    ideals = ideal_index(classes.field, bound).ideals
    for target in tqdm(ideals, desc="convolution plan", disable=not logger.isEnabledFor(logging.INFO)):
        index = classes.matching_class(target)
        representative = classes.representatives[index]
        xi = classes.geometric_generator(target, index)
        pairs = tuple(
            (xi1, _key(xi1, representative), xi - xi1, _key(xi - xi1, representative))
            for xi1 in points_in_box(representative, xi)
        )
        terms.append(ConvolutionTerm(target, index, xi, pairs))
    logger.debug("convolution plan for bound %d: %d targets", bound, len(terms))
    return tuple(terms)


def series_mul(f: AdelicSeries, g: AdelicSeries) -> AdelicSeries:
    """The product of two adelic series, of weight k + k'."""
    f._check_compatible(g)
    ring = f.ring
    weight = f.weight + g.weight
    flat = f.weight.parallel and g.weight.parallel

    def geo(series: AdelicSeries, key: IdealHNF, xi: FieldElement) -> Element:
        value = series.coeffs.get(key)
        if value is None:
            return ring.zero
        return value if series.weight.parallel else value * phi_factor(ring, series.weight, xi)

    coeffs = {}
    for term in convolution_plan(f.classes, f.bound):
        total = f.constant[term.index] * geo(g, term.target, term.xi) + geo(f, term.target, term.xi) * g.constant[term.index]
        for xi1, key1, xi2, key2 in term.pairs:
            if key1 in f.coeffs and key2 in g.coeffs:
                total = total + geo(f, key1, xi1) * geo(g, key2, xi2)
        if not flat:
            total = total * psi_factor(ring, weight, term.xi)
        coeffs[term.target] = total
    constant = [a * b for a, b in zip(f.constant, g.constant)]
    return AdelicSeries.build(f.classes, ring, weight, f.bound, constant, coeffs)


def series_power(f: AdelicSeries, exponent: int) -> AdelicSeries:
    if exponent < 0:
        return series_power(invert(f), -exponent)
    result = one_series(f.classes, f.ring, f.bound)
    for _ in range(exponent):
        result = series_mul(result, f)
    return result


def invert(f: AdelicSeries) -> AdelicSeries:
    """The inverse modulo q^bound, by recursion on the norm of the key.

    Raises:
        NotInvertibleError: When a constant slot is not a unit, naming its class.
    """
    ring = f.ring
    for index, value in enumerate(f.constant):
        if not ring.is_unit(value):
            raise NotInvertibleError("constant term is not a unit", index=index, value=ring.format(value))
    constant = [ring.inv(value) for value in f.constant]
    weight = -f.weight
    parallel = weight.parallel
    coeffs = {}

    def geo_f(key: IdealHNF, xi: FieldElement) -> Element:
        value = f.coeffs.get(key)
        if value is None:
            return ring.zero
        return value if parallel else value * phi_factor(ring, f.weight, xi)

    def geo_g(key: IdealHNF, xi: FieldElement) -> Element:
        value = coeffs.get(key)
        if value is None:
            return ring.zero
        return value if parallel else value * phi_factor(ring, weight, xi)

    for term in convolution_plan(f.classes, f.bound):
        total = geo_f(term.target, term.xi) * constant[term.index]
        for xi1, key1, xi2, key2 in term.pairs:
            if key1 in f.coeffs and key2 in coeffs:
                total = total + geo_f(key1, xi1) * geo_g(key2, xi2)
        value = -total * constant[term.index]
        if not parallel:
            value = value * psi_factor(ring, weight, term.xi)
        if not ring.is_zero(value):
            coeffs[term.target] = value
    return AdelicSeries.build(f.classes, ring, weight, f.bound, constant, coeffs)


def truncate(f: AdelicSeries, bound: int) -> AdelicSeries:
    """Drops coefficients of norm at least the new bound."""
    if bound > f.bound:
        raise OutOfPrecisionError("cannot raise the precision of a series", bound=bound, available=f.bound)
    coeffs = {k: v for k, v in f.coeffs.items() if k.norm() < bound}
    return AdelicSeries.build(f.classes, f.ring, f.weight, bound, f.constant, coeffs)


def rep_change(
    f: AdelicSeries, scalars: Sequence[FieldElement], targets: Optional[Sequence[IdealHNF]] = None
) -> AdelicSeries:
    """Moves a series to representatives t'_lambda = xi_lambda * t_lambda.

    The adelic coefficients and constants stay as they are; only the class
    data used for products and Hecke constants changes.

    Raises:
        InvalidRepresentativeError: When a scalar is not totally positive or
            does not map t_lambda onto the given target.
    """
    classes = f.classes
    if len(scalars) != classes.h_plus:
        raise InvalidRepresentativeError("one scalar per narrow class is required", expected=classes.h_plus)
    representatives = []
    for index, xi in enumerate(scalars):
        if not is_totally_positive(xi):
            raise InvalidRepresentativeError("scalar is not totally positive", index=index, xi=str(xi))
        moved = classes.representatives[index] * xi
        if targets is not None and moved != targets[index]:
            raise InvalidRepresentativeError(
                "scalar does not map the representative to the target", index=index, got=moved.label, expected=targets[index].label
            )
        representatives.append(moved)
    new_classes = classes.with_representatives(representatives)
    return AdelicSeries(f.field, new_classes, f.ring, f.weight, f.bound, f.constant, dict(f.coeffs))


def verify_subring_coeffs(f: AdelicSeries, subring: CoefficientRing, generation_bound: int) -> bool:
    """True when the constants and all coefficients of norm at most the generation bound lie in the subring.

    Under the assumption that Hecke operators of norm up to the bound generate
    the Hecke algebra, this places every coefficient in the subring.
    """
    values: Iterable[Element] = list(f.constant) + [v for k, v in f.coeffs.items() if k.norm() <= generation_bound]
    return all(subring.accepts(f.ring.format(v)) for v in values)


def series_from_function(
    classes: NarrowClassData,
    ring: CoefficientRing,
    weight: WeightVector,
    bound: int,
    constant: Sequence[Element],
    coefficient: Callable[[IdealHNF], Element],
) -> AdelicSeries:
    """A series whose coefficient at each ideal below the bound is given by a function."""
    coeffs = {ideal: coefficient(ideal) for ideal in ideal_index(classes.field, bound).ideals}
    return AdelicSeries.build(classes, ring, weight, bound, constant, coeffs)


def rational_constant(ring: CoefficientRing, values: Sequence[Fraction]) -> List[Element]:
    return [ring.from_fraction(Fraction(v)) for v in values]


def reduce_series(f: AdelicSeries, p: int) -> AdelicSeries:
    """Reduction of a series over Z[1/S] or Q modulo a prime outside S."""
    target = f.ring.residue_field(p)
    return f.over(target, lambda value: f.ring.reduce(value, target))
