"""Hecke operators on truncated adelic q-expansions."""

import logging
from typing import List, Optional, Sequence

import attrs

from core.characters import IdealCharacter
from core.coeff_ring import Element
from core.errors import OutOfPrecisionError
from core.ideals import IdealHNF, NarrowClassData, are_coprime, divisors, ideal_index
from core.linalg import Matrix, from_columns
from core.qexp import AdelicSeries, truncate

logger = logging.getLogger(__name__)


@attrs.frozen
class HeckeContext:
    """Level, character and class data fixing the Hecke action.

    Attributes:
        level: The level N; the character is read as zero off ideals coprime to it.
        character: The character E of the space.
        classes: Narrow class data used for the constant terms.
        k0: Largest weight component; taken from the series when None.
    """

    level: IdealHNF
    character: IdealCharacter
    classes: NarrowClassData
    k0: Optional[int] = None

    def character_value(self, ideal: IdealHNF, ring) -> Element:
        if not are_coprime(ideal, self.level):
            return ring.zero
        return ring.coerce(self.character(ideal), self.character.ring)


def hecke_apply(ctx: HeckeContext, ideal: IdealHNF, f: AdelicSeries) -> AdelicSeries:
    """T_a(f), known modulo q^floor(B / N(a)).

    a_m(T_a f) = sum over b | m + a of E(b) N(b)^(k0-1) a_{m a / b^2}(f), and the
    constant at lambda is the same sum over b | a of the constants at the
    class of t_lambda a / b^2.

    Raises:
        OutOfPrecisionError: When N(a) is not below the bound of f.
    """
    norm = int(ideal.norm())
    if norm >= f.bound:
        raise OutOfPrecisionError("Hecke operator needs N(a) below the bound", ideal=ideal.label, bound=f.bound)
    ring = f.ring
    k0 = ctx.k0 if ctx.k0 is not None else f.weight.k0
    classes = f.classes
    bound = f.bound // norm
    weighted = []
    for divisor in divisors(ideal):
        value = ctx.character_value(divisor, ring)
        if not ring.is_zero(value):
            weighted.append((divisor, value * ring.power(ring.from_int(int(divisor.norm())), k0 - 1)))

    coeffs = {}
    for target in ideal_index(f.field, bound).ideals:
        total = ring.zero
        shifted = target * ideal
        for divisor, weight in weighted:
            if divisor.divides(target):
                value = f.coeffs.get(shifted / (divisor * divisor))
                if value is not None:
                    total = total + weight * value
        coeffs[target] = total

    ideal_class = classes.class_of(ideal)
    constant = []
    for index in range(classes.h_plus):
        total = ring.zero
        for divisor, weight in weighted:
            shift = classes.multiply(ideal_class, classes.inverse(classes.power(classes.class_of(divisor), 2)))
            total = total + weight * f.constant[classes.multiply(index, shift)]
        constant.append(total)
    return AdelicSeries.build(classes, ring, f.weight, bound, constant, coeffs)


def hecke_images(ctx: HeckeContext, ideal: IdealHNF, basis: Sequence[AdelicSeries]) -> List[AdelicSeries]:
    return [hecke_apply(ctx, ideal, f) for f in basis]


def hecke_matrix(ctx: HeckeContext, ideal: IdealHNF, basis: Sequence[AdelicSeries], bound: Optional[int] = None) -> Matrix:
    """Columns are the coordinates of T_a applied to each basis vector.

    Rows follow the layout modulo q^floor(B / N(a)): constant slots first,
    then ideals by norm. An empty basis gives a matrix with no columns.
    """
    if not basis:
        if bound is None:
            return []
        rows = basis_rows(ctx.classes, bound // int(ideal.norm()))
        return [[] for _ in range(rows)]
    images = hecke_images(ctx, ideal, basis)
    columns = [image.to_vector() for image in images]
    return from_columns(basis[0].ring, columns, len(columns[0]))


def basis_rows(classes: NarrowClassData, bound: int) -> int:
    return classes.h_plus + len(ideal_index(classes.field, bound))


def hecke_commutes(ctx: HeckeContext, first: IdealHNF, second: IdealHNF, f: AdelicSeries) -> bool:
    """T_a T_b f = T_b T_a f, and both equal T_ab f when a and b are coprime."""
    ab = hecke_apply(ctx, first, hecke_apply(ctx, second, f))
    ba = hecke_apply(ctx, second, hecke_apply(ctx, first, f))
    common = min(ab.bound, ba.bound)
    if truncate(ab, common) != truncate(ba, common):
        return False
    if not are_coprime(first, second):
        return True
    product = hecke_apply(ctx, first * second, f)
    common = min(common, product.bound)
    return truncate(ab, common) == truncate(product, common)
