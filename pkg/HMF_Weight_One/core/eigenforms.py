"""Normalised Hecke eigenforms of a stable space.

The space is split into simultaneous generalised eigenspaces by factoring
characteristic polynomials of T_p for primes p of increasing norm. A block
on which some operator has an irreducible characteristic polynomial of full
degree gives one eigenform over the field cut out by that polynomial; a block
with no such operator is reported whole, through one common eigenvector.
"""

import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import attrs
from sympy import Poly, Rational, Symbol

from core.coeff_ring import CoefficientRing, Element, ExtensionField, PrimeField, RationalField
from core.errors import HMFError, UnsupportedError
from core.hecke import HeckeContext, hecke_images
from core.ideals import IdealHNF, prime_ideals_up_to
from core.linalg import (
    Matrix,
    Vector,
    charpoly,
    field_kernel,
    from_columns,
    identity,
    independent_columns,
    mat_mul,
    poly_eval_matrix,
    solve,
)
from core.qexp import AdelicSeries
from core.stability import CandidateSpace, SquaringStatus, squaring_test

logger = logging.getLogger(__name__)

X = Symbol("x")


@attrs.frozen
class Eigenform:
    """A normalised eigenform with its Hecke eigenvalues.

    Attributes:
        series: The eigenform, divided by its coefficient at O when that is nonzero.
        eigenvalues: Eigenvalue of T_p per prime used in the splitting.
        normalized: False when the coefficient at O vanishes.
        squaring: Outcome of the squaring test.
        orbit_size: Size of the Galois orbit this eigenform represents.
        conjugate: Index of this form among its Frobenius conjugates.
        block_dimension: Dimension of the simultaneous eigenspace block. Above
            one the block did not split and the form is one common eigenvector.
    """

    series: AdelicSeries
    eigenvalues: Dict[IdealHNF, Element] = attrs.field(eq=False)
    normalized: bool
    squaring: SquaringStatus = "unverified"
    orbit_size: int = 1
    conjugate: int = 0
    block_dimension: int = 1

    @property
    def ring(self) -> CoefficientRing:
        return self.series.ring


def _base_field(ring: CoefficientRing) -> CoefficientRing:
    field = ring.fraction_field()
    if not isinstance(field, (RationalField, PrimeField)):
        raise UnsupportedError("eigenforms need Q or F_p as base field", ring=ring.descriptor)
    return field


def _factor(ring: CoefficientRing, coefficients: Sequence[Element]) -> List[Tuple[List[Element], int]]:
    """Monic irreducible factors, leading coefficient first, with multiplicities."""
    if isinstance(ring, PrimeField):
        poly = Poly([int(c) for c in coefficients], X, modulus=ring.p)
    else:
        poly = Poly([Rational(ring.format(c)) for c in coefficients], X, domain="QQ")
    _, factors = poly.factor_list()
    result = []
    for factor, exponent in factors:
        values = [ring.parse(str(c)) if not isinstance(ring, PrimeField) else ring.from_int(int(c)) for c in factor.all_coeffs()]
        lead = ring.inv(values[0])
        result.append(([v * lead for v in values], exponent))
    return result


def _matrix_power(ring: CoefficientRing, matrix: Matrix, exponent: int) -> Matrix:
    result = identity(ring, len(matrix))
    for _ in range(exponent):
        result = mat_mul(ring, result, matrix, len(matrix))
    return result


def _restrict(ring: CoefficientRing, matrix: Matrix, block: Sequence[Vector]) -> Matrix:
    """Matrix of an operator on the span of the block columns, which it preserves."""
    size = len(block[0])
    basis = from_columns(ring, block, size)
    columns = []
    for column in block:
        image = [sum((row[j] * column[j] for j in range(size)), ring.zero) for row in matrix]
        coordinates = solve(ring, basis, image, len(block))
        if coordinates is None:
            raise HMFError("operator does not preserve the block")
        columns.append(coordinates)
    return from_columns(ring, columns, len(block))


def _apply(ring: CoefficientRing, block: Sequence[Vector], coordinates: Vector) -> Vector:
    size = len(block[0])
    result = [ring.zero] * size
    for weight, column in zip(coordinates, block):
        result = [a + weight * b for a, b in zip(result, column)]
    return result


def operator_matrices(
    space: CandidateSpace, ctx: HeckeContext, primes: Sequence[IdealHNF]
) -> Dict[IdealHNF, Matrix]:
    """Matrices of T_p on the space, for each prime whose truncation keeps the rank.

    Raises:
        HMFError: When some T_p image leaves the space.
    """
    ring = space.ring
    rank = space.rank
    series = space.series()
    matrices = {}
    for prime in primes:
        images = hecke_images(ctx, prime, series)
        bound = images[0].bound
        truncated = space.truncated_columns(bound)
        if len(independent_columns(ring, truncated, len(truncated[0]))) < rank:
            logger.debug("skipping T_%s: truncation loses rank", prime.label)
            continue
        basis = from_columns(ring, truncated, len(truncated[0]))
        columns = []
        for image in images:
            coordinates = solve(ring, basis, image.to_vector(), rank)
            if coordinates is None:
                raise HMFError("space is not stable under a Hecke operator", ideal=prime.label)
            columns.append(coordinates)
        matrices[prime] = from_columns(ring, columns, rank)
    return matrices


def split_eigenspaces(ring: CoefficientRing, matrices: Dict[IdealHNF, Matrix], rank: int) -> List[List[Vector]]:
    """Simultaneous generalised eigenspaces, as column bases in space coordinates."""
    blocks = [[[ring.one if i == j else ring.zero for i in range(rank)] for j in range(rank)]]
    for prime, matrix in matrices.items():
        refined = []
        for block in blocks:
            if len(block) == 1:
                refined.append(block)
                continue
            restricted = _restrict(ring, matrix, block)
            factors = _factor(ring, charpoly(ring, restricted))
            if len(factors) == 1:
                refined.append(block)
                continue
            for factor, exponent in factors:
                kernel_matrix = _matrix_power(ring, poly_eval_matrix(ring, factor, restricted), exponent)
                pieces = field_kernel(ring, kernel_matrix, len(block))
                refined.append([_apply(ring, block, piece) for piece in pieces])
        blocks = refined
        logger.debug("after T_%s: block sizes %s", prime.label, [len(b) for b in blocks])
    return blocks


def _irreducible_operator(
    ring: CoefficientRing, matrices: Dict[IdealHNF, Matrix], block: Sequence[Vector]
) -> Optional[Tuple[Matrix, List[Element]]]:
    """An operator, or a small combination, acting on the block with irreducible charpoly."""
    size = len(block)
    restricted = [_restrict(ring, matrix, block) for matrix in matrices.values()]
    candidates = list(restricted)
    for (first, second), scale in itertools.product(itertools.combinations(restricted, 2), range(1, 4)):
        candidates.append([[a + ring.from_int(scale) * b for a, b in zip(r1, r2)] for r1, r2 in zip(first, second)])
    for candidate in candidates:
        factors = _factor(ring, charpoly(ring, candidate))
        if len(factors) == 1 and factors[0][1] == 1 and len(factors[0][0]) - 1 == size:
            return candidate, factors[0][0]
    return None


def common_eigenvector(
    ring: CoefficientRing, matrices: Dict[IdealHNF, Matrix], block: Sequence[Vector]
) -> Tuple[Vector, Dict[IdealHNF, Element], int]:
    """A common eigenvector of the operators on a block that does not split.

    Operators whose characteristic polynomial on the block is (x - a)^n give
    the eigenvalue a; the others are left out.

    Returns:
        The vector in block coordinates, the eigenvalues by prime and the
        dimension of the common eigenspace.
    """
    size = len(block)
    rows: Matrix = []
    values: Dict[IdealHNF, Element] = {}
    for prime, matrix in matrices.items():
        restricted = _restrict(ring, matrix, block)
        factors = _factor(ring, charpoly(ring, restricted))
        if len(factors) != 1 or len(factors[0][0]) != 2:
            continue
        value = -factors[0][0][1]
        values[prime] = value
        for i, row in enumerate(restricted):
            rows.append([entry - value if i == j else entry for j, entry in enumerate(row)])
    common = field_kernel(ring, rows, size) if rows else identity(ring, size)
    return common[0], values, len(common)


def _eigenvector(ring: CoefficientRing, operator: Matrix, poly: List[Element]) -> Tuple[CoefficientRing, Vector]:
    """Eigenvector of the operator for a root of its irreducible charpoly, over the field it generates."""
    if len(poly) == 2:
        return ring, [ring.one]
    extension = ExtensionField(ring, tuple(ring.format(c) for c in reversed(poly)))
    root = extension.generator
    size = len(operator)
    shifted = [
        [extension.from_base(operator[i][j]) - (root if i == j else extension.zero) for j in range(size)]
        for i in range(size)
    ]
    kernel = field_kernel(extension, shifted, size)
    return extension, kernel[0]


def eigenforms(
    space: CandidateSpace,
    ctx: HeckeContext,
    square_basis: Optional[Sequence[AdelicSeries]] = None,
    primes: Optional[Sequence[IdealHNF]] = None,
) -> List[Eigenform]:
    """Normalised eigenforms of a Hecke stable space.

    Args:
        space: A stable candidate space over Q, F_p or a ring with one of
            these as fraction field.
        ctx: The Hecke context of the space.
        square_basis: Forms of weight 2k for the squaring test.
        primes: Primes used for splitting, by default those with N(p)^2 <= B.

    Returns:
        One eigenform per simultaneous eigenspace; over finite fields all
        Frobenius conjugates, over Q one per Galois orbit. A block that does
        not split gives one common eigenvector with block_dimension above one.
    """
    if space.rank == 0:
        return []
    base = _base_field(space.ring)
    if base != space.ring:
        space = attrs.evolve(
            space, ring=base, columns=[[base.coerce(v, space.ring) for v in column] for column in space.columns]
        )
        ctx = attrs.evolve(ctx, character=ctx.character.over(base))
    if primes is None:
        primes = [p for p in prime_ideals_up_to(space.classes.field, space.bound) if p.norm() ** 2 <= space.bound]
    matrices = operator_matrices(space, ctx, primes)
    blocks = split_eigenspaces(base, matrices, space.rank)
    found: List[Eigenform] = []
    for block in blocks:
        if len(block) == 1:
            ring, vector = base, [base.one]
        else:
            choice = _irreducible_operator(base, matrices, block)
            if choice is None:
                vector, values, common = common_eigenvector(base, matrices, block)
                logger.warning(
                    "---EIGENFORMS: block of dimension %d does not split (common eigenspace of dimension %d)---",
                    len(block),
                    common,
                )
                forms = _forms_from_vector(space, base, base, block, vector, matrices, square_basis)
                found.extend(attrs.evolve(form, eigenvalues=values, block_dimension=len(block)) for form in forms)
                continue
            operator, poly = choice
            ring, vector = _eigenvector(base, operator, poly)
        found.extend(_forms_from_vector(space, ring, base, block, vector, matrices, square_basis))
    logger.info("---EIGENFORMS: %d eigenforms over %s---", len(found), base.descriptor)
    return found


def _forms_from_vector(
    space: CandidateSpace,
    ring: CoefficientRing,
    base: CoefficientRing,
    block: Sequence[Vector],
    vector: Vector,
    matrices: Dict[IdealHNF, Matrix],
    square_basis: Optional[Sequence[AdelicSeries]],
) -> List[Eigenform]:
    lift = lambda value: ring.coerce(value, base)
    coordinates = _apply(ring, [[lift(v) for v in column] for column in block], vector)
    layout = _apply(ring, [[lift(v) for v in column] for column in space.columns], coordinates)
    pivot = next(i for i, value in enumerate(coordinates) if not ring.is_zero(value))
    eigenvalues = {}
    for prime, matrix in matrices.items():
        image = _apply(ring, [[lift(matrix[i][j]) for i in range(len(matrix))] for j in range(len(matrix))], coordinates)
        eigenvalues[prime] = image[pivot] / coordinates[pivot]
    at_one = layout[space.classes.h_plus]
    normalized = not ring.is_zero(at_one)
    if normalized:
        scale = ring.inv(at_one)
        layout = [scale * value for value in layout]
    degree = getattr(ring, "degree", 1)
    conjugates = degree if base.characteristic and degree > 1 else 1
    forms = []
    for index in range(conjugates):
        values = layout
        system = eigenvalues
        for _ in range(index):
            values = [ring.frobenius(v) for v in values]
            system = {p: ring.frobenius(v) for p, v in system.items()}
        series = AdelicSeries.from_vector(space.classes, ring, space.weight, space.bound, values)
        status = squaring_test(series, square_basis)
        forms.append(
            Eigenform(
                series=series,
                eigenvalues=system,
                normalized=normalized,
                squaring=status,
                orbit_size=degree,
                conjugate=index,
            )
        )
    if not normalized:
        logger.warning("---EIGENFORMS: coefficient at O vanishes; eigenform left unnormalised---")
    return forms
