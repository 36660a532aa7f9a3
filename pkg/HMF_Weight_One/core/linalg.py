"""Exact linear algebra over the coefficient rings.

Matrices are lists of rows. Fields use row reduction; principal ideal
domains use a Smith normal form that tracks both transforms, so that
kernels and saturations come out as bases of saturated modules.
"""

import logging
from typing import Any, FrozenSet, List, Optional, Sequence, Set, Tuple

import attrs
from sympy.polys.matrices import DomainMatrix

from core.coeff_ring import CoefficientRing
from core.errors import UnsupportedError

logger = logging.getLogger(__name__)

Matrix = List[List[Any]]
Vector = List[Any]


def zeros(ring: CoefficientRing, rows: int, cols: int) -> Matrix:
    return [[ring.zero for _ in range(cols)] for _ in range(rows)]


def identity(ring: CoefficientRing, n: int) -> Matrix:
    matrix = zeros(ring, n, n)
    for i in range(n):
        matrix[i][i] = ring.one
    return matrix


def mat_mul(ring: CoefficientRing, left: Matrix, right: Matrix, inner: Optional[int] = None) -> Matrix:
    inner = len(right) if inner is None else inner
    cols = len(right[0]) if right else 0
    result = zeros(ring, len(left), cols)
    for i, row in enumerate(left):
        out = result[i]
        for k in range(inner):
            entry = row[k]
            if ring.is_zero(entry):
                continue
            other = right[k]
            for j in range(cols):
                out[j] = out[j] + entry * other[j]
    return result


def from_columns(ring: CoefficientRing, columns: Sequence[Vector], rows: int) -> Matrix:
    return [[column[i] for column in columns] for i in range(rows)]


def to_columns(matrix: Matrix, cols: int) -> List[Vector]:
    return [[row[j] for row in matrix] for j in range(cols)]


def matrices_equal(ring: CoefficientRing, left: Matrix, right: Matrix) -> bool:
    if len(left) != len(right):
        return False
    return all(
        len(a) == len(b) and all(ring.equal(x, y) for x, y in zip(a, b)) for a, b in zip(left, right)
    )


# --- Fields ---


def rref(ring: CoefficientRing, matrix: Matrix, cols: int) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form over a field and its pivot columns."""
    rows = [list(row) for row in matrix]
    pivots: List[int] = []
    r = 0
    for j in range(cols):
        pivot_row = next((i for i in range(r, len(rows)) if not ring.is_zero(rows[i][j])), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        scale = ring.inv(rows[r][j])
        rows[r] = [entry * scale for entry in rows[r]]
        for i in range(len(rows)):
            if i != r and not ring.is_zero(rows[i][j]):
                factor = rows[i][j]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(j)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def field_kernel(ring: CoefficientRing, matrix: Matrix, cols: int) -> List[Vector]:
    reduced, pivots = rref(ring, matrix, cols)
    basis = []
    for free in (j for j in range(cols) if j not in pivots):
        vector = [ring.zero] * cols
        vector[free] = ring.one
        for i, pivot in enumerate(pivots):
            vector[pivot] = -reduced[i][free]
        basis.append(vector)
    return basis


def rank(ring: CoefficientRing, matrix: Matrix, cols: int) -> int:
    field = ring.fraction_field()
    converted = [[field.coerce(entry, ring) for entry in row] for row in matrix]
    return len(rref(field, converted, cols)[1])


def solve(ring: CoefficientRing, matrix: Matrix, target: Vector, cols: int) -> Optional[Vector]:
    """Some x with matrix * x = target over a field, or None."""
    augmented = [list(row) + [value] for row, value in zip(matrix, target)]
    reduced, pivots = rref(ring, augmented, cols + 1)
    if cols in pivots:
        return None
    solution = [ring.zero] * cols
    for i, pivot in enumerate(pivots):
        solution[pivot] = reduced[i][cols]
    return solution


def in_span(ring: CoefficientRing, columns: Sequence[Vector], target: Vector) -> bool:
    """Membership of target in the span of columns over the fraction field."""
    field = ring.fraction_field()
    rows = len(target)
    converted = [[field.coerce(entry, ring) for entry in column] for column in columns]
    matrix = from_columns(field, converted, rows)
    return solve(field, matrix, [field.coerce(v, ring) for v in target], len(columns)) is not None


def independent_columns(ring: CoefficientRing, columns: Sequence[Vector], rows: int) -> List[Vector]:
    """A maximal independent subset of the columns, in their given order."""
    if not columns:
        return []
    _, pivots = rref(ring, from_columns(ring, columns, rows), len(columns))
    return [list(columns[j]) for j in pivots]


def echelon_key(ring: CoefficientRing, columns: Sequence[Vector], rows: int) -> Tuple[Tuple[str, ...], ...]:
    """Canonical text form of the column span over the fraction field."""
    field = ring.fraction_field()
    transposed = [[field.coerce(entry, ring) for entry in column] for column in columns]
    reduced, pivots = rref(field, transposed, rows)
    return tuple(tuple(field.format(entry) for entry in reduced[i]) for i in range(len(pivots)))


def charpoly(ring: CoefficientRing, matrix: Matrix) -> List[Any]:
    """Characteristic polynomial, leading coefficient first."""
    domain = getattr(ring, "domain", None)
    if domain is None or not ring.is_field:
        raise UnsupportedError("characteristic polynomials need a prime base field", ring=ring.descriptor)
    n = len(matrix)
    if n == 0:
        return [ring.one]
    return list(DomainMatrix([list(row) for row in matrix], (n, n), domain).charpoly())


def poly_eval_matrix(ring: CoefficientRing, coefficients: Sequence[Any], matrix: Matrix) -> Matrix:
    """Evaluates a polynomial, leading coefficient first, at a square matrix."""
    n = len(matrix)
    result = zeros(ring, n, n)
    for c in coefficients:
        result = mat_mul(ring, result, matrix, n)
        for i in range(n):
            result[i][i] = result[i][i] + c
    return result


# --- Principal ideal domains ---


@attrs.frozen
class SmithForm:
    """M = U * D * V with U, V invertible and d_1 | d_2 | ... on the diagonal."""

    U: Matrix
    diagonal: List[Any]
    V: Matrix
    U_inv: Matrix
    V_inv: Matrix
    rows: int
    cols: int

    @property
    def rank(self) -> int:
        return len(self.diagonal)

    def D(self, ring: CoefficientRing) -> Matrix:
        matrix = zeros(ring, self.rows, self.cols)
        for i, d in enumerate(self.diagonal):
            matrix[i][i] = d
        return matrix


class _Transforms:
    """Applies elementary operations to A while keeping M = U A V."""

    def __init__(self, ring: CoefficientRing, matrix: Matrix, rows: int, cols: int):
        self.ring = ring
        self.A = [list(row) for row in matrix]
        self.U = identity(ring, rows)
        self.U_inv = identity(ring, rows)
        self.V = identity(ring, cols)
        self.V_inv = identity(ring, cols)

    def swap_rows(self, i: int, j: int) -> None:
        if i == j:
            return
        for m in (self.A, self.U_inv):
            m[i], m[j] = m[j], m[i]
        for row in self.U:
            row[i], row[j] = row[j], row[i]

    def add_row(self, i: int, j: int, q) -> None:
        """row_i += q * row_j."""
        for m in (self.A, self.U_inv):
            m[i] = [a + q * b for a, b in zip(m[i], m[j])]
        for row in self.U:
            row[j] = row[j] - q * row[i]

    def scale_row(self, i: int, unit) -> None:
        inverse = self.ring.inv(unit)
        for m in (self.A, self.U_inv):
            m[i] = [a * unit for a in m[i]]
        for row in self.U:
            row[i] = row[i] * inverse

    def swap_cols(self, i: int, j: int) -> None:
        if i == j:
            return
        for m in (self.A, self.V_inv):
            for row in m:
                row[i], row[j] = row[j], row[i]
        self.V[i], self.V[j] = self.V[j], self.V[i]

    def add_col(self, i: int, j: int, q) -> None:
        """col_i += q * col_j."""
        for m in (self.A, self.V_inv):
            for row in m:
                row[i] = row[i] + q * row[j]
        self.V[j] = [a - q * b for a, b in zip(self.V[j], self.V[i])]


def smith_normal_form(ring: CoefficientRing, matrix: Matrix, cols: Optional[int] = None) -> SmithForm:
    """Smith normal form over a principal ideal domain.

    Pivots are chosen by smallest Euclidean size. The returned transforms
    satisfy matrix = U * D * V exactly.
    """
    if not ring.is_pid:
        raise UnsupportedError("Smith normal form needs a principal ideal domain", ring=ring.descriptor)
    rows = len(matrix)
    cols = (len(matrix[0]) if rows else 0) if cols is None else cols
    work = _Transforms(ring, matrix, rows, cols)
    A = work.A
    t = 0
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if not ring.is_zero(A[i][j]):
                    size = ring.size(A[i][j])
                    if best is None or size < best[0]:
                        best = (size, i, j)
        if best is None:
            break
        work.swap_rows(t, best[1])
        work.swap_cols(t, best[2])
        while True:
            clean = True
            for i in range(t + 1, rows):
                if not ring.is_zero(A[i][t]):
                    q, r = ring.divmod(A[i][t], A[t][t])
                    work.add_row(i, t, -q)
                    clean = clean and ring.is_zero(r)
            for j in range(t + 1, cols):
                if not ring.is_zero(A[t][j]):
                    q, r = ring.divmod(A[t][j], A[t][t])
                    work.add_col(j, t, -q)
                    clean = clean and ring.is_zero(r)
            if not clean:
                size, i, j = min(
                    [(ring.size(A[i][t]), i, t) for i in range(t + 1, rows) if not ring.is_zero(A[i][t])]
                    + [(ring.size(A[t][j]), t, j) for j in range(t + 1, cols) if not ring.is_zero(A[t][j])]
                )
                work.swap_rows(t, i)
                work.swap_cols(t, j)
                continue
            stray = next(
                (
                    i
                    for i in range(t + 1, rows)
                    for j in range(t + 1, cols)
                    if not ring.is_zero(ring.divmod(A[i][j], A[t][t])[1])
                ),
                None,
            )
            if stray is None:
                break
            work.add_row(t, stray, ring.one)
        unit, _ = ring.canonical(A[t][t])
        if not ring.equal(unit, ring.one):
            work.scale_row(t, ring.inv(unit))
        t += 1
    return SmithForm(
        U=work.U,
        diagonal=[A[i][i] for i in range(t)],
        V=work.V,
        U_inv=work.U_inv,
        V_inv=work.V_inv,
        rows=rows,
        cols=cols,
    )


def invariant_factors(ring: CoefficientRing, matrix: Matrix, cols: Optional[int] = None) -> List[Any]:
    return smith_normal_form(ring, matrix, cols).diagonal


def kernel(ring: CoefficientRing, matrix: Matrix, cols: int) -> List[Vector]:
    """Kernel basis; saturated when the ring is not a field."""
    if ring.is_field:
        return field_kernel(ring, matrix, cols)
    form = smith_normal_form(ring, matrix, cols)
    return [[form.V_inv[i][j] for i in range(cols)] for j in range(form.rank, cols)]


@attrs.define
class PivotLedger:
    """Collects rational primes dividing nonunit pivots of Smith forms."""

    primes: Set[int] = attrs.field(factory=set)
    entries: List[Tuple[str, Tuple[str, ...]]] = attrs.field(factory=list)

    def record(self, ring: CoefficientRing, diagonal: Sequence[Any], source: str) -> FrozenSet[int]:
        found: Set[int] = set()
        for entry in diagonal:
            if not ring.is_unit(entry):
                found |= ring.nonunit_primes(entry)
        if found:
            self.entries.append((source, tuple(ring.format(d) for d in diagonal if not ring.is_unit(d))))
            self.primes |= found
        return frozenset(found)

    def prime_list(self, excluded: FrozenSet[int] = frozenset()) -> List[int]:
        return sorted(p for p in self.primes if p not in excluded)


def saturate(
    ring: CoefficientRing, columns: Sequence[Vector], rows: int, ledger: Optional[PivotLedger] = None, source: str = "saturation"
) -> List[Vector]:
    """Basis of the saturation of the span of the columns.

    Over a field this is a basis of the span.
    """
    if not columns:
        return []
    if ring.is_field:
        return independent_columns(ring, columns, rows)
    form = smith_normal_form(ring, from_columns(ring, columns, rows), len(columns))
    if ledger is not None:
        ledger.record(ring, form.diagonal, source)
    return [[form.U[i][j] for i in range(rows)] for j in range(form.rank)]


def solve_saturated_preimage(
    ring: CoefficientRing,
    operator: Matrix,
    operator_cols: int,
    target: Sequence[Vector],
    ledger: Optional[PivotLedger] = None,
    source: str = "preimage",
) -> List[Vector]:
    """Basis of {v : operator * v in span(target)}, saturated over a PID.

    Args:
        ring: The coefficient ring.
        operator: m x r matrix.
        operator_cols: r.
        target: columns of length m spanning the target module.
        ledger: Receives the primes of every nonunit pivot met on the way.
        source: Label stored with recorded pivots.

    Returns:
        Columns of length r.
    """
    rows = len(operator)
    stacked = [list(operator[i]) + [-column[i] for column in target] for i in range(rows)]
    width = operator_cols + len(target)
    if ring.is_field:
        solutions = field_kernel(ring, stacked, width)
        projected = [vector[:operator_cols] for vector in solutions]
        return independent_columns(ring, projected, operator_cols)
    form = smith_normal_form(ring, stacked, width)
    if ledger is not None:
        ledger.record(ring, form.diagonal, f"{source}:system")
    solutions = [[form.V_inv[i][j] for i in range(width)] for j in range(form.rank, width)]
    projected = [vector[:operator_cols] for vector in solutions]
    projected = [vector for vector in projected if any(not ring.is_zero(v) for v in vector)]
    return saturate(ring, projected, operator_cols, ledger, f"{source}:cut")
