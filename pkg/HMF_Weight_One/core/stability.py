"""Hecke stability: candidate spaces, the largest stable submodule and its checks.

The candidate space is E^-1 times a space of higher weight forms. Cutting it
down by preimages of Hecke operators leaves the largest Hecke stable
submodule, which contains every genuine form of the target weight.
"""

import logging
import math
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import attrs
from pydantic import BaseModel, Field

from core.coeff_ring import CoefficientRing, Element
from core.errors import BoundMismatchError, UnsupportedError
from core.hecke import HeckeContext, hecke_images
from core.ideals import IdealHNF, NarrowClassData, ideals_up_to
from core.linalg import PivotLedger, Vector, in_span, saturate, solve_saturated_preimage
from core.qexp import AdelicSeries, WeightVector, invert, series_layout, series_mul, truncate

logger = logging.getLogger(__name__)

SquaringStatus = Literal["verified", "failed", "unverified"]


@attrs.frozen
class CutRecord:
    ideal: str
    norm: int
    rank_before: int
    rank_after: int


@attrs.define
class CandidateSpace:
    """A module of truncated series given by coordinate columns.

    Rows are the constant slots followed by the ideals of norm below the
    bound, ordered by norm. Over a principal ideal domain the column module
    is saturated.
    """

    ring: CoefficientRing
    classes: NarrowClassData
    weight: WeightVector
    bound: int
    columns: List[Vector]
    provenance: List[CutRecord] = attrs.field(factory=list)
    ledger: PivotLedger = attrs.field(factory=PivotLedger)
    cuspidal: bool = False

    @property
    def rank(self) -> int:
        return len(self.columns)

    @property
    def rows(self) -> int:
        return series_layout(self.classes, self.bound)

    def truncated_columns(self, bound: int) -> List[Vector]:
        rows = series_layout(self.classes, bound)
        return [column[:rows] for column in self.columns]

    def series(self) -> List[AdelicSeries]:
        return [
            AdelicSeries.from_vector(self.classes, self.ring, self.weight, self.bound, column)
            for column in self.columns
        ]


def candidate_space(
    multiplier: AdelicSeries, basis: Sequence[AdelicSeries], bound: Optional[int] = None, cuspidal: bool = False
) -> CandidateSpace:
    """Columns of E^-1 * g_i for a basis g_i of forms of weight k + k'.

    Raises:
        NotInvertibleError: When a constant of E is not a unit.
        UnsupportedError: When the basis weights differ.
    """
    if not basis:
        bound = bound or multiplier.bound
        return CandidateSpace(multiplier.ring, multiplier.classes, -multiplier.weight, bound, [], cuspidal=cuspidal)
    weights = {g.weight for g in basis}
    if len(weights) != 1:
        raise UnsupportedError("basis vectors have different weights", weights=sorted(str(w) for w in weights))
    bound = bound or min(g.bound for g in basis)
    if bound > multiplier.bound:
        raise BoundMismatchError("multiplier is known to lower precision than requested", bound=bound)
    inverse = invert(truncate(multiplier, bound))
    weight = basis[0].weight - multiplier.weight
    columns = [series_mul(inverse, truncate(g, bound)).to_vector() for g in basis]
    rows = series_layout(multiplier.classes, bound)
    columns = saturate(multiplier.ring, columns, rows)
    logger.info("---STABILITY: candidate space of rank %d, weight %s, bound %d---", len(columns), weight, bound)
    return CandidateSpace(multiplier.ring, multiplier.classes, weight, bound, columns, cuspidal=cuspidal)


def default_schedule(classes: NarrowClassData, bound: int) -> List[IdealHNF]:
    """All ideals m other than O with N(m)^2 <= B, by norm."""
    return [ideal for ideal in ideals_up_to(classes.field, math.isqrt(bound) + 1) if ideal.norm() > 1]


def _combine(ring: CoefficientRing, columns: Sequence[Vector], coordinates: Sequence[Vector]) -> List[Vector]:
    result = []
    for coordinate in coordinates:
        column = [ring.zero] * len(columns[0])
        for weight, source in zip(coordinate, columns):
            if ring.is_zero(weight):
                continue
            column = [a + weight * b for a, b in zip(column, source)]
        result.append(column)
    return result


def largest_stable_submodule(
    space: CandidateSpace, ctx: HeckeContext, schedule: Optional[Sequence[IdealHNF]] = None
) -> CandidateSpace:
    """Cuts the space down until every scheduled T_m maps V into V.

    Each cut replaces V by the saturated preimage of pi_{B/N(m)}(V) under
    T_m restricted to V. After a cut the sweep restarts from the first
    operator, so the result does not depend on where the cut happened.
    """
    ring = space.ring
    schedule = list(schedule) if schedule is not None else default_schedule(space.classes, space.bound)
    columns = [list(column) for column in space.columns]
    provenance = list(space.provenance)
    ledger = space.ledger
    changed = True
    while changed and columns:
        changed = False
        for ideal in schedule:
            rank = len(columns)
            if rank == 0:
                break
            current = attrs.evolve(space, columns=columns)
            images = hecke_images(ctx, ideal, current.series())
            image_bound = images[0].bound
            operator = [list(row) for row in zip(*(image.to_vector() for image in images))]
            target = current.truncated_columns(image_bound)
            preimage = solve_saturated_preimage(ring, operator, rank, target, ledger, f"T[{ideal.label}]")
            if len(preimage) < rank:
                columns = _combine(ring, columns, preimage)
                provenance.append(CutRecord(ideal.label, int(ideal.norm()), rank, len(columns)))
                logger.info("---STABILITY: T_%s cut rank %d -> %d---", ideal.label, rank, len(columns))
                changed = True
                break
    return attrs.evolve(space, columns=columns, provenance=provenance, ledger=ledger)


def squaring_test(
    beta: AdelicSeries, square_basis: Optional[Sequence[AdelicSeries]], bound: Optional[int] = None
) -> SquaringStatus:
    """Whether beta^2 lies in the span of a basis of forms of weight 2k.

    Returns "unverified" when no basis is available.

    Raises:
        UnsupportedError: When a basis form does not have the weight of beta^2.
    """
    if not square_basis:
        return "unverified"
    target = beta.weight + beta.weight
    wrong = sorted({str(g.weight) for g in square_basis if g.weight != target})
    if wrong:
        raise UnsupportedError("square basis has the wrong weight", expected=str(target), found=wrong)
    bound = min([beta.bound] + [g.bound for g in square_basis] + ([bound] if bound else []))
    square = truncate(series_mul(beta, beta), bound)
    ring = beta.ring
    columns = []
    for g in square_basis:
        g = truncate(g, bound)
        if g.ring != ring:
            g = g.over(ring)
        columns.append(g.to_vector())
    return "verified" if in_span(ring, columns, square.to_vector()) else "failed"


class PrimeList(BaseModel):
    """The exceptional primes of a run over a principal ideal domain."""

    primes: List[int] = Field(default_factory=list, description="Primes dividing a recorded pivot.")
    inverted: List[int] = Field(default_factory=list, description="Primes inverted in the ring.")
    note: str = Field(default="", description="Remarks, e.g. for runs over a field.")


def prime_list(space: CandidateSpace) -> PrimeList:
    """Primes of nonunit Smith pivots met in the run, minus the inverted ones."""
    inverted = sorted(space.ring.inverted_primes())
    if space.ring.is_field:
        return PrimeList(inverted=inverted, note="run over a field; no pivots are recorded")
    return PrimeList(primes=space.ledger.prime_list(frozenset(inverted)), inverted=inverted)


class SturmPlan(BaseModel):
    hard_bound: int = Field(description="The certified bound 2(k+k') N(N)^3.")
    plan: List[int] = Field(description="Bounds tried by the escalation runner.")


def sturm_heuristic(k: int, k_prime: int, level_norm: int, step: int = 500, maximum: int = 2000) -> SturmPlan:
    """The certified Sturm bound and an escalation schedule in fixed steps."""
    hard_bound = 2 * (k + k_prime) * level_norm**3
    return SturmPlan(hard_bound=hard_bound, plan=list(range(step, maximum + 1, step)))


class EscalationStep(BaseModel):
    bound: int
    dimension: int
    eigenforms: int
    label: Literal["certified", "heuristic"]


def escalate_bound(
    run: Callable[[int], Tuple[int, int]], plan: SturmPlan
) -> List[EscalationStep]:
    """Runs at increasing bounds until the dimension and eigenform count repeat.

    Args:
        run: Maps a bound to (candidate dimension, number of eigenforms).
        plan: Bounds to try and the certified bound.

    Returns:
        The steps taken, the last one being the accepted result.
    """
    steps: List[EscalationStep] = []
    for bound in plan.plan:
        dimension, count = run(bound)
        label = "certified" if bound > plan.hard_bound else "heuristic"
        steps.append(EscalationStep(bound=bound, dimension=dimension, eigenforms=count, label=label))
        logger.info("---ESCALATION: B=%d dim=%d eigenforms=%d (%s)---", bound, dimension, count, label)
        if len(steps) > 1 and (steps[-2].dimension, steps[-2].eigenforms) == (dimension, count):
            break
    return steps


# --- Reports ---


class Assumption(BaseModel):
    name: str
    statement: str
    verified: bool = False


class IterationModel(BaseModel):
    ideal: str
    norm: int
    rank_before: int
    rank_after: int


class EigenformSummary(BaseModel):
    ring: str = Field(description="Descriptor of the ring holding the eigenvalues.")
    characteristic: int = Field(default=0, description="Characteristic of the ring holding the eigenvalues.")
    eigenvalues: Dict[str, str] = Field(description="Eigenvalue per prime label.")
    normalized: bool
    squaring: SquaringStatus
    orbit_size: int = 1
    block_dimension: int = Field(default=1, description="Above one the eigenspace block did not split.")
    coefficients: Dict[str, str] = Field(default_factory=dict, description="Normalised coefficients by ideal label.")
    constant: List[str] = Field(default_factory=list)


class StabilityReport(BaseModel):
    """Summary of a stability run, optionally with reruns modulo primes."""

    field: int
    level: str
    ring: str
    weight: List[int]
    bound: int
    dimension: int
    cuspidal: bool = False
    trace: List[IterationModel] = Field(default_factory=list)
    primes: List[int] = Field(default_factory=list, description="The exceptional prime list.")
    inverted_primes: List[int] = Field(default_factory=list)
    reruns: Dict[str, int] = Field(default_factory=dict, description="Dimension per rerun prime.")
    eigenforms: List[EigenformSummary] = Field(default_factory=list)
    assumptions: List[Assumption] = Field(default_factory=list)
    label: Literal["certified", "heuristic"] = "heuristic"
    notes: List[str] = Field(default_factory=list)


def standard_assumptions(
    bound: int, sturm: Optional[int], generation_bound: Optional[int], weight_sum: WeightVector, ring: CoefficientRing
) -> List[Assumption]:
    """The hypotheses a run relies on, none of which is verified by the run."""
    assumptions = [
        Assumption(
            name="sturm",
            statement=f"B = {bound} exceeds the Sturm bound"
            + (f" (assumed {sturm})" if sturm else " (no bound supplied)"),
        ),
        Assumption(
            name="hecke_generation",
            statement="Hecke operators T_b with N(b) <= "
            + (str(generation_bound) if generation_bound else "B^(1/2)")
            + " generate the Hecke algebra",
        ),
    ]
    if not ring.is_field:
        assumptions.append(
            Assumption(
                name="surjectivity",
                statement=f"reduction of forms of weight {weight_sum} from characteristic 0 is surjective"
                + ("; no such result is known for parallel weight 2" if weight_sum == WeightVector(2, 2) else ""),
            )
        )
        assumptions.append(Assumption(name="pid", statement=f"{ring.descriptor} is a principal ideal domain"))
    return assumptions


def build_report(
    space: CandidateSpace,
    level: IdealHNF,
    weight_sum: WeightVector,
    hard_bound: int,
    sturm: Optional[int] = None,
    generation_bound: Optional[int] = None,
) -> StabilityReport:
    """Report of a finished run; "certified" only above the hard Sturm bound."""
    primes = prime_list(space)
    certified = space.bound > hard_bound
    notes = [primes.note] if primes.note else []
    return StabilityReport(
        field=space.classes.field.d,
        level=level.label,
        ring=space.ring.descriptor,
        weight=space.weight.as_list(),
        bound=space.bound,
        dimension=space.rank,
        cuspidal=space.cuspidal,
        trace=[IterationModel(**attrs.asdict(record)) for record in space.provenance],
        primes=primes.primes,
        inverted_primes=primes.inverted,
        assumptions=standard_assumptions(space.bound, sturm, generation_bound, weight_sum, space.ring),
        label="certified" if certified else "heuristic",
        notes=notes,
    )

