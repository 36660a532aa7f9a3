"""Nodes of the multi-characteristic stability pipeline.

Each node takes the graph state and returns the keys it updates.
"""

import logging
from multiprocessing.dummy import Pool
from typing import Dict, List, Optional

import attrs

from core.eigenforms import Eigenform, eigenforms
from core.errors import HMFError
from core.ideals import IdealHNF, prime_ideals_up_to
from core.ingestion import RunInputs, materialize_run
from core.stability import (
    CandidateSpace,
    EigenformSummary,
    StabilityReport,
    build_report,
    candidate_space,
    largest_stable_submodule,
    prime_list,
    sturm_heuristic,
)

logger = logging.getLogger(__name__)


@attrs.frozen
class RerunOutcome:
    """Result of rerunning the stability computation modulo one prime.

    Attributes:
        prime: The rational prime p.
        space: The stable space over F_p, or None when the rerun was skipped.
        inputs: The run inputs over F_p.
        note: Why the rerun was skipped, if it was.
    """

    prime: int
    space: Optional[CandidateSpace] = None
    inputs: Optional[RunInputs] = None
    note: str = ""

    @property
    def dimension(self) -> Optional[int]:
        return None if self.space is None else self.space.rank


def run_stability(inputs: RunInputs) -> CandidateSpace:
    """Candidate space E^-1 M_{k+k'} cut down to its largest Hecke stable submodule."""
    space = candidate_space(inputs.multiplier, inputs.basis, inputs.config.bound, cuspidal=inputs.cuspidal)
    return largest_stable_submodule(space, inputs.ctx, inputs.schedule)


def rerun_modulo(inputs: RunInputs, p: int) -> RerunOutcome:
    """Repeats the run over the residue field F_p of the base ring."""
    try:
        residue = inputs.ring.residue_field(p)
        reduced = materialize_run(inputs.config, residue)
        space = run_stability(reduced)
    except HMFError as exc:
        logger.warning("---GRAPH: rerun modulo %d skipped: %s---", p, exc)
        return RerunOutcome(prime=p, note=f"mod {p}: {exc}")
    logger.info("---GRAPH: dimension %d modulo %d---", space.rank, p)
    return RerunOutcome(prime=p, space=space, inputs=reduced)


def eigen_primes(inputs: RunInputs) -> Optional[List[IdealHNF]]:
    bound = inputs.config.eigen_bound
    if bound is None:
        return None
    return prime_ideals_up_to(inputs.classes.field, bound + 1)


def summarize(form: Eigenform) -> EigenformSummary:
    ring = form.ring
    return EigenformSummary(
        ring=ring.descriptor,
        characteristic=ring.characteristic,
        eigenvalues={prime.label: ring.format(value) for prime, value in form.eigenvalues.items()},
        normalized=form.normalized,
        squaring=form.squaring,
        orbit_size=form.orbit_size,
        block_dimension=form.block_dimension,
        coefficients={ideal.label: ring.format(form.series.coeffs[ideal]) for ideal in form.series.ideals if ideal in form.series.coeffs},
        constant=[ring.format(value) for value in form.series.constant],
    )


# --- Nodes ---


def prepare(state) -> Dict:
    logger.info("---GRAPH: preparing run---")
    return {"inputs": materialize_run(state["config"])}


def stabilize(state) -> Dict:
    logger.info("---GRAPH: computing the largest Hecke stable submodule---")
    return {"space": run_stability(state["inputs"])}


def collect_primes(state) -> Dict:
    """The exceptional primes, plus any requested in the config, become rerun targets."""
    listed = prime_list(state["space"])
    targets = sorted(set(listed.primes) | set(state["config"].extra_primes))
    logger.info("---GRAPH: exceptional primes %s, reruns %s---", listed.primes, targets)
    return {"exceptional": listed.primes, "rerun_targets": targets}


def rerun_primes(state) -> Dict:
    """Reruns modulo each target prime; independent runs share a worker pool."""
    inputs = state["inputs"]
    targets = state["rerun_targets"]
    jobs = max(1, min(state.get("jobs") or 1, len(targets)))
    if jobs == 1:
        outcomes = [rerun_modulo(inputs, p) for p in targets]
    else:
        with Pool(jobs) as pool:
            outcomes = pool.map(lambda p: rerun_modulo(inputs, p), targets)
    return {"reruns": {outcome.prime: outcome for outcome in outcomes}}


def _eigenforms_or_note(
    space: CandidateSpace, inputs: RunInputs, p: int, notes: List[str]
) -> Optional[List[Eigenform]]:
    where = "the base run" if p == 0 else f"mod {p}"
    try:
        forms = eigenforms(space, inputs.ctx, inputs.square_basis, eigen_primes(inputs))
    except HMFError as exc:
        logger.warning("---GRAPH: eigenforms of %s failed: %s---", where, exc)
        notes.append(f"eigenforms {where}: {exc}")
        return None
    for form in forms:
        if form.block_dimension > 1:
            notes.append(f"eigenforms {where}: block of dimension {form.block_dimension} does not split")
    return forms


def compute_eigenforms(state) -> Dict:
    """Splits every nonzero stable space; a failure in one characteristic becomes a report note."""
    found: Dict[int, List[Eigenform]] = {}
    notes: List[str] = []
    runs = [(0, state["space"], state["inputs"])]
    for p, outcome in sorted(state.get("reruns", {}).items()):
        if outcome.space is not None:
            runs.append((p, outcome.space, outcome.inputs))
    for p, space, inputs in runs:
        if not space.rank:
            continue
        forms = _eigenforms_or_note(space, inputs, p, notes)
        if forms is not None:
            found[p] = forms
    return {"eigenforms": found, "eigen_notes": notes}


def assemble_report(state) -> Dict:
    inputs = state["inputs"]
    config = inputs.config
    space = state["space"]
    weight_sum = inputs.weight_sum
    plan = sturm_heuristic(
        config.weight.vector().k0, config.multiplier_weight.vector().k0, int(inputs.level.norm())
    )
    report: StabilityReport = build_report(
        space,
        inputs.level,
        weight_sum,
        plan.hard_bound,
        sturm=config.sturm_bound,
        generation_bound=config.hecke_generation_bound,
    )
    for p, outcome in sorted(state.get("reruns", {}).items()):
        if outcome.dimension is not None:
            report.reruns[str(p)] = outcome.dimension
        if outcome.note:
            report.notes.append(outcome.note)
    for p, forms in sorted(state.get("eigenforms", {}).items()):
        report.eigenforms.extend(summarize(form) for form in forms)
    report.notes.extend(state.get("eigen_notes", []))
    logger.info("---GRAPH: report assembled, dimension %d, reruns %s---", report.dimension, report.reruns)
    return {"report": report}
