"""Eigenvalue and frequency tables, and plain text run summaries."""

import logging
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import pandas as pd

from core.eigenforms import Eigenform
from core.ideals import IdealHNF, generator, prime_ideals_up_to
from core.quad_field import QuadraticField, format_element
from core.stability import StabilityReport

logger = logging.getLogger(__name__)

EIGENVALUE_COLUMNS = ["norm", "prime", "generator"]
FREQUENCY_COLUMNS = ["form", "value", "count", "relative"]


def form_name(index: int, form: Eigenform) -> str:
    suffix = "^" * form.conjugate if form.conjugate else ""
    return f"f{index}{suffix}"


def _table_primes(field: QuadraticField, eigenforms: Sequence[Eigenform], max_norm: int) -> List[IdealHNF]:
    """Primes of norm at most max_norm that every eigenform knows."""
    limit = max_norm + 1
    if eigenforms:
        known = min(form.series.bound for form in eigenforms)
        if known < limit:
            logger.warning(
                "---TABLES: norms up to %d requested, series known below %d; table truncated---", max_norm, known
            )
            limit = known
    return prime_ideals_up_to(field, limit)


def _generator_text(prime: IdealHNF) -> str:
    element = generator(prime)
    return format_element(element) if element is not None else ""


def eigenvalue_table(eigenforms: Sequence[Eigenform], max_norm: int) -> pd.DataFrame:
    """One row per prime, ordered by norm then label, one column per eigenform.

    The entry is a_p of the normalised eigenform, its T_p eigenvalue.
    """
    if not eigenforms:
        return pd.DataFrame(columns=EIGENVALUE_COLUMNS)
    field = eigenforms[0].series.field
    rows = []
    for prime in _table_primes(field, eigenforms, max_norm):
        row = {"norm": int(prime.norm()), "prime": prime.label, "generator": _generator_text(prime)}
        for index, form in enumerate(eigenforms):
            row[form_name(index, form)] = form.ring.format(form.series.coefficient(prime))
        rows.append(row)
    columns = EIGENVALUE_COLUMNS + [form_name(i, f) for i, f in enumerate(eigenforms)]
    return pd.DataFrame(rows, columns=columns)


def value_counts(form: Eigenform, primes: Sequence[IdealHNF]) -> List[Tuple[str, int, Fraction]]:
    """Absolute and exact relative frequency of each a_p value."""
    counts = Counter(form.ring.format(form.series.coefficient(prime)) for prime in primes)
    total = sum(counts.values())
    return [(value, count, Fraction(count, total)) for value, count in sorted(counts.items())]


def frequency_table(eigenforms: Sequence[Eigenform], max_norm: int) -> pd.DataFrame:
    if not eigenforms:
        return pd.DataFrame(columns=FREQUENCY_COLUMNS)
    primes = _table_primes(eigenforms[0].series.field, eigenforms, max_norm)
    rows = []
    for index, form in enumerate(eigenforms):
        for value, count, relative in value_counts(form, primes):
            rows.append({"form": form_name(index, form), "value": value, "count": count, "relative": str(relative)})
    return pd.DataFrame(rows, columns=FREQUENCY_COLUMNS)


def emit_tables(
    eigenforms: Sequence[Eigenform], max_norm: int, out_dir: Union[str, Path]
) -> Tuple[Path, Path]:
    """Writes eigenvalues.csv and frequencies.csv.

    Returns:
        The paths of the two files.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    eigen_path = out_dir / "eigenvalues.csv"
    freq_path = out_dir / "frequencies.csv"
    eigenvalue_table(eigenforms, max_norm).to_csv(eigen_path, index=False, lineterminator="\n")
    frequency_table(eigenforms, max_norm).to_csv(freq_path, index=False, lineterminator="\n")
    logger.info("---TABLES: wrote %s and %s---", eigen_path.name, freq_path.name)
    return eigen_path, freq_path


def report_text(report: StabilityReport) -> str:
    lines = [
        f"field Q(sqrt {report.field}), level {report.level}, weight {report.weight}",
        f"ring {report.ring}, bound {report.bound} ({report.label})",
        f"dimension {report.dimension}" + (" (cuspidal)" if report.cuspidal else ""),
    ]
    for step in report.trace:
        lines.append(f"  cut by T[{step.ideal}] (norm {step.norm}): {step.rank_before} -> {step.rank_after}")
    if report.primes:
        lines.append("exceptional primes: " + ", ".join(str(p) for p in report.primes))
    elif not report.ring.startswith(("q", "fp:", "fq:")):
        lines.append("exceptional primes: none")
    if report.inverted_primes:
        lines.append("inverted primes: " + ", ".join(str(p) for p in report.inverted_primes))
    for prime, dimension in sorted(report.reruns.items(), key=lambda item: int(item[0])):
        lines.append(f"  mod {prime}: dimension {dimension}")
    for index, form in enumerate(report.eigenforms):
        lines.append(f"eigenform {index} over {form.ring}: squaring test {form.squaring}, orbit size {form.orbit_size}")
    for assumption in report.assumptions:
        lines.append(f"assumed ({'verified' if assumption.verified else 'unverified'}): {assumption.statement}")
    lines.extend(report.notes)
    return "\n".join(lines) + "\n"
