"""Run configurations and basis files.

A run configuration names the field, level, weights, characters, the
multiplier E and where the weight k + k' basis comes from. Basis files carry
externally computed bases of forms, one series per entry under a shared
header.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import attrs
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.characters import (
    IdealCharacter,
    ProductCharacter,
    narrow_class_character,
    quadratic_character,
    table_character,
    trivial_character,
)
from core.coeff_ring import CoefficientRing, PrimeField, parse_ring, validate_ring_weight_compat
from core.eisenstein import EisensteinSpec, eisenstein_series
from core.errors import BasisFileError, ConfigError, HMFError
from core.hecke import HeckeContext, hecke_images
from core.ideals import (
    IdealHNF,
    NarrowClassData,
    are_coprime,
    ideal_from_json,
    ideal_from_label,
    narrow_class_group,
    prime_ideals_up_to,
    principal_ideal,
)
from core.linalg import in_span
from core.qexp import AdelicSeries, WeightVector, reduce_series, truncate
from core.quad_field import QuadraticField, element_from_json
from core.serialization import classes_from_labels, read_json, series_from_json, series_to_json, write_json

logger = logging.getLogger(__name__)

IdealPayload = Union[str, Dict[str, str]]


def _location(exc: ValidationError) -> str:
    error = exc.errors()[0]
    where = ".".join(str(part) for part in error["loc"]) or "<root>"
    return f"{where}: {error['msg']}"


# --- Run configuration models ---


class WeightConfig(BaseModel):
    """A weight written as [k1, k2]."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    k1: int
    k2: int

    @model_validator(mode="before")
    @classmethod
    def _from_list(cls, value: Any) -> Any:
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError("a weight has exactly two components")
            return {"k1": value[0], "k2": value[1]}
        return value

    @model_validator(mode="after")
    def _check_paritious(self) -> "WeightConfig":
        if (self.k1 - self.k2) % 2:
            raise ValueError(f"weight [{self.k1}, {self.k2}] is not paritious")
        return self

    def vector(self) -> WeightVector:
        return WeightVector(self.k1, self.k2)


class TableEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    prime: str = Field(description="Label of a prime ideal coprime to the modulus.")
    value: Union[int, str] = Field(description="The character value, an exact ring element.")


class CharacterConfig(BaseModel):
    """One named character of a run."""

    model_config = ConfigDict(extra="forbid")

    modulus: IdealPayload = Field(default="1.0.1", description="Label, HNF entries or a generator of the modulus.")
    kind: Literal["trivial", "quadratic", "table", "class", "product"] = "trivial"
    table: List[TableEntry] = Field(default_factory=list, description="Values on primes, for table characters.")
    order: Optional[int] = Field(default=None, ge=1, description="Declared order of a table character.")
    nontrivial_class_values: Optional[List[int]] = Field(
        default=None, description="Values at the anchors of the nontrivial narrow classes."
    )
    values: Optional[List[Union[int, str]]] = Field(default=None, description="Values per narrow class.")
    factors: List["CharacterConfig"] = Field(default_factory=list, description="Factors of a product character.")


CharacterConfig.model_rebuild()


class EisensteinConfig(BaseModel):
    """An Eisenstein series E_k(eta, psi) with its constant tuple."""

    model_config = ConfigDict(extra="forbid")

    eta: str = Field(default="trivial", description="Name of the character applied to m/a.")
    psi: str = Field(default="trivial", description="Name of the character applied to a.")
    k: int = Field(default=1, ge=1, description="Parallel weight.")
    constant: List[Union[int, str]] = Field(description="Constant term per narrow class.")
    scale: Union[int, str] = Field(default=1, description="Multiplier applied to the whole series.")


class RunConfig(BaseModel):
    """A stability run, read from a JSON document."""

    model_config = ConfigDict(extra="forbid")

    field: int = Field(description="The squarefree d > 1 of K = Q(sqrt d).")
    level: IdealPayload = Field(default="1.0.1", description="The level N.")
    weight: WeightConfig = Field(description="Target weight k.")
    multiplier_weight: WeightConfig = Field(description="Weight k' of the multiplier E.")
    ring: str = Field(default="q", description="Ring descriptor of the base run.")
    bound: int = Field(gt=1, description="Precision B.")
    characters: Dict[str, CharacterConfig] = Field(default_factory=dict)
    multiplier: Union[EisensteinConfig, str] = Field(description="Eisenstein spec or a series file.")
    basis_file: Optional[str] = Field(default=None, description="Basis of forms of weight k + k'.")
    product_basis: List[EisensteinConfig] = Field(
        default_factory=list, description="Eisenstein series whose products with E give the basis."
    )
    square_basis_file: Optional[str] = Field(default=None, description="Basis of weight 2k for the squaring test.")
    square_basis_from_products: bool = Field(
        default=False, description="Use the product basis for the squaring test, valid when 2k = k + k'."
    )
    character: str = Field(default="trivial", description="Name of the character of the target space.")
    schedule: Optional[List[str]] = Field(default=None, description="Hecke operators used for the cuts.")
    extra_primes: List[int] = Field(default_factory=list, description="Primes rerun besides the exceptional ones.")
    hecke_generation_bound: Optional[int] = None
    sturm_bound: Optional[int] = Field(default=None, description="Assumed Sturm bound, recorded only.")
    cuspidal: bool = False
    eigen_bound: Optional[int] = Field(default=None, description="Largest prime norm used for eigen splitting.")
    eigenforms: bool = Field(default=True, description="Compute eigenforms after the stability run.")

    @field_validator("field")
    @classmethod
    def _check_field(cls, value: int) -> int:
        if value <= 1:
            raise ValueError("d must be a squarefree integer greater than 1")
        return value

    @model_validator(mode="after")
    def _check_basis_source(self) -> "RunConfig":
        if self.basis_file is None and not self.product_basis:
            raise ValueError("either basis_file or product_basis is required")
        if self.square_basis_from_products and not self.product_basis:
            raise ValueError("square_basis_from_products needs product_basis")
        return self


def load_run_config(source: Union[str, Path, Dict[str, Any]]) -> RunConfig:
    """Validates a run configuration; relative file names resolve against the config's directory.

    Raises:
        ConfigError: Naming the first invalid location.
    """
    base: Optional[Path] = None
    if isinstance(source, dict):
        payload = source
    else:
        base = Path(source).resolve().parent
        payload = read_json(source, error=ConfigError)
    try:
        config = RunConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigError("invalid run configuration", location=_location(exc)) from exc
    if base is not None:
        updates = {}
        for key in ("basis_file", "square_basis_file"):
            value = getattr(config, key)
            if value is not None and not Path(value).is_absolute():
                updates[key] = str(base / value)
        if isinstance(config.multiplier, str) and not Path(config.multiplier).is_absolute():
            updates["multiplier"] = str(base / config.multiplier)
        config = config.model_copy(update=updates)
    return config


# --- Characters ---


def resolve_ideal(field: QuadraticField, payload: IdealPayload) -> IdealHNF:
    """An ideal from its label, its HNF entries {a, b, c} or a generator {x, y}."""
    if isinstance(payload, dict) and "x" in payload:
        return principal_ideal(element_from_json(field, payload))
    return ideal_from_json(field, payload)


def build_character(
    config: CharacterConfig, classes: NarrowClassData, ring: CoefficientRing
) -> IdealCharacter:
    field = classes.field
    modulus = resolve_ideal(field, config.modulus)
    if config.kind == "trivial":
        return trivial_character(field, ring, modulus)
    if config.kind == "quadratic":
        return quadratic_character(modulus, classes, ring, config.nontrivial_class_values)
    if config.kind == "table":
        table = {ideal_from_label(field, entry.prime): entry.value for entry in config.table}
        return table_character(modulus, table, ring, config.order)
    if config.kind == "class":
        return narrow_class_character(classes, config.values, ring)
    if not config.factors:
        raise ConfigError("product character needs factors")
    return ProductCharacter(tuple(build_character(factor, classes, ring) for factor in config.factors))


def build_characters(
    configs: Dict[str, CharacterConfig], classes: NarrowClassData, ring: CoefficientRing
) -> Dict[str, IdealCharacter]:
    """Named characters; ``trivial`` is always defined."""
    characters: Dict[str, IdealCharacter] = {"trivial": trivial_character(classes.field, ring)}
    for name, config in configs.items():
        try:
            characters[name] = build_character(config, classes, ring)
        except HMFError as exc:
            context = {key: value for key, value in exc.context.items() if key != "character"}
            raise type(exc)(exc.message, character=name, **context) from exc
    return characters


def eisenstein_spec(config: EisensteinConfig, characters: Dict[str, IdealCharacter], bound: int) -> EisensteinSpec:
    for name in (config.eta, config.psi):
        if name not in characters:
            raise ConfigError("unknown character", character=name)
    return EisensteinSpec(characters[config.eta], characters[config.psi], config.k, config.constant, bound, config.scale)


# --- Basis files ---


class BasisHeader(BaseModel):
    """Parameters shared by every series of a basis file."""

    model_config = ConfigDict(extra="forbid")

    field: int
    level: str = Field(description="Label of the level.")
    weight: List[int]
    character: Optional[str] = Field(default=None, description="Name of the character, informational.")
    bound: int = Field(gt=0)
    ring: str
    classes: List[str] = Field(description="Labels of the narrow class representatives.")
    cuspidal: bool = False


class CoefficientEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ideal: str
    value: Union[int, str]


class BasisEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    constant: List[Union[int, str]]
    coeffs: List[CoefficientEntry] = Field(default_factory=list)


class BasisFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    header: BasisHeader
    series: List[BasisEntry]


class ClosureCheck(BaseModel):
    index: int = Field(description="Position of the basis vector in the file.")
    prime: str = Field(description="Label of the Hecke operator applied.")
    ok: bool


class IngestionReport(BaseModel):
    """Validation outcome of a basis file."""

    path: str
    count: int
    ring: str
    bound: int
    cuspidal: bool = False
    closure: List[ClosureCheck] = Field(default_factory=list)
    ok: bool = Field(default=True, description="False when some closure check fails.")


def _series_payload(header: BasisHeader, entry: BasisEntry) -> Dict[str, Any]:
    return {
        "field": header.field,
        "weight": header.weight,
        "ring": header.ring,
        "bound": header.bound,
        "classes": header.classes,
        "constant": entry.constant,
        "coeffs": [{"ideal": c.ideal, "value": c.value} for c in entry.coeffs],
    }


def closure_check(
    basis: Sequence[AdelicSeries], ctx: HeckeContext, primes: Sequence[IdealHNF]
) -> List[ClosureCheck]:
    """Whether T_p of each vector lies in the span of the basis modulo q^(B/N(p))."""
    checks = []
    ring = basis[0].ring
    for prime in primes:
        images = hecke_images(ctx, prime, basis)
        bound = images[0].bound
        columns = [truncate(g, bound).to_vector() for g in basis]
        for index, image in enumerate(images):
            checks.append(ClosureCheck(index=index, prime=prime.label, ok=in_span(ring, columns, image.to_vector())))
    return checks


def ingest_basis(
    path: Union[str, Path], ctx: Optional[HeckeContext] = None, closure_primes: int = 2
) -> Tuple[List[AdelicSeries], IngestionReport]:
    """Reads a basis file and validates it.

    Args:
        path: The JSON basis file.
        ctx: When given, the level must match and T_p closure is spot
            checked on the first ``closure_primes`` primes coprime to the level.
        closure_primes: Number of primes used for the closure check.

    Returns:
        The series and a validation report.

    Raises:
        BasisFileError: On malformed files, with the location or ideal label.
    """
    path = Path(path)
    try:
        parsed = BasisFile.model_validate(read_json(path))
    except ValidationError as exc:
        raise BasisFileError("invalid basis file", path=str(path), location=_location(exc)) from exc
    header = parsed.header
    try:
        field = QuadraticField(header.field)
        classes = classes_from_labels(field, header.classes)
        level = ideal_from_label(field, header.level)
    except (HMFError, ValueError) as exc:
        raise BasisFileError("invalid basis header", path=str(path), detail=str(exc)) from exc
    if ctx is not None and ctx.level != level:
        raise BasisFileError("basis level differs from the run level", path=str(path), level=header.level)
    series = []
    for index, entry in enumerate(parsed.series):
        try:
            series.append(series_from_json(_series_payload(header, entry), classes))
        except BasisFileError as exc:
            raise BasisFileError(exc.message, entry=index, **exc.context) from exc
    report = IngestionReport(
        path=str(path), count=len(series), ring=header.ring, bound=header.bound, cuspidal=header.cuspidal
    )
    if ctx is not None and series:
        primes = [p for p in prime_ideals_up_to(field, header.bound) if are_coprime(p, level)]
        report.closure = closure_check(series, ctx, primes[:closure_primes])
        report.ok = all(check.ok for check in report.closure)
        if not report.ok:
            logger.warning("---INGESTION: %s fails the Hecke closure check---", path.name)
    logger.info("---INGESTION: %d series from %s---", len(series), path.name)
    return series, report


def write_basis(
    path: Union[str, Path],
    basis: Sequence[AdelicSeries],
    level: IdealHNF,
    character: Optional[str] = None,
    cuspidal: bool = False,
) -> Path:
    if not basis:
        raise BasisFileError("cannot write an empty basis", path=str(path))
    first = series_to_json(basis[0])
    header = {key: first[key] for key in ("field", "weight", "ring", "bound", "classes")}
    header.update(level=level.label, character=character, cuspidal=cuspidal)
    entries = []
    for f in basis:
        payload = series_to_json(f)
        entries.append({"constant": payload["constant"], "coeffs": payload["coeffs"]})
    return write_json(path, {"header": header, "series": entries})


# --- Materialised runs ---


@attrs.frozen
class RunInputs:
    """Everything a stability run needs, over one coefficient ring."""

    config: RunConfig
    ring: CoefficientRing
    classes: NarrowClassData
    level: IdealHNF
    characters: Dict[str, IdealCharacter] = attrs.field(eq=False)
    multiplier: AdelicSeries
    basis: List[AdelicSeries] = attrs.field(eq=False)
    square_basis: Optional[List[AdelicSeries]] = attrs.field(eq=False)
    ctx: HeckeContext
    schedule: Optional[List[IdealHNF]] = attrs.field(eq=False)
    cuspidal: bool = False

    @property
    def weight_sum(self) -> WeightVector:
        return self.config.weight.vector() + self.config.multiplier_weight.vector()


def _into_ring(series: Sequence[AdelicSeries], ring: CoefficientRing) -> List[AdelicSeries]:
    """Moves file series into the run ring, reducing modulo p when the run is over F_p."""
    moved = []
    for f in series:
        if f.ring == ring:
            moved.append(f)
        elif isinstance(ring, PrimeField) and not f.ring.characteristic:
            moved.append(reduce_series(f, ring.p))
        else:
            moved.append(f.over(ring))
    return moved


def check_weights(config: RunConfig, ring: CoefficientRing, field: QuadraticField, level: IdealHNF) -> None:
    """Every weight of the run, k, k', k + k' and 2k, must be usable over the ring.

    Raises:
        ConfigError: Naming the failing condition and weight.
    """
    k = config.weight.vector()
    k_prime = config.multiplier_weight.vector()
    weights = [w.as_list() for w in (k, k_prime, k + k_prime, k * 2)]
    report = validate_ring_weight_compat(ring, weights, field, int(level.norm()))
    if not report.ok:
        raise ConfigError(report.message, condition=report.condition, weight=report.weight, ring=ring.descriptor)


def materialize_run(config: RunConfig, ring: Optional[CoefficientRing] = None) -> RunInputs:
    """Builds characters, the multiplier and the bases of a run over a ring.

    Args:
        config: The validated run configuration.
        ring: Ring to run over; the configured ring by default. Reruns pass a
            residue field of the configured ring.

    Raises:
        ConfigError: On inconsistent weights, unknown names or bad ideals.
        BasisFileError: On malformed basis files.
    """
    ring = ring or parse_ring(config.ring)
    field = QuadraticField(config.field)
    classes = narrow_class_group(field)
    level = resolve_ideal(field, config.level)
    check_weights(config, ring, field, level)
    characters = build_characters(config.characters, classes, ring)
    if config.character not in characters:
        raise ConfigError("unknown character of the target space", character=config.character)
    ctx = HeckeContext(level, characters[config.character], classes)
    k_prime = config.multiplier_weight.vector()
    weight_sum = config.weight.vector() + k_prime

    if isinstance(config.multiplier, EisensteinConfig):
        multiplier = eisenstein_series(eisenstein_spec(config.multiplier, characters, config.bound), classes)
    else:
        multiplier, _ = ingest_basis(config.multiplier)
        if len(multiplier) != 1:
            raise ConfigError("multiplier file must hold exactly one series", path=config.multiplier)
        multiplier = truncate(_into_ring(multiplier, ring)[0], config.bound)
    if multiplier.weight != k_prime:
        raise ConfigError("multiplier weight differs from multiplier_weight", weight=str(multiplier.weight))

    products = [
        eisenstein_series(eisenstein_spec(spec, characters, config.bound), classes) * multiplier
        for spec in config.product_basis
    ]
    basis = list(products)
    cuspidal = config.cuspidal
    if config.basis_file is not None:
        loaded, report = ingest_basis(config.basis_file)
        cuspidal = cuspidal or report.cuspidal
        basis.extend(truncate(g, config.bound) for g in _into_ring(loaded, ring))
    if any(g.weight != weight_sum for g in basis):
        raise ConfigError("basis weight differs from k + k'", expected=str(weight_sum))

    square_basis: Optional[List[AdelicSeries]] = None
    if config.square_basis_file is not None:
        loaded, _ = ingest_basis(config.square_basis_file)
        square_basis = _into_ring(loaded, ring)
    elif config.square_basis_from_products:
        square_basis = products

    schedule = None
    if config.schedule is not None:
        schedule = [ideal_from_label(field, label) for label in config.schedule]
    logger.info("---PREPARE: %d basis vectors over %s, B=%d---", len(basis), ring.descriptor, config.bound)
    return RunInputs(
        config=config,
        ring=ring,
        classes=classes,
        level=level,
        characters=characters,
        multiplier=multiplier,
        basis=basis,
        square_basis=square_basis,
        ctx=ctx,
        schedule=schedule,
        cuspidal=cuspidal,
    )
