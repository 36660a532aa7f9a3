"""Command line entry point.

Every command writes its JSON payload to the file named by ``--out`` and a
short human summary to stdout; without ``--out`` the JSON goes to stdout and
the summary to stderr.

Exit status: 0 on success, 2 when input or a requested check fails, 1 on an
internal error and 64 on a usage error.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import attrs
import click
from pydantic import ValidationError

from core.characters import char_eval, check_order, check_ray_class_consistency
from core.coeff_ring import parse_ring
from core.config import get_settings
from core.eisenstein import EisensteinSpec, eisenstein_series, validate_constant_tuple
from core.errors import ConfigError, HMFError, InsufficientDataError, ValidationFailure
from core.graph import run_multicharacteristic
from core.hecke import HeckeContext, hecke_apply
from core.ideals import generator, ideal_from_label, ideals_up_to, narrow_class_group, prime_ideals_up_to
from core.ingestion import (
    CharacterConfig,
    RunConfig,
    build_character,
    build_characters,
    load_run_config,
    materialize_run,
    resolve_ideal,
)
from core.log import configure_logging
from core.pipeline import assemble_report, run_stability
from core.qexp import invert, series_mul
from core.quad_field import QuadraticField, element_to_json, format_element, fundamental_unit
from core.serialization import character_to_json, dumps, load_series, read_json, series_to_json, write_json
from core.stability import escalate_bound, sturm_heuristic
from core.tables import emit_tables, report_text

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2
EXIT_USAGE = 64

DEFAULT_FIELD = 5
DEFAULT_BOUND = 50


@attrs.frozen
class CliOptions:
    field: int
    ring: Optional[str]
    bound: Optional[int]
    out: Optional[Path]
    jobs: Optional[int]

    @property
    def quadratic_field(self) -> QuadraticField:
        return QuadraticField(self.field)

    @property
    def bound_or_default(self) -> int:
        return self.bound or DEFAULT_BOUND

    def coefficient_ring(self):
        return parse_ring(self.ring or "q")


def _emit(options: CliOptions, payload: Any, summary: str) -> None:
    if options.out is None:
        click.echo(dumps(payload).decode())
        click.echo(summary, err=True)
        return
    write_json(options.out, payload)
    click.echo(summary)


def _run_config(options: CliOptions, path: str) -> RunConfig:
    config = load_run_config(path)
    updates: Dict[str, Any] = {}
    if options.ring:
        updates["ring"] = options.ring
    if options.bound:
        updates["bound"] = options.bound
    return config.model_copy(update=updates) if updates else config


def _load_characters(path: Optional[str], options: CliOptions):
    classes = narrow_class_group(options.quadratic_field)
    configs: Dict[str, CharacterConfig] = {}
    if path:
        payload = read_json(path, error=ConfigError)
        try:
            configs = {name: CharacterConfig.model_validate(value) for name, value in payload.items()}
        except (AttributeError, ValidationError) as exc:
            raise ConfigError("invalid character file", path=path, detail=str(exc)) from exc
    return classes, build_characters(configs, classes, options.coefficient_ring())


@click.group()
@click.option("--field", "field", type=int, default=DEFAULT_FIELD, show_default=True, help="d of K = Q(sqrt d).")
@click.option("--ring", default=None, help="Ring descriptor such as q, z, fp:3 or loc:x;inv=331.")
@click.option("--bound", type=int, default=None, help="Precision B.")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Where to write the JSON output.")
@click.option("--jobs", type=int, default=None, help="Worker cap for per-prime reruns.")
@click.option("--log-level", default=None, help="Logging level name.")
@click.pass_context
def cli(ctx, field, ring, bound, out, jobs, log_level):
    """Weight one Hilbert modular forms over real quadratic fields."""
    configure_logging(log_level or get_settings().log_level)
    ctx.obj = CliOptions(field=field, ring=ring, bound=bound, out=out, jobs=jobs)


@cli.command("field-info")
@click.pass_obj
def field_info(options: CliOptions):
    """Discriminant, units and narrow class number of K."""
    field = options.quadratic_field
    units = fundamental_unit(field)
    classes = narrow_class_group(field)
    payload = {
        "field": field.d,
        "discriminant": field.discriminant,
        "omega": field.omega_label,
        "fundamental_unit": element_to_json(units.fundamental_unit),
        "unit_norm": units.norm_of_unit,
        "totally_positive_unit": element_to_json(units.totally_positive_fundamental_unit),
        "h_plus": classes.h_plus,
    }
    summary = (
        f"K = Q(sqrt {field.d}), discriminant {field.discriminant}, w = {field.omega_label}\n"
        f"fundamental unit {format_element(units.fundamental_unit)} of norm {units.norm_of_unit}\n"
        f"h+ = {classes.h_plus}"
    )
    _emit(options, payload, summary)


@cli.command("ideals")
@click.option("--primes", is_flag=True, help="List prime ideals only.")
@click.pass_obj
def list_ideals(options: CliOptions, primes: bool):
    """Integral ideals of norm below the bound."""
    field = options.quadratic_field
    bound = options.bound_or_default
    found = prime_ideals_up_to(field, bound) if primes else ideals_up_to(field, bound)
    entries = []
    for ideal in found:
        element = generator(ideal)
        entries.append(
            {
                "label": ideal.label,
                "norm": int(ideal.norm()),
                "generator": element_to_json(element) if element is not None else None,
            }
        )
    _emit(options, {"field": field.d, "bound": bound, "ideals": entries}, f"{len(entries)} ideals of norm < {bound}")


@cli.command("narrow-class")
@click.pass_obj
def narrow_class(options: CliOptions):
    """Narrow class number and class representatives."""
    classes = narrow_class_group(options.quadratic_field)
    payload = {"field": classes.field.d, "h_plus": classes.h_plus, "representatives": classes.labels}
    _emit(options, payload, f"h+ = {classes.h_plus}")


@cli.command("character")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True), help="Character JSON.")
@click.option("--samples", type=int, default=None, help="Sampled elements for the ray class check.")
@click.pass_obj
def character(options: CliOptions, config_path: str, samples: Optional[int]):
    """Builds a character, checks it and lists its values on primes."""
    classes = narrow_class_group(options.quadratic_field)
    try:
        config = CharacterConfig.model_validate(read_json(config_path, error=ConfigError))
    except ValidationError as exc:
        raise ConfigError("invalid character config", path=config_path, detail=str(exc)) from exc
    chi = build_character(config, classes, options.coefficient_ring())
    checked = check_ray_class_consistency(chi, samples if samples is not None else get_settings().character_samples)
    primes = prime_ideals_up_to(classes.field, options.bound_or_default)
    if not check_order(chi, primes):
        raise ValidationFailure("character values do not have the declared order", order=chi.order)
    values = []
    for prime in primes:
        try:
            values.append({"prime": prime.label, "value": chi.ring.format(char_eval(chi, prime))})
        except InsufficientDataError:
            break
    payload = {"character": character_to_json(chi), "order": chi.order, "checked": checked, "values": values}
    _emit(options, payload, f"character of order {chi.order}, {checked} ray class samples checked")


@cli.command("eisenstein")
@click.option("--weight", "k", type=int, default=1, show_default=True, help="Parallel weight.")
@click.option("--char", "eta", default="trivial", show_default=True, help="Character applied to m/a.")
@click.option("--psi", default="trivial", show_default=True, help="Character applied to a.")
@click.option("--characters", "characters_path", type=click.Path(exists=True), default=None, help="Named characters.")
@click.option("--constant", multiple=True, help="Constant per narrow class; all 1 by default.")
@click.option("--scale", default="1", show_default=True)
@click.option("--no-check", is_flag=True, help="Skip the constant tuple check.")
@click.pass_obj
def eisenstein(options: CliOptions, k, eta, psi, characters_path, constant, scale, no_check):
    """Eisenstein series E_k(eta, psi) to the bound."""
    classes, characters = _load_characters(characters_path, options)
    for name in (eta, psi):
        if name not in characters:
            raise ConfigError("unknown character", character=name)
    constant = list(constant) or ["1"] * classes.h_plus
    spec = EisensteinSpec(characters[eta], characters[psi], k, constant, options.bound_or_default, scale)
    if not no_check:
        check = validate_constant_tuple(spec, classes)
        if not check.ok:
            raise ValidationFailure(
                "constant tuple is not Hecke compatible", index=check.witness_class, prime=check.witness_prime
            )
    series = eisenstein_series(spec, classes)
    _emit(options, series_to_json(series), f"E_{k}({eta}, {psi}) to bound {spec.bound}")


@cli.command("mul")
@click.option("--left", required=True, type=click.Path(exists=True))
@click.option("--right", required=True, type=click.Path(exists=True))
@click.pass_obj
def multiply(options: CliOptions, left: str, right: str):
    """Product of two series files."""
    product = series_mul(load_series(left), load_series(right))
    _emit(options, series_to_json(product), f"product of weight {product.weight} to bound {product.bound}")


@cli.command("invert")
@click.option("--series", "series_path", required=True, type=click.Path(exists=True))
@click.pass_obj
def invert_series(options: CliOptions, series_path: str):
    """Inverse of a series with unit constants."""
    inverse = invert(load_series(series_path))
    _emit(options, series_to_json(inverse), f"inverse of weight {inverse.weight} to bound {inverse.bound}")


@cli.command("hecke")
@click.option("--series", "series_path", required=True, type=click.Path(exists=True))
@click.option("--ideal", "label", required=True, help="Label of the ideal a of T_a.")
@click.option("--level", default="1.0.1", show_default=True, help="Label of the level.")
@click.option("--characters", "characters_path", type=click.Path(exists=True), default=None)
@click.option("--char", "name", default="trivial", show_default=True, help="Character of the space.")
@click.pass_obj
def hecke(options: CliOptions, series_path, label, level, characters_path, name):
    """T_a applied to a series file."""
    f = load_series(series_path)
    options = attrs.evolve(options, field=f.field.d, ring=options.ring or f.ring.descriptor)
    classes, characters = _load_characters(characters_path, options)
    if name not in characters:
        raise ConfigError("unknown character", character=name)
    ctx = HeckeContext(resolve_ideal(f.field, level), characters[name], f.classes)
    image = hecke_apply(ctx, ideal_from_label(f.field, label), f)
    _emit(options, series_to_json(image), f"T[{label}] image to bound {image.bound}")


@cli.command("stability")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.pass_obj
def stability(options: CliOptions, config_path: str):
    """Largest Hecke stable submodule over the configured ring."""
    inputs = materialize_run(_run_config(options, config_path))
    space = run_stability(inputs)
    report = assemble_report({"inputs": inputs, "space": space})["report"]
    _emit(options, report, report_text(report))


@cli.command("eigenforms")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--escalate", is_flag=True, help="Increase the bound in steps until the results repeat.")
@click.pass_obj
def eigenforms_command(options: CliOptions, config_path: str, escalate: bool):
    """Normalised eigenforms of the stable space over the configured ring."""
    config = _run_config(options, config_path).model_copy(update={"eigenforms": True})
    if not escalate:
        report = run_multicharacteristic(config, options.jobs, rerun=False)["report"]
        _emit(options, report, report_text(report))
        return
    settings = get_settings()
    level = resolve_ideal(QuadraticField(config.field), config.level)
    plan = sturm_heuristic(
        config.weight.vector().k0,
        config.multiplier_weight.vector().k0,
        int(level.norm()),
        settings.escalation_step,
        settings.escalation_max,
    )
    reports = {}

    def run(bound: int):
        state = run_multicharacteristic(config.model_copy(update={"bound": bound}), options.jobs, rerun=False)
        reports[bound] = state["report"]
        return state["space"].rank, len(state.get("eigenforms", {}).get(0, []))

    steps = escalate_bound(run, plan)
    final = reports[steps[-1].bound]
    payload = {
        "hard_bound": plan.hard_bound,
        "steps": [step.model_dump() for step in steps],
        "report": final.model_dump(mode="json"),
    }
    _emit(options, payload, report_text(final))


@cli.command("multichar")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.pass_obj
def multichar(options: CliOptions, config_path: str):
    """Stability run over the base ring with reruns modulo the exceptional primes."""
    report = run_multicharacteristic(_run_config(options, config_path), options.jobs)["report"]
    _emit(options, report, report_text(report))


@cli.command("emit-tables")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--max-norm", type=int, default=None, help="Largest prime norm in the tables.")
@click.pass_obj
def emit_tables_command(options: CliOptions, config_path: str, max_norm: Optional[int]):
    """Eigenvalue and frequency tables of every eigenform of a run, as CSV."""
    config = _run_config(options, config_path).model_copy(update={"eigenforms": True})
    state = run_multicharacteristic(config, options.jobs)
    forms = [form for _, found in sorted(state.get("eigenforms", {}).items()) for form in found]
    out_dir = options.out or Path(".")
    eigen_path, freq_path = emit_tables(forms, max_norm or config.bound - 1, out_dir)
    click.echo(f"{len(forms)} eigenforms: {eigen_path} {freq_path}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Runs the command line and maps failures to exit statuses."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="hmf", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_INTERNAL
    except click.ClickException as exc:
        exc.show()
        return EXIT_VALIDATION
    except HMFError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INTERNAL if type(exc) is HMFError else EXIT_VALIDATION
    except Exception:
        logger.exception("internal error")
        return EXIT_INTERNAL
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
