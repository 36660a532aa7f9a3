"""JSON codecs for series, characters and reports.

Every number is written as an exact string; keys are sorted so the same
data always gives the same bytes.
"""

from pathlib import Path
from typing import Any, Dict, Optional, Union

import orjson
from pydantic import BaseModel

from core.characters import (
    ClassGroupCharacter,
    IdealCharacter,
    ProductCharacter,
    QuadraticCharacter,
    TableCharacter,
    TrivialCharacter,
)
from core.coeff_ring import parse_ring
from core.errors import BasisFileError, HMFError
from core.ideals import NarrowClassData, ideal_from_label, ideal_to_json, narrow_class_group
from core.qexp import AdelicSeries, WeightVector
from core.quad_field import QuadraticField

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2


def dumps(payload: Any) -> bytes:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return orjson.dumps(payload, option=JSON_OPTIONS)


def write_json(path: Union[str, Path], payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(payload) + b"\n")
    return path


def read_json(path: Union[str, Path], error=BasisFileError) -> Any:
    try:
        return orjson.loads(Path(path).read_bytes())
    except OSError as exc:
        raise error("cannot read file", path=str(path)) from exc
    except orjson.JSONDecodeError as exc:
        raise error("file is not valid JSON", path=str(path), position=exc.pos) from exc


def series_to_json(f: AdelicSeries) -> Dict[str, Any]:
    ring = f.ring
    return {
        "field": f.field.d,
        "weight": f.weight.as_list(),
        "ring": ring.descriptor,
        "bound": f.bound,
        "classes": f.classes.labels,
        "constant": [ring.format(c) for c in f.constant],
        "coeffs": [
            {"ideal": ideal.label, "value": ring.format(f.coeffs[ideal])}
            for ideal in f.ideals
            if ideal in f.coeffs
        ],
    }


def classes_from_labels(field: QuadraticField, labels) -> NarrowClassData:
    canonical = narrow_class_group(field)
    if list(labels) == canonical.labels:
        return canonical
    return canonical.with_representatives([ideal_from_label(field, label) for label in labels])


def series_from_json(payload: Dict[str, Any], classes: Optional[NarrowClassData] = None) -> AdelicSeries:
    """Decodes a series, naming the offending ideal when a value is bad.

    Raises:
        BasisFileError: On any malformed entry.
    """
    try:
        field = QuadraticField(int(payload["field"]))
        ring = parse_ring(payload["ring"])
        weight = WeightVector.from_list(payload["weight"])
        bound = int(payload["bound"])
        if classes is None:
            classes = classes_from_labels(field, payload["classes"])
        constant = [ring.parse(str(value)) for value in payload["constant"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise BasisFileError("malformed series header", detail=str(exc)) from exc
    coeffs = {}
    for entry in payload.get("coeffs", []):
        label = entry.get("ideal") if isinstance(entry, dict) else None
        try:
            ideal = ideal_from_label(field, label)
            coeffs[ideal] = ring.parse(str(entry["value"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise BasisFileError("malformed coefficient", ideal=label) from exc
    try:
        return AdelicSeries.build(classes, ring, weight, bound, constant, coeffs)
    except HMFError as exc:
        raise BasisFileError("invalid series", detail=exc.message, **exc.context) from exc


def character_to_json(chi: IdealCharacter) -> Dict[str, Any]:
    """Config form of a character, as read back by the run config loader."""
    payload: Dict[str, Any] = {"modulus": ideal_to_json(chi.modulus)}
    if isinstance(chi, TrivialCharacter):
        payload["kind"] = "trivial"
    elif isinstance(chi, QuadraticCharacter):
        payload["kind"] = "quadratic"
        payload["nontrivial_class_values"] = list(chi.class_values[1:])
    elif isinstance(chi, TableCharacter):
        payload["kind"] = "table"
        payload["table"] = [
            {"prime": prime.label, "value": str(value)}
            for prime, value in sorted(chi.table.items(), key=lambda item: item[0].sort_key)
        ]
    elif isinstance(chi, ClassGroupCharacter):
        payload["kind"] = "class"
        payload["values"] = [str(value) for value in chi.values]
    elif isinstance(chi, ProductCharacter):
        payload["kind"] = "product"
        payload["factors"] = [character_to_json(factor) for factor in chi.factors]
    return payload


def load_series(path: Union[str, Path]) -> AdelicSeries:
    """Reads a single series file as written by ``write_json(path, series_to_json(f))``."""
    payload = read_json(path)
    if not isinstance(payload, dict):
        raise BasisFileError("series file must hold one JSON object", path=str(path))
    return series_from_json(payload)
