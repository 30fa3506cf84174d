"""JSON documents: universes and qsets, well pairs, NQM structures, topologies."""

from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import DomainError, SchemaError
from .nqm import FiniteHilbert, NQMStructure
from .qset import Kind, Qset, Species, Universe
from .topology import QTopology
from .wells import WellSpec


def load_json(path) -> dict:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    if not isinstance(doc, dict):
        raise SchemaError("", "top-level JSON value must be an object")
    return doc


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _require(doc, key, where=""):
    if key not in doc:
        raise SchemaError(f"{where}{key}", "missing")
    return doc[key]


def parse_universe(doc: dict) -> tuple[Universe, dict[str, Qset]]:
    """``{"species": [...], "ambient": {...}, "qsets": {...}}`` -> universe and named qsets."""
    raw = _require(doc, "species")
    if not isinstance(raw, list):
        raise SchemaError("species", "must be a list")
    species = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise SchemaError(f"species[{i}]", "must be an object")
        name = _require(item, "name", f"species[{i}].")
        kind = _require(item, "kind", f"species[{i}].")
        if not isinstance(name, str) or not name:
            raise SchemaError(f"species[{i}].name", "must be a non-empty string")
        try:
            species.append(Species(name, Kind(kind)))
        except ValueError:
            raise SchemaError(f"species[{i}].kind", f"must be 'm' or 'M', got {kind!r}") from None
    ambient = _require(doc, "ambient")
    if not isinstance(ambient, dict):
        raise SchemaError("ambient", "must be an object")
    try:
        universe = Universe.declare(species, ambient)
    except DomainError as exc:
        raise SchemaError("ambient", str(exc)) from None
    qsets = {}
    raw_qsets = doc.get("qsets", {})
    if not isinstance(raw_qsets, dict):
        raise SchemaError("qsets", "must be an object")
    for name, spec in raw_qsets.items():
        qsets[name] = parse_qset(universe, spec, f"qsets.{name}")
    return universe, qsets


def parse_qset(universe: Universe, spec, where: str) -> Qset:
    if not isinstance(spec, dict):
        raise SchemaError(where, "must be an object mapping species to counts or labels")
    try:
        return universe.qset(spec)
    except DomainError as exc:
        raise SchemaError(where, str(exc)) from None


def universe_to_json(universe: Universe, qsets: dict[str, Qset] | None = None) -> dict:
    return {
        "species": [{"name": s.name, "kind": s.kind.value} for s in universe.species],
        "ambient": universe.ambient.to_spec(),
        "qsets": {k: q.to_spec() for k, q in sorted((qsets or {}).items())},
    }


def dump_universe(universe: Universe, qsets: dict[str, Qset] | None = None) -> str:
    return dumps(universe_to_json(universe, qsets))


def parse_topology(doc: dict) -> tuple[Universe, Qset, QTopology | None]:
    """Carrier is ``doc["carrier"]`` (a qset name) or the ambient; opens optional."""
    universe, qsets = parse_universe(doc)
    ref = doc.get("carrier")
    if ref is None:
        carrier = universe.ambient
    elif ref in qsets:
        carrier = qsets[ref]
    else:
        raise SchemaError("carrier", f"unknown qset {ref!r}")
    if "opens" not in doc:
        return universe, carrier, None
    if not isinstance(doc["opens"], list):
        raise SchemaError("opens", "must be a list")
    opens = tuple(parse_qset(universe, spec, f"opens[{i}]") for i, spec in enumerate(doc["opens"]))
    return universe, carrier, QTopology(carrier, opens)


def parse_depth(value, where: str) -> float:
    if value in ("inf", "infinite", "INFINITE"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(where, f"must be a positive number or \"inf\", got {value!r}")
    return float(value)


def _number(item, key, where, default=None) -> float:
    value = item.get(key, default)
    if value is None:
        raise SchemaError(f"{where}.{key}", "missing")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}.{key}", f"must be a number, got {value!r}")
    return float(value)


def parse_wells(doc: dict) -> tuple[list[WellSpec], int]:
    raw = _require(doc, "wells")
    if not isinstance(raw, list) or len(raw) != 2:
        raise SchemaError("wells", "must be a list of exactly two wells")
    wells = []
    for i, item in enumerate(raw):
        where = f"wells[{i}]"
        if not isinstance(item, dict):
            raise SchemaError(where, "must be an object")
        try:
            wells.append(
                WellSpec(
                    center=_number(item, "center", where),
                    half_width=_number(item, "half_width", where),
                    depth=parse_depth(item.get("depth", "inf"), f"{where}.depth"),
                    mass=_number(item, "mass", where, doc.get("mass", 1.0)),
                    hbar=_number(item, "hbar", where, doc.get("hbar", 1.0)),
                )
            )
        except DomainError as exc:
            raise SchemaError(where, str(exc)) from None
    n = doc.get("n", 1)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SchemaError("n", "must be a positive integer")
    return wells, n


def parse_complex_matrix(raw, where: str):
    """Nested arrays of ``[re, im]`` pairs (a bare number is taken as real)."""
    if not isinstance(raw, list) or not all(isinstance(r, list) for r in raw):
        raise SchemaError(where, "must be a list of rows")
    rows = []
    for i, row in enumerate(raw):
        out = []
        for j, entry in enumerate(row):
            if isinstance(entry, (int, float)) and not isinstance(entry, bool):
                out.append(complex(entry))
            elif isinstance(entry, list) and len(entry) == 2 and all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry
            ):
                out.append(complex(entry[0], entry[1]))
            else:
                raise SchemaError(f"{where}[{i}][{j}]", "must be [re, im]")
        rows.append(out)
    return rows


def parse_structure(doc: dict) -> NQMStructure:
    systems_doc = _require(doc, "systems")
    if not isinstance(systems_doc, dict):
        raise SchemaError("systems", "must be a universe object")
    universe, _ = parse_universe(systems_doc)
    spaces = _require(doc, "spaces")
    if not isinstance(spaces, list):
        raise SchemaError("spaces", "must be a list of dimensions")
    hilberts = []
    for i, d in enumerate(spaces):
        try:
            hilberts.append(FiniteHilbert(d))
        except DomainError as exc:
            raise SchemaError(f"spaces[{i}]", str(exc)) from None
    families = {}
    for key in ("observables", "unitaries"):
        raw = doc.get(key, [])
        if not isinstance(raw, list):
            raise SchemaError(key, "must be a list (one list of matrices per space)")
        families[key] = [
            [parse_complex_matrix(m, f"{key}[{i}][{j}]") for j, m in enumerate(ops)] for i, ops in enumerate(raw)
        ]
    return NQMStructure(universe.ambient, hilberts, families["observables"], families["unitaries"])
