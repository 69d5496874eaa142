"""Run configuration: JSON documents validated against CONFIG_SCHEMA.

Marker specs may be given as objects or as compact strings:

    const:1/3,1/3
    formula:example51
    formula:fatcantor,series=geometric,ratio=1/2
    random:k1=1/8..3/8,k2=1/2-k1
    random:k1=0..1,k2=0..1,k1<=k2,...

Numbers anywhere in a config may be written as fractions ("1/3").
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import MarkerDomainError, ValidationError
from .families import Family, get_family
from .markers import FORMULAS, Constant, Coupling, Formula, MarkerSpec, Random, check_spec
from .tree import DEFAULT_MAX_RECORDS, GenerationTree, build_tree

_NUM = {"type": ["number", "string"]}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "moranset run configuration",
    "type": "object",
    "required": ["family"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "family": {"enum": ["cantor", "sierpinski", "menger"]},
        "initial_set": {"type": "array"},
        "markers": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "required": ["type"],
                    "properties": {
                        "type": {"enum": ["constant", "formula", "random"]},
                        "values": _VEC,
                        "name": {"type": "string"},
                        "params": {"type": "object"},
                        "seed": {"type": "integer"},
                        "ranges": {
                            "type": "object",
                            "patternProperties": {"^[0-9]+$": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}},
                            "additionalProperties": False,
                        },
                        "couplings": {
                            "type": "array",
                            "items": {
                                "oneOf": [
                                    {"type": "string"},
                                    {
                                        "type": "object",
                                        "required": ["target", "source"],
                                        "properties": {
                                            "target": {"type": "integer"},
                                            "source": {"type": "integer"},
                                            "offset": _NUM,
                                            "scale": _NUM,
                                        },
                                        "additionalProperties": False,
                                    },
                                ]
                            },
                        },
                        "sorted_pairs": {
                            "type": "array",
                            "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                        },
                    },
                    "additionalProperties": False,
                },
            ]
        },
        "seed": {"type": "integer"},
        "generations": {"type": "integer", "minimum": 0},
        "overlap_free": {"type": "boolean"},
        "max_records": {"type": "integer", "minimum": 1},
        "bounds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["theorem43", "limit", "vector", "uniform", "mean"]},
                "limit_L": _VEC,
                "limit_U": _VEC,
                "t": {"oneOf": [_NUM, _VEC]},
                "r": {"oneOf": [_NUM, _VEC]},
                "w": _NUM,
                "u": _NUM,
                "L_rows": {"type": "array", "items": _VEC},
                "U_rows": {"type": "array", "items": _VEC},
            },
        },
        "render": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "format": {"enum": ["svg", "obj"]},
                "compare_classic": {"type": "boolean"},
                "classic_markers": {"type": ["string", "object"]},
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"s": _NUM},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "generation": {"type": "string"},
                "bounds": {"type": "string"},
                "render": {"type": "string"},
            },
        },
    },
}


def num(x) -> float:
    """Parse a JSON number or a fraction string such as "3/8"."""
    if isinstance(x, bool):
        raise ValidationError(f"expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    try:
        return float(Fraction(str(x).strip()))
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"cannot parse number {x!r}") from None


def vec(xs) -> np.ndarray:
    return np.array([num(x) for x in xs], dtype=float)


_AFFINE = re.compile(
    r"^\s*(?P<off>[0-9.]+(?:/[0-9.]+)?)?\s*(?P<sign>[+-])?\s*(?:(?P<scale>[0-9.]+(?:/[0-9.]+)?)\s*\*\s*)?k(?P<src>\d+)\s*$"
)


def parse_coupling(target: int, expr: str) -> Coupling:
    """'1/2-k1' -> k[target] = 1/2 - k1."""
    mt = _AFFINE.match(expr)
    if not mt:
        raise ValidationError(f"cannot parse coupling expression {expr!r} (expected e.g. '1-k1')")
    offset = num(mt["off"]) if mt["off"] else 0.0
    scale = num(mt["scale"]) if mt["scale"] else 1.0
    if mt["sign"] == "-":
        scale = -scale
    return Coupling(target, int(mt["src"]), offset, scale)


def _coupling_from_string(item: str) -> Coupling:
    lhs, _, rhs = item.partition("=")
    m = re.fullmatch(r"\s*k(\d+)\s*", lhs)
    if not m or not rhs:
        raise ValidationError(f"cannot parse coupling {item!r} (expected e.g. 'k2=1/2-k1')")
    return parse_coupling(int(m[1]), rhs)


def _param(v):
    if v is None or isinstance(v, (int, float)):
        return v
    try:
        return num(v)
    except ValidationError:
        return v


def parse_marker_string(text: str, dim: int, seed: int | None = None) -> MarkerSpec:
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    items = [s.strip() for s in body.split(",") if s.strip()]
    if kind in ("const", "constant"):
        return Constant(tuple(num(x) for x in items))
    if kind == "formula":
        if not items:
            raise ValidationError("formula spec needs a name, e.g. formula:example51")
        name, params = items[0], {}
        for it in items[1:]:
            key, _, val = it.partition("=")
            key = key.strip()
            if key == "seed":
                seed = int(val)
                continue
            params[key] = _param(val.strip())
        return Formula(name, params, seed if (name in FORMULAS and FORMULAS[name].needs_seed) else None)
    if kind == "random":
        ranges, couplings, pairs = [], [], []
        for it in items:
            if "<=" in it:
                a, b = (re.fullmatch(r"\s*k(\d+)\s*", s) for s in it.split("<="))
                if not a or not b:
                    raise ValidationError(f"cannot parse ordering {it!r} (expected 'k1<=k2')")
                pairs.append((int(a[1]), int(b[1])))
            elif ".." in it:
                lhs, _, rng_text = it.partition("=")
                m = re.fullmatch(r"\s*k(\d+)\s*", lhs)
                lo, _, hi = rng_text.partition("..")
                if not m:
                    raise ValidationError(f"cannot parse range {it!r} (expected 'k1=1/8..3/8')")
                ranges.append((int(m[1]), num(lo), num(hi)))
            else:
                couplings.append(_coupling_from_string(it))
        if seed is None:
            raise ValidationError("random markers need a seed (--seed or config 'seed')")
        return Random(seed, dim, tuple(ranges), tuple(couplings), tuple(pairs))
    raise ValidationError(f"unknown marker spec kind {kind!r}; expected const, formula or random")


def parse_marker_object(obj, dim: int, seed: int | None = None) -> MarkerSpec:
    if isinstance(obj, str):
        return parse_marker_string(obj, dim, seed)
    kind = obj["type"]
    if kind == "constant":
        return Constant(tuple(vec(obj["values"])))
    seed = obj.get("seed", seed)
    if kind == "formula":
        params = {k: _param(v) for k, v in obj.get("params", {}).items()}
        needs = obj["name"] in FORMULAS and FORMULAS[obj["name"]].needs_seed
        return Formula(obj["name"], params, seed if needs else None)
    ranges = tuple((int(c), num(lo), num(hi)) for c, (lo, hi) in obj.get("ranges", {}).items())
    couplings = []
    for c in obj.get("couplings", []):
        if isinstance(c, str):
            couplings.append(_coupling_from_string(c))
        else:
            couplings.append(Coupling(c["target"], c["source"], num(c.get("offset", 0)), num(c.get("scale", 1))))
    if seed is None:
        raise ValidationError("random markers need a seed (--seed or config 'seed')")
    return Random(seed, dim, ranges, tuple(couplings), tuple(tuple(p) for p in obj.get("sorted_pairs", [])))


@dataclass
class RunConfig:
    family: str
    markers: MarkerSpec
    initial_set: np.ndarray
    generations: int = 3
    seed: int | None = None
    overlap_free: bool = False
    max_records: int = DEFAULT_MAX_RECORDS
    bounds: dict = field(default_factory=dict)
    render: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    name: str = ""
    description: str = ""

    def family_obj(self) -> Family:
        if self.family == "sierpinski":
            return get_family(self.family, overlap_free=self.overlap_free)
        return get_family(self.family)

    def build(self, n: int | None = None) -> GenerationTree:
        return build_tree(
            self.family_obj(),
            self.initial_set,
            self.markers,
            self.generations if n is None else n,
            max_records=self.max_records,
            seed=getattr(self.markers, "seed", None),
        )


def validate_raw(raw: dict) -> None:
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"config schema violation at {path}: {exc.message}") from None


def parse_config(raw: dict) -> RunConfig:
    validate_raw(raw)
    fam = raw["family"]
    family = get_family(fam, overlap_free=raw.get("overlap_free", False)) if fam == "sierpinski" else get_family(fam)
    if "initial_set" in raw:
        E0 = np.array([[num(x) for x in row] if isinstance(row, list) else num(row) for row in raw["initial_set"]])
        E0 = family.check_geometry(E0)
        if E0.shape != family.geom_shape:
            raise ValidationError(f"{fam} initial_set must have shape {family.geom_shape}, got {E0.shape}")
    else:
        E0 = family.default_initial_set()
    if "markers" not in raw:
        raise ValidationError("config needs a marker spec ('markers' or --markers)")
    spec = parse_marker_object(raw["markers"], family.marker_dim, raw.get("seed"))
    try:
        check_spec(spec, family)
    except MarkerDomainError as exc:
        raise ValidationError(f"marker spec: {exc}") from None
    return RunConfig(
        family=fam,
        markers=spec,
        initial_set=E0,
        generations=raw.get("generations", 3),
        seed=raw.get("seed"),
        overlap_free=raw.get("overlap_free", False),
        max_records=raw.get("max_records", DEFAULT_MAX_RECORDS),
        bounds=dict(raw.get("bounds", {})),
        render=dict(raw.get("render", {})),
        verify=dict(raw.get("verify", {})),
        output=dict(raw.get("output", {})),
        name=raw.get("name", ""),
        description=raw.get("description", ""),
    )


def builtin_names() -> list[str]:
    root = resources.files("moranset") / "configs"
    names = [p.name[:-5] for p in root.iterdir() if p.name.endswith(".json")]
    return sorted(names, key=lambda n: [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", n)])


def load_raw(source: str) -> dict:
    """A built-in example name (e.g. 'example52') or a path to a JSON config."""
    path = Path(source)
    if path.suffix == ".json" or path.exists():
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError(f"config file not found: {source}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{source}: invalid JSON ({exc})") from None
    res = resources.files("moranset") / "configs" / f"{source}.json"
    if not res.is_file():
        raise ValidationError(f"no config file or built-in example named {source!r}; built-ins: {builtin_names()}")
    return json.loads(res.read_text(encoding="utf-8"))


def load_config(source: str) -> RunConfig:
    return parse_config(load_raw(source))
