"""Line-delimited generation files.

    # moranset-gen 1 family=cantor m=2 n=3 seed=none root=0,1
    1 1 0 0.33333333333333331 0.33333333333333331
    2 2 0.66666666666666674 1 0.33333333333333326
    ...

One record per node of generations 1..n, sorted by ell: ell, sigma, the
flattened coordinates, then diam.  The initial set travels in the header's
``root`` field; a generation-0 file holds it as its single record instead.
Floats use 17 significant digits, so doubles round-trip exactly.  Nodes
below a degenerate ancestor carry ``nan`` coordinates.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .families import get_family
from .index import format_sigma, parse_sigma, sigma_of
from .tree import GenerationTree

FORMAT_NAME = "moranset-gen"
FORMAT_VERSION = 1


def _fmt(x: float) -> str:
    return "%.17g" % x


def atomic_write(path: str | os.PathLike, data: str | bytes) -> None:
    """Write to a temp file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_generation(tree: GenerationTree) -> str:
    m = tree.m
    seed = "none" if tree.seed is None else str(tree.seed)
    flat = tree.geometry.reshape(len(tree), -1)
    root = ",".join(_fmt(x) for x in flat[0])
    lines = [f"# {FORMAT_NAME} {FORMAT_VERSION} family={tree.family.name} m={m} n={tree.n} seed={seed} root={root}"]
    for ell in range(1 if tree.n > 0 else 0, len(tree)):
        sigma = format_sigma(sigma_of(ell, m).digits, m)
        coords = " ".join(_fmt(x) for x in flat[ell])
        lines.append(f"{ell} {sigma} {coords} {_fmt(tree.diam[ell])}")
    return "\n".join(lines) + "\n"


def write_generation(tree: GenerationTree, path) -> None:
    atomic_write(path, dumps_generation(tree))


def _parse_header(line: str) -> dict:
    parts = line.lstrip("#").split()
    if len(parts) < 2 or parts[0] != FORMAT_NAME:
        raise ValidationError(f"not a {FORMAT_NAME} file: {line.strip()!r}")
    if int(parts[1]) != FORMAT_VERSION:
        raise ValidationError(f"unsupported format version {parts[1]}")
    fields = dict(p.split("=", 1) for p in parts[2:])
    for key in ("family", "m", "n", "seed", "root"):
        if key not in fields:
            raise ValidationError(f"generation header lacks {key}")
    return fields


def loads_generation(text: str) -> GenerationTree:
    lines = text.splitlines()
    if not lines:
        raise ValidationError("empty generation file")
    hdr = _parse_header(lines[0])
    family = get_family(hdr["family"])
    m, n = int(hdr["m"]), int(hdr["n"])
    if m != family.m:
        raise ValidationError(f"header m={m} disagrees with family {family.name} (m={family.m})")
    seed = None if hdr["seed"] == "none" else int(hdr["seed"])
    width = int(np.prod(family.geom_shape))
    records = lines[1:]
    total = (m ** (n + 1) - m) // (m - 1) + 1
    first = 1 if n > 0 else 0
    if len(records) != total - first:
        raise ValidationError(f"expected {total - first} records for m={m}, n={n}, found {len(records)}")
    geometry = np.empty((total, width))
    diam = np.empty(total)
    root = [float(x) for x in hdr["root"].split(",")]
    if len(root) != width:
        raise ValidationError(f"header root has {len(root)} coordinates, expected {width}")
    geometry[0] = root
    diam[0] = float(family.diameter(geometry[0].reshape(family.geom_shape)))
    for i, line in enumerate(records, start=first):
        parts = line.split()
        if len(parts) != width + 3:
            raise ValidationError(f"record {i}: expected {width + 3} fields, got {len(parts)}")
        if int(parts[0]) != i:
            raise ValidationError(f"record {i}: records must be sorted by ell (got {parts[0]})")
        if parse_sigma(parts[1], m) != sigma_of(i, m):
            raise ValidationError(f"record {i}: sigma {parts[1]} does not match ell")
        geometry[i] = [float(x) for x in parts[2:-1]]
        diam[i] = float(parts[-1])
    geometry = geometry.reshape((total,) + family.geom_shape)
    alive = ~np.isnan(diam)
    return GenerationTree(family, n, geometry, diam, alive, None, seed)


def read_generation(path) -> GenerationTree:
    return loads_generation(Path(path).read_text(encoding="utf-8"))
