"""Subcommand implementations; each takes a RunConfig and returns data or text."""

from __future__ import annotations

import math

import numpy as np

from . import dimension
from .config import RunConfig, num, parse_marker_object, vec
from .empirics import BoxDimEstimate, estimate_dimension, max_diameter
from .errors import ValidationError
from .genfile import dumps_generation, write_generation
from .index import generation_size
from .markers import Constant, Formula, Random, ratio_envelope
from .render import obj_prisms, svg_intervals, svg_prisms, svg_triangles
from .tree import GenerationTree, build_tree


def cmd_generate(cfg: RunConfig, out=None) -> GenerationTree:
    """Build the tree and write it as a generation file (when ``out`` is given)."""
    tree = cfg.build()
    if out is not None:
        write_generation(tree, out)
    return tree


def generation_text(cfg: RunConfig) -> str:
    return dumps_generation(cfg.build())


def _limit_vectors(cfg: RunConfig):
    b = cfg.bounds
    if "limit_L" in b or "limit_U" in b:
        if not ("limit_L" in b and "limit_U" in b):
            raise ValidationError("declare both limit_L and limit_U")
        return vec(b["limit_L"]), vec(b["limit_U"])
    family = cfg.family_obj()
    spec = cfg.markers
    if isinstance(spec, Constant):
        k = spec.batch([0])[0]
    elif isinstance(spec, Formula):
        k = spec.limit_marker()
    else:
        raise ValidationError(
            "limit mode needs convergent ratio vectors: random sequences have none. "
            "Declare bounds.limit_L and bounds.limit_U, or use vector, uniform or mean mode."
        )
    rv = family.ratio_vector(k)
    return rv.L, rv.U


def _envelope(cfg: RunConfig, mode: str):
    try:
        return ratio_envelope(cfg.markers, cfg.family_obj())
    except ValidationError:
        raise ValidationError(
            f"{mode} mode needs declared global ratio bounds: this marker spec has none. "
            "Declare them in the config 'bounds' section (t/r, w/u) or use limit mode."
        ) from None


def compute_bounds(cfg: RunConfig, mode: str | None = None) -> dimension.BoundsReport:
    """Dispatch to the bounds engine.

    Global bounds come from the config's ``bounds`` section when declared,
    otherwise from the exact envelope of a constant or random marker spec.
    """
    b = cfg.bounds
    mode = mode or b.get("mode") or ("vector" if isinstance(cfg.markers, Random) else "limit")
    m = cfg.family_obj().m
    if mode == "limit":
        L, U = _limit_vectors(cfg)
        report = dimension.bounds_limit(L, U)
    elif mode == "vector":
        if "t" in b or "r" in b:
            t = vec(b["t"]) if "t" in b else None
            r = vec(b["r"]) if "r" in b else None
        else:
            env = _envelope(cfg, mode)
            t, r = env.t, env.r
        report = dimension.bounds_vector(t, r)
    elif mode == "uniform":
        if "t" in b and "r" in b:
            t, r = num(b["t"]), num(b["r"])
        else:
            env = _envelope(cfg, mode)
            t, r = float(env.t.min()), float(env.r.max())
        report = dimension.bounds_uniform(m, t, r)
    elif mode == "mean":
        if "w" in b or "u" in b:
            w = num(b["w"]) if "w" in b else None
            u = num(b["u"]) if "u" in b else None
        else:
            env = _envelope(cfg, mode)
            w, u = env.w, env.u
        report = dimension.bounds_mean(m, w, u)
    elif mode == "theorem43":
        if "L_rows" in b or "U_rows" in b:
            L = [vec(row) for row in b.get("L_rows", [])] or None
            U = [vec(row) for row in b.get("U_rows", [])] or None
            report = dimension.bounds_theorem43(L, U, declared_global=True)
        else:
            n = max(cfg.generations, 1)
            ells = np.arange(generation_size(m, n - 1) + 1)
            fam = cfg.family_obj()
            L, U = fam.ratio_arrays(fam.validate_markers(cfg.markers.batch(ells, m)))
            report = dimension.bounds_theorem43(L, U)
            report.inputs["horizon_ells"] = int(len(ells))
    else:
        raise ValidationError(f"unknown bounds mode {mode!r}")
    report.inputs = {"family": cfg.family, "markers": cfg.markers.describe(), **report.inputs}
    return report


def _default_s(cfg: RunConfig, tree: GenerationTree) -> float:
    if "s" in cfg.verify:
        return num(cfg.verify["s"])
    L, U = _limit_vectors(cfg) if not isinstance(cfg.markers, Random) else (None, None)
    if L is not None and np.all((L > 0) & (L < 1)):
        return dimension.moran_root(L)
    raise ValidationError("verify needs an exponent s (--s or config verify.s)")


def verify_tree(tree: GenerationTree, s: float) -> dict:
    """Condition checks and geometric validators over a built (or loaded) tree."""
    fam = tree.family
    m = tree.m
    out: dict = {"family": fam.name, "n": tree.n, "s": s}
    if tree.n >= 1:
        out["prop21"] = dimension.check_prop21(tree, s).to_dict()
        out["prop22"] = dimension.check_prop22(tree, s).to_dict()
    contain_bad = sandwich_bad = checked = 0
    overlapping = []
    parents = 0
    for ell in range(generation_size(m, tree.n - 1) + 1 if tree.n else 0):
        if not tree.alive[ell]:
            continue
        kids = list(tree.children_of(ell))
        if not tree.alive[kids].all():
            continue
        parents += 1
        P = tree.geometry[ell]
        for j, c in enumerate(kids):
            checked += 1
            if not fam.contains(P, tree.geometry[c]):
                contain_bad += 1
            if tree.markers is not None:
                L, U = fam.ratio_arrays(tree.markers[ell][None])
                d, dp = tree.diam[c], tree.diam[ell]
                if not (L[0, j] * dp - 1e-12 <= d <= U[0, j] * dp + 1e-12):
                    sandwich_bad += 1
        rep = fam.validate_disjoint(tree.geometry[kids])
        if not rep.disjoint:
            overlapping.append(ell)
    out["containment"] = {"checked": checked, "violations": contain_bad}
    if tree.markers is not None:
        out["diameter_sandwich"] = {"checked": checked, "violations": sandwich_bad}
    out["disjointness"] = {
        "parents": parents,
        "overlapping_parents": len(overlapping),
        "first_overlapping": overlapping[:10],
    }
    out["generation_diameter_sums"] = [
        float(np.nansum(tree.diam[tree.generation(g).start:tree.generation(g).stop])) for g in range(tree.n + 1)
    ]
    return out


def cmd_verify(cfg: RunConfig | None, s: float | None = None, tree: GenerationTree | None = None) -> dict:
    if tree is None:
        tree = cfg.build()
    if s is None:
        if cfg is None:
            raise ValidationError("verify on a generation file needs --s")
        s = _default_s(cfg, tree)
    return verify_tree(tree, s)


def cmd_render(cfg: RunConfig | None, fmt: str | None = None, tree: GenerationTree | None = None) -> str:
    if tree is None:
        tree = cfg.build()
    opts = cfg.render if cfg is not None else {}
    fmt = fmt or opts.get("format") or ("obj" if tree.family.name == "menger" else "svg")
    name = tree.family.name
    title = (cfg.name if cfg is not None else "") or f"{name} generation {tree.n}"
    if fmt == "obj":
        return obj_prisms(tree, comment=title)
    if fmt != "svg":
        raise ValidationError(f"unsupported format {fmt!r}")
    if name == "cantor":
        trees = [tree]
        if opts.get("compare_classic") and cfg is not None:
            classic = parse_marker_object(opts.get("classic_markers", "const:1/3,1/3"), 2, cfg.seed)
            trees.append(build_tree(cfg.family_obj(), tree.initial_set, classic, tree.n))
        return svg_intervals(trees, title=title)
    if name == "sierpinski":
        return svg_triangles(tree, title=title)
    return svg_prisms(tree, title=title)


def default_scales(tree: GenerationTree) -> list[float]:
    """Powers of 3 (cantor) or 2 (otherwise) times the scene extent, down to the largest piece.

    Stopping at the piece diameter rather than the estimator's guard keeps the
    default ladder clear of scales where a single piece spans several cells.
    """
    base = 3 if tree.family.name == "cantor" else 2
    sets = tree.sets()
    floor = max_diameter(sets) * (1 - 1e-9)
    D = tree.family.ambient_dim
    extent = float(np.max(np.ptp(sets.reshape(-1, D) if D > 1 else sets.reshape(-1, 1), axis=0)))
    out = []
    k = 1
    while extent * base**-k >= floor and k < 40:
        out.append(extent * base**-k)
        k += 1
    return out


def cmd_boxdim(tree: GenerationTree, scales=None, *, guard: bool = True) -> BoxDimEstimate:
    sets = tree.sets()
    scales = default_scales(tree) if scales is None else scales
    return estimate_dimension(sets, scales, guard=guard)


def parse_scales(text: str) -> list[float]:
    """'1/9,1/27' or 'B^a..b' (e.g. '3^-2..-7' or '2^2..8' meaning 2^-2..2^-8)."""
    text = text.strip()
    if "^" in text:
        base_s, _, rng = text.partition("^")
        lo_s, _, hi_s = rng.partition("..")
        base = num(base_s)
        lo, hi = abs(int(lo_s)), abs(int(hi_s or lo_s))
        step = 1 if hi >= lo else -1
        return [base ** -k for k in range(lo, hi + step, step)]
    vals = [num(x) for x in text.split(",") if x.strip()]
    if any(not (v > 0 and math.isfinite(v)) for v in vals):
        raise ValidationError("scales must be positive")
    return vals
