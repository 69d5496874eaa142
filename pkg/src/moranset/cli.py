"""Command-line entry point: ``moranset <subcommand> [options]``.

Exit status is 0 on success, 1 for invalid input, 2 for numeric or domain failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .commands import cmd_boxdim, compute_bounds, cmd_render, cmd_verify, parse_scales
from .config import builtin_names, load_raw, parse_config, validate_raw
from .errors import MoranError, ValidationError
from .genfile import atomic_write, dumps_generation, read_generation


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", nargs="?", help="config file path or built-in example name (see 'examples')")
    p.add_argument("--family", choices=["cantor", "sierpinski", "menger"])
    p.add_argument("--markers", help="marker spec string (e.g. const:1/3,1/3) or a config path to take markers from")
    p.add_argument("--generations", "-n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", "-o", help="output path; stdout when omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moranset", description="Generalized Moran set construction and dimension bounds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build a tree and write its generation file")
    _common(p)

    p = sub.add_parser("bounds", help="Hausdorff dimension bounds")
    _common(p)
    p.add_argument("--mode", choices=["theorem43", "limit", "vector", "uniform", "mean"])

    p = sub.add_parser("verify", help="condition checks and geometric validators")
    _common(p)
    p.add_argument("--s", type=float, help="exponent for the c_k and min-ratio checks")
    p.add_argument("--generation-file", help="check a saved generation file instead of building")

    p = sub.add_parser("render", help="SVG or OBJ output")
    _common(p)
    p.add_argument("--format", choices=["svg", "obj"])
    p.add_argument("--generation-file")

    p = sub.add_parser("boxdim", help="box-counting slope estimate")
    _common(p)
    p.add_argument("--generation-file")
    p.add_argument("--scales", help="comma list (1/9,1/27) or power range (3^2..7)")
    p.add_argument("--no-guard", action="store_true", help="keep scales below max diameter / 4")

    sub.add_parser("examples", help="list built-in example configs")
    return parser


def _marker_value(text: str):
    path = Path(text)
    if path.suffix == ".json" or path.is_file():
        raw = load_raw(text)
        if "markers" not in raw:
            raise ValidationError(f"{text} has no marker spec")
        return raw["markers"], raw.get("seed")
    return text, None


def resolve_config(args: argparse.Namespace):
    """Merge the config file (if any) with command-line overrides."""
    raw: dict = load_raw(args.config) if args.config else {}
    if args.family:
        if raw.get("family") not in (None, args.family):
            raw.pop("initial_set", None)
        raw["family"] = args.family
    if args.markers:
        raw["markers"], seed = _marker_value(args.markers)
        if seed is not None and "seed" not in raw:
            raw["seed"] = seed
    if args.generations is not None:
        raw["generations"] = args.generations
    if args.seed is not None:
        raw["seed"] = args.seed
        if isinstance(raw.get("markers"), dict) and "seed" in raw["markers"]:
            raw["markers"] = {**raw["markers"], "seed": args.seed}
    if getattr(args, "mode", None):
        raw.setdefault("bounds", {})["mode"] = args.mode
    if getattr(args, "format", None):
        raw.setdefault("render", {})["format"] = args.format
    if getattr(args, "s", None) is not None:
        raw.setdefault("verify", {})["s"] = args.s
    if "family" not in raw:
        raise ValidationError("no family: pass a config or --family")
    validate_raw(raw)
    return parse_config(raw)


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _run(args: argparse.Namespace) -> int:
    if args.command == "examples":
        for name in builtin_names():
            raw = load_raw(name)
            print(f"{name:12s} {raw.get('family', ''):11s} {raw.get('description', '')}")
        return 0

    gen_file = getattr(args, "generation_file", None)
    if gen_file and not args.config and not args.family and not args.markers:
        cfg, tree = None, read_generation(gen_file)
    else:
        cfg = resolve_config(args)
        tree = read_generation(gen_file) if gen_file else None
    out = args.out or (cfg.output.get(args.command if args.command != "generate" else "generation") if cfg else None)

    if args.command == "generate":
        _emit(dumps_generation(cfg.build()), out)
    elif args.command == "bounds":
        _emit(_json(compute_bounds(cfg).to_dict()), out)
    elif args.command == "verify":
        _emit(_json(cmd_verify(cfg, args.s, tree)), out)
    elif args.command == "render":
        _emit(cmd_render(cfg, args.format, tree), out)
    elif args.command == "boxdim":
        tree = tree if tree is not None else cfg.build()
        scales = parse_scales(args.scales) if args.scales else None
        est = cmd_boxdim(tree, scales, guard=not args.no_guard)
        report = {
            "slope": est.slope,
            "intercept": est.intercept,
            "residual": est.residual,
            "samples": [{"epsilon": s.epsilon, "count": s.count} for s in est.samples],
            "dropped": est.dropped,
        }
        _emit(_json(report), out)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except MoranError as exc:
        print(f"moranset: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"moranset: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
