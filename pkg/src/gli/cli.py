"""Command-line front end (``gli``).

Exit status: 0 on success, 2 on validation or usage errors, 1 on
runtime failures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import GraphonSystem, MultiplexGraph, digest
from .errors import GliError, ValidationError
from .estim import FitConfig, default_threads, fit_community
from .exper import FAMILIES, RECIPES, SCENARIOS, ExperimentConfig, named_recipe, run_rmse, run_scenario
from .infom import MEASURES, QuadratureSpec, measure
from .ingest import SnapshotSpec, aggregate_snapshots, open_text, parse_contacts
from .io import dumps, matrix_csv, read_manifest, write_multiplex
from .mimat import from_raw, system_mi_matrix, von_neumann_entropy
from .synth import GenRecipe


_INPUTS = ("system", "manifest", "input", "config")


def _file_digest(path: str) -> str:
    p = Path(path)
    if p.is_dir():
        p = p / "manifest.json"
    return hashlib.sha256(p.read_bytes()).hexdigest()[:16]


def _provenance(cmd: str, args: argparse.Namespace, **extra) -> dict:
    """Config hash over flags and input contents (paths and thread counts excluded)."""
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "func", "command", "threads")}
    for k in _INPUTS:
        if cfg.get(k):
            cfg[k] = _file_digest(cfg[k])
    cfg.update(extra)
    return {"command": cmd, "config_hash": digest(cfg), "seed": args.seed, "version": __version__}


def _emit(text: str, out: str | None, default_name: str | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    p = Path(out)
    if default_name and (p.is_dir() or out.endswith(os.sep)):
        p.mkdir(parents=True, exist_ok=True)
        p = p / default_name
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _need_out(args) -> Path:
    if not args.out:
        raise ValidationError(f"{args.command} needs --out DIR")
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _fit_config(args, **kw) -> FitConfig:
    return FitConfig(bandwidth=args.bandwidth, alpha=args.alpha, seed=args.seed,
                     threads=args.threads, **kw)


def _load_system(path: str) -> GraphonSystem:
    doc = json.loads(Path(path).read_text())
    if "system" in doc:
        doc = doc["system"]
    return GraphonSystem.from_dict(doc)


# ------------------------------------------------------------------ commands

def cmd_gen(args) -> None:
    if args.config:
        dct = json.loads(Path(args.config).read_text())
        recipe = GenRecipe.from_dict(dct | {"n": args.n or dct.get("n", 256), "seed": args.seed})
    else:
        if args.recipe not in RECIPES:
            raise ValidationError(f"unknown recipe {args.recipe!r}; choose from {', '.join(RECIPES)}")
        recipe = named_recipe(args.recipe, args.n or 256, args.seed)
    g, _ = recipe.sample()
    out = _need_out(args)
    write_multiplex(g, out, _provenance("gen", args, recipe=recipe.to_dict()) | {"recipe": recipe.to_dict()})


def cmd_fit(args) -> None:
    g, man = read_manifest(args.manifest)
    res = fit_community(g, _fit_config(args, restarts=args.restarts, max_sweeps=args.max_sweeps,
                                       likelihood=args.likelihood))
    a = res.assignment
    doc = {"system": res.system.to_dict() if res.system is not None else None,
           "assignment": {"z": a.z.tolist(), "h": a.h, "k": a.k, "r": a.r},
           "log_likelihood": res.log_likelihood, "mode": res.mode, "sweeps": res.sweeps,
           "node_ids": list(g.node_ids) if g.node_ids else None,
           "provenance": _provenance("fit", args, manifest=man.get("provenance"))}
    _emit(dumps(doc), args.out, "fit.json")


def cmd_measure(args) -> None:
    sys_ = _load_system(args.system)
    q = QuadratureSpec(args.quad_m)
    names = [m.strip() for m in args.measures.split(",") if m.strip()]
    reports = [measure(sys_, m, q, cond=args.cond).to_dict() for m in names]
    _emit(dumps({"reports": reports, "provenance": _provenance("measure", args)}), args.out, "measures.json")


def cmd_mimatrix(args) -> None:
    q = QuadratureSpec(args.quad_m)
    if args.system:
        mi = system_mi_matrix(_load_system(args.system), q)
    elif args.manifest:
        g, _ = read_manifest(args.manifest)
        res = fit_community(g, _fit_config(args, max_sweeps=args.max_sweeps))
        mi = _pairwise_mi(res)
    else:
        raise ValidationError("mimatrix needs --system or --manifest")
    vn, vn_n = von_neumann_entropy(mi)
    out = _need_out(args)
    (out / "mi_raw.csv").write_text(matrix_csv(mi.raw, "mi-raw"))
    (out / "mi_normalized.csv").write_text(matrix_csv(mi.normalized, "mi-normalized"))
    (out / "mi_density.csv").write_text(matrix_csv(mi.density, "mi-density"))
    doc = mi.to_dict() | {"von_neumann": vn, "von_neumann_normalized": vn_n,
                          "provenance": _provenance("mimatrix", args)}
    (out / "mimatrix.json").write_text(dumps(doc))


def _pairwise_mi(res):
    from .infom import entropy_profile
    d = res.graph.d
    raw = np.zeros((d, d))
    for i in range(d):
        raw[i, i] = entropy_profile(res.subsystem([i]), [(0,)])[(0,)]
    for i in range(d):
        for j in range(i + 1, d):
            pair = res.subsystem([i, j])
            H = entropy_profile(pair, [(0,), (1,), (0, 1)])
            raw[i, j] = raw[j, i] = max(H[(0,)] + H[(1,)] - H[(0, 1)], 0.0)
    return from_raw(raw)


def cmd_rmse(args) -> None:
    ns = tuple(int(v) for v in args.ns.split(",")) if args.ns else None
    kw = {"ns": ns} if ns else {}
    if args.measures:
        kw["measures"] = tuple(m.strip() for m in args.measures.split(","))
    cfg = ExperimentConfig(args.family, trials=args.trials, seed=args.seed, max_sweeps=args.max_sweeps,
                           threads=args.threads, full_scale=args.full_scale, **kw)
    out = _need_out(args)
    cfg = ExperimentConfig(**{**cfg.__dict__, "out_dir": str(out)})
    run_rmse(cfg)


def cmd_scenario(args) -> None:
    fit = _fit_config(args, max_sweeps=args.max_sweeps)
    rep = run_scenario(args.name, args.seed, args.n, fit)
    rep["provenance"] = _provenance("scenario", args)
    _emit(dumps(rep), args.out, f"{args.name}.json")


def cmd_ingest(args) -> None:
    errors = []
    with open_text(args.input) as fh:
        events = parse_contacts(fh, strict=not args.lenient, errors=errors)
    for e in errors:
        print(f"warning: {e}", file=sys.stderr)
    spec = SnapshotSpec(window=args.window, origin=args.origin, min_events_per_edge=args.min_events,
                        keep_empty=args.keep_empty)
    g = aggregate_snapshots(events, spec)
    out = _need_out(args)
    write_multiplex(g, out, _provenance("ingest", args) | {"skipped_lines": len(errors)})


# ------------------------------------------------------------------ parser

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="root RNG seed (default 0)")
    p.add_argument("--quad-m", type=int, default=512, help="quadrature grid per axis (default 512)")
    p.add_argument("--bandwidth", type=int, default=None, help="block size h (default: automatic)")
    p.add_argument("--alpha", type=float, default=1.0, help="Hölder exponent for the block rule")
    p.add_argument("--out", default=None, help="output file or directory")
    p.add_argument("--threads", type=int, default=None, help="worker threads (env GLI_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gli", description="multiplex graph-limit information measures")
    ap.add_argument("--version", action="version", version=f"gli {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gen", help="sample a multiplex graph from a recipe")
    p.add_argument("--recipe", default="chain_xy", help=f"named recipe: {', '.join(RECIPES)}")
    p.add_argument("--config", help="recipe JSON file (overrides --recipe)")
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", help="fit a correlated SBM to a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--max-sweeps", type=int, default=5)
    p.add_argument("--likelihood", default="auto", choices=("auto", "joint", "composite"))
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("measure", help="information measures of a system JSON")
    p.add_argument("--system", required=True)
    p.add_argument("--measures", default="entropy", help=f"comma list from: {', '.join(MEASURES)}")
    p.add_argument("--cond", type=int, default=None, help="conditioning layer for cmi/ctc (0-based)")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("mimatrix", help="pairwise MI matrix and von Neumann entropy")
    p.add_argument("--system")
    p.add_argument("--manifest")
    p.add_argument("--max-sweeps", type=int, default=5)
    p.set_defaults(func=cmd_mimatrix)

    p = sub.add_parser("rmse", help="RMSE convergence curve")
    p.add_argument("--family", required=True, help=f"one of: {', '.join(FAMILIES)}")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--ns", default=None, help="comma list of node counts")
    p.add_argument("--measures", default=None)
    p.add_argument("--max-sweeps", type=int, default=1)
    p.add_argument("--full-scale", action="store_true", help="300 trials per n")
    p.set_defaults(func=cmd_rmse)

    p = sub.add_parser("scenario", help="run a named redundancy/synergy scenario")
    p.add_argument("name", help=f"one of: {', '.join(SCENARIOS)}")
    p.add_argument("--n", type=int, default=2048)
    p.add_argument("--max-sweeps", type=int, default=2)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("ingest", help="contact stream to hourly snapshot manifest")
    p.add_argument("--input", required=True, help="'t u v' lines, optionally gzip-compressed")
    p.add_argument("--window", type=int, default=3600)
    p.add_argument("--origin", type=int, default=None)
    p.add_argument("--min-events", type=int, default=1)
    p.add_argument("--keep-empty", action="store_true")
    p.add_argument("--lenient", action="store_true", help="skip malformed lines instead of failing")
    p.set_defaults(func=cmd_ingest)

    for sp in sub.choices.values():
        _common(sp)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is None:
        args.threads = default_threads()
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"gli {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (GliError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"gli {args.command}: failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
