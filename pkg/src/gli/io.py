"""File formats: sparse adjacency text, dense CSV input, manifests, JSON documents."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .core import AdjacencyMatrix, MultiplexGraph
from .errors import ParseError, ValidationError

ADJ_HEADER = "# gli-adj v1 n="
MANIFEST_FORMAT = "gli-manifest v1"


def format_adjacency(A: AdjacencyMatrix) -> str:
    lines = [f"{ADJ_HEADER}{A.n}"]
    lines += [f"{i} {j}" for i, j in A.edge_list()]
    return "\n".join(lines) + "\n"


def write_adjacency(A: AdjacencyMatrix, path: str | os.PathLike) -> Path:
    p = Path(path)
    p.write_text(format_adjacency(A))
    return p


def parse_adjacency(text: str) -> AdjacencyMatrix:
    """Read the sparse edge-list format, or a dense 0/1 CSV matrix."""
    lines = text.splitlines()
    if lines and lines[0].startswith(ADJ_HEADER):
        try:
            n = int(lines[0][len(ADJ_HEADER):].strip())
        except ValueError:
            raise ParseError("bad node count in header", 1) from None
        E = np.zeros((n, n), dtype=np.uint8)
        for lineno, line in enumerate(lines[1:], start=2):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ParseError("expected 'i j'", lineno)
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError("node indices must be integers", lineno) from None
            if not (0 <= i < j < n):
                raise ParseError(f"need 0 <= i < j < {n}, got {i} {j}", lineno)
            E[i, j] = E[j, i] = 1
        return AdjacencyMatrix(E)
    rows = [l for l in (s.strip() for s in lines) if l and not l.startswith("#")]
    try:
        M = np.array([[int(float(v)) for v in r.replace(";", ",").split(",")] for r in rows])
    except ValueError as exc:
        raise ParseError(f"dense CSV: {exc}") from None
    if M.ndim != 2:
        raise ParseError("dense CSV rows differ in length")
    return AdjacencyMatrix(M)


def read_adjacency(path: str | os.PathLike) -> AdjacencyMatrix:
    return parse_adjacency(Path(path).read_text())


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=True, default=_default) + "\n"


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_multiplex(g: MultiplexGraph, out_dir: str | os.PathLike, provenance: dict) -> Path:
    """Write one adjacency file per layer and a manifest.json; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for l, A in enumerate(g.layers):
        name = f"layer_{l:03d}.adj"
        write_adjacency(A, out / name)
        names.append(name)
    man = {"format": MANIFEST_FORMAT, "n": g.n, "layers": names,
           "node_ids": list(g.node_ids) if g.node_ids is not None else None,
           "layer_labels": list(g.layer_labels) if g.layer_labels is not None else None,
           "provenance": provenance}
    p = out / "manifest.json"
    p.write_text(dumps(man))
    return p


def read_manifest(path: str | os.PathLike) -> tuple[MultiplexGraph, dict]:
    p = Path(path)
    if p.is_dir():
        p = p / "manifest.json"
    try:
        man = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest is not valid JSON: {exc}") from None
    if man.get("format") != MANIFEST_FORMAT:
        raise ValidationError(f"unsupported manifest format {man.get('format')!r}")
    layers = []
    for name in man["layers"]:
        f = p.parent / name
        if not f.exists():
            raise ValidationError(f"layer file {name} is missing")
        A = read_adjacency(f)
        if A.n != man["n"]:
            raise ValidationError(f"layer file {name} has n={A.n}, manifest says {man['n']}")
        layers.append(A)
    g = MultiplexGraph(tuple(layers), man.get("node_ids"), man.get("layer_labels"))
    return g, man


def matrix_csv(M: np.ndarray, label: str) -> str:
    d = M.shape[0]
    lines = [f"# gli-{label} d={d}"]
    lines += [",".join(f"{v:.12g}" for v in row) for row in M]
    return "\n".join(lines) + "\n"
