"""Timestamped contact streams to aligned hourly multiplex snapshots."""

from __future__ import annotations

import gzip
import io
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .core import AdjacencyMatrix, MultiplexGraph
from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class ContactEvent:
    t: int
    u: str
    v: str

    def __post_init__(self):
        if self.u == self.v:
            raise ValidationError(f"self-contact of {self.u!r}")
        if self.t < 0:
            raise ValidationError("timestamps must be nonnegative")


@dataclass(frozen=True)
class SnapshotSpec:
    window: int = 3600
    origin: int | None = None  # None: floor the first timestamp to the window
    min_events_per_edge: int = 1
    keep_empty: bool = False

    def __post_init__(self):
        if self.window <= 0:
            raise ValidationError("window must be positive")
        if self.min_events_per_edge < 1:
            raise ValidationError("min_events_per_edge must be at least 1")


def open_text(path: str | os.PathLike) -> IO[str]:
    """Open a plain or gzip-compressed text file (sniffed by magic bytes)."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, encoding="utf-8")


def parse_contacts(stream: IO[str] | Iterable[str], strict: bool = True,
                   errors: list | None = None) -> list[ContactEvent]:
    """Parse ``t u v`` lines (extra columns ignored, ``#`` comments skipped).

    In strict mode the first malformed line raises :class:`ParseError`;
    otherwise errors are appended to ``errors`` and the line is skipped.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    out = []
    for lineno, line in enumerate(stream, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        try:
            if len(parts) < 3:
                raise ParseError(f"expected 't u v', got {len(parts)} field(s)", lineno)
            try:
                t = int(parts[0])
            except ValueError:
                raise ParseError(f"bad timestamp {parts[0]!r}", lineno) from None
            try:
                out.append(ContactEvent(t, parts[1], parts[2]))
            except ValidationError as exc:
                raise ParseError(str(exc), lineno) from None
        except ParseError as exc:
            if strict:
                raise
            if errors is not None:
                errors.append(exc)
    return out


def aggregate_snapshots(events: Iterable[ContactEvent], spec: SnapshotSpec = SnapshotSpec()) -> MultiplexGraph:
    """One layer per window; an edge needs ``min_events_per_edge`` contacts in it."""
    events = list(events)
    if not events:
        raise ValidationError("no contact events to aggregate")
    nodes = sorted({e.u for e in events} | {e.v for e in events})
    index = {u: i for i, u in enumerate(nodes)}
    t0 = min(e.t for e in events)
    origin = spec.origin if spec.origin is not None else t0 - t0 % spec.window
    counts: dict[int, dict[tuple[int, int], int]] = defaultdict(lambda: defaultdict(int))
    for e in events:
        if e.t < origin:
            raise ValidationError(f"event at t={e.t} precedes the origin {origin}")
        i, j = sorted((index[e.u], index[e.v]))
        counts[(e.t - origin) // spec.window][(i, j)] += 1
    wins = sorted(counts)
    if spec.keep_empty:
        wins = list(range(wins[0], wins[-1] + 1))
    n = len(nodes)
    layers, labels = [], []
    for w in wins:
        E = np.zeros((n, n), dtype=np.uint8)
        for (i, j), c in counts.get(w, {}).items():
            if c >= spec.min_events_per_edge:
                E[i, j] = E[j, i] = 1
        layers.append(AdjacencyMatrix(E))
        labels.append(origin + w * spec.window)
    return MultiplexGraph(tuple(layers), tuple(nodes), tuple(labels))
