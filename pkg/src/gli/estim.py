"""Correlated stochastic block model fit: the multivariate network histogram."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _search
from .core import (MAX_LAYERS, CommunityAssignment, Graphon, GraphonSystem, MultiplexGraph,
                   cells_to_moments, mask_subset, nonempty_subsets)
from .errors import LayerMismatch, TooFewNodes, ValidationError
from .synth import child_rng


@dataclass(frozen=True)
class FitConfig:
    bandwidth: int | None = None
    alpha: float = 1.0
    restarts: int = 1
    max_sweeps: int = 5
    seed: int = 0
    tolerance: float = 1e-9
    likelihood: str = "auto"  # auto | joint | composite
    threads: int = 1

    def __post_init__(self):
        if self.bandwidth is not None and self.bandwidth < 2:
            raise ValidationError("bandwidth must be at least 2")
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError("alpha must lie in (0, 1]")
        if self.restarts < 1:
            raise ValidationError("restarts must be at least 1")
        if self.max_sweeps < 0:
            raise ValidationError("max_sweeps must be nonnegative")
        if self.likelihood not in ("auto", "joint", "composite"):
            raise ValidationError(f"unknown likelihood mode {self.likelihood!r}")


@dataclass(frozen=True, eq=False)
class FitResult:
    """Fitted assignment and block statistics.

    ``block_counts[S]`` is (numerator, denominator): edge counts of the
    subset-product layer per block pair and the number of node pairs.
    ``system`` is None when the layer count exceeds the cell cap; use
    :meth:`subsystem` for small layer subsets then.
    """

    assignment: CommunityAssignment
    system: GraphonSystem | None
    log_likelihood: float
    block_counts: dict = field(repr=False)
    graph: MultiplexGraph = field(repr=False)
    sweeps: int = 0
    mode: str = "joint"

    def subsystem(self, layers) -> GraphonSystem:
        return step_system(self.graph, self.assignment, layers)


def auto_bandwidth(n: int, alpha: float = 1.0) -> tuple[int, int]:
    """(h, k) from the smoothness-driven block count rule."""
    if not 0.0 < alpha <= 1.0:
        raise ValidationError("alpha must lie in (0, 1]")
    if n < 4:
        raise TooFewNodes(f"n={n}: need at least 4 nodes for blocks of size 2")
    # rounding guard: 100 ** 0.5 must give exactly 10 blocks
    k = math.ceil(round(n ** (1.0 / (min(alpha, 1.0) + 1.0)), 9))
    k = max(1, min(k, n))
    while k > 1 and n // k < 2:
        k -= 1
    return n // k, k


def resolve_bandwidth(n: int, d: int, cfg: FitConfig) -> tuple[int, int]:
    if cfg.bandwidth is not None:
        h = cfg.bandwidth
        if n < 4:
            raise TooFewNodes(f"n={n}: need at least 4 nodes")
        if h > n:
            raise ValidationError(f"bandwidth {h} exceeds n={n}")
        return h, n // h
    hs = [auto_bandwidth(n, cfg.alpha)[0] for _ in range(d)]
    h = max(2, int(math.floor(np.mean(hs) + 0.5)))
    return h, max(1, n // h)


def block_cell_counts(g: MultiplexGraph, z: CommunityAssignment, layers=None) -> np.ndarray:
    """Joint-pattern counts per block pair, shape (2^|layers|, k, k), symmetric."""
    layers = list(range(g.d)) if layers is None else list(layers)
    C = 1 << len(layers)
    k = z.k
    iu = np.triu_indices(g.n, 1)
    key = (g.patterns(layers)[iu].astype(np.int64) * k + z.z[iu[0]]) * k + z.z[iu[1]]
    cnt = np.bincount(key, minlength=C * k * k).reshape(C, k, k)
    diag = np.einsum("cii->ci", cnt).copy()
    cnt = cnt + cnt.transpose(0, 2, 1)
    idx = np.arange(k)
    cnt[:, idx, idx] = diag
    return cnt


def pair_totals(z: CommunityAssignment) -> np.ndarray:
    s = z.sizes().astype(np.int64)
    T = np.outer(s, s)
    np.fill_diagonal(T, s * (s - 1) // 2)
    return T


def _check(g: MultiplexGraph, z: CommunityAssignment):
    if z.n != g.n:
        raise LayerMismatch(f"assignment has {z.n} nodes, graph has {g.n}")


def profile_log_likelihood(g: MultiplexGraph, z: CommunityAssignment) -> float:
    """Joint-cell profile log-likelihood with block frequencies plugged in."""
    _check(g, z)
    codes = g.patterns().astype(np.int64) if g.d <= 62 else None
    if codes is None:
        raise ValidationError("too many layers for joint patterns")
    iu = np.triu_indices(g.n, 1)
    lo = np.minimum(z.z[iu[0]], z.z[iu[1]])
    hi = np.maximum(z.z[iu[0]], z.z[iu[1]])
    _, cnt = np.unique(np.stack([lo, hi, codes[iu]]), axis=1, return_counts=True)
    T = pair_totals(z)[np.triu_indices(z.k)]
    xlx = lambda v: np.where(v > 0, v * np.log(np.maximum(v, 1)), 0.0)
    return float(xlx(cnt.astype(float)).sum() - xlx(T.astype(float)).sum())


def block_averages(g: MultiplexGraph, z: CommunityAssignment, S) -> np.ndarray:
    """Mean of the subset-product adjacency over pairs with labels (a, b), i<j."""
    _check(g, z)
    S = sorted(set(S))
    if not S:
        raise ValidationError("subset must be nonempty")
    if S[0] < 0 or S[-1] >= g.d:
        raise LayerMismatch(f"layers {S} out of range for d={g.d}")
    prod = g.layers[S[0]].edges.copy()
    for l in S[1:]:
        prod &= g.layers[l].edges
    Z = np.zeros((g.n, z.k))
    Z[np.arange(g.n), z.z] = 1.0
    num = Z.T @ prod.astype(float) @ Z
    num[np.diag_indices(z.k)] /= 2.0
    return num / pair_totals(z)


def step_graphon(values, z: CommunityAssignment) -> Graphon:
    return Graphon.step(values, z.boundaries())


def step_system(g: MultiplexGraph, z: CommunityAssignment, layers=None) -> GraphonSystem:
    layers = list(range(g.d)) if layers is None else list(layers)
    cells = block_cell_counts(g, z, layers) / pair_totals(z)
    return GraphonSystem.from_block_cells(cells, z.boundaries())


def _degree_order(g: MultiplexGraph) -> np.ndarray:
    deg = sum(a.edges.sum(axis=1, dtype=np.int64) for a in g.layers)
    return np.argsort(-deg, kind="stable")


def _restart_order(g: MultiplexGraph, h: int, seed: int, r: int) -> np.ndarray:
    order = _degree_order(g)
    if r == 0:
        return order
    # perturb the degree ranks by about one block width
    rng = child_rng(seed, "restart", r)
    rank = np.arange(g.n) + rng.uniform(-h, h, g.n)
    return order[np.argsort(rank, kind="stable")]


def _codes(g: MultiplexGraph, mode: str) -> tuple[np.ndarray, int]:
    if mode == "joint":
        return g.patterns()[None, :, :], 1 << g.d
    return g.stack(), 2


def _search_one(P, C, order, h, k, F, cfg: FitConfig):
    z0 = CommunityAssignment.from_order(order, h, k)
    z = np.array(z0.z)
    M, N = _search.build_counts(P, z, k, C)
    sweeps = 0
    for _ in range(cfg.max_sweeps):
        acc, _gain = _search.swap_sweep(P, z, M, N, F, cfg.tolerance)
        sweeps += 1
        if acc == 0:
            break
    sizes = np.bincount(z, minlength=k).astype(np.int64)
    return z, _search.count_loglik(N, sizes, F), sweeps


def fit_community(g: MultiplexGraph, cfg: FitConfig = FitConfig()) -> FitResult:
    """Local maximum of the profile likelihood over equal-size block labelings."""
    if g.n < 4:
        raise TooFewNodes(f"n={g.n}: need at least 4 nodes")
    mode = cfg.likelihood
    if mode == "auto":
        mode = "joint" if g.d <= MAX_LAYERS else "composite"
    if mode == "joint" and g.d > MAX_LAYERS:
        raise ValidationError(f"joint likelihood needs d <= {MAX_LAYERS}")
    h, k = resolve_bandwidth(g.n, g.d, cfg)
    P, C = _codes(g, mode)
    F = _search.xlogx_table(g.n * g.n // 2 + 1)
    threads = max(1, cfg.threads)

    def run(r):
        return _search_one(P, C, _restart_order(g, h, cfg.seed, r), h, k, F, cfg)

    if threads > 1 and cfg.restarts > 1:
        with ThreadPoolExecutor(min(threads, cfg.restarts)) as ex:
            outs = list(ex.map(run, range(cfg.restarts)))
    else:
        outs = [run(r) for r in range(cfg.restarts)]
    best = max(range(len(outs)), key=lambda r: (outs[r][1], -r))
    z, ll, sweeps = outs[best]
    assign = CommunityAssignment(z, h, k)
    T = pair_totals(assign)
    counts = {}
    system = None
    if g.d <= MAX_LAYERS:
        cells = block_cell_counts(g, assign)
        mom = cells_to_moments(cells).astype(np.int64)
        for m in range(1, 1 << g.d):
            counts[mask_subset(m, g.d)] = (mom[m], T)
        system = GraphonSystem.from_block_cells(cells / T, assign.boundaries())
    else:
        for l in range(g.d):
            counts[(l,)] = (block_cell_counts(g, assign, [l])[1], T)
    return FitResult(assign, system, float(ll), counts, g, sweeps, mode)


def default_threads() -> int:
    env = os.environ.get("GLI_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
