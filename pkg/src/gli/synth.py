"""Seeded samplers for single-layer and correlated multiplex exchangeable graphs."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .core import (AdjacencyMatrix, Graphon, GraphonSystem, LatentVector, Link,
                   MultiplexGraph, digest, nonempty_subsets)
from .errors import DimensionMismatch, LinkOutOfRange, ValidationError

_MASK64 = (1 << 64) - 1


def child_rng(seed: int, *keys) -> np.random.Generator:
    """Independent stream for (seed, purpose, layer, ...); keys hashed stably."""
    words = [int(seed) & _MASK64]
    for key in keys:
        words.append(key if isinstance(key, int) and key >= 0 else zlib.crc32(str(key).encode()))
    return np.random.default_rng(np.random.SeedSequence(words))


@lru_cache(maxsize=8)
def _upper(n: int) -> tuple[np.ndarray, np.ndarray]:
    iu = np.triu_indices(n, 1)
    for a in iu:
        a.setflags(write=False)
    return iu


def _from_upper(n: int, bits: np.ndarray) -> AdjacencyMatrix:
    e = np.zeros((n, n), dtype=np.uint8)
    e[_upper(n)] = bits
    e |= e.T
    return AdjacencyMatrix(e)


def _upper_bits(a: AdjacencyMatrix) -> np.ndarray:
    return a.edges[_upper(a.n)].astype(bool)


def sample_latents(n: int, seed: int) -> LatentVector:
    if n < 1:
        raise ValidationError("n must be at least 1")
    xi = child_rng(seed, "latent").random(n)
    xi[xi == 0.0] = np.nextafter(0.0, 1.0)
    return LatentVector(xi, seed)


def _pair_values(W: Callable, xi: np.ndarray) -> np.ndarray:
    i, j = _upper(xi.size)
    return np.asarray(W(xi[i], xi[j]), dtype=float)


def sample_graph(W: Graphon, xi: LatentVector, seed: int) -> AdjacencyMatrix:
    """Bernoulli(W(xi_i, xi_j)) edges for i<j, mirrored."""
    return _sample_graph(W, xi, child_rng(seed, "edges", 0))


def _sample_graph(W, xi: LatentVector, rng) -> AdjacencyMatrix:
    p = _pair_values(W, xi.xi)
    return _from_upper(xi.n, rng.random(p.size) < p)


def sample_conditional(h: Link | Callable, parent: AdjacencyMatrix, xi: LatentVector,
                       seed: int) -> AdjacencyMatrix:
    """Keep each parent edge with probability h(xi_i, xi_j).

    A :class:`Link` is evaluated at (lower latent, higher latent); any other
    callable at (xi_i, xi_j) with i < j.
    """
    return _sample_conditional(h, parent, xi, child_rng(seed, "link", 0))


def _sample_conditional(h, parent, xi, rng) -> AdjacencyMatrix:
    if parent.n != xi.n:
        raise DimensionMismatch("latent vector and parent differ in n")
    p = _pair_values(h, xi.xi)
    if not np.all(np.isfinite(p)) or p.min(initial=0.0) < -1e-12 or p.max(initial=0.0) > 1 + 1e-12:
        raise LinkOutOfRange("link evaluates outside [0,1] on the sampled latents")
    keep = rng.random(p.size) < p
    return _from_upper(parent.n, _upper_bits(parent) & keep)


def percolate(A: AdjacencyMatrix, keep: float, seed: int) -> AdjacencyMatrix:
    return _percolate(A, keep, child_rng(seed, "perc", 0))


def _percolate(A, keep, rng) -> AdjacencyMatrix:
    if not 0.0 <= keep <= 1.0:
        raise ValidationError("keep probability must lie in [0,1]")
    bits = _upper_bits(A)
    return _from_upper(A.n, bits & (rng.random(bits.size) < keep))


def xor_combine(A: AdjacencyMatrix, B: AdjacencyMatrix) -> AdjacencyMatrix:
    if A.n != B.n:
        raise DimensionMismatch("layers differ in n")
    return AdjacencyMatrix(A.edges ^ B.edges)


def elementwise_product(layers: Sequence[AdjacencyMatrix]) -> AdjacencyMatrix:
    layers = list(layers)
    if not layers:
        raise DimensionMismatch("need at least one layer")
    if any(a.n != layers[0].n for a in layers):
        raise DimensionMismatch("layers differ in n")
    out = layers[0].edges.copy()
    for a in layers[1:]:
        out &= a.edges
    return AdjacencyMatrix(out)


def sample_coupled(marginals: Sequence[Graphon], xi: LatentVector, seed: int,
                   shared: float = 0.0) -> list[AdjacencyMatrix]:
    """Layers driven by one uniform per pair with probability ``shared``.

    Shared pairs threshold a common uniform (edges maximally overlapping);
    the others use an independent uniform per layer.
    """
    if not 0.0 <= shared <= 1.0:
        raise ValidationError("shared fraction must lie in [0,1]")
    npairs = xi.n * (xi.n - 1) // 2
    common = child_rng(seed, "common").random(npairs)
    use = child_rng(seed, "shared").random(npairs) < shared
    out = []
    for l, W in enumerate(marginals):
        u = child_rng(seed, "edges", l).random(npairs)
        u = np.where(use, common, u)
        out.append(_from_upper(xi.n, u < _pair_values(W, xi.xi)))
    return out


# recipes -------------------------------------------------------------------------

RECIPE_KINDS = ("independent", "input_output", "percolation", "xor", "sbm_layers")


@dataclass(frozen=True, eq=False)
class GenRecipe:
    """How to draw one multiplex sample from shared latents.

    kind
        ``independent``: layers from ``graphons`` with edge-sharing fraction
        ``shared`` (0 = conditionally independent given the latents).
        ``input_output``: layer 0 from ``graphons[0]``; layer l+1 keeps edges
        of layer l with probability ``links[l]``.
        ``percolation``: layer 0 from ``graphons[0]``; layer l >= 1 keeps each
        layer-0 edge with probability ``keep_probs[l-1]`` (nested: each layer
        a subset of the previous when ``nested``).
        ``xor``: two layers from ``graphons`` sharing ``shared`` and their xor.
        ``sbm_layers``: like ``independent`` with block-constant layers given
        by ``thetas`` over latent blocks of relative ``sizes``.
    """

    kind: str
    n: int
    seed: int
    graphons: tuple[Graphon, ...] = ()
    links: tuple[Link, ...] = ()
    keep_probs: tuple[float, ...] = ()
    shared: float = 0.0
    nested: bool = True
    thetas: tuple = ()
    sizes: tuple[float, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.kind not in RECIPE_KINDS:
            raise ValidationError(f"unknown recipe kind {self.kind!r}")
        if self.n < 1:
            raise ValidationError("n must be at least 1")
        if any(not 0.0 <= p <= 1.0 for p in self.keep_probs):
            raise ValidationError("keep_probs must lie in [0,1]")
        if not 0.0 <= self.shared <= 1.0:
            raise ValidationError("shared fraction must lie in [0,1]")
        if self.kind == "sbm_layers" and not self.graphons:
            sizes = self.sizes or (1.0,) * np.asarray(self.thetas[0]).shape[0]
            object.__setattr__(self, "graphons",
                               tuple(Graphon.sbm(t, sizes) for t in self.thetas))
        if self.kind == "xor" and len(self.graphons) != 2:
            raise ValidationError("xor needs exactly two base graphons")
        if self.kind in ("input_output", "percolation") and len(self.graphons) != 1:
            raise ValidationError(f"{self.kind} needs one base graphon")
        if not self.graphons:
            raise ValidationError("recipe needs at least one graphon")

    @property
    def d(self) -> int:
        if self.kind == "input_output":
            return 1 + len(self.links)
        if self.kind == "percolation":
            return 1 + len(self.keep_probs)
        if self.kind == "xor":
            return 3
        return len(self.graphons)

    def with_seed(self, seed: int, n: int | None = None) -> "GenRecipe":
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__}
        kw.update(seed=int(seed), n=self.n if n is None else int(n))
        return GenRecipe(**kw)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "n": self.n, "seed": self.seed, "name": self.name,
               "graphons": [g.to_dict() for g in self.graphons],
               "links": [l.to_dict() for l in self.links],
               "keep_probs": list(self.keep_probs), "shared": self.shared, "nested": self.nested}
        return out

    @classmethod
    def from_dict(cls, dct) -> "GenRecipe":
        kw = dict(kind=dct["kind"], n=int(dct["n"]), seed=int(dct.get("seed", 0)),
                  name=dct.get("name", ""), shared=float(dct.get("shared", 0.0)),
                  nested=bool(dct.get("nested", True)),
                  keep_probs=tuple(float(p) for p in dct.get("keep_probs", ())),
                  links=tuple(Link.from_dict(l) for l in dct.get("links", ())))
        if "thetas" in dct:
            kw["thetas"] = tuple(np.asarray(t, float) for t in dct["thetas"])
            kw["sizes"] = tuple(dct.get("sizes", ()))
        else:
            kw["graphons"] = tuple(Graphon.from_dict(g) for g in dct["graphons"])
        return cls(**kw)

    def digest(self) -> str:
        return digest(self.to_dict())

    def sample(self) -> tuple[MultiplexGraph, LatentVector]:
        xi = sample_latents(self.n, self.seed)
        s = self.seed
        if self.kind in ("independent", "sbm_layers"):
            layers = sample_coupled(self.graphons, xi, s, self.shared)
        elif self.kind == "input_output":
            layers = [_sample_graph(self.graphons[0], xi, child_rng(s, "edges", 0))]
            for l, link in enumerate(self.links, start=1):
                layers.append(_sample_conditional(link, layers[-1], xi, child_rng(s, "link", l)))
        elif self.kind == "percolation":
            layers = [_sample_graph(self.graphons[0], xi, child_rng(s, "edges", 0))]
            prev = 1.0
            for l, p in enumerate(self.keep_probs, start=1):
                if self.nested:
                    rel = 0.0 if prev == 0 else p / prev
                    if rel > 1.0 + 1e-12:
                        raise ValidationError("nested percolation needs non-increasing keep_probs")
                    layers.append(_percolate(layers[-1], min(rel, 1.0), child_rng(s, "perc", l)))
                    prev = p
                else:
                    layers.append(_percolate(layers[0], p, child_rng(s, "perc", l)))
        else:
            a, b = sample_coupled(self.graphons, xi, s, self.shared)
            layers = [a, b, xor_combine(a, b)]
        return MultiplexGraph(tuple(layers)), xi

    def true_system(self) -> GraphonSystem:
        """Population graphon system implied by the recipe."""
        if self.kind in ("independent", "sbm_layers"):
            return GraphonSystem.coupled(self.graphons, self.shared)
        base = self.graphons[0]
        if self.kind == "input_output":
            ws = [base]
            for link in self.links:
                ws.append(Graphon.analytic("io", ws[-1], link=link))
            return GraphonSystem.nested(ws)
        if self.kind == "percolation":
            ps = (1.0,) + tuple(self.keep_probs)
            moments = {}
            for s in nonempty_subsets(range(self.d)):
                c = ps[max(s)] if self.nested else float(np.prod([ps[l] for l in s]))
                moments[s] = base if c == 1.0 else _scaled(base, c)
            return GraphonSystem(self.d, moments)
        pair = GraphonSystem.coupled(self.graphons, self.shared)
        w1, w2, w12 = pair.moments[(0,)], pair.moments[(1,)], pair.moments[(0, 1)]
        if w1.kind == w2.kind == w12.kind == "step" and pair.representation == "step":
            v1, v2, v12 = w1.values, w2.values, w12.values
            b = pair.boundaries
            vals = {(0,): v1, (1,): v2, (0, 1): v12, (2,): v1 + v2 - 2 * v12,
                    (0, 2): v1 - v12, (1, 2): v2 - v12, (0, 1, 2): np.zeros_like(v1)}
            return GraphonSystem(3, {s: Graphon.step(np.clip(v, 0, 1), b) for s, v in vals.items()})
        lin = lambda *terms: Graphon.analytic("lincomb", *[t for t, _ in terms],
                                              coef=[c for _, c in terms])
        moments = {(0,): w1, (1,): w2, (0, 1): w12,
                   (2,): lin((w1, 1.0), (w2, 1.0), (w12, -2.0)),
                   (0, 2): lin((w1, 1.0), (w12, -1.0)), (1, 2): lin((w2, 1.0), (w12, -1.0)),
                   (0, 1, 2): Graphon.constant(0.0)}
        return GraphonSystem(3, moments)


def _scaled(g: Graphon, c: float) -> Graphon:
    if g.kind == "step":
        return Graphon.step(c * g.values, g.boundaries)
    return Graphon.analytic("scaled", g, c=float(c))
