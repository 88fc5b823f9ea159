"""Domain types and the subset-cell algebra of the d-variate graph limit model.

Layers are indexed from 0.  A layer subset is a sorted tuple of layer
indices; the joint-edge pattern of a node pair is a bit pattern in which
layer ``l`` occupies bit ``d - 1 - l``, so for d=3 index 0b110 is the cell
``p110`` (edges in layers 0 and 1, none in layer 2).
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import CellNegative, DimensionMismatch, EmptySubset, ValidationError

CELL_TOL = 1e-9
MAX_LAYERS = 6

Subset = tuple[int, ...]


def _sym(f: Callable) -> Callable:
    return lambda x, y, **p: 0.5 * (f(x, y, **p) + f(y, x, **p))


# Raw (possibly asymmetric) forms; graphons are evaluated through their
# symmetrization, which is the identity for the symmetric entries.
_REGISTRY: dict[str, Callable] = {
    "constant": lambda x, y, p: np.full(np.broadcast(x, y).shape, float(p)),
    "product": lambda x, y: x * y,
    "scaled_product": lambda x, y, c: c * x * y,
    "poly": _sym(lambda x, y, p, q: x**p * y**q),
    "affine": lambda x, y, a: a * (x + y),
    "expdecay": lambda x, y, a, b: a * np.exp(-b * (x + y)),
}

# Links of the input-output construction, evaluated at (lower, higher) latent.
_LINKS: dict[str, Callable] = {
    "constant": lambda lo, hi, p: np.full(np.broadcast(lo, hi).shape, float(p)),
    "product": lambda lo, hi: lo * hi,
    "mean": lambda lo, hi: 0.5 * (lo + hi),
    "io_ratio": lambda lo, hi: (lo + hi) / (2.0 * hi),
    "first": lambda lo, hi: lo,
    "second": lambda lo, hi: hi,
}

_COMPOSITES = ("scaled", "prod", "minimum", "mix", "lincomb", "io")


def _canon(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(type(obj))


def digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, default=_canon, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Link:
    """Edge-retention probability h(lower latent, higher latent)."""

    name: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in _LINKS:
            raise ValidationError(f"unknown link {self.name!r}")

    def __call__(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        lo, hi = np.minimum(x, y), np.maximum(x, y)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _LINKS[self.name](lo, hi, **self.params)

    def to_dict(self):
        return {"name": self.name, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, dct):
        return cls(dct["name"], dict(dct.get("params", {})))


@dataclass(frozen=True, eq=False)
class Graphon:
    """A symmetric function on the unit square, analytic or block-constant.

    Use the constructors :meth:`analytic`, :meth:`step` and :meth:`sbm`
    rather than instantiating directly.
    """

    kind: str
    name: str | None = None
    params: Mapping[str, object] = field(default_factory=dict)
    children: tuple["Graphon", ...] = ()
    values: np.ndarray | None = None
    boundaries: np.ndarray | None = None

    @classmethod
    def analytic(cls, name: str, *children: "Graphon", **params) -> "Graphon":
        if name not in _REGISTRY and name not in _COMPOSITES:
            raise ValidationError(f"unknown graphon {name!r}")
        if name == "io" and not isinstance(params.get("link"), Link):
            params["link"] = Link.from_dict(params["link"])
        return cls("analytic", name, params, tuple(children))

    @classmethod
    def constant(cls, p: float) -> "Graphon":
        return cls.analytic("constant", p=float(p))

    @classmethod
    def step(cls, values, boundaries=None) -> "Graphon":
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DimensionMismatch("step values must be a square matrix")
        k = values.shape[0]
        if boundaries is None:
            boundaries = np.linspace(0.0, 1.0, k + 1)
        boundaries = np.array(boundaries, dtype=float)
        if boundaries.shape != (k + 1,):
            raise DimensionMismatch("need k+1 boundaries for k blocks")
        if boundaries[0] != 0.0 or boundaries[-1] != 1.0 or np.any(np.diff(boundaries) <= 0):
            raise ValidationError("boundaries must increase strictly from 0 to 1")
        values.setflags(write=False)
        boundaries.setflags(write=False)
        return cls("step", values=values, boundaries=boundaries)

    @classmethod
    def sbm(cls, theta, sizes) -> "Graphon":
        """Block-constant graphon with block fractions proportional to ``sizes``."""
        sizes = np.asarray(sizes, dtype=float)
        edges = np.concatenate([[0.0], np.cumsum(sizes) / sizes.sum()])
        edges[-1] = 1.0
        return cls.step(theta, edges)

    @property
    def k(self) -> int:
        return 0 if self.values is None else self.values.shape[0]

    def block_index(self, x) -> np.ndarray:
        """0-based block of each coordinate: block a covers (b[a], b[a+1]]."""
        idx = np.searchsorted(self.boundaries, x, side="left") - 1
        return np.clip(idx, 0, self.k - 1)

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "step":
            return self.values[self.block_index(x), self.block_index(y)]
        name, p = self.name, self.params
        if name in _REGISTRY:
            return np.asarray(_REGISTRY[name](x, y, **p), dtype=float)
        vals = [c(x, y) for c in self.children]
        if name == "scaled":
            return p["c"] * vals[0]
        if name == "prod":
            return np.prod(vals, axis=0)
        if name == "minimum":
            return np.min(vals, axis=0)
        if name == "mix":
            return p["w"] * vals[0] + (1.0 - p["w"]) * vals[1]
        if name == "lincomb":
            return sum(c * v for c, v in zip(p["coef"], vals))
        if name == "io":
            return vals[0] * p["link"](x, y)
        raise AssertionError(name)

    def to_dict(self) -> dict:
        if self.kind == "step":
            return {"kind": "step", "values": self.values.tolist(),
                    "boundaries": self.boundaries.tolist()}
        params = {k: (v.to_dict() if isinstance(v, Link) else v) for k, v in self.params.items()}
        out = {"kind": "analytic", "name": self.name, "params": params}
        if self.children:
            out["children"] = [c.to_dict() for c in self.children]
        return out

    @classmethod
    def from_dict(cls, dct) -> "Graphon":
        if dct["kind"] == "step":
            return cls.step(dct["values"], dct["boundaries"])
        children = [cls.from_dict(c) for c in dct.get("children", [])]
        return cls.analytic(dct["name"], *children, **dict(dct.get("params", {})))

    def digest(self) -> str:
        return digest(self.to_dict())

    def __repr__(self):
        if self.kind == "step":
            return f"Graphon.step(k={self.k})"
        return f"Graphon.{self.name}({dict(self.params)})"


# subset algebra -------------------------------------------------------------

def nonempty_subsets(layers: Sequence[int]) -> list[Subset]:
    layers = sorted(layers)
    return [s for r in range(1, len(layers) + 1) for s in itertools.combinations(layers, r)]


def subset_mask(s: Iterable[int], d: int) -> int:
    return sum(1 << (d - 1 - l) for l in s)


def mask_subset(mask: int, d: int) -> Subset:
    return tuple(l for l in range(d) if mask >> (d - 1 - l) & 1)


def pattern_name(b: int, d: int) -> str:
    return "p" + format(b, f"0{d}b")


def moebius_cells(moment_by_mask: Sequence[np.ndarray]) -> np.ndarray:
    """Cell probabilities from joint moments, via inclusion-exclusion.

    ``moment_by_mask[m]`` is P(edge in every layer of mask m) (entry 0 is
    the constant 1).  Returns an array whose first axis is the cell index.
    """
    f = np.array(np.broadcast_arrays(*moment_by_mask), dtype=float)
    size = f.shape[0]
    bit = 1
    while bit < size:
        for m in range(size):
            if not m & bit:
                f[m] -= f[m | bit]
        bit <<= 1
    return f


def cells_to_moments(cells: np.ndarray) -> np.ndarray:
    """Inverse of :func:`moebius_cells` (superset sums)."""
    f = np.array(cells, dtype=float)
    size = f.shape[0]
    bit = 1
    while bit < size:
        for m in range(size):
            if not m & bit:
                f[m] += f[m | bit]
        bit <<= 1
    return f


def marginalize_cells(cells: np.ndarray, keep: Sequence[int], d: int) -> np.ndarray:
    """Sum cells over the bits of dropped layers; result indexed for len(keep) layers."""
    keep = list(keep)
    dk = len(keep)
    out = np.zeros((1 << dk,) + cells.shape[1:])
    for b in range(1 << d):
        idx = 0
        for l in keep:
            idx = (idx << 1) | (b >> (d - 1 - l) & 1)
        out[idx] += cells[b]
    return out


@dataclass(frozen=True, eq=False)
class GraphonSystem:
    """Joint-edge moments W^(S) for every nonempty layer subset S."""

    d: int
    moments: Mapping[Subset, Graphon]

    def __post_init__(self):
        if self.d < 1:
            raise DimensionMismatch("need at least one layer")
        if self.d > MAX_LAYERS:
            raise DimensionMismatch(f"d={self.d} exceeds the cap of {MAX_LAYERS} layers")
        want = set(nonempty_subsets(range(self.d)))
        got = set(self.moments)
        if want != got:
            raise DimensionMismatch(f"moments must cover every nonempty subset of {self.d} layers")

    @classmethod
    def from_parts(cls, marginals: Sequence[Graphon], products: Mapping[Subset, Graphon]):
        d = len(marginals)
        moments = {(i,): w for i, w in enumerate(marginals)}
        moments.update({tuple(sorted(s)): w for s, w in products.items()})
        return cls(d, moments)

    @classmethod
    def independent(cls, marginals: Sequence[Graphon]) -> "GraphonSystem":
        """Layers conditionally independent given the latents."""
        return cls.coupled(marginals, shared=0.0)

    @classmethod
    def coupled(cls, marginals: Sequence[Graphon], shared: float) -> "GraphonSystem":
        """Edge-sharing coupling.

        A fraction ``shared`` of node pairs draws all layers from one common
        uniform (joint moment = min of marginals); the rest draw layers
        independently (joint moment = product).
        """
        marginals = list(marginals)
        if all(w.kind == "step" for w in marginals) and _same_boundaries(marginals):
            vals = np.array([w.values for w in marginals])
            moments = {}
            for s in nonempty_subsets(range(len(marginals))):
                v = shared * vals[list(s)].min(axis=0) + (1 - shared) * vals[list(s)].prod(axis=0)
                moments[s] = Graphon.step(v, marginals[0].boundaries)
            return cls(len(marginals), moments)
        moments = {}
        for s in nonempty_subsets(range(len(marginals))):
            ws = [marginals[l] for l in s]
            if len(ws) == 1:
                moments[s] = ws[0]
            elif shared == 0.0:
                moments[s] = Graphon.analytic("prod", *ws)
            elif shared == 1.0:
                moments[s] = Graphon.analytic("minimum", *ws)
            else:
                moments[s] = Graphon.analytic(
                    "mix", Graphon.analytic("minimum", *ws), Graphon.analytic("prod", *ws), w=shared)
        return cls(len(marginals), moments)

    @classmethod
    def nested(cls, marginals: Sequence[Graphon]) -> "GraphonSystem":
        """Each layer a sub-layer of the previous one: W^(S) = W^(max S)."""
        return cls(len(marginals), {s: marginals[max(s)] for s in nonempty_subsets(range(len(marginals)))})

    @classmethod
    def from_block_cells(cls, cells: np.ndarray, boundaries) -> "GraphonSystem":
        """Step system from per-block-pair cell probabilities of shape (2^d, k, k)."""
        size = cells.shape[0]
        d = size.bit_length() - 1
        mom = cells_to_moments(cells)
        moments = {mask_subset(m, d): Graphon.step(np.clip(mom[m], 0.0, 1.0), boundaries)
                   for m in range(1, size)}
        return cls(d, moments)

    @property
    def marginals(self) -> list[Graphon]:
        return [self.moments[(i,)] for i in range(self.d)]

    @property
    def products(self) -> dict[Subset, Graphon]:
        return {s: w for s, w in self.moments.items() if len(s) >= 2}

    @property
    def representation(self) -> str:
        ws = list(self.moments.values())
        if all(w.kind == "step" for w in ws) and _same_boundaries(ws):
            return "step"
        return "analytic"

    @property
    def boundaries(self) -> np.ndarray | None:
        return self.moments[(0,)].boundaries if self.representation == "step" else None

    def moment_stack(self, x, y) -> list:
        out = [1.0]
        for m in range(1, 1 << self.d):
            out.append(self.moments[mask_subset(m, self.d)](x, y))
        return out

    def raw_cells(self, x, y) -> np.ndarray:
        return moebius_cells(self.moment_stack(x, y))

    def block_cells(self) -> tuple[np.ndarray, np.ndarray]:
        """(cells of shape (2^d, k, k), block-pair areas) for a step system."""
        if self.representation != "step":
            raise ValidationError("block cells need a step system")
        vals = [1.0] + [self.moments[mask_subset(m, self.d)].values for m in range(1, 1 << self.d)]
        lengths = np.diff(self.boundaries)
        return moebius_cells(vals), np.outer(lengths, lengths)

    def to_dict(self) -> dict:
        return {"d": self.d, "representation": self.representation,
                "moments": {",".join(map(str, s)): w.to_dict() for s, w in sorted(self.moments.items())}}

    @classmethod
    def from_dict(cls, dct) -> "GraphonSystem":
        moments = {tuple(int(t) for t in key.split(",")): Graphon.from_dict(w)
                   for key, w in dct["moments"].items()}
        return cls(int(dct["d"]), moments)

    def digest(self) -> str:
        return digest(self.to_dict())


def _same_boundaries(ws: Sequence[Graphon]) -> bool:
    b0 = ws[0].boundaries
    return all(w.boundaries is not None and w.boundaries.shape == b0.shape
               and np.array_equal(w.boundaries, b0) for w in ws)


def clamp_cells(cells: np.ndarray, d: int | None = None) -> np.ndarray:
    """Clamp floating-point dust into [0, 1]; raise on genuine negativity."""
    low = cells.min(axis=tuple(range(1, cells.ndim))) if cells.ndim > 1 else cells
    if np.any(low < -CELL_TOL):
        b = int(np.argmin(low))
        d = d if d is not None else cells.shape[0].bit_length() - 1
        raise CellNegative(f"cell {pattern_name(b, d)} negative ({float(low[b]):.3g})")
    return np.clip(cells, 0.0, 1.0)


def system_cells(sys: GraphonSystem, x, y) -> np.ndarray:
    """Cell probabilities of the d-variate Bernoulli model at (x, y).

    Returns an array of shape (2^d, *broadcast(x, y).shape).
    """
    return clamp_cells(sys.raw_cells(x, y), sys.d)


def marginalize(sys: GraphonSystem, keep: Iterable[int]) -> GraphonSystem:
    """Sub-system on the layers in ``keep``, renumbered 0..len(keep)-1 in sorted order."""
    keep = sorted(set(keep))
    if not keep:
        raise EmptySubset("keep must name at least one layer")
    if keep[0] < 0 or keep[-1] >= sys.d:
        raise DimensionMismatch(f"layers {keep} out of range for d={sys.d}")
    moments = {}
    for s in nonempty_subsets(range(len(keep))):
        moments[s] = sys.moments[tuple(keep[i] for i in s)]
    return GraphonSystem(len(keep), moments)


def midpoint_grid(m: int) -> np.ndarray:
    return (np.arange(m) + 0.5) / m


def validate(sys: GraphonSystem, grid_m: int = 64) -> list[str]:
    """Check the system invariants on the m-by-m midpoint grid; [] iff valid."""
    if grid_m < 2:
        raise ValidationError("grid_m must be at least 2")
    out = []
    g = midpoint_grid(grid_m)
    X, Y = np.meshgrid(g, g, indexing="ij")
    evals = {}
    for s, w in sorted(sys.moments.items(), key=lambda kv: (len(kv[0]), kv[0])):
        label = "W" + "".join(str(l) for l in s)
        if w.kind == "step":
            v = w.values
            if not np.allclose(v, v.T, atol=1e-12, rtol=0):
                out.append(f"{label} not symmetric")
        val = w(X, Y)
        if w.kind != "step" and not np.allclose(val, val.T, atol=1e-12, rtol=0):
            out.append(f"{label} not symmetric")
        if np.any(val < -CELL_TOL) or np.any(val > 1 + CELL_TOL):
            out.append(f"{label} outside [0,1]")
        evals[s] = val
    for s in evals:
        for t in evals:
            if len(t) < len(s) and set(t) < set(s) and np.any(evals[s] > evals[t] + CELL_TOL):
                out.append("W" + "".join(map(str, s)) + " exceeds W" + "".join(map(str, t)))
    vals = [1.0] + [evals[mask_subset(m, sys.d)] for m in range(1, 1 << sys.d)]
    cells = moebius_cells(vals)
    for b in range(1 << sys.d):
        if np.any(cells[b] < -CELL_TOL):
            out.append(f"cell {pattern_name(b, sys.d)} negative")
    if np.any(np.abs(cells.sum(axis=0) - 1.0) > 1e-12):
        out.append("cells do not sum to 1")
    return out


# graphs ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Simple undirected graph: symmetric hollow 0/1 matrix."""

    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DimensionMismatch("adjacency matrix must be square")
        if not np.isin(e, (0, 1)).all():
            raise ValidationError("adjacency entries must be 0 or 1")
        e = e.astype(np.uint8)
        if not np.array_equal(e, e.T):
            raise ValidationError("adjacency matrix must be symmetric")
        if np.any(np.diagonal(e)):
            raise ValidationError("adjacency matrix must have a zero diagonal")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_upper(cls, upper: np.ndarray) -> "AdjacencyMatrix":
        """Mirror the strict upper triangle of a boolean matrix."""
        u = np.triu(np.asarray(upper, dtype=bool), 1)
        return cls((u | u.T).astype(np.uint8))

    @classmethod
    def from_edge_list(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "AdjacencyMatrix":
        e = np.zeros((n, n), dtype=np.uint8)
        for i, j in pairs:
            if i == j:
                raise ValidationError(f"self-loop at node {i}")
            e[i, j] = e[j, i] = 1
        return cls(e)

    @property
    def n(self) -> int:
        return self.edges.shape[0]

    @property
    def edge_count(self) -> int:
        return int(np.triu(self.edges, 1).sum())

    def edge_list(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.edges, 1))
        return list(zip(i.tolist(), j.tolist()))

    def density(self) -> float:
        return self.edge_count / (self.n * (self.n - 1) / 2) if self.n > 1 else 0.0

    def __eq__(self, other):
        return isinstance(other, AdjacencyMatrix) and np.array_equal(self.edges, other.edges)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MultiplexGraph:
    layers: tuple[AdjacencyMatrix, ...]
    node_ids: tuple[str, ...] | None = None
    layer_labels: tuple | None = None

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise DimensionMismatch("a multiplex graph needs at least one layer")
        n = layers[0].n
        if any(a.n != n for a in layers):
            raise DimensionMismatch("all layers must share the node count")
        object.__setattr__(self, "layers", layers)
        if self.node_ids is not None:
            ids = tuple(str(v) for v in self.node_ids)
            if len(ids) != n or len(set(ids)) != n:
                raise ValidationError("node_ids must be unique and of length n")
            object.__setattr__(self, "node_ids", ids)
        if self.layer_labels is not None:
            if len(self.layer_labels) != len(layers):
                raise DimensionMismatch("one label per layer")
            object.__setattr__(self, "layer_labels", tuple(self.layer_labels))

    @property
    def n(self) -> int:
        return self.layers[0].n

    @property
    def d(self) -> int:
        return len(self.layers)

    def stack(self) -> np.ndarray:
        return np.stack([a.edges for a in self.layers])

    def patterns(self, layers: Sequence[int] | None = None) -> np.ndarray:
        """Per-pair joint-edge bit pattern over the chosen layers (uint8)."""
        layers = range(self.d) if layers is None else layers
        layers = list(layers)
        dd = len(layers)
        p = np.zeros((self.n, self.n), dtype=np.uint8)
        for pos, l in enumerate(layers):
            p |= self.layers[l].edges << (dd - 1 - pos)
        return p

    def select(self, layers: Sequence[int]) -> "MultiplexGraph":
        labels = None if self.layer_labels is None else tuple(self.layer_labels[l] for l in layers)
        return MultiplexGraph(tuple(self.layers[l] for l in layers), self.node_ids, labels)


@dataclass(frozen=True, eq=False)
class CommunityAssignment:
    """Shared block labels (0-based); blocks have size h, the last h + r."""

    z: np.ndarray
    h: int
    k: int

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.int64).copy()
        n = z.size
        if self.h < 2:
            raise ValidationError("bandwidth h must be at least 2")
        if self.k < 1 or self.h * self.k > n:
            raise ValidationError(f"k={self.k}, h={self.h} infeasible for n={n}")
        sizes = np.bincount(z, minlength=self.k) if n else np.zeros(self.k, int)
        if z.min() < 0 or z.max() >= self.k or sizes.size != self.k:
            raise ValidationError("labels must lie in 0..k-1")
        want = np.full(self.k, self.h)
        want[-1] += n - self.h * self.k
        if not np.array_equal(sizes, want):
            raise ValidationError(f"block sizes {sizes.tolist()} do not match h={self.h}, r={self.r}")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def r(self) -> int:
        return self.n - self.h * self.k

    @classmethod
    def from_order(cls, order: Sequence[int], h: int, k: int) -> "CommunityAssignment":
        """Cut a node ordering into consecutive blocks (last block takes the remainder)."""
        order = np.asarray(order)
        z = np.empty(order.size, dtype=np.int64)
        z[order] = np.minimum(np.arange(order.size) // h, k - 1)
        return cls(z, h, k)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.z, minlength=self.k)

    def boundaries(self) -> np.ndarray:
        b = np.arange(self.k + 1) * self.h / self.n
        b[-1] = 1.0
        return b


@dataclass(frozen=True, eq=False)
class LatentVector:
    xi: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float).copy()
        if xi.ndim != 1 or np.any(xi <= 0) or np.any(xi >= 1):
            raise ValidationError("latents must lie strictly inside (0, 1)")
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)

    @property
    def n(self) -> int:
        return self.xi.size
