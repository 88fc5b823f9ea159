"""Graphon information measures (nats).

Analytic systems are integrated with the midpoint rule on an m-by-m grid;
step systems are integrated exactly as area-weighted block sums.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import entr

from .core import (Graphon, GraphonSystem, clamp_cells, marginalize_cells, midpoint_grid,
                   nonempty_subsets)
from .errors import DegenerateMarginal, DimensionMismatch, DomainError, NegativeMeasure, ValidationError
from .synth import child_rng

EPS_QUAD = 1e-9
NEG_LIMIT = -1e-6
_CHUNK_POINTS = 1 << 20


@dataclass(frozen=True)
class QuadratureSpec:
    m: int = 512
    rule: str = "midpoint"

    def __post_init__(self):
        if self.m < 2:
            raise ValidationError("quadrature needs m >= 2")
        if self.rule != "midpoint":
            raise ValidationError(f"unsupported quadrature rule {self.rule!r}")


@dataclass(frozen=True)
class MeasureReport:
    name: str
    value: float
    normalized: float | None = None
    bounds: tuple[float, float] | None = None
    inputs: dict = field(default_factory=dict)
    clamped: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.bounds is not None:
            out["bounds"] = list(self.bounds)
        return out


def binary_entropy(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0.0) | ~(x <= 1.0)):
        raise DomainError("binary entropy needs arguments in [0,1]")
    out = entr(x) + entr(1.0 - x)
    return float(out) if out.ndim == 0 else out


def _cell_entropy(cells: np.ndarray) -> np.ndarray:
    return entr(cells).sum(axis=0)


def graphon_entropy(W: Graphon, q: QuadratureSpec = QuadratureSpec()) -> float:
    if W.kind == "step":
        lengths = np.diff(W.boundaries)
        return float((np.outer(lengths, lengths) * binary_entropy(np.clip(W.values, 0, 1))).sum())
    return entropy_profile(GraphonSystem(1, {(0,): W}), [(0,)], q)[(0,)]


def entropy_profile(sys: GraphonSystem, subsets: Iterable[Sequence[int]],
                    q: QuadratureSpec = QuadratureSpec()) -> dict[tuple, float]:
    """Joint graphon entropy of each requested layer subset."""
    subsets = [tuple(sorted(s)) for s in subsets]
    if sys.representation == "step":
        cells, area = sys.block_cells()
        cells = clamp_cells(cells, sys.d)
        return {s: float((area * _cell_entropy(marginalize_cells(cells, s, sys.d))).sum())
                for s in subsets}
    g = midpoint_grid(q.m)
    rows = max(1, _CHUNK_POINTS // (q.m * (1 << sys.d)))
    acc = {s: 0.0 for s in subsets}
    for r0 in range(0, q.m, rows):
        x = g[r0:r0 + rows, None]
        cells = clamp_cells(sys.raw_cells(x, g[None, :]), sys.d)
        for s in subsets:
            acc[s] += float(_cell_entropy(marginalize_cells(cells, s, sys.d)).sum())
    return {s: v / (q.m * q.m) for s, v in acc.items()}


def joint_graphon_entropy(sys: GraphonSystem, q: QuadratureSpec = QuadratureSpec()) -> float:
    return entropy_profile(sys, [tuple(range(sys.d))], q)[tuple(range(sys.d))]


def _floor(name: str, v: float) -> tuple[float, bool]:
    if v < NEG_LIMIT:
        raise NegativeMeasure(f"{name} = {v:.3g} is negative beyond quadrature error")
    if v < 0.0:
        return 0.0, True
    return v, False


def _inputs(sys: GraphonSystem, q: QuadratureSpec, **kw) -> dict:
    out = {"system": sys.digest(), "representation": sys.representation}
    if sys.representation != "step":
        out["quadrature"] = {"m": q.m, "rule": q.rule}
    out.update(kw)
    return out


def _need_d(sys: GraphonSystem, lo: int, hi: int | None = None):
    if sys.d < lo or (hi is not None and sys.d > hi):
        want = f"d={lo}" if hi == lo else f"d>={lo}" if hi is None else f"{lo}<=d<={hi}"
        raise DimensionMismatch(f"measure needs {want}, got d={sys.d}")


def _ratio(name, num, den, normalize):
    if den > 0:
        return min(num / den, 1.0)
    if normalize:
        raise DegenerateMarginal(f"{name}: normalizing entropy is zero")
    return None


def mutual_information(sys: GraphonSystem, q: QuadratureSpec = QuadratureSpec(),
                       normalize: bool | None = None) -> MeasureReport:
    _need_d(sys, 2, 2)
    H = entropy_profile(sys, [(0,), (1,), (0, 1)], q)
    v, cl = _floor("mutual information", H[(0,)] + H[(1,)] - H[(0, 1)])
    norm = _ratio("mutual information", v, min(H[(0,)], H[(1,)]), normalize) if normalize is not False else None
    return MeasureReport("mi", v, norm, None, _inputs(sys, q), cl,
                         {"entropies": [H[(0,)], H[(1,)]], "joint_entropy": H[(0, 1)]})


def graphon_distance(sys: GraphonSystem, q: QuadratureSpec = QuadratureSpec()) -> float:
    """Joint entropy minus mutual information (variation of information)."""
    _need_d(sys, 2, 2)
    H = entropy_profile(sys, [(0,), (1,), (0, 1)], q)
    mi = H[(0,)] + H[(1,)] - H[(0, 1)]
    return _floor("distance", H[(0, 1)] - mi)[0]


def _all_entropies(sys: GraphonSystem, q: QuadratureSpec) -> dict[tuple, float]:
    return entropy_profile(sys, nonempty_subsets(range(sys.d)), q)


def _ii_from(H: dict, d: int) -> float:
    return sum((-1) ** (len(s) + 1) * H[s] for s in nonempty_subsets(range(d)))


def _cmi_from(H: dict, a: int, b: int, c: int) -> float:
    ac, bc = tuple(sorted((a, c))), tuple(sorted((b, c)))
    return H[ac] + H[bc] - H[(c,)] - H[(0, 1, 2)]


def _bounds_from(H: dict) -> tuple[float, float]:
    cmis = [_cmi_from(H, *[l for l in range(3) if l != c], c) for c in range(3)]
    mis = [H[(a,)] + H[(b,)] - H[(a, b)] for a, b in ((0, 1), (0, 2), (1, 2))]
    return -min(cmis), min(mis)


def interaction_information(sys: GraphonSystem, q: QuadratureSpec = QuadratureSpec()) -> MeasureReport:
    """Alternating-sign sum of subset joint entropies; positive means redundancy."""
    _need_d(sys, 3)
    H = _all_entropies(sys, q)
    v = _ii_from(H, sys.d)
    bounds = _bounds_from(H) if sys.d == 3 else None
    return MeasureReport("ii", v, None, bounds, _inputs(sys, q))


def _check_layer(sys, c):
    if not 0 <= c < sys.d:
        raise DimensionMismatch(f"layer {c} out of range for d={sys.d}")


def conditional_mutual_information(sys: GraphonSystem, cond: int,
                                   q: QuadratureSpec = QuadratureSpec()) -> float:
    _need_d(sys, 3, 3)
    _check_layer(sys, cond)
    a, b = [l for l in range(3) if l != cond]
    H = entropy_profile(sys, [(cond,), tuple(sorted((a, cond))), tuple(sorted((b, cond))), (0, 1, 2)], q)
    return _floor("conditional mutual information", _cmi_from(H, a, b, cond))[0]


def interaction_bounds(sys: GraphonSystem, q: QuadratureSpec = QuadratureSpec()) -> tuple[float, float]:
    _need_d(sys, 3, 3)
    return _bounds_from(_all_entropies(sys, q))


def total_correlation(sys: GraphonSystem, q: QuadratureSpec = QuadratureSpec(),
                      normalize: bool | None = None) -> MeasureReport:
    _need_d(sys, 2)
    full = tuple(range(sys.d))
    H = entropy_profile(sys, [(l,) for l in range(sys.d)] + [full], q)
    hs = [H[(l,)] for l in range(sys.d)]
    v, cl = _floor("total correlation", sum(hs) - H[full])
    norm = _ratio("total correlation", v, sum(hs) - max(hs), normalize) if normalize is not False else None
    return MeasureReport("tc", v, norm, None, _inputs(sys, q), cl,
                         {"entropies": hs, "joint_entropy": H[full]})


def conditional_total_correlation(sys: GraphonSystem, cond: int, q: QuadratureSpec = QuadratureSpec(),
                                  normalize: bool | None = None) -> MeasureReport:
    """Total correlation of the other layers given layer ``cond``.

    Normalized by the smallest conditional entropy H(i | cond).
    """
    _need_d(sys, 3)
    _check_layer(sys, cond)
    full = tuple(range(sys.d))
    others = [l for l in range(sys.d) if l != cond]
    pairs = [tuple(sorted((i, cond))) for i in others]
    H = entropy_profile(sys, pairs + [(cond,), full], q)
    raw = sum(H[p] for p in pairs) - H[full] - (sys.d - 2) * H[(cond,)]
    v, cl = _floor("conditional total correlation", raw)
    den = min(H[p] - H[(cond,)] for p in pairs)
    norm = _ratio("conditional total correlation", v, den, normalize) if normalize is not False else None
    return MeasureReport("ctc", v, norm, None, _inputs(sys, q, cond=cond), cl)


def dual_total_correlation(sys: GraphonSystem, q: QuadratureSpec = QuadratureSpec(),
                           normalize: bool | None = None) -> MeasureReport:
    _need_d(sys, 2)
    full = tuple(range(sys.d))
    loo = [tuple(l for l in full if l != i) for i in full]
    H = entropy_profile(sys, loo + [full], q)
    v, cl = _floor("dual total correlation", H[full] - sum(H[full] - H[s] for s in loo))
    norm = _ratio("dual total correlation", v, H[full], normalize) if normalize is not False else None
    return MeasureReport("dtc", v, norm, None, _inputs(sys, q), cl)


def o_information(sys: GraphonSystem, q: QuadratureSpec = QuadratureSpec()) -> MeasureReport:
    _need_d(sys, 3)
    H = _all_entropies(sys, q)
    full = tuple(range(sys.d))
    tc = sum(H[(l,)] for l in full) - H[full]
    dtc = H[full] - sum(H[full] - H[tuple(l for l in full if l != i)] for i in full)
    return MeasureReport("oinfo", tc - dtc, None, None, _inputs(sys, q), False,
                         {"tc": tc, "dtc": dtc})


def monte_carlo_joint_entropy(sys: GraphonSystem, n: int, trials: int = 1, seed: int = 0) -> float:
    """Average per-pair cell entropy at sampled latents (conditional entropy given xi)."""
    if n < 2:
        raise ValidationError("need n >= 2")
    iu = np.triu_indices(n, 1)
    total = 0.0
    for t in range(trials):
        xi = child_rng(seed, "mc", t).random(n)
        cells = clamp_cells(sys.raw_cells(xi[iu[0]], xi[iu[1]]), sys.d)
        total += float(_cell_entropy(cells).mean())
    return total / trials


MEASURES = ("entropy", "mi", "ii", "cmi", "tc", "ctc", "dtc", "oinfo", "distance")


def measure(sys: GraphonSystem, name: str, q: QuadratureSpec = QuadratureSpec(),
            cond: int | None = None) -> MeasureReport:
    """Dispatch by short measure name."""
    if name == "entropy":
        H = entropy_profile(sys, [(l,) for l in range(sys.d)] + [tuple(range(sys.d))], q)
        return MeasureReport("entropy", H[tuple(range(sys.d))], None, None, _inputs(sys, q), False,
                             {"entropies": [H[(l,)] for l in range(sys.d)]})
    if name == "mi":
        return mutual_information(sys, q)
    if name == "ii":
        return interaction_information(sys, q)
    if name == "cmi":
        c = sys.d - 1 if cond is None else cond
        return MeasureReport("cmi", conditional_mutual_information(sys, c, q), None, None,
                             _inputs(sys, q, cond=c))
    if name == "tc":
        return total_correlation(sys, q)
    if name == "ctc":
        return conditional_total_correlation(sys, sys.d - 1 if cond is None else cond, q)
    if name == "dtc":
        return dual_total_correlation(sys, q)
    if name == "oinfo":
        return o_information(sys, q)
    if name == "distance":
        return MeasureReport("distance", graphon_distance(sys, q), None, None, _inputs(sys, q))
    raise ValidationError(f"unknown measure {name!r}; choose from {', '.join(MEASURES)}")
