"""Experiment harness: RMSE convergence curves and named multiplex scenarios."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .core import Graphon, GraphonSystem, Link, digest, nonempty_subsets
from .errors import NoTruthAvailable, UnknownScenario, ValidationError
from .estim import FitConfig, fit_community
from .infom import QuadratureSpec, entropy_profile
from .mimat import from_raw, spectrum_entropy
from .synth import GenRecipe, child_rng

DESK_NS = (64, 128, 256, 512, 1024, 2048)
TRUTH_M = 4096

# ---------------------------------------------------------------- recipes

_XY = Graphon.analytic("product")


def _const(p):
    return Link("constant", {"p": p})


_FAMILIES = {
    # two layers, child keeps parent edges with a latent-dependent probability
    "mi_scenario1": (lambda n, s: GenRecipe("input_output", n, s, graphons=(_XY,),
                                            links=(Link("io_ratio"),), name="mi_scenario1"), ("mi",)),
    "mi_scenario2": (lambda n, s: GenRecipe("input_output", n, s, graphons=(_XY,),
                                            links=(Link("product"),), name="mi_scenario2"), ("mi",)),
    # three nested layers: xy, 0.8xy, 0.5xy
    "chain1": (lambda n, s: GenRecipe("input_output", n, s, graphons=(_XY,),
                                      links=(_const(0.8), _const(0.625)), name="chain1"),
               ("tc", "ii", "dtc")),
    # three nested layers: xy, x^2y^2, sym(x^2y^3)
    "chain2": (lambda n, s: GenRecipe("input_output", n, s, graphons=(_XY,),
                                      links=(Link("product"), Link("mean")), name="chain2"),
               ("tc", "ii", "dtc")),
}
_FAMILIES["chain_xy"] = _FAMILIES["chain1"]


def _sbm3(diag, out=0.05) -> Graphon:
    t = np.full((3, 3), out)
    np.fill_diagonal(t, diag)
    return Graphon.sbm(t, (1, 1, 1))


def _scenario_recipe(name: str, n: int, seed: int) -> GenRecipe:
    if name == "percolation_redundancy":
        return GenRecipe("percolation", n, seed, graphons=(_sbm3([0.7, 0.6, 0.5]),),
                         keep_probs=(0.95, 0.9), nested=True, name=name)
    if name == "mixed_blocks":
        gs = (_sbm3([0.7, 0.6, 0.5]), _sbm3([0.8, 0.5, 0.5]), _sbm3([0.6, 0.7, 0.5]))
        return GenRecipe("independent", n, seed, graphons=gs, shared=0.65, name=name)
    if name == "xor_synergy":
        return GenRecipe("xor", n, seed, graphons=(_sbm3([0.7, 0.6, 0.5]), _sbm3([0.4, 0.4, 0.7])),
                         shared=0.85, name=name)
    if name == "blocks_redundancy":
        gs = (_sbm3([0.7, 0.6, 0.5]), _sbm3([0.6, 0.7, 0.5]), _sbm3([0.7, 0.5, 0.6]))
        return GenRecipe("independent", n, seed, graphons=gs, shared=0.78, name=name)
    if name == "appendix_case1":
        # nested percolation realizes the 0.95xy and 0.9xy marginals as sub-layers
        return GenRecipe("percolation", n, seed, graphons=(_XY,), keep_probs=(0.95, 0.9),
                         nested=True, name=name)
    if name == "appendix_case2":
        gs = (_XY, Graphon.analytic("expdecay", a=0.3, b=0.5), Graphon.analytic("affine", a=0.3))
        return GenRecipe("independent", n, seed, graphons=gs, shared=0.97, name=name)
    raise UnknownScenario(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")


SCENARIOS = ("percolation_redundancy", "mixed_blocks", "xor_synergy", "blocks_redundancy",
             "appendix_case1", "appendix_case2")
FAMILIES = tuple(_FAMILIES)
RECIPES = FAMILIES + SCENARIOS


def named_recipe(name: str, n: int, seed: int) -> GenRecipe:
    if name in _FAMILIES:
        return _FAMILIES[name][0](n, seed)
    return _scenario_recipe(name, n, seed)


# ---------------------------------------------------------------- measures

def measures_from_entropies(H: dict, d: int) -> dict[str, float]:
    """Every scalar measure the harness reports, from subset entropies."""
    full = tuple(range(d))
    hs = [H[(l,)] for l in range(d)]
    out = {"joint_entropy": H[full]}
    if d == 2:
        mi = hs[0] + hs[1] - H[full]
        out.update(mi=mi, mi_normalized=mi / min(hs) if min(hs) > 0 else float("nan"))
        return out
    tc = sum(hs) - H[full]
    dtc = H[full] - sum(H[full] - H[tuple(l for l in full if l != i)] for i in full)
    ii = sum((-1) ** (len(s) + 1) * v for s, v in H.items())
    out.update(tc=tc, tc_normalized=tc / (sum(hs) - max(hs)), dtc=dtc, ii=ii, oinfo=tc - dtc)
    if d == 3:
        cmi = [H[tuple(sorted((a, c)))] + H[tuple(sorted((b, c)))] - H[(c,)] - H[full]
               for a, b, c in ((1, 2, 0), (0, 2, 1), (0, 1, 2))]
        mis = [H[(a,)] + H[(b,)] - H[(a, b)] for a, b in ((0, 1), (0, 2), (1, 2))]
        out.update(ii_lo=-min(cmi), ii_hi=min(mis))
    return out


def _subsets(d):
    return nonempty_subsets(range(d))


def system_measures(sys: GraphonSystem, q: QuadratureSpec = QuadratureSpec()) -> dict[str, float]:
    return measures_from_entropies(entropy_profile(sys, _subsets(sys.d), q), sys.d)


@lru_cache(maxsize=64)
def _truth_cached(name: str, m: int) -> tuple:
    recipe = named_recipe(name, 16, 0)
    vals = system_measures(recipe.true_system(), QuadratureSpec(m))
    return tuple(sorted(vals.items()))


def truth_values(name: str, m: int = TRUTH_M, cache_dir: str | os.PathLike | None = None) -> dict:
    """Population measures of a named recipe by m-by-m quadrature (cached)."""
    recipe = named_recipe(name, 16, 0)
    tkey = digest({"recipe": recipe.to_dict() | {"n": 0, "seed": 0}, "m": m})
    if cache_dir is not None:
        path = Path(cache_dir) / f"truth_{name}_{tkey}.json"
        if path.exists():
            return json.loads(path.read_text())["values"]
    vals = dict(_truth_cached(name, m))
    if cache_dir is not None:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"key": tkey, "m": m, "values": vals}, indent=1, sort_keys=True))
    return vals


# ---------------------------------------------------------------- RMSE

@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    ns: tuple[int, ...] = DESK_NS
    trials: int = 50
    measures: tuple[str, ...] = ()
    seed: int = 0
    max_sweeps: int = 1
    truth_m: int = TRUTH_M
    threads: int = 1
    out_dir: str | None = None
    full_scale: bool = False

    def __post_init__(self):
        if self.name not in _FAMILIES:
            raise NoTruthAvailable(f"no RMSE family {self.name!r}; choose from {', '.join(FAMILIES)}")
        if self.trials < 1:
            raise ValidationError("trials must be at least 1")
        if any(n < 16 for n in self.ns):
            raise ValidationError("n values must be at least 16")
        if not self.measures:
            object.__setattr__(self, "measures", _FAMILIES[self.name][1])
        if self.full_scale:
            object.__setattr__(self, "trials", 300)

    def digest(self) -> str:
        d = asdict(self)
        d.pop("threads")
        d.pop("out_dir")
        return digest(d)


@dataclass(frozen=True, eq=False)
class RmseCurve:
    measure: str
    ns: tuple[int, ...]
    rmse: np.ndarray
    stderr: np.ndarray
    estimates: np.ndarray  # (len(ns), trials)
    truth: float
    provenance: dict

    def slope(self) -> float:
        """Least-squares slope of log RMSE against log n."""
        return float(np.polyfit(np.log(self.ns), np.log(self.rmse), 1)[0])

    def to_csv(self) -> str:
        lines = ["n,rmse,stderr"]
        lines += [f"{n},{r:.12g},{s:.12g}" for n, r, s in zip(self.ns, self.rmse, self.stderr)]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"measure": self.measure, "ns": list(self.ns), "rmse": self.rmse.tolist(),
                "stderr": self.stderr.tolist(), "truth": self.truth, "slope": self.slope(),
                "provenance": self.provenance}


def trial_seed(root: int, n: int, trial: int) -> int:
    return int(child_rng(root, "trial", n, trial).integers(0, 2**63 - 1))


def _one_trial(name: str, n: int, seed: int, max_sweeps: int) -> dict[str, float]:
    g, _ = named_recipe(name, n, seed).sample()
    fit = fit_community(g, FitConfig(max_sweeps=max_sweeps, seed=seed))
    return system_measures(fit.system)


def run_rmse(cfg: ExperimentConfig) -> dict[str, RmseCurve]:
    """One curve per requested measure; the fits are shared across measures."""
    truth = truth_values(cfg.name, cfg.truth_m)
    jobs = [(n, t) for n in cfg.ns for t in range(cfg.trials)]
    run = lambda job: _one_trial(cfg.name, job[0], trial_seed(cfg.seed, *job), cfg.max_sweeps)
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    curves = {}
    for meas in cfg.measures:
        est = np.array([r[meas] for r in results]).reshape(len(cfg.ns), cfg.trials)
        sq = (est - truth[meas]) ** 2
        rmse = np.sqrt(sq.mean(axis=1))
        se_mse = sq.std(axis=1, ddof=1) / math.sqrt(cfg.trials) if cfg.trials > 1 else np.zeros(len(cfg.ns))
        stderr = np.where(rmse > 0, se_mse / (2 * np.maximum(rmse, 1e-300)), 0.0)
        prov = {"truth_quadrature_m": cfg.truth_m, "config": cfg.digest(), "seed": cfg.seed,
                "version": __version__}
        curves[meas] = RmseCurve(meas, tuple(cfg.ns), rmse, stderr, est, truth[meas], prov)
    if cfg.out_dir:
        write_curves(cfg, curves, cfg.out_dir)
    return curves


def svg_loglog(curve: RmseCurve, title: str = "") -> str:
    """Minimal log-log scatter with the least-squares slope annotated."""
    W, H, pad = 480, 360, 60
    lx, ly = np.log10(curve.ns), np.log10(np.maximum(curve.rmse, 1e-300))
    x0, x1 = lx.min() - 0.1, lx.max() + 0.1
    y0, y1 = ly.min() - 0.1, ly.max() + 0.1
    px = lambda v: pad + (v - x0) / (x1 - x0) * (W - 2 * pad)
    py = lambda v: H - pad - (v - y0) / (y1 - y0) * (H - 2 * pad)
    b, a = np.polyfit(lx, ly, 1)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">',
             f'<rect width="{W}" height="{H}" fill="white"/>',
             f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>']
    for n, v in zip(curve.ns, lx):
        parts.append(f'<text x="{px(v):.1f}" y="{H - pad + 16}" text-anchor="middle">{n}</text>')
    for e in range(math.floor(y0), math.ceil(y1) + 1):
        if y0 <= e <= y1:
            parts.append(f'<text x="{pad - 6}" y="{py(e) + 4:.1f}" text-anchor="end">1e{e}</text>')
    parts.append(f'<line x1="{px(x0):.1f}" y1="{py(a + b * x0):.1f}" x2="{px(x1):.1f}" '
                 f'y2="{py(a + b * x1):.1f}" stroke="gray" stroke-dasharray="4 3"/>')
    for u, v in zip(lx, ly):
        parts.append(f'<circle cx="{px(u):.1f}" cy="{py(v):.1f}" r="4" fill="steelblue"/>')
    parts.append(f'<text x="{W / 2}" y="{pad / 2}" text-anchor="middle">{title or curve.measure} '
                 f'RMSE vs n (slope {b:.3f})</text>')
    parts.append(f'<text x="{W / 2}" y="{H - 15}" text-anchor="middle">n</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_curves(cfg: ExperimentConfig, curves: dict[str, RmseCurve], out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for meas, c in curves.items():
        p = out / f"{cfg.name}_{meas}.csv"
        p.write_text(c.to_csv())
        s = out / f"{cfg.name}_{meas}.svg"
        s.write_text(svg_loglog(c, f"{cfg.name} {meas}"))
        paths += [p, s]
    rep = {"config": asdict(cfg) | {"out_dir": None, "threads": None}, "config_hash": cfg.digest(),
           "seed": cfg.seed, "version": __version__,
           "curves": {m: c.to_dict() for m, c in curves.items()}}
    j = out / f"{cfg.name}_rmse.json"
    j.write_text(json.dumps(rep, indent=1, sort_keys=True) + "\n")
    return paths + [j]


# ---------------------------------------------------------------- scenarios

def run_scenario(name: str, seed: int = 0, n: int = 2048, fit: FitConfig | None = None) -> dict:
    """Sample a named scenario, fit it, and report the estimated measures."""
    recipe = _scenario_recipe(name, n, seed) if name in SCENARIOS else None
    if recipe is None:
        raise UnknownScenario(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    fit = fit or FitConfig(max_sweeps=2, seed=seed)
    g, _ = recipe.sample()
    res = fit_community(g, fit)
    sys = res.system
    H = entropy_profile(sys, _subsets(sys.d))
    est = measures_from_entropies(H, sys.d)
    raw = np.diag([H[(l,)] for l in range(sys.d)])
    for i in range(sys.d):
        for j in range(i + 1, sys.d):
            raw[i, j] = raw[j, i] = max(H[(i,)] + H[(j,)] - H[(i, j)], 0.0)
    mi = from_raw(raw)
    report = {
        "scenario": name, "seed": seed, "n": n, "version": __version__,
        "recipe": recipe.to_dict(), "recipe_hash": recipe.digest(),
        "fit": {"h": res.assignment.h, "k": res.assignment.k, "log_likelihood": res.log_likelihood,
                "max_sweeps": fit.max_sweeps, "sweeps": res.sweeps},
        "note": "block parameters and n are artifact defaults",
        "estimate": est,
        "pairwise_mi_normalized": {f"{i},{j}": float(mi.normalized[i, j])
                                   for i in range(sys.d) for j in range(i + 1, sys.d)},
    }
    if name.startswith("appendix"):
        vn, vn_n = spectrum_entropy(mi.eigenvalues)
        report["mi_matrix"] = mi.to_dict()
        report["von_neumann"] = {"value": vn, "normalized": vn_n}
    fit_cfg = {k: v for k, v in asdict(fit).items() if k != "threads"}
    report["config_hash"] = digest({"recipe": recipe.to_dict(), "fit": fit_cfg})
    return report


def scenario_truth(name: str, m: int = 1024) -> dict:
    """Population values of a scenario (step systems are exact; m for analytic ones)."""
    recipe = _scenario_recipe(name, 16, 0)
    sys = recipe.true_system()
    H = entropy_profile(sys, _subsets(sys.d), QuadratureSpec(m))
    out = measures_from_entropies(H, sys.d)
    if name.startswith("appendix"):
        raw = np.diag([H[(l,)] for l in range(sys.d)])
        for i in range(sys.d):
            for j in range(i + 1, sys.d):
                raw[i, j] = raw[j, i] = H[(i,)] + H[(j,)] - H[(i, j)]
        mi = from_raw(raw)
        out["mi_raw"] = mi.raw.tolist()
        out["von_neumann_normalized"] = spectrum_entropy(mi.eigenvalues)[1]
    return out
