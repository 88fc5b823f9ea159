"""Hypothesis strategies for valid graphon systems."""

import numpy as np
from hypothesis import strategies as st

from gli.core import Graphon, GraphonSystem

_ANALYTIC = [
    lambda r: Graphon.analytic("product"),
    lambda r: Graphon.analytic("scaled_product", c=float(r.uniform(0.1, 1.0))),
    lambda r: Graphon.analytic("poly", p=int(r.integers(1, 4)), q=int(r.integers(1, 4))),
    lambda r: Graphon.analytic("affine", a=float(r.uniform(0.05, 0.5))),
    lambda r: Graphon.analytic("expdecay", a=float(r.uniform(0.1, 1.0)), b=float(r.uniform(0.0, 2.0))),
    lambda r: Graphon.constant(float(r.uniform(0.05, 0.95))),
]


def random_marginal(rng) -> Graphon:
    return _ANALYTIC[int(rng.integers(len(_ANALYTIC)))](rng)


@st.composite
def analytic_systems(draw, d=None, shared=None):
    d = draw(st.integers(2, 3)) if d is None else d
    seed = draw(st.integers(0, 2**32 - 1))
    rho = draw(st.floats(0.0, 1.0)) if shared is None else shared
    rng = np.random.default_rng(seed)
    return GraphonSystem.coupled([random_marginal(rng) for _ in range(d)], rho)


@st.composite
def step_systems(draw, d=None, k=None):
    """Arbitrary valid step systems: symmetric Dirichlet cells per block pair."""
    d = draw(st.integers(1, 4)) if d is None else d
    k = draw(st.integers(1, 4)) if k is None else k
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    C = 1 << d
    cells = np.zeros((C, k, k))
    for a in range(k):
        for b in range(a, k):
            p = rng.dirichlet(np.full(C, 0.7))
            cells[:, a, b] = cells[:, b, a] = p
    cuts = np.sort(rng.uniform(0.05, 0.95, k - 1))
    while k > 1 and np.min(np.diff(np.r_[0, cuts, 1])) < 1e-3:
        cuts = np.sort(rng.uniform(0.05, 0.95, k - 1))
    return GraphonSystem.from_block_cells(cells, np.r_[0.0, cuts, 1.0])
