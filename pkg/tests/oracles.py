"""Independent reference computations used to derive frozen test values.

These deliberately avoid the package: cells are written out by hand and
integrals are brute-force midpoint sums.
"""

import numpy as np


def xy_entropy_series(terms: int = 200000) -> float:
    k = np.arange(1, terms + 1, dtype=float)
    return 0.25 + float(np.sum(1.0 / (k * (k + 2) ** 2)))


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    m = p > 0
    out[m] = p[m] * np.log(p[m])
    return out


def entropy_of_cells(cells) -> float:
    return float(-sum(_xlogx(c).mean() for c in cells))


def grid(m: int):
    g = (np.arange(m) + 0.5) / m
    return np.meshgrid(g, g, indexing="ij")


def nested_cells(ws):
    """Cells of nested layers w0 >= w1 >= ... : edge in layers 0..j only."""
    out = [ws[-1]]
    for j in range(len(ws) - 1, 0, -1):
        out.append(ws[j - 1] - ws[j])
    out.append(1 - ws[0])
    return out


def bernoulli_h(p):
    return -(_xlogx(p) + _xlogx(1 - p))


def chain1_entropies(m: int) -> dict:
    X, Y = grid(m)
    w = [X * Y, 0.8 * X * Y, 0.5 * X * Y]
    H = {(i,): float(bernoulli_h(w[i]).mean()) for i in range(3)}
    H[(0, 1)] = entropy_of_cells(nested_cells([w[0], w[1]]))
    H[(0, 2)] = entropy_of_cells(nested_cells([w[0], w[2]]))
    H[(1, 2)] = entropy_of_cells(nested_cells([w[1], w[2]]))
    H[(0, 1, 2)] = entropy_of_cells(nested_cells(w))
    return H


def scenario1_entropies(m: int) -> dict:
    X, Y = grid(m)
    w1 = X * Y
    w2 = np.minimum(X, Y) * (X + Y) / 2
    return {"h1": float(bernoulli_h(w1).mean()), "h2": float(bernoulli_h(w2).mean()),
            "h12": entropy_of_cells(nested_cells([w1, w2]))}


def naive_loglik(layers, z) -> float:
    """Pair-by-pair profile log-likelihood over joint patterns."""
    n = layers[0].shape[0]
    counts = {}
    for i in range(n):
        for j in range(i + 1, n):
            a, b = sorted((z[i], z[j]))
            pat = tuple(int(L[i, j]) for L in layers)
            counts.setdefault((a, b), {}).setdefault(pat, 0)
            counts[(a, b)][pat] += 1
    ll = 0.0
    for cell in counts.values():
        tot = sum(cell.values())
        for c in cell.values():
            ll += c * np.log(c / tot)
    return ll
