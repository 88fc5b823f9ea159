"""Pairwise mutual-information matrix, its density form, and von Neumann entropy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import Graphon, GraphonSystem, midpoint_grid
from .errors import InconsistentMarginals, NoConvergence, NotPSD, NotSymmetric, ValidationError
from .infom import QuadratureSpec, entropy_profile, graphon_entropy

PSD_TOL = -1e-8


@dataclass(frozen=True, eq=False)
class MiMatrix:
    d: int
    raw: np.ndarray
    normalized: np.ndarray
    density: np.ndarray
    eigenvalues: np.ndarray | None = None

    def to_dict(self) -> dict:
        out = {"d": self.d, "raw": self.raw.tolist(), "normalized": self.normalized.tolist(),
               "density": self.density.tolist()}
        if self.eigenvalues is not None:
            out["eigenvalues"] = self.eigenvalues.tolist()
        return out


def from_raw(raw) -> MiMatrix:
    """Normalize a raw MI matrix whose diagonal holds the marginal entropies."""
    raw = np.array(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
        raise ValidationError("MI matrix must be square")
    if not np.allclose(raw, raw.T, rtol=0, atol=1e-12):
        raise NotSymmetric("MI matrix must be symmetric")
    raw = 0.5 * (raw + raw.T)
    d = raw.shape[0]
    h = np.diag(raw)
    den = np.minimum.outer(h, h)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = np.where(den > 0, raw / den, 0.0)
    np.fill_diagonal(norm, 1.0)
    norm = np.clip(norm, 0.0, None)
    dens = norm / d
    ev = sym_eigenvalues(dens)
    for a in (raw, norm, dens, ev):
        a.setflags(write=False)
    return MiMatrix(d, raw, norm, dens, ev)


def _check_marginals(pairs: Mapping[tuple[int, int], GraphonSystem], marginals: Sequence[Graphon]):
    g = midpoint_grid(9)
    X, Y = np.meshgrid(g, g, indexing="ij")
    ref = [w(X, Y) for w in marginals]
    for (i, j), sys in pairs.items():
        for pos, l in enumerate((i, j)):
            if np.max(np.abs(sys.moments[(pos,)](X, Y) - ref[l])) > 1e-9:
                raise InconsistentMarginals(f"layer {l} differs between its pair systems")


def mi_matrix(pairs: Mapping[tuple[int, int], GraphonSystem], marginals: Sequence[Graphon],
              q: QuadratureSpec = QuadratureSpec()) -> MiMatrix:
    """Assemble the MI matrix from one bivariate system per layer pair i < j."""
    d = len(marginals)
    want = {(i, j) for i in range(d) for j in range(i + 1, d)}
    if set(pairs) != want:
        raise ValidationError(f"need a bivariate system for every pair of {d} layers")
    _check_marginals(pairs, marginals)
    raw = np.zeros((d, d))
    for i, w in enumerate(marginals):
        raw[i, i] = graphon_entropy(w, q)
    for (i, j), sys in pairs.items():
        H = entropy_profile(sys, [(0, 1)], q)[(0, 1)]
        raw[i, j] = raw[j, i] = max(raw[i, i] + raw[j, j] - H, 0.0)
    return from_raw(raw)


def system_mi_matrix(sys: GraphonSystem, q: QuadratureSpec = QuadratureSpec()) -> MiMatrix:
    """MI matrix of all layer pairs of one multivariate system."""
    subsets = [(l,) for l in range(sys.d)]
    subsets += [(i, j) for i in range(sys.d) for j in range(i + 1, sys.d)]
    H = entropy_profile(sys, subsets, q)
    raw = np.diag([H[(l,)] for l in range(sys.d)])
    for i in range(sys.d):
        for j in range(i + 1, sys.d):
            raw[i, j] = raw[j, i] = max(H[(i,)] + H[(j,)] - H[(i, j)], 0.0)
    return from_raw(raw)


def sym_eigenvalues(M, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Descending spectrum of a symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError("need a square matrix")
    if not np.allclose(A, A.T, rtol=0, atol=1e-10):
        raise NotSymmetric("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    mask = ~np.eye(n, dtype=bool)
    off = lambda B: math.sqrt(float((B[mask] ** 2).sum()))
    for _ in range(max_sweeps):
        if off(A) < tol:
            return np.sort(np.diag(A))[::-1].copy()
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = A[p, r]
                if abs(apr) < 1e-300:
                    continue
                theta = (A[r, r] - A[p, p]) / (2.0 * apr)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp, rr = A[p, :].copy(), A[r, :].copy()
                A[p, :] = c * rp - s * rr
                A[r, :] = s * rp + c * rr
                cp, cr = A[:, p].copy(), A[:, r].copy()
                A[:, p] = c * cp - s * cr
                A[:, r] = s * cp + c * cr
                A[p, r] = A[r, p] = 0.0
    if off(A) < tol:
        return np.sort(np.diag(A))[::-1].copy()
    raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")


def spectrum_entropy(eigenvalues) -> tuple[float, float]:
    """(-sum l log l, normalized by log d) after the PSD check."""
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam < PSD_TOL):
        raise NotPSD(f"density matrix has eigenvalue {lam.min():.3g} < {PSD_TOL}")
    lam = np.clip(lam, 0.0, None)
    lam = lam / lam.sum()
    nz = lam[lam > 0]
    value = float(-(nz * np.log(nz)).sum())
    d = lam.size
    return value, (value / math.log(d) if d > 1 else float("nan"))


def von_neumann_entropy(mi: MiMatrix) -> tuple[float, float]:
    lam = mi.eigenvalues if mi.eigenvalues is not None else sym_eigenvalues(mi.density)
    return spectrum_entropy(lam)
