"""Compiled kernels for the pairwise-swap profile-likelihood search.

Arrays carry a leading channel axis R.  In joint mode R=1 and codes are
the 2^d joint-edge patterns; in composite mode there is one binary
channel per layer and the objective is the sum of per-layer likelihoods.
"""

import numba as nb
import numpy as np


@nb.njit(cache=True)
def xlogx_table(nmax):
    t = np.zeros(nmax + 1)
    for x in range(1, nmax + 1):
        t[x] = x * np.log(x)
    return t


@nb.njit(cache=True)
def build_counts(P, z, k, C):
    """M[r,i,g,c]: neighbours of i in block g with code c; N[r,a,b,c]: block-pair counts."""
    R, n = P.shape[0], P.shape[1]
    M = np.zeros((R, n, k, C), np.int64)
    N = np.zeros((R, k, k, C), np.int64)
    for r in range(R):
        for i in range(n):
            for l in range(n):
                if l != i:
                    M[r, i, z[l], P[r, i, l]] += 1
        for i in range(n):
            for l in range(i + 1, n):
                a = z[i]
                b = z[l]
                c = P[r, i, l]
                N[r, a, b, c] += 1
                if a != b:
                    N[r, b, a, c] += 1
    return M, N


@nb.njit(cache=True)
def count_loglik(N, sizes, F):
    R, k, C = N.shape[0], N.shape[1], N.shape[3]
    L = 0.0
    for r in range(R):
        for a in range(k):
            for b in range(a, k):
                T = sizes[a] * sizes[b] if a != b else sizes[a] * (sizes[a] - 1) // 2
                for c in range(C):
                    L += F[N[r, a, b, c]]
                L -= F[T]
    return L


@nb.njit(cache=True, nogil=True)
def swap_sweep(P, z, M, N, F, tol):
    """One first-improvement pass over pairs (i, j), i < j, in index order.

    Returns (accepted swaps, summed likelihood gain).  z, M, N are updated
    in place.
    """
    R, n = P.shape[0], P.shape[1]
    k, C = N.shape[1], N.shape[3]
    D = np.zeros((R, k, C), np.int64)
    accepted = 0
    gain = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            a = z[i]
            b = z[j]
            if a == b:
                continue
            # D = M'_j - M'_i, where M'_i omits j and M'_j omits i
            for r in range(R):
                for g in range(k):
                    for c in range(C):
                        D[r, g, c] = M[r, j, g, c] - M[r, i, g, c]
                pij = P[r, i, j]
                D[r, b, pij] += 1
                D[r, a, pij] -= 1
            dl = 0.0
            for r in range(R):
                for g in range(k):
                    if g == a or g == b:
                        continue
                    for c in range(C):
                        d = D[r, g, c]
                        if d != 0:
                            dl += (F[N[r, a, g, c] + d] - F[N[r, a, g, c]]
                                   + F[N[r, b, g, c] - d] - F[N[r, b, g, c]])
                for c in range(C):
                    d = D[r, a, c]
                    if d != 0:
                        dl += F[N[r, a, a, c] + d] - F[N[r, a, a, c]]
                    d = D[r, b, c]
                    if d != 0:
                        dl += F[N[r, b, b, c] - d] - F[N[r, b, b, c]]
                    d = D[r, b, c] - D[r, a, c]
                    if d != 0:
                        dl += F[N[r, a, b, c] + d] - F[N[r, a, b, c]]
            if dl > tol:
                for r in range(R):
                    for g in range(k):
                        if g == a or g == b:
                            continue
                        for c in range(C):
                            d = D[r, g, c]
                            N[r, a, g, c] += d
                            N[r, g, a, c] += d
                            N[r, b, g, c] -= d
                            N[r, g, b, c] -= d
                    for c in range(C):
                        dab = D[r, b, c] - D[r, a, c]
                        N[r, a, a, c] += D[r, a, c]
                        N[r, b, b, c] -= D[r, b, c]
                        N[r, a, b, c] += dab
                        N[r, b, a, c] += dab
                    for l in range(n):
                        if l != i:
                            M[r, l, a, P[r, l, i]] -= 1
                            M[r, l, b, P[r, l, i]] += 1
                        if l != j:
                            M[r, l, b, P[r, l, j]] -= 1
                            M[r, l, a, P[r, l, j]] += 1
                z[i] = b
                z[j] = a
                accepted += 1
                gain += dl
    return accepted, gain
