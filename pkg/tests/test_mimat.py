import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gli.core import Graphon, GraphonSystem, marginalize
from gli.errors import InconsistentMarginals, NoConvergence, NotPSD, NotSymmetric, ValidationError
from gli.infom import QuadratureSpec
from gli.mimat import (from_raw, mi_matrix, spectrum_entropy, sym_eigenvalues, system_mi_matrix,
                       von_neumann_entropy)
from strategies import analytic_systems, step_systems

XY = Graphon.analytic("product")
Q = QuadratureSpec(256)
CASE2_DENSITY = np.array([[1 / 3, 0.1206, 0.2104], [0.1206, 1 / 3, 0.1361], [0.2104, 0.1361, 1 / 3]])
CASE2_RAW = np.array([[0.4275, 0.0944, 0.2699], [0.0944, 0.2609, 0.1066], [0.2699, 0.1066, 0.5712]])


def pairs_of(sys):
    return {(i, j): marginalize(sys, [i, j]) for i in range(sys.d) for j in range(i + 1, sys.d)}


def test_independent_pairs():
    ms = [XY, Graphon.constant(0.3), Graphon.analytic("affine", a=0.2)]
    sys = GraphonSystem.independent(ms)
    mi = mi_matrix(pairs_of(sys), ms, Q)
    off = mi.raw - np.diag(np.diag(mi.raw))
    assert np.all(np.abs(off) < 1e-12)
    assert np.allclose(mi.density, np.eye(3) / 3, atol=1e-12)
    assert mi.raw[0, 0] == pytest.approx(0.42753, abs=1e-3)


def test_identical_layers_normalized_ones():
    mi = system_mi_matrix(GraphonSystem.nested([XY, XY]), Q)
    assert np.allclose(mi.normalized, 1.0, atol=1e-12)
    assert von_neumann_entropy(mi)[0] == pytest.approx(0.0, abs=1e-9)


def test_pair_route_matches_system_route():
    sys = GraphonSystem.coupled([XY, Graphon.analytic("poly", p=2, q=1), Graphon.constant(0.4)], 0.5)
    a = mi_matrix(pairs_of(sys), [sys.moments[(l,)] for l in range(3)], Q)
    b = system_mi_matrix(sys, Q)
    assert np.allclose(a.raw, b.raw, atol=1e-12)


def test_inconsistent_marginals():
    good = GraphonSystem.independent([XY, Graphon.constant(0.3)])
    bad = GraphonSystem.independent([Graphon.constant(0.2), Graphon.constant(0.3)])
    ms = [XY, Graphon.constant(0.3), Graphon.constant(0.3)]
    with pytest.raises(InconsistentMarginals):
        mi_matrix({(0, 1): good, (0, 2): bad, (1, 2): good}, ms, Q)
    with pytest.raises(ValidationError):
        mi_matrix({(0, 1): good}, ms, Q)


def test_jacobi_examples():
    assert np.allclose(sym_eigenvalues(np.eye(3) / 3), [1 / 3] * 3, atol=1e-15)
    assert np.allclose(sym_eigenvalues(np.diag([1.0, 2.0])), [2.0, 1.0])
    assert np.allclose(sym_eigenvalues(CASE2_DENSITY), [0.6484, 0.2296, 0.1220], atol=1e-4)
    with pytest.raises(NotSymmetric):
        sym_eigenvalues([[1.0, 0.2], [0.1, 1.0]])
    with pytest.raises(NoConvergence):
        sym_eigenvalues(np.ones((6, 6)) + np.eye(6), max_sweeps=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_jacobi_matches_lapack(d, seed):
    G = np.random.default_rng(seed).normal(size=(d, d))
    M = G + G.T
    ev = sym_eigenvalues(M)
    assert np.allclose(ev, np.linalg.eigvalsh(M)[::-1], atol=1e-10)
    assert ev.sum() == pytest.approx(np.trace(M), abs=1e-10)


def test_case2_spectrum_entropy():
    v, vn = spectrum_entropy([0.6484, 0.2296, 0.1220])
    assert v == pytest.approx(0.8754, abs=1e-4) and vn == pytest.approx(0.7968, abs=1e-4)


def test_case2_raw_to_density():
    mi = from_raw(CASE2_RAW)
    assert np.allclose(mi.density, CASE2_DENSITY, atol=2e-4)


def test_limits_and_psd():
    v, vn = von_neumann_entropy(from_raw(np.diag([0.3, 0.4, 0.5])))
    assert v == pytest.approx(math.log(3)) and vn == pytest.approx(1.0)
    assert spectrum_entropy([1.0, 0.0, 0.0]) == (0.0, 0.0)
    with pytest.raises(NotPSD):
        spectrum_entropy([0.7, 0.4, -0.1])
    # dust is clamped and renormalized
    assert spectrum_entropy([0.5, 0.5, -1e-10])[0] == pytest.approx(math.log(2))
    # a 4-cycle of strong pairwise MI with no diagonal links is not PSD
    raw = np.array([[1, .9, .9, 0], [.9, 1, 0, .9], [.9, 0, 1, .9], [0, .9, .9, 1]])
    with pytest.raises(NotPSD):
        von_neumann_entropy(from_raw(raw))


def test_from_raw_validation():
    with pytest.raises(NotSymmetric):
        from_raw([[0.4, 0.1], [0.2, 0.4]])
    with pytest.raises(ValidationError):
        from_raw([[0.4, 0.1, 0.0]])


@settings(max_examples=20, deadline=None)
@given(analytic_systems(d=3))
def test_density_invariants(sys):
    mi = system_mi_matrix(sys, QuadratureSpec(48))
    assert np.trace(mi.density) == pytest.approx(1.0, abs=1e-12)
    assert np.array_equal(mi.raw, mi.raw.T)
    assert np.all(mi.normalized <= 1 + 1e-9)
    assert mi.eigenvalues.min() >= -1e-8
    assert mi.eigenvalues.sum() == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(step_systems(d=4, k=2), st.permutations(range(4)))
def test_permutation_invariance(sys, perm):
    mi = system_mi_matrix(sys)
    P = np.asarray(perm)
    raw = mi.raw[np.ix_(P, P)]
    try:
        a = von_neumann_entropy(mi)
    except NotPSD:
        with pytest.raises(NotPSD):
            von_neumann_entropy(from_raw(raw))
        return
    b = von_neumann_entropy(from_raw(raw))
    assert a[0] == pytest.approx(b[0], abs=1e-10)
