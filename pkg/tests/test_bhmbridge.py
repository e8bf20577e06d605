import random

import pytest

from conftest import twist
from reducedcech import bhmbridge as bb
from reducedcech import reduced as red
from reducedcech.cochain import (
    Cochain, CoefficientModule, cech_d, cup, cup1_vector, is_alternating, random_cochain,
)
from reducedcech.complex import build_complex, fixture


def _simplex_twist(seed, n=2):
    # contractible, so F is a coboundary, but the cochain-level identities are nontrivial here
    rng = random.Random(seed)
    K = build_complex([(0, 1, 2, 3, 4)])
    F = cech_d(random_cochain(K, 1, CoefficientModule("Z", "vector", n), rng, nnz=4, normalized=True))
    return red.EulerTwist(F), rng


def test_forms_on_a_facet():
    K = build_complex([(0, 1, 2)])
    rho = bb.rho_form(K, 0)
    assert bb.d(rho) == bb.drho_form(K, 0)
    total = bb.PLForm.zero(K)
    for v in range(3):
        total = total + bb.drho_form(K, v)
    assert total.is_zero()
    w = bb.wedge(bb.drho_form(K, 0), bb.drho_form(K, 1))
    assert bb.wedge(bb.drho_form(K, 1), bb.drho_form(K, 0)) == w.scale(-1)


@pytest.mark.parametrize("complex_name", ["simplex4", "sphere2"])
def test_homotopy_identities(complex_name):
    rng = random.Random(31)
    K = build_complex([(0, 1, 2, 3, 4)]) if complex_name == "simplex4" else fixture(complex_name)
    coeff = CoefficientModule("Z", "vector", 2)
    for k in range(4):
        phi = random_cochain(K, k, coeff, rng, nnz=4)
        P = bb.global_homotopy(phi)
        dphi = cech_d(phi)
        assert all(a.d() == b for a, b in zip(P, bb.global_homotopy(dphi)))
        for base in ("min", "max"):
            coll = bb.collate(phi, base)
            Q = bb.base_homotopy(dphi, base)
            assert all(a + b == c for a, b, c in zip(coll, Q, P))
        closed = cech_d(random_cochain(K, k, coeff, rng, nnz=4))
        assert bb.collate(closed, "min") == bb.collate(closed, "max")


def test_collation_turns_cup1_into_wedge():
    tw, rng = _simplex_twist(32)
    K = tw.complex
    F = tw.F(False)
    F2 = bb.collate_checked(F)
    v = cech_d(random_cochain(K, 0, CoefficientModule("Z", "vector", 2), rng, nnz=3))
    lhs = bb.collate(cup1_vector(v, F))[0]
    rhs = bb.PLForm.zero(K)
    for a, b in zip(bb.collate(v), F2):
        rhs = rhs + a * b
    assert not lhs.is_zero()
    assert lhs == rhs


def test_collate_checked_rejects_non_closed():
    K = fixture("sphere2")
    phi = random_cochain(K, 1, CoefficientModule("Z"), random.Random(33), nnz=2)
    if bb.collate(phi, "min") != bb.collate(phi, "max"):
        with pytest.raises(bb.BridgeError):
            bb.collate_checked(phi)


def test_window_differential_squares_to_zero():
    tw, rng = _simplex_twist(34, n=3)
    bridge = bb.Bridge(tw)
    for k in range(4):
        x = bridge.reduce_map(tw.random(k, rng))
        assert bb.bhm_differential(bb.bhm_differential(x, bridge.F2), bridge.F2).is_zero()


@pytest.mark.parametrize("k", [2, 3, 4])
def test_based_correction_is_exact_in_high_dimension(k):
    tw, rng = _simplex_twist(35)
    bridge = bb.Bridge(tw, correction="based")
    for _ in range(4):
        y = tw.random(k - 1, rng)
        assert bridge.coboundary_residual(y).is_zero()
        assert bridge.cocycle_residual(tw.D(y)).is_zero()
        assert bridge.omega_residual(tw.Dbar(tw.random_bar(k - 1, rng))).is_zero()


def test_contracted_correction_fails_in_high_dimension():
    # documents why the based correction is the default
    tw, rng = _simplex_twist(35)
    bridge = bb.Bridge(tw, correction="contracted")
    failures = 0
    for k in (3, 4):
        for _ in range(4):
            y = tw.random(k - 1, rng)
            failures += not bridge.coboundary_residual(y).is_zero()
    assert failures > 0


def test_based_correction_on_sphere3():
    rng = random.Random(36)
    tw = twist("sphere3", 2, rng)
    bridge = bb.Bridge(tw)
    for k in (3, 4):
        for _ in range(2):
            assert bridge.coboundary_residual(tw.random(k - 1, rng)).is_zero()


@pytest.mark.parametrize("alternating", [True, False])
def test_commutator_of_euler_components_collates_to_zero(alternating):
    tw, rng = _simplex_twist(37)
    F = tw.F(False)
    if not alternating:
        F = F + cech_d(random_cochain(tw.complex, 1, CoefficientModule("Z", "vector", 2), rng, nnz=5))
    a, b = (Cochain(F.complex, 2, CoefficientModule("Z"), {t: (v[i],) for t, v in F.values.items()},
                    normalized=False, check=False) for i in range(2))
    X = cup(a, b) - cup(b, a)
    assert not X.is_zero()
    assert all(f.is_zero() for f in bb.collate(X, "min"))
    assert all(f.is_zero() for f in bb.collate(X, "max"))


def test_non_alternating_euler_is_rejected_by_based_correction():
    tw, rng = _simplex_twist(38)
    G = tw.F(False) + cech_d(random_cochain(tw.complex, 1, CoefficientModule("Z", "vector", 2), rng, nnz=4))
    assert not is_alternating(G)
    with pytest.raises(bb.BridgeError):
        bb.Bridge(red.EulerTwist(G))


def test_unknown_correction():
    tw, _ = _simplex_twist(39)
    with pytest.raises(bb.BridgeError):
        bb.Bridge(tw, correction="other")


def test_reduce_map_needs_ordered_input():
    tw, rng = _simplex_twist(40)
    with pytest.raises(bb.BridgeError):
        bb.Bridge(tw).reduce_map(tw.random(2, rng, normalized=True))


def test_verify_agreement_report():
    tw = twist("sphere2", 1, kind="generator")
    bridge = bb.Bridge(tw)
    (g,) = red.BarModel(tw).group(0).generators()
    out = bb.verify_agreement(red.ordered_lift(g, tw), bridge)
    assert out == {"degree": 1, "residual_zero": True, "residual": None}
