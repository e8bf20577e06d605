import json
import random

import pytest

from conftest import generator_euler, twist
from reducedcech import reduced as red
from reducedcech import tduality as td
from reducedcech.cochain import Cochain, CoefficientModule
from reducedcech.complex import fixture


def _trivial_torus_bundle(name, n):
    return red.EulerTwist(generator_euler(fixture(name), n, multiple=0))


def test_zero_flux_is_classical_zero():
    tw = _trivial_torus_bundle("torus7", 2)
    res = td.tdualize(td.TDualityInput(tw, tw.zero(3, normalized=True)))
    assert res.is_classical
    assert res.classical.coordinates == [0, 0]
    assert res.mackey.is_zero()


def test_scalar_flux_does_not_change_the_dual():
    tw = _trivial_torus_bundle("sphere3", 1)
    res = td.tdualize(td.TDualityInput(tw, td.flux_from_class(tw, "scalar", [5])))
    assert res.is_classical and res.classical.is_zero()
    assert res.dual_euler.is_zero()


def test_vector_flux_is_additive():
    tw = _trivial_torus_bundle("torus7", 1)
    a = td.flux_from_class(tw, "vector", [2])
    b = td.flux_from_class(tw, "vector", [3])
    ra = td.tdualize(td.TDualityInput(tw, a))
    rb = td.tdualize(td.TDualityInput(tw, b))
    rab = td.tdualize(td.TDualityInput(tw, a + b))
    assert rab.classical.coordinates == [x + y for x, y in zip(ra.classical.coordinates, rb.classical.coordinates)]
    assert rab.dual_euler.coordinates == [x + y for x, y in zip(ra.dual_euler.coordinates, rb.dual_euler.coordinates)]


def test_rank_one_has_no_mackey_obstruction():
    rng = random.Random(51)
    tw = twist("torus7", 1, rng)
    assert td._groups(tw).mackey_group().describe() == "0"
    for _ in range(3):
        d = tw.Dbar(tw.random_bar(1, rng, normalized=True))
        assert td.mackey_class(d, tw).is_zero()


def test_matrix_flux_is_noncommutative():
    tw = _trivial_torus_bundle("circle3", 2)
    res = td.tdualize(td.TDualityInput(tw, td.flux_from_class(tw, "matrix", [-1])))
    assert res.verdict == td.NONCOMMUTATIVE
    assert res.mackey.coordinates == [-1]
    assert res.classical is None


def test_ambiguity_on_the_sphere():
    # F = (generator, 0): the constant matrix psi_01 = 1 contributes psi u1 F in the second slot
    tw = twist("sphere2", 2, kind="generator")
    assert td.ambiguity_subgroup(tw) == [[0, 1]]
    flux = td.flux_from_class(tw, "vector", [0, 4])
    res = td.tdualize(td.TDualityInput(tw, flux))
    assert res.is_classical
    assert res.quotient.describe() == "Z"
    assert res.reduced == [0]
    res = td.tdualize(td.TDualityInput(tw, td.flux_from_class(tw, "vector", [3, 4])))
    assert [abs(c) for c in res.reduced] == [3]


def test_gauge_fix_removes_the_matrix_part():
    rng = random.Random(52)
    tw = _trivial_torus_bundle("torus7", 2)
    d = tw.pushforward(td.flux_from_class(tw, "vector", [1, 2]))
    shifted = td.gauge_shift(d, tw, rng)
    psi, fixed = td.gauge_fix(shifted, tw)
    assert fixed.phi2.is_zero()
    assert tw.Dbar(fixed).is_zero()
    assert td._groups(tw).classical_group().coordinates(fixed.phi1) == [1, 2]


def test_gauge_fix_fails_on_nontrivial_mackey_class():
    tw = _trivial_torus_bundle("circle3", 2)
    d = tw.pushforward(td.flux_from_class(tw, "matrix", [1]))
    assert td.gauge_fix(d, tw) is None


def test_non_closed_flux_is_rejected():
    tw = _trivial_torus_bundle("sphere3", 1)
    K = tw.complex
    z = tw.zero(3, normalized=True)
    bad = Cochain(K, 2, CoefficientModule("Z", "vector", 1), {(0, 1, 2): (1,)}, normalized=True)
    with pytest.raises(td.TDualityError):
        td.TDualityInput(tw, red.ReducedCochain(3, z.phi0, bad, z.phi2))
    with pytest.raises(td.TDualityError):
        td.TDualityInput(tw, tw.zero(2, normalized=True))


def test_result_json_round_trips():
    tw = _trivial_torus_bundle("torus7", 1)
    res = td.tdualize(td.TDualityInput(tw, td.flux_from_class(tw, "vector", [2])))
    data = json.loads(json.dumps(res.to_json()))
    assert data["verdict"] == "Classical"
    assert data["classical"]["coordinates"] == [2]
    assert "Classical" in repr(res)


def test_unknown_flux_part():
    tw = _trivial_torus_bundle("torus7", 1)
    with pytest.raises(td.TDualityError):
        td.flux_from_class(tw, "tensor", [1])
