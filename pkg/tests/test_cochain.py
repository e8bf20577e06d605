import random
from fractions import Fraction

import pytest

from conftest import twist
from reducedcech import reduced as red
from reducedcech.cochain import (
    Cochain, CochainError, CoefficientModule, alternate, alternating_extension, as_ordered,
    cech_d, cochain_from_json, commutator_cochain, cup, cup1_matrix, cup1_vector, cup2,
    is_alternating, random_cochain, restrict_increasing, zero_cochain,
)
from reducedcech.complex import FIXTURE_NAMES, fixture

Z = CoefficientModule("Z")


def test_circle_differential_examples():
    K = fixture("circle3")
    ones = Cochain(K, 0, Z, {(0,): (1,), (1,): (1,), (2,): (1,)}, normalized=True)
    assert cech_d(ones).is_zero()
    delta = Cochain(K, 0, Z, {(0,): (1,)}, normalized=True)
    d = cech_d(delta)
    assert d[(0, 1)] == (-1,)
    assert d[(1, 2)] == (0,)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_d_squared_all_shapes(name):
    rng = random.Random(3)
    K = fixture(name)
    for shape, n in (("scalar", 1), ("vector", 3), ("upper_matrix", 3)):
        for ring in ("Z", "Q"):
            for k in range(4):
                phi = random_cochain(K, k, CoefficientModule(ring, shape, n), rng)
                assert cech_d(cech_d(phi)).is_zero()


def test_cup_of_constants_is_pointwise_product():
    K = fixture("sphere2")
    a = Cochain(K, 0, Z, {(v,): (2,) for v in range(4)}, normalized=True)
    b = Cochain(K, 0, Z, {(v,): (3,) for v in range(4)}, normalized=True)
    assert cup(a, b) == Cochain(K, 0, Z, {(v,): (6,) for v in range(4)}, normalized=True)
    assert cup(a, zero_cochain(K, 2, Z, True)).is_zero()


def test_leibniz_for_closed_generators_on_sphere2():
    K = fixture("sphere2")
    g = red.cech_cohomology(K, 2).generators()[0]
    assert cech_d(cup(g, g)).is_zero()


def test_commutator_cochain_trivial_cases():
    K = fixture("sphere2")
    F = zero_cochain(K, 2, CoefficientModule("Z", "vector", 2), False)
    assert commutator_cochain(F).is_zero()
    g = alternating_extension(red.cech_cohomology(K, 2).generators()[0])
    F = Cochain(K, 2, CoefficientModule("Z", "vector", 2), {t: (v[0], 0) for t, v in g.values.items()})
    assert commutator_cochain(F).is_zero()


def test_commutator_coboundary_with_equal_components_on_sphere2():
    K = fixture("sphere2")
    g = alternating_extension(red.cech_cohomology(K, 2).generators()[0])
    F = Cochain(K, 2, CoefficientModule("Z", "vector", 2), {t: (v[0], v[0]) for t, v in g.values.items()})
    C = commutator_cochain(F)
    F1, F2 = F.component(0), F.component(1)
    assert cech_d(C).component(0) == cup(F1, F2) - cup(F2, F1)


def test_commutator_rejects_non_cocycle():
    K = fixture("sphere3")
    F = Cochain(K, 2, CoefficientModule("Z", "vector", 1), {(0, 1, 2): (1,)}, normalized=True)
    with pytest.raises(CochainError):
        commutator_cochain(F)


def test_cup1_vector_reduces_to_cup_for_rank_one():
    rng = random.Random(4)
    K = fixture("torus7")
    phi = random_cochain(K, 1, CoefficientModule("Z", "vector", 1), rng)
    F = random_cochain(K, 2, CoefficientModule("Z", "vector", 1), rng)
    assert cup1_vector(phi, F) == cup(phi.component(0), F.component(0))


def test_cup1_matrix_closed_formula_on_sphere2():
    K = fixture("sphere2")
    F = Cochain(K, 2, CoefficientModule("Z", "vector", 2), {(0, 1, 2): (5, 7), (1, 2, 3): (2, -1)}, normalized=True)
    phi = Cochain(K, 0, CoefficientModule("Z", "upper_matrix", 2), {(0,): (3,), (1,): (4,)}, normalized=True)
    out = cup1_matrix(phi, F)
    # component 1 (second) = c F_1, component 0 (first) = -c F_2 on tuples starting at the vertex
    assert out[(0, 1, 2)] == (-3 * 7, 3 * 5)
    assert out[(1, 2, 3)] == (-4 * -1, 4 * 2)


def test_rank_one_matrix_products_vanish():
    rng = random.Random(5)
    K = fixture("sphere2")
    phi = random_cochain(K, 0, CoefficientModule("Z", "upper_matrix", 1), rng)
    F = random_cochain(K, 2, CoefficientModule("Z", "vector", 1), rng)
    assert cup1_matrix(phi, F).is_zero()
    B = random_cochain(K, 3, CoefficientModule("Z", "upper_matrix", 1), rng)
    assert cup2(phi, B).is_zero()


def test_alternation_is_an_idempotent_projection_over_q():
    rng = random.Random(6)
    K = fixture("sphere2")
    for k in range(3):
        phi = random_cochain(K, k, CoefficientModule("Q", "vector", 2), rng, nnz=6)
        a = alternate(phi)
        assert is_alternating(a)
        assert alternate(a) == a
    degenerate = Cochain(K, 1, CoefficientModule("Q"), {(0, 0): (Fraction(1),)})
    assert alternate(degenerate).is_zero()


def test_alternation_over_z_requires_divisibility():
    K = fixture("circle3")
    phi = Cochain(K, 1, Z, {(0, 1): (1,)})
    with pytest.raises(CochainError):
        alternate(phi)


def test_restriction_and_extension_round_trip():
    rng = random.Random(7)
    K = fixture("torus7")
    phi = random_cochain(K, 2, CoefficientModule("Z", "vector", 2), rng, normalized=True)
    ext = alternating_extension(phi)
    assert is_alternating(ext)
    assert restrict_increasing(ext) == phi
    assert restrict_increasing(as_ordered(phi)) == phi


@pytest.mark.parametrize("name,top", [("circle3", 3), ("sphere2", 2)])
def test_ordered_and_normalized_models_agree(name, top):
    K = fixture(name)
    tw = red.EulerTwist(zero_cochain(K, 2, CoefficientModule("Z", "vector", 1), True), check=False)
    ordered = red.CechModel(tw, "scalar", normalized=False)
    normal = red.CechModel(tw, "scalar", normalized=True)
    for k in range(top + 1):
        assert ordered.group(k).signature() == normal.group(k).signature()


def test_json_round_trip_and_errors():
    rng = random.Random(8)
    K = fixture("sphere2")
    phi = random_cochain(K, 1, CoefficientModule("Q", "upper_matrix", 3), rng)
    assert cochain_from_json(K, phi.to_json()) == phi
    with pytest.raises(CochainError):
        cochain_from_json(K, {"degree": 1, "coeff": {"shape": "tensor"}, "entries": []})
    with pytest.raises(CochainError):
        Cochain(K, 1, Z, {(0, 1, 2): (1,)})
