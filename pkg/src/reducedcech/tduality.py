"""T-duality for principal torus bundles with flux, on the reduced complexes.

A flux is a D_F-closed degree-3 reduced cochain.  Pushing it forward gives the
dual Euler vector, a closed degree-2 bar cochain (b, c).  The class of the
matrix part c in degree-1 Cech cohomology is the Mackey obstruction.  When it
vanishes the representative can be gauged to (b', 0), and the class of b' is
the Euler class of a classical dual bundle.  That class is only determined up
to the image of the degree-0 matrix cocycles under u1 F, which is reported as
the ambiguity subgroup.
"""

from __future__ import annotations

import weakref

from . import intlinalg as la
from . import reduced as red
from .cochain import Cochain, cup1_matrix, zero_cochain


class TDualityError(ValueError):
    pass


CLASSICAL = "Classical"
NONCOMMUTATIVE = "Noncommutative"


class TDualityInput:
    """Base complex, Euler cocycle F and a flux class representative."""

    def __init__(self, twist: red.EulerTwist, flux: red.ReducedCochain):
        if flux.degree != 3:
            raise TDualityError("the flux is a degree-3 reduced cochain")
        if flux.normalized:
            self.flux = flux
        else:
            self.flux = flux.restrict_increasing()
        if not twist.D(self.flux).is_zero():
            raise TDualityError("flux representative is not D_F-closed")
        self.twist = twist
        self.base = twist.complex

    @classmethod
    def from_parts(cls, F: Cochain, phi30: Cochain, phi21: Cochain, phi12: Cochain):
        return cls(red.twist_for(F), red.ReducedCochain(3, phi30, phi21, phi12))


class _Groups:
    """The cohomology groups the pipeline reads coordinates in (normalized model)."""

    def __init__(self, twist: red.EulerTwist):
        self.twist = twist
        self.bar = red.BarModel(twist, True)
        self.matrix = red.CechModel(twist, "upper_matrix", True)
        self.vector = red.CechModel(twist, "vector", True)

    def dual_group(self):
        return self.bar.group(2)

    def mackey_group(self):
        return self.matrix.group(1)

    def classical_group(self):
        return self.vector.group(2)


_cache = weakref.WeakKeyDictionary()


def _groups(twist):
    hit = _cache.get(twist)
    if hit is None:
        hit = _Groups(twist)
        _cache[twist] = hit
    return hit


def _bar_normalized(d: red.ReducedBarCochain):
    return d if d.normalized else d.restrict_increasing()


def dual_euler(inp: TDualityInput) -> red.CohomologyClass:
    """Class of pi_* flux = (phi21, phi12) in the degree-2 bar cohomology."""
    d = inp.twist.pushforward(inp.flux)
    return _groups(inp.twist).dual_group().class_of(d)


def mackey_class(d: red.ReducedBarCochain, twist: red.EulerTwist) -> red.CohomologyClass:
    """Class of the matrix part of a closed degree-2 bar cochain in H^1(M, upper matrices)."""
    d = _bar_normalized(d)
    if d.degree != 2:
        raise TDualityError("the dual Euler vector has bar degree 2")
    if not twist.Dbar(d).is_zero():
        raise TDualityError("bar cochain is not closed")
    return _groups(twist).mackey_group().class_of(d.phi2)


def ambiguity_subgroup(twist: red.EulerTwist):
    """Coordinates in H^2(M, Z^n) of [psi u1 F] for the generators psi of H^0(M, upper matrices)."""
    g = _groups(twist)
    target = g.classical_group()
    F = twist.F(True)
    out = []
    for psi in g.matrix.group(0).generators():
        out.append(target.coordinates(cup1_matrix(psi, F)))
    return out


def _modulo(group, coords, relations):
    """Coordinates of a class in the quotient of a group by the span of ``relations``."""
    m = len(group.presentation.moduli)
    rels = [list(r) for r in relations]
    for i, mod in enumerate(group.presentation.moduli):
        if mod:
            e = [0] * m
            e[i] = mod
            rels.append(e)
    Q = la.quotient_presentation(rels, m)
    return Q, Q.coordinates(list(coords))


class DualResult:
    def __init__(self, dual, mackey, verdict, classical=None, ambiguity=(), quotient=None,
                 reduced=None, gauge=None):
        self.dual_euler = dual
        self.mackey = mackey
        self.verdict = verdict
        self.classical = classical
        self.ambiguity = [list(a) for a in ambiguity]
        self.quotient = quotient
        self.reduced = reduced
        self.gauge = gauge

    @property
    def is_classical(self):
        return self.verdict == CLASSICAL

    def to_json(self):
        out = {
            "dual_euler": {"group": self.dual_euler.group.describe(),
                           "coordinates": list(self.dual_euler.coordinates)},
            "mackey": {"group": self.mackey.group.describe(), "coordinates": list(self.mackey.coordinates)},
            "verdict": self.verdict,
        }
        if self.is_classical:
            out["classical"] = {"group": self.classical.group.describe(),
                                "coordinates": list(self.classical.coordinates),
                                "modulo_ambiguity": {"group": self.quotient.describe(),
                                                     "coordinates": list(self.reduced)}}
        out["ambiguity"] = self.ambiguity
        return out

    def __repr__(self):
        if self.is_classical:
            return f"DualResult(Classical{tuple(self.classical.coordinates)})"
        return f"DualResult(Noncommutative, mackey={self.mackey.coordinates})"


def gauge_fix(d: red.ReducedBarCochain, twist: red.EulerTwist):
    """Return (psi02, (b', 0)) with d - Dbar(0, psi02) = (b', 0), or None if phi12 is not exact."""
    d = _bar_normalized(d)
    g = _groups(twist)
    mm = g.matrix
    rhs = mm.vector(d.phi2, 1)
    if not any(rhs):
        psi = zero_cochain(twist.complex, 0, d.phi2.coeff, True)
    else:
        sol = la.solve_diophantine(mm.matrix(0), rhs, mm.dim(0))
        if sol is None:
            return None
        psi = mm.element(sol, 0)
    shift = red.ReducedBarCochain(1, zero_cochain(twist.complex, 1, d.phi1.coeff, True), psi)
    fixed = d - twist.Dbar(shift)
    if not fixed.phi2.is_zero():
        raise TDualityError("gauge fixing left a nonzero matrix part")
    return psi, fixed


def classify(d: red.ReducedBarCochain, twist: red.EulerTwist) -> DualResult:
    d = _bar_normalized(d)
    g = _groups(twist)
    dual = g.dual_group().class_of(d)
    mackey = mackey_class(d, twist)
    amb = ambiguity_subgroup(twist)
    if not mackey.is_zero():
        return DualResult(dual, mackey, NONCOMMUTATIVE, ambiguity=amb)
    fixed = gauge_fix(d, twist)
    if fixed is None:
        raise TDualityError("matrix part has trivial class but no integral primitive")
    psi, gauged = fixed
    target = g.classical_group()
    cls = target.class_of(gauged.phi1)
    Q, reduced = _modulo(target, cls.coordinates, amb)
    return DualResult(dual, mackey, CLASSICAL, cls, amb, Q, reduced, psi)


def tdualize(inp: TDualityInput) -> DualResult:
    d = inp.twist.pushforward(inp.flux)
    return classify(d, inp.twist)


def gauge_shift(d: red.ReducedBarCochain, twist: red.EulerTwist, rng, nnz=3, bound=3):
    """d + Dbar(random degree-1 bar cochain), in the normalized model."""
    d = _bar_normalized(d)
    y = twist.random_bar(1, rng, normalized=True, nnz=nnz, bound=bound)
    return d + twist.Dbar(y)


def flux_from_class(twist: red.EulerTwist, part: str, coords):
    """A flux with one nonzero part built from H^k generators.

    ``part`` is "scalar" (H^3(M)), "vector" (H^2(M, Z^n)) or "matrix"
    (H^1(M, upper matrices)); the other parts are zero.
    """
    g = _groups(twist)
    x = twist.zero(3, normalized=True)
    if part == "scalar":
        grp = red.CechModel(twist, "scalar", True).group(3)
        return red.ReducedCochain(3, grp.element(coords), x.phi1, x.phi2)
    if part == "vector":
        return red.ReducedCochain(3, x.phi0, g.classical_group().element(coords), x.phi2)
    if part == "matrix":
        return red.ReducedCochain(3, x.phi0, x.phi1, g.mackey_group().element(coords))
    raise TDualityError(f"unknown flux part {part!r}")
