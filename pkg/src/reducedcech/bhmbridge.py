"""Piecewise-polynomial de Rham side: collation of Cech cochains, the
(0,2)-window complex with differential D_{F2}, and the reduction map from
the reduced Cech complex into it.

Forms live on the closed facets of the complex.  The partition of unity is
the barycentric one, so rho_v and d rho_v are the coordinate function and its
differential on every facet containing v and vanish elsewhere.  All sums over
vertex indices therefore run over the vertices of one facet at a time, and
every formula below is evaluated facet by facet.

A sum "on W_base" (base vertex fixed) is evaluated with base = min(facet);
``base="max"`` switches to the largest vertex, which is how base-vertex
independence is checked.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .cochain import Cochain, cech_d, is_alternating, matrix_pairs
from .complex import SimplicialComplex
from .ppfields import PiecewiseForm, SimplexForm
from . import reduced as red


class BridgeError(ValueError):
    pass


class PLForm(PiecewiseForm):
    """A global piecewise-polynomial form (one piece per facet)."""

    __slots__ = ()

    def __init__(self, K: SimplicialComplex, pieces=None, domain=()):
        super().__init__(K, domain, pieces)

    def _make(self, domain, pieces):
        return PLForm(self.complex, pieces, domain)

    @classmethod
    def constant(cls, K, domain, c):
        obj = cls(K)
        for f in obj.pieces:
            obj.pieces[f] = SimplexForm.constant(f, c)
        return obj

    @classmethod
    def zero(cls, K):
        return cls(K)


def d(form: PLForm) -> PLForm:
    return form.d()


def wedge(a: PLForm, b: PLForm) -> PLForm:
    return a * b


def rho_form(K, v) -> PLForm:
    return PLForm(K, {f: SimplexForm.coordinate(f, v) for f in K.facets})


def drho_form(K, v) -> PLForm:
    return PLForm(K, {f: SimplexForm.differential(f, v) for f in K.facets})


# per-facet building blocks ------------------------------------------------------------

@lru_cache(maxsize=None)
def _rho(facet, v):
    return SimplexForm.coordinate(facet, v)


@lru_cache(maxsize=None)
def _dprod(facet, verts):
    """d rho_{v1} ^ ... ^ d rho_{vm} on the facet."""
    if not verts:
        return SimplexForm.constant(facet, 1)
    return _dprod(facet, verts[:-1]) * SimplexForm.differential(facet, verts[-1])


@lru_cache(maxsize=None)
def _rho_dprod(facet, first, verts):
    return _rho(facet, first) * _dprod(facet, verts)


def _base(facet, base):
    if base == "min":
        return facet[0]
    if base == "max":
        return facet[-1]
    if isinstance(base, int) and base in facet:
        return base
    raise BridgeError(f"bad base vertex choice {base!r}")


def _inside(t, fs):
    return all(v in fs for v in t)


def _components(phi: Cochain):
    return phi.coeff.ncomp


def _accumulate(K, ncomp, per_facet):
    """Build ncomp PLForms from a generator of (facet, component, SimplexForm)."""
    pieces = [dict() for _ in range(ncomp)]
    for f in K.facets:
        for i in range(ncomp):
            pieces[i][f] = SimplexForm(f)
    for f, i, form in per_facet:
        pieces[i][f] = pieces[i][f] + form
    return [PLForm(K, p) for p in pieces]


def _check_ring(phi):
    if phi.normalized:
        raise BridgeError("forms are built from ordered cochains (use an ordered lift)")
    if phi.coeff.ring not in ("Z", "Q"):
        raise BridgeError("forms are built from constant Z or Q cochains")


# collation and its relatives ----------------------------------------------------------

def collate(phi: Cochain, base="min"):
    """sum phi_{b l1..lm} d rho_{l1} .. d rho_{lm} with b the base vertex; one form per component."""
    _check_ring(phi)
    K = phi.complex

    def gen():
        for f in K.facets:
            fs = set(f)
            b = _base(f, base)
            for s, comps in phi.values.items():
                if s[0] != b or not _inside(s, fs):
                    continue
                form = _dprod(f, s[1:])
                for i, c in enumerate(comps):
                    if c:
                        yield f, i, form.scale(c)

    return _accumulate(K, _components(phi), gen())


def collate_checked(phi: Cochain):
    """Collation of a closed cochain, verifying base-vertex independence."""
    a = collate(phi, "min")
    b = collate(phi, "max")
    for x, y in zip(a, b):
        if x != y:
            raise BridgeError("collation depends on the base vertex for a closed input")
        if not x.is_compatible():
            raise BridgeError("collated form is not face compatible")
    return a


def base_homotopy(psi: Cochain, base="min"):
    """sum psi_{b l1..l(m+1)} rho_{l1} d rho_{l2} .. d rho_{l(m+1)}."""
    _check_ring(psi)
    K = psi.complex

    def gen():
        for f in K.facets:
            fs = set(f)
            b = _base(f, base)
            for s, comps in psi.values.items():
                if s[0] != b or not _inside(s, fs) or len(s) < 2:
                    continue
                form = _rho_dprod(f, s[1], s[2:])
                for i, c in enumerate(comps):
                    if c:
                        yield f, i, form.scale(c)

    return _accumulate(K, _components(psi), gen())


def global_homotopy(phi: Cochain):
    """sum phi_{l1..l(m+1)} rho_{l1} d rho_{l2} .. d rho_{l(m+1)}: a global m-form."""
    _check_ring(phi)
    K = phi.complex

    def gen():
        for f in K.facets:
            fs = set(f)
            for s, comps in phi.values.items():
                if not _inside(s, fs):
                    continue
                form = _rho_dprod(f, s[0], s[1:])
                for i, c in enumerate(comps):
                    if c:
                        yield f, i, form.scale(c)

    return _accumulate(K, _components(phi), gen())


# the correction term ---------------------------------------------------------------------

K2_VARIANTS = ("lambda1", "lambda2")


def _pair_dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def correction_term(phi2: Cochain, C: Cochain, k=None, k2_variant="lambda1") -> PLForm:
    """The global k-form D(phi^{(k-2)2}, C(F)).

    k = 2: sum phi_{l*} C_{l1l2l3l4} rho_l1 rho_l3 drho_l2 drho_l4, l* = l1 or l2
    k >= 3: sum phi_{l(k-1) l1..l(k-2)} C_{l(k-2)..l(k+1)} rho_l1 drho_l2 .. drho_l(k+1)
    (sums over matrix components i<j included).
    """
    _check_ring(phi2)
    K = phi2.complex
    k = phi2.degree + 2 if k is None else k
    if k != phi2.degree + 2:
        raise BridgeError("degree mismatch in the correction term")
    if k < 2:
        raise BridgeError("the correction term needs k >= 2")
    if phi2.coeff.ncomp == 0:
        return PLForm(K)
    by_first_last = {}
    for s, comps in phi2.values.items():
        by_first_last.setdefault((s[0], s[-1]), []).append((s, comps))

    def gen():
        for f in K.facets:
            fs = set(f)
            for c, cc in C.values.items():
                if not _inside(c, fs):
                    continue
                l1, l2, l3, l4 = c if k == 2 else (None,) * 4
                if k == 2:
                    pick = l1 if k2_variant == "lambda1" else l2
                    v = phi2.values.get((pick,))
                    if v is None:
                        continue
                    val = _pair_dot(v, cc)
                    if val:
                        form = _rho(f, l1) * _rho(f, l3) * _dprod(f, (l2, l4))
                        yield f, 0, form.scale(val)
                    continue
                # k >= 3: phi index is (l(k-1), l1, .., l(k-2)) with l(k-2) = c[0], l(k-1) = c[1]
                for s, v in by_first_last.get((c[1], c[0]), ()):
                    if k == 3 and len(s) != 2:
                        continue
                    if not _inside(s, fs):
                        continue
                    val = _pair_dot(v, cc)
                    if not val:
                        continue
                    lam = s[1:]  # l1 .. l(k-2)
                    form = _rho_dprod(f, lam[0], lam[1:] + c[1:])
                    yield f, 0, form.scale(val)

    return _accumulate(K, 1, gen())[0]


def coboundary_correction(psi2: Cochain, C: Cochain, k=None, variant="shifted") -> PLForm:
    """H(C)_{(k-1)0} for psi2 = phi^{(k-3)2} of degree k-3 (k >= 3).

    k = 3: -sum psi_{l2} C_{l1..l4} rho_l1 rho_l2 drho_l3 drho_l4.
    k > 3 (``shifted``): -sum psi_{l(k-1) l2..l(k-2)} C_{l(k-2)..l(k+1)} rho_l1 rho_l2 drho_l3 .. drho_l(k+1),
    the k = 3 pattern carried to higher degree.
    """
    _check_ring(psi2)
    K = psi2.complex
    k = psi2.degree + 3 if k is None else k
    if k != psi2.degree + 3 or k < 3:
        raise BridgeError("coboundary correction needs k >= 3 and a degree k-3 input")
    if psi2.coeff.ncomp == 0:
        return PLForm(K)
    by_first_last = {}
    for s, comps in psi2.values.items():
        by_first_last.setdefault((s[0], s[-1]), []).append((s, comps))

    def gen():
        for f in K.facets:
            fs = set(f)
            for c, cc in C.values.items():
                if not _inside(c, fs):
                    continue
                if k == 3:
                    v = psi2.values.get((c[1],))
                    if v is None:
                        continue
                    val = _pair_dot(v, cc)
                    if val:
                        form = (_rho(f, c[0]) * _rho(f, c[1])) * _dprod(f, c[2:])
                        yield f, 0, form.scale(-val)
                    continue
                if variant != "shifted":
                    raise BridgeError(f"unknown variant {variant!r}")
                # index (l(k-1), l2, .., l(k-2)) with l(k-2) = c[0], l(k-1) = c[1]; l1 summed out
                for s, v in by_first_last.get((c[1], c[0]), ()):
                    if not _inside(s, fs):
                        continue
                    val = _pair_dot(v, cc)
                    if not val:
                        continue
                    lam = s[1:]  # l2 .. l(k-2)
                    form = _rho(f, lam[0]) * _dprod(f, lam[1:] + c[1:])
                    yield f, 0, form.scale(-val)

    return _accumulate(K, 1, gen())[0]


def _based_pair_forms(F: Cochain, facet, n):
    """Psi^{ij}_v = sum F_{vbc,i} F_{vcd,j} rho_b drho_c drho_d on one facet, for v in it."""
    fs = set(facet)
    by_first = {}
    for t, v in F.values.items():
        if set(t) <= fs:
            by_first.setdefault(t[0], []).append((t, v))
    pairs = matrix_pairs(n)
    out = {}
    for v in facet:
        forms = [SimplexForm(facet) for _ in pairs]
        rows = by_first.get(v, ())
        by_second = {}
        for t, val in rows:
            by_second.setdefault(t[1], []).append((t, val))
        for t, a in rows:
            b, c = t[1], t[2]
            for t2, bv in by_second.get(c, ()):
                dd = t2[2]
                base = None
                for p, (i, j) in enumerate(pairs):
                    coef = a[i] * bv[j]
                    if coef:
                        if base is None:
                            base = _rho(facet, b) * _dprod(facet, (c, dd))
                        forms[p] = forms[p] + base.scale(coef)
        out[v] = forms
    return out


def based_correction(phi2: Cochain, F: Cochain) -> PLForm:
    """(-1)^m sum phi_{l0..lm} rho_l0 drho_l1..drho_lm ^ Psi_{lm}, m = deg phi2.

    For closed phi2 its differential is the homotopy form of phi2 u2 C(F);
    valid for alternating F.
    """
    _check_ring(phi2)
    K = phi2.complex
    n = F.coeff.n
    m = phi2.degree
    pieces = {}
    for f in K.facets:
        fs = set(f)
        psi = None
        acc = SimplexForm(f)
        for s, comps in phi2.values.items():
            if not _inside(s, fs) or not any(comps):
                continue
            if psi is None:
                psi = _based_pair_forms(F, f, n)
            head = _rho_dprod(f, s[0], s[1:])
            forms = psi[s[-1]]
            for p, c in enumerate(comps):
                if c and not forms[p].is_zero():
                    acc = acc + (head * forms[p]).scale(c)
        pieces[f] = acc.scale(_sgn(m))
    return PLForm(K, pieces)


CORRECTIONS = ("based", "contracted")


# the (0,2)-window complex ----------------------------------------------------------------

class BHMTriple:
    """(H_{k0}, H_{(k-1)1}, H_{(k-2)2}): a form, n forms, n(n-1)/2 forms (None = truncated)."""

    def __init__(self, degree, n, H0, H1=None, H2=None):
        self.degree = degree
        self.n = n
        self.H0 = H0
        self.H1 = None if H1 is None else list(H1)
        self.H2 = None if H2 is None else list(H2)
        if degree >= 1 and (self.H1 is None or len(self.H1) != n):
            raise BridgeError("vector part has the wrong number of components")
        if degree >= 2 and (self.H2 is None or len(self.H2) != n * (n - 1) // 2):
            raise BridgeError("matrix part has the wrong number of components")

    @classmethod
    def zero(cls, K, degree, n):
        z = PLForm(K)
        return cls(degree, n, z, [z] * n if degree >= 1 else None,
                   [z] * (n * (n - 1) // 2) if degree >= 2 else None)

    def parts(self):
        return [[self.H0]] + [p for p in (self.H1, self.H2) if p is not None]

    def _zip(self, other, op):
        if other.degree != self.degree or other.n != self.n:
            raise BridgeError("triples of different degree or rank")
        return BHMTriple(self.degree, self.n, op(self.H0, other.H0),
                         None if self.H1 is None else [op(a, b) for a, b in zip(self.H1, other.H1)],
                         None if self.H2 is None else [op(a, b) for a, b in zip(self.H2, other.H2)])

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def scale(self, s):
        return BHMTriple(self.degree, self.n, self.H0.scale(s),
                         None if self.H1 is None else [a.scale(s) for a in self.H1],
                         None if self.H2 is None else [a.scale(s) for a in self.H2])

    def is_zero(self):
        return all(f.is_zero() for part in self.parts() for f in part)

    def __eq__(self, other):
        if not isinstance(other, BHMTriple):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def is_compatible(self):
        return all(f.is_compatible() for part in self.parts() for f in part)

    def to_json(self):
        return {
            "degree": self.degree,
            "H0": self.H0.to_json(),
            "H1": None if self.H1 is None else [f.to_json() for f in self.H1],
            "H2": None if self.H2 is None else [f.to_json() for f in self.H2],
        }


def _sgn(k):
    return -1 if k % 2 else 1


def matrix_contraction(H2, F2, n):
    """(H2 ^ F2)_l = sum_{i<l} H2_{il} ^ F2_i - sum_{l<j} H2_{lj} ^ F2_j."""
    out = [None] * n
    K = F2[0].complex
    for l in range(n):
        out[l] = PLForm(K)
    for p, (i, j) in enumerate(matrix_pairs(n)):
        out[j] = out[j] + H2[p] * F2[i]
        out[i] = out[i] - H2[p] * F2[j]
    return out


def bhm_differential(x: BHMTriple, F2) -> BHMTriple:
    """D_{F2}(H0, H1, H2) = (dH0 + (-1)^(k-1) sum H1_i ^ F2_i, dH1 + (-1)^(k-2) H2 ^ F2, dH2)."""
    n = x.n
    if len(F2) != n:
        raise BridgeError("F2 and the triple have different rank")
    k = x.degree
    K = x.H0.complex
    out0 = x.H0.d()
    if x.H1 is not None:
        acc = PLForm(K)
        for a, b in zip(x.H1, F2):
            acc = acc + a * b
        out0 = out0 + acc.scale(_sgn(k - 1))
        out1 = [a.d() for a in x.H1]
        if x.H2 is not None:
            contr = matrix_contraction(x.H2, F2, n)
            out1 = [a + b.scale(_sgn(k - 2)) for a, b in zip(out1, contr)]
    else:
        out1 = [PLForm(K)] * n
    if x.H2 is not None:
        out2 = [a.d() for a in x.H2]
    elif k >= 1:
        out2 = [PLForm(K)] * (n * (n - 1) // 2)
    else:
        out2 = None
    return BHMTriple(k + 1, n, out0, out1, out2)


# the reduction map ---------------------------------------------------------------------------

class Bridge:
    """Collated data for a fixed ordered Euler cocycle."""

    def __init__(self, twist: red.EulerTwist, correction="based", k2_variant="lambda1"):
        if correction not in CORRECTIONS:
            raise BridgeError(f"unknown correction {correction!r}")
        self.correction = correction
        self.twist = twist
        self.complex = twist.complex
        self.n = twist.n
        self.F = twist.F(False)
        self.C = twist.C(False)
        if correction == "based" and not is_alternating(self.F):
            raise BridgeError("the based correction needs an alternating Euler cocycle")
        self.F2 = collate_checked(self.F)
        self.k2_variant = k2_variant

    def correction_form(self, phi2, k):
        """D(phi^{(k-2)2}, C(F))."""
        if self.correction == "based":
            return based_correction(phi2, self.F)
        return correction_term(phi2, self.C, k, self.k2_variant)

    def primitive_correction(self, psi2, k, variant="shifted"):
        """H(C)_{(k-1)0}."""
        if self.correction == "based":
            return based_correction(psi2, self.F).scale(-1)
        return coboundary_correction(psi2, self.C, k, variant)

    def reduce_map(self, x: red.ReducedCochain, base="min") -> BHMTriple:
        """(Coll phi0 + Q(d phi0) + (-1)^(k+1) D(phi2, C), Coll phi1 + Q(d phi1), Coll phi2)."""
        if x.normalized:
            raise BridgeError("reduce_map expects an ordered reduced cochain")
        k = x.degree
        H0 = collate(x.phi0, base)[0] + base_homotopy(cech_d(x.phi0), base)[0]
        if x.phi2 is not None:
            H0 = H0 + self.correction_form(x.phi2, k).scale(_sgn(k + 1))
        H1 = None
        if x.phi1 is not None:
            H1 = [a + b for a, b in zip(collate(x.phi1, base), base_homotopy(cech_d(x.phi1), base))]
        H2 = collate(x.phi2, base) if x.phi2 is not None else None
        return BHMTriple(k, self.n, H0, H1, H2)

    def coboundary_primitive(self, y: red.ReducedCochain, variant="shifted") -> BHMTriple:
        """(P psi0 + (-1)^(k-1) H(C), P psi1, P psi2) for y = (psi0, psi1, psi2) of degree k-1."""
        km1 = y.degree
        k = km1 + 1
        H0 = global_homotopy(y.phi0)[0]
        if y.phi2 is not None and k >= 3:
            H0 = H0 + self.primitive_correction(y.phi2, k, variant).scale(_sgn(k - 1))
        H1 = global_homotopy(y.phi1) if y.phi1 is not None else None
        H2 = global_homotopy(y.phi2) if y.phi2 is not None else None
        return BHMTriple(km1, self.n, H0, H1, H2)

    def cocycle_residual(self, x):
        """D_{F2}(reduce_map x) for a D_F-closed x (zero when the map is a cocycle map)."""
        if not self.twist.D(x).is_zero():
            raise BridgeError("input is not D_F-closed")
        return bhm_differential(self.reduce_map(x), self.F2)

    def coboundary_residual(self, y, variant="shifted"):
        """reduce_map(D_F y) - D_{F2}(primitive)."""
        image = self.reduce_map(self.twist.D(y))
        prim = self.coboundary_primitive(y, variant)
        return image - bhm_differential(prim, self.F2)

    def omega_residual(self, y: red.ReducedBarCochain):
        """collate((-1)^(k+2)(phi1 u1 F + phi2 u2 C)) - [(-1)^k H1 ^ F2 - d omega]."""
        if not self.twist.Dbar(y).is_zero():
            raise BridgeError("input is not Dbar_F-closed")
        k = y.degree + 1
        cup = self.twist.cup_F(y)
        lhs = collate_checked(cup)[0]
        H1 = [a + b for a, b in zip(collate(y.phi1), base_homotopy(cech_d(y.phi1)))]
        K = self.complex
        hw = PLForm(K)
        for a, b in zip(H1, self.F2):
            hw = hw + a * b
        rhs = hw.scale(_sgn(k))
        if y.phi2 is not None and k >= 2:
            omega = self.correction_form(y.phi2, k).scale(_sgn(k + 1))
            rhs = rhs - omega.d()
        return lhs - rhs


def verify_agreement(y, bridge: Bridge):
    res = bridge.omega_residual(y)
    return {"degree": y.degree + 1, "residual_zero": res.is_zero(), "residual": None if res.is_zero() else res.to_json()}
