"""Exact piecewise-polynomial functions and forms on a simplicial complex.

A polynomial differential form on a closed simplex is stored in the
barycentric coordinates of all vertices except the largest one, which is
eliminated through lambda_max = 1 - sum(others) (and likewise for its
differential).  Piecewise objects keep one such form per facet of their
domain; a section over the open star st(tau) keeps the facets containing tau.

On top of this sit the fine-sheaf model of the reduced complex: Cech
cochains valued in PPFunction, the barycentric partition of unity, the
contracting homotopy h and the constructive computations built from it.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .cochain import (
    Cochain,
    CoefficientModule,
    cech_d,
    cup1_matrix,
    cup1_vector,
    cup2,
    zero_cochain,
)
from .complex import SimplicialComplex
from . import reduced as red


class PPError(ValueError):
    pass


def _perm_parity(seq):
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return -1 if inv % 2 else 1


class SimplexForm:
    """A polynomial differential form on one closed simplex.

    ``terms`` maps (exponents, wedge) to a nonzero Fraction, where exponents
    has one entry per free coordinate and wedge is an increasing tuple of
    free-coordinate indices standing for d(lambda_i1) ^ d(lambda_i2) ^ ...
    """

    __slots__ = ("simplex", "terms")

    def __init__(self, simplex, terms=None):
        self.simplex = tuple(simplex)
        self.terms = {}
        if terms:
            for key, c in terms.items():
                if c:
                    self.terms[key] = Fraction(c)

    # constructors
    @classmethod
    def constant(cls, simplex, c):
        m = len(simplex) - 1
        return cls(simplex, {((0,) * m, ()): c} if c else None)

    @classmethod
    def coordinate(cls, simplex, v):
        """The barycentric coordinate of vertex v restricted to this simplex."""
        simplex = tuple(simplex)
        m = len(simplex) - 1
        if v not in simplex:
            return cls(simplex)
        i = simplex.index(v)
        if i < m:
            e = [0] * m
            e[i] = 1
            return cls(simplex, {(tuple(e), ()): 1})
        terms = {((0,) * m, ()): Fraction(1)}
        for j in range(m):
            e = [0] * m
            e[j] = 1
            terms[(tuple(e), ())] = Fraction(-1)
        return cls(simplex, terms)

    @classmethod
    def differential(cls, simplex, v):
        """d(lambda_v) on this simplex."""
        simplex = tuple(simplex)
        m = len(simplex) - 1
        if v not in simplex:
            return cls(simplex)
        i = simplex.index(v)
        zero = (0,) * m
        if i < m:
            return cls(simplex, {(zero, (i,)): 1})
        return cls(simplex, {(zero, (j,)): -1 for j in range(m)})

    @property
    def nvars(self):
        return len(self.simplex) - 1

    def is_zero(self):
        return not self.terms

    def degrees(self):
        return sorted({len(w) for _, w in self.terms})

    def degree(self):
        ds = self.degrees()
        if len(ds) > 1:
            raise PPError("form is not homogeneous")
        return ds[0] if ds else None

    def _check(self, other):
        if other.simplex != self.simplex:
            raise PPError(f"forms on different simplices {self.simplex} and {other.simplex}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SimplexForm.constant(self.simplex, other)
        self._check(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, 0) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return SimplexForm(self.simplex, out)

    __radd__ = __add__

    def __neg__(self):
        return SimplexForm(self.simplex, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        if not s:
            return SimplexForm(self.simplex)
        return SimplexForm(self.simplex, {k: c * s for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        out = {}
        for (e1, w1), c1 in self.terms.items():
            s1 = set(w1)
            for (e2, w2), c2 in other.terms.items():
                if s1.intersection(w2):
                    continue
                merged = w1 + w2
                sign = _perm_parity(merged)
                key = (tuple(a + b for a, b in zip(e1, e2)), tuple(sorted(merged)))
                out[key] = out.get(key, 0) + sign * c1 * c2
        return SimplexForm(self.simplex, out)

    def __rmul__(self, other):
        return self.scale(other)

    wedge = __mul__

    def d(self):
        out = {}
        for (e, w), c in self.terms.items():
            for i, a in enumerate(e):
                if not a or i in w:
                    continue
                pos = sum(1 for j in w if j < i)
                sign = -1 if pos % 2 else 1
                e2 = list(e)
                e2[i] -= 1
                key = (tuple(e2), tuple(sorted(w + (i,))))
                out[key] = out.get(key, 0) + sign * a * c
        return SimplexForm(self.simplex, out)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SimplexForm.constant(self.simplex, other)
        if not isinstance(other, SimplexForm):
            return NotImplemented
        return self.simplex == other.simplex and self.terms == other.terms

    __hash__ = None

    def restrict(self, face):
        """Pull back to a face (an increasing sub-tuple of the simplex)."""
        face = tuple(face)
        if face == self.simplex:
            return self
        if not set(face) <= set(self.simplex):
            raise PPError(f"{face} is not a face of {self.simplex}")
        images = [SimplexForm.coordinate(face, v) for v in self.simplex[:-1]]
        dimages = [SimplexForm.differential(face, v) for v in self.simplex[:-1]]
        one = SimplexForm.constant(face, 1)
        out = SimplexForm(face)
        powers = {}

        def power(i, a):
            key = (i, a)
            hit = powers.get(key)
            if hit is None:
                hit = one if a == 0 else power(i, a - 1) * images[i]
                powers[key] = hit
            return hit

        for (e, w), c in self.terms.items():
            term = one.scale(c)
            for i, a in enumerate(e):
                if a:
                    term = term * power(i, a)
                    if term.is_zero():
                        break
            for i in w:
                if term.is_zero():
                    break
                term = term * dimages[i]
            out = out + term
        return out

    def constant_value(self):
        """The value if this is a constant function, else None."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1:
            (e, w), c = next(iter(self.terms.items()))
            if not w and not any(e):
                return c
        return None

    def evaluate(self, point):
        """Value of a 0-form at barycentric coordinates given as {vertex: value}."""
        if any(w for _, w in self.terms):
            raise PPError("evaluate expects a function (0-form)")
        xs = [Fraction(point.get(v, 0)) for v in self.simplex[:-1]]
        total = Fraction(0)
        for (e, _), c in self.terms.items():
            t = c
            for x, a in zip(xs, e):
                t *= x ** a
            total += t
        return total

    def to_json(self):
        def enc(c):
            return str(c) if c.denominator != 1 else int(c)

        out = {"simplex": list(self.simplex)}
        keys = sorted(self.terms)
        if any(w for _, w in keys):
            out["terms"] = [[list(e), list(w), enc(self.terms[(e, w)])] for e, w in keys]
        else:
            out["poly"] = [[list(e), enc(self.terms[(e, w)])] for e, w in keys]
        return out

    def __repr__(self):
        return f"SimplexForm({self.simplex}, {len(self.terms)} terms)"


class PiecewiseForm:
    """One SimplexForm per facet containing ``domain`` (all facets for domain ())."""

    __slots__ = ("complex", "domain", "pieces")

    def __init__(self, K: SimplicialComplex, domain, pieces=None):
        self.complex = K
        self.domain = tuple(sorted(set(domain)))
        facets = K.facets_containing(self.domain)
        if not facets:
            raise PPError(f"domain {self.domain} is not a simplex")
        pieces = pieces or {}
        self.pieces = {}
        for f in facets:
            p = pieces.get(f)
            self.pieces[f] = p if p is not None else SimplexForm(f)

    def _make(self, domain, pieces):
        return type(self)(self.complex, domain, pieces)

    @classmethod
    def constant(cls, K, domain, c):
        obj = cls(K, domain)
        for f in obj.pieces:
            obj.pieces[f] = SimplexForm.constant(f, c)
        return obj

    def facets(self):
        return list(self.pieces)

    def is_zero(self):
        return all(p.is_zero() for p in self.pieces.values())

    def restrict(self, t):
        """Restriction to st(t) (pieces on facets containing t and the domain)."""
        dom = tuple(sorted(set(t) | set(self.domain)))
        if dom == self.domain:
            return self
        facets = self.complex.facets_containing(dom)
        return self._make(dom, {f: self.pieces[f] for f in facets})

    def _binary(self, other, op):
        if isinstance(other, (int, Fraction)):
            other = type(self).constant(self.complex, self.domain, other)
        if not isinstance(other, PiecewiseForm):
            return NotImplemented
        if other.complex != self.complex:
            raise PPError("piecewise objects on different complexes")
        dom = tuple(sorted(set(self.domain) | set(other.domain)))
        facets = self.complex.facets_containing(dom)
        return self._make(dom, {f: op(self.pieces[f], other.pieces[f]) for f in facets})

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self._make(self.domain, {f: -p for f, p in self.pieces.items()})

    def scale(self, s):
        return self._make(self.domain, {f: p.scale(s) for f, p in self.pieces.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return self._binary(other, lambda a, b: a * b)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    wedge = __mul__

    def d(self):
        return self._make(self.domain, {f: p.d() for f, p in self.pieces.items()})

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return (self - other).is_zero()
        if not isinstance(other, PiecewiseForm):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def compatibility_defects(self):
        """Pairs of facets whose pieces disagree on their common face."""
        bad = []
        facets = list(self.pieces)
        for i, f in enumerate(facets):
            for g in facets[i + 1:]:
                common = tuple(sorted(set(f) & set(g)))
                if not common:
                    continue
                if self.pieces[f].restrict(common) != self.pieces[g].restrict(common):
                    bad.append((f, g))
        return bad

    def is_compatible(self):
        return not self.compatibility_defects()

    def constant_value(self):
        """The common constant value when every piece is the same constant."""
        vals = {p.constant_value() for p in self.pieces.values()}
        if len(vals) == 1 and None not in vals:
            return vals.pop()
        return None

    def to_json(self):
        return {"domain": list(self.domain),
                "pieces": [self.pieces[f].to_json() for f in sorted(self.pieces)]}

    def __repr__(self):
        return f"{type(self).__name__}(domain={self.domain}, facets={len(self.pieces)})"


class PPFunction(PiecewiseForm):
    """A piecewise-polynomial function on the open star st(domain)."""

    __slots__ = ()


BarycentricPolynomial = SimplexForm


# partition of unity ------------------------------------------------------------

def barycentric_function(K, v, domain=()):
    """rho_v as a PPFunction on st(domain): piecewise the barycentric coordinate."""
    obj = PPFunction(K, domain)
    for f in obj.pieces:
        obj.pieces[f] = SimplexForm.coordinate(f, v)
    return obj


def partition_of_unity(K):
    """{v: rho_v} on all of K; each rho_v is supported in st(v)."""
    return {v: barycentric_function(K, v) for v in range(K.vertex_count)}


# PP cochains --------------------------------------------------------------------

def pp_coeff(shape="scalar", n=1):
    return CoefficientModule("PP", shape, n)


def pp_constant_cochain(phi: Cochain) -> Cochain:
    """View a constant (Z or Q) ordered cochain as a PP cochain."""
    K = phi.complex
    vals = {}
    for t, comps in phi.values.items():
        vals[t] = tuple(PPFunction.constant(K, t, Fraction(c)) if c else 0 for c in comps)
    return Cochain(K, phi.degree, phi.coeff.with_ring("PP"), vals, False, check=False)


def pp_constant_reduced(x):
    return x._make([None if a is None else pp_constant_cochain(a) for a in x.parts])


def random_pp_function(K, t, rng: random.Random, max_degree=2, terms=3):
    """A random polynomial in the barycentric functions, restricted to st(t)."""
    verts = K.extension_vertices(t)
    out = PPFunction.constant(K, t, Fraction(rng.randint(-3, 3), rng.randint(1, 3)))
    for _ in range(terms):
        mono = PPFunction.constant(K, t, Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
        for _ in range(rng.randint(1, max_degree)):
            mono = mono * barycentric_function(K, rng.choice(verts), t)
        out = out + mono
    return out


def random_pp_cochain(K, degree, rng, shape="scalar", n=1, nnz=3):
    coeff = pp_coeff(shape, n)
    if degree < 0:
        return zero_cochain(K, degree, coeff)
    simplices = [s for d in range(min(degree, K.dim) + 1) for s in K.simplices(d)]
    vals = {}
    for _ in range(nnz):
        s = rng.choice(simplices)
        while True:
            t = tuple(rng.choice(s) for _ in range(degree + 1))
            if len(set(t)) == len(s):
                break
        vals[t] = tuple(random_pp_function(K, t, rng) if rng.random() < 0.8 else 0
                        for _ in range(coeff.ncomp))
    return Cochain(K, degree, coeff, vals, False, check=False)


def random_pp_reduced(twist, k, rng, nnz=3):
    K = twist.complex
    n = twist.n
    return red.ReducedCochain(
        k, random_pp_cochain(K, k, rng, "scalar", 1, nnz),
        random_pp_cochain(K, k - 1, rng, "vector", n, nnz) if k >= 1 else None,
        random_pp_cochain(K, k - 2, rng, "upper_matrix", n, nnz) if k >= 2 else None)


def cochain_compatibility_defects(phi: Cochain):
    bad = []
    for t, comps in phi.values.items():
        for i, c in enumerate(comps):
            if isinstance(c, PiecewiseForm):
                if c.domain != tuple(sorted(set(t))):
                    bad.append((t, i, "domain"))
                elif not c.is_compatible():
                    bad.append((t, i, "faces"))
    return bad


# contracting homotopy -------------------------------------------------------------

def contracting_homotopy(phi: Cochain) -> Cochain:
    """(h phi)_{t} = sum_l rho_l phi_{l t}, extended by zero outside st(l)."""
    if phi.coeff.ring != "PP":
        raise PPError("the contracting homotopy acts on PP cochains")
    if phi.normalized:
        raise PPError("the contracting homotopy needs ordered cochains")
    k = phi.degree
    if k < 1:
        raise PPError("h is defined in degrees k >= 1")
    K = phi.complex
    coeff = phi.coeff
    acc = {}
    for s, comps in phi.values.items():
        lam, t = s[0], s[1:]
        dom = tuple(sorted(set(t)))
        facets = K.facets_containing(dom)
        new = []
        for c in comps:
            if isinstance(c, (int, Fraction)) and c == 0:
                new.append(0)
                continue
            pieces = {}
            for f in facets:
                if lam in f:
                    pieces[f] = SimplexForm.coordinate(f, lam) * c.pieces[f]
            new.append(PPFunction(K, dom, pieces))
        prev = acc.get(t)
        acc[t] = tuple(new) if prev is None else tuple(a + b for a, b in zip(prev, new))
    vals = {t: v for t, v in acc.items()}
    return Cochain(K, k - 1, coeff, vals, False, check=False)


h = contracting_homotopy


def homotopy_residual(phi: Cochain) -> Cochain:
    """(d h + h d) phi - phi; zero exactly when the homotopy identity holds."""
    return cech_d(contracting_homotopy(phi)) + contracting_homotopy(cech_d(phi)) - phi


# constructive acyclicity of the reduced complex in the fine model ----------------------

def _h_or_none(c):
    return None if c is None else contracting_homotopy(c)


def exact_primitive(x, twist):
    """A PP primitive y with D_F y = x for closed x of degree k >= 3.

    Three successive homotopy corrections kill the matrix, vector and scalar
    components in turn.
    """
    k = x.degree
    if k < 3:
        raise PPError("constructive vanishing needs degree at least 3")
    if not twist.D(x).is_zero():
        raise red.VerificationError("input is not D_F-closed")
    K = twist.complex
    n = twist.n
    zero0 = zero_cochain(K, k - 1, pp_coeff())
    zero1 = zero_cochain(K, k - 2, pp_coeff("vector", n))
    zero2 = zero_cochain(K, k - 3, pp_coeff("upper_matrix", n))
    y2 = contracting_homotopy(x.phi2)
    y = red.ReducedCochain(k - 1, zero0, zero1, y2)
    rest = x - twist.D(y)
    if not rest.phi2.is_zero():
        raise red.VerificationError("matrix component survived the first correction")
    y1 = contracting_homotopy(rest.phi1)
    step = red.ReducedCochain(k - 1, zero0, y1, zero2)
    rest = rest - twist.D(step)
    y = y + step
    if not (rest.phi1.is_zero() and rest.phi2.is_zero()):
        raise red.VerificationError("vector component survived the second correction")
    y0 = contracting_homotopy(rest.phi0)
    step = red.ReducedCochain(k - 1, y0, zero1, zero2)
    y = y + step
    if twist.D(y) != x:
        raise red.VerificationError("constructed primitive does not reproduce the input")
    return y


class NormalForm:
    def __init__(self, representative, primitive, phi02):
        self.representative = representative
        self.primitive = primitive
        self.phi02 = phi02


def normal_form_k2(x, twist):
    """Degree-2 normal form (h(M u1 F + phi02 u2 C), M, phi02), M = -h(phi02 u1 F).

    Returns the normal form and an explicit primitive y with
    x - normal_form = D_F y.
    """
    if x.degree != 2:
        raise PPError("normal_form_k2 expects degree 2")
    if not twist.D(x).is_zero():
        raise red.VerificationError("input is not D_F-closed")
    F = twist.F(False)
    C = twist.C(False)
    K = twist.complex
    n = twist.n
    phi02 = x.phi2
    M = -contracting_homotopy(cup1_matrix(phi02, F))
    w1 = contracting_homotopy(x.phi1 - M)
    step1 = red.ReducedCochain(1, zero_cochain(K, 1, pp_coeff()), w1)
    x1 = x - twist.D(step1)
    if x1.phi1 != M:
        raise red.VerificationError("first reduction step failed")
    N0 = contracting_homotopy(cup1_vector(M, F) + cup2(phi02, C))
    w0 = contracting_homotopy(x1.phi0 - N0)
    step0 = red.ReducedCochain(1, w0, zero_cochain(K, 0, pp_coeff("vector", n)))
    nf = red.ReducedCochain(2, N0, M, phi02)
    primitive = step1 + step0
    if x - nf != twist.D(primitive):
        raise red.VerificationError("normal form is not cohomologous to the input")
    return NormalForm(nf, primitive, phi02)


# the S-model connecting map ------------------------------------------------------------

def _integer_constant_cochain(phi: Cochain):
    """Convert a PP cochain whose values are integer constants; None otherwise."""
    vals = {}
    for t, comps in phi.values.items():
        out = []
        for c in comps:
            if isinstance(c, (int, Fraction)):
                v = Fraction(c)
            else:
                v = c.constant_value()
            if v is None or v.denominator != 1:
                return None
            out.append(int(v))
        vals[t] = tuple(out)
    return Cochain(phi.complex, phi.degree, phi.coeff.with_ring("Z"), vals, False, check=False)


def s_model_connecting(x, twist, group=None):
    """HH^k_F(S) -> HH^(k+1)_F(Z): apply D_F to the PP lift, read off integers.

    Returns (integer cocycle, class in the integral group or None).
    """
    y = twist.D(x)
    parts = []
    for part in y.parts:
        if part is None:
            parts.append(None)
            continue
        z = _integer_constant_cochain(part)
        if z is None:
            raise red.VerificationError("D_F of the lift is not integer-constant")
        parts.append(z)
    out = red.ReducedCochain(y.degree, *parts)
    if group is None:
        return out, None
    return out, group.class_of(out)


def connecting_preimage(integral_cocycle, twist):
    """PP cochain x with D_F x = the given ordered integral cocycle (degree >= 4)."""
    return exact_primitive(pp_constant_reduced(integral_cocycle), twist)


def kernel_witness(x, twist):
    """For closed-mod-Z x whose connecting image is zero, write x = D_F w + z.

    z is an integral ordered cochain and w a PP cochain, exhibiting x as zero
    in HH^k_F(S).  Returns (w, z).
    """
    image, _ = s_model_connecting(x, twist)
    z = red.solve_ordered(twist, x.degree, image)
    if z is None:
        raise red.VerificationError("connecting image is not an integral coboundary")
    rest = x - pp_constant_reduced(z)
    w = exact_primitive(rest, twist)
    return w, z
