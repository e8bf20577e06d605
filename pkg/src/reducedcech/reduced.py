"""Dimensionally reduced complexes C_F and Cbar_F, their cohomology, the
Gysin maps between them and the coefficient (Bockstein) sequence.

Group computations run on the normalized model (strictly increasing tuples),
which is a quotient complex of the ordered Cech model; restriction to
increasing tuples is a filtered chain map inducing isomorphisms on every
graded piece, hence on cohomology.  ``ordered_lift`` goes back from a
normalized cocycle to an ordered one with the same restriction.
"""

from __future__ import annotations

import random
from fractions import Fraction

from . import intlinalg as la
from .cochain import (
    Cochain,
    CochainError,
    CoefficientModule,
    alternating_extension,
    as_ordered,
    cech_d,
    commutator_cochain,
    cup1_matrix,
    cup1_vector,
    cup2,
    random_cochain,
    restrict_increasing,
    zero_cochain,
)


class ReducedError(ValueError):
    pass


class VerificationError(ReducedError):
    """A mathematical identity failed; carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def _sgn(k):
    return -1 if k % 2 else 1


# elements --------------------------------------------------------------------

class _Tuple:
    """Shared arithmetic for fixed-length tuples of cochains (None = truncated)."""

    __slots__ = ("degree", "parts")

    def __init__(self, degree, parts):
        self.degree = degree
        self.parts = tuple(parts)

    def _make(self, parts):
        return type(self)(self.degree, *parts)

    def __add__(self, other):
        if type(other) is not type(self) or other.degree != self.degree:
            raise ReducedError("degree or type mismatch")
        return self._make([None if a is None else a + b for a, b in zip(self.parts, other.parts)])

    def __neg__(self):
        return self._make([None if a is None else -a for a in self.parts])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return self._make([None if a is None else a.scale(s) for a in self.parts])

    def is_zero(self):
        return all(a is None or a.is_zero() for a in self.parts)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return other.degree == self.degree and (self - other).is_zero()

    __hash__ = None

    @property
    def normalized(self):
        return next(a for a in self.parts if a is not None).normalized

    @property
    def complex(self):
        return next(a for a in self.parts if a is not None).complex

    def restrict_increasing(self):
        return self._make([None if a is None else restrict_increasing(a) for a in self.parts])

    def with_ring(self, ring):
        return self._make([None if a is None else a.with_ring(ring) for a in self.parts])

    def to_json(self):
        return {
            "degree": self.degree,
            "components": [None if a is None else a.to_json() for a in self.parts],
        }


class ReducedCochain(_Tuple):
    """(phi^{k0}, phi^{(k-1)1}, phi^{(k-2)2}); lower entries are None when truncated."""

    __slots__ = ()

    def __init__(self, degree, phi0, phi1=None, phi2=None):
        super().__init__(degree, (phi0, phi1, phi2))
        if degree >= 1 and phi1 is None or degree >= 2 and phi2 is None:
            raise ReducedError("missing component for this degree")

    @property
    def phi0(self):
        return self.parts[0]

    @property
    def phi1(self):
        return self.parts[1]

    @property
    def phi2(self):
        return self.parts[2]

    def __repr__(self):
        return f"ReducedCochain(deg={self.degree}, nnz={[0 if a is None else len(a) for a in self.parts]})"


class ReducedBarCochain(_Tuple):
    """(phi^{k1}, phi^{(k-1)2})."""

    __slots__ = ()

    def __init__(self, degree, phi1, phi2=None):
        super().__init__(degree, (phi1, phi2))
        if degree >= 1 and phi2 is None:
            raise ReducedError("missing component for this degree")

    @property
    def phi1(self):
        return self.parts[0]

    @property
    def phi2(self):
        return self.parts[1]

    def __repr__(self):
        return f"ReducedBarCochain(deg={self.degree}, nnz={[0 if a is None else len(a) for a in self.parts]})"


# the twisting data -----------------------------------------------------------------

class EulerTwist:
    """A fixed Euler cocycle F with cached C(F) in both tuple models."""

    def __init__(self, F: Cochain, check=True):
        if F.degree != 2 or F.coeff.shape != "vector":
            raise CochainError("Euler cocycle must be a degree-2 vector cochain")
        if F.coeff.ring != "Z":
            raise CochainError("Euler cocycle must have integer values")
        if check and not cech_d(F).is_zero():
            raise CochainError("F is not a Cech cocycle")
        self.F_input = F
        self.complex = F.complex
        self.n = F.coeff.n
        self._F = {}
        self._C = {}
        if F.normalized:
            self._F[True] = F
        else:
            self._F[False] = F
            self._F[True] = restrict_increasing(F)

    def F(self, normalized):
        hit = self._F.get(normalized)
        if hit is None:
            # normalized input: the alternating extension is an ordered cocycle
            hit = alternating_extension(self._F[True])
            self._F[normalized] = hit
        return hit

    def C(self, normalized):
        hit = self._C.get(normalized)
        if hit is None:
            hit = commutator_cochain(self.F(normalized), check=False)
            self._C[normalized] = hit
        return hit

    def coeffs(self, ring):
        return (
            CoefficientModule(ring, "scalar"),
            CoefficientModule(ring, "vector", self.n),
            CoefficientModule(ring, "upper_matrix", self.n),
        )

    # cochain constructors
    def zero(self, k, ring="Z", normalized=False):
        c0, c1, c2 = self.coeffs(ring)
        K = self.complex
        return ReducedCochain(
            k, zero_cochain(K, k, c0, normalized),
            zero_cochain(K, k - 1, c1, normalized) if k >= 1 else None,
            zero_cochain(K, k - 2, c2, normalized) if k >= 2 else None)

    def zero_bar(self, k, ring="Z", normalized=False):
        _, c1, c2 = self.coeffs(ring)
        K = self.complex
        return ReducedBarCochain(
            k, zero_cochain(K, k, c1, normalized),
            zero_cochain(K, k - 1, c2, normalized) if k >= 1 else None)

    def random(self, k, rng, ring="Z", normalized=False, nnz=3, bound=3):
        c0, c1, c2 = self.coeffs(ring)
        K = self.complex
        return ReducedCochain(
            k, random_cochain(K, k, c0, rng, nnz, normalized, bound),
            random_cochain(K, k - 1, c1, rng, nnz, normalized, bound) if k >= 1 else None,
            random_cochain(K, k - 2, c2, rng, nnz, normalized, bound) if k >= 2 else None)

    def random_bar(self, k, rng, ring="Z", normalized=False, nnz=3, bound=3):
        _, c1, c2 = self.coeffs(ring)
        K = self.complex
        return ReducedBarCochain(
            k, random_cochain(K, k, c1, rng, nnz, normalized, bound),
            random_cochain(K, k - 1, c2, rng, nnz, normalized, bound) if k >= 1 else None)

    # differentials
    def D(self, x: ReducedCochain) -> ReducedCochain:
        """D_F(a, b, c) = (da + s b u1 F + s c u2 C(F), db + (-1)^k c u1 F, dc), s = (-1)^(k+1)."""
        if x.complex != self.complex:
            raise ReducedError("cochain and Euler cocycle live on different complexes")
        k = x.degree
        nz = x.normalized
        F, C = self.F(nz), self.C(nz)
        a, b, c = x.parts
        ring = a.coeff.ring
        s = _sgn(k + 1)
        out0 = cech_d(a)
        if b is not None:
            out0 = out0 + cup1_vector(b, F).scale(s)
        if c is not None:
            out0 = out0 + cup2(c, C).scale(s)
        if b is not None:
            out1 = cech_d(b)
            if c is not None:
                out1 = out1 + cup1_matrix(c, F).scale(_sgn(k))
        else:
            out1 = zero_cochain(self.complex, 0, self.coeffs(ring)[1], nz)
        if c is not None:
            out2 = cech_d(c)
        elif k >= 1:
            out2 = zero_cochain(self.complex, k - 1, self.coeffs(ring)[2], nz)
        else:
            out2 = None
        return ReducedCochain(k + 1, out0, out1, out2)

    def Dbar(self, y: ReducedBarCochain) -> ReducedBarCochain:
        """Dbar_F(b, c) = (db + (-1)^(k+1) c u1 F, dc): the tail of D_F in degree k+1."""
        if y.complex != self.complex:
            raise ReducedError("cochain and Euler cocycle live on different complexes")
        k = y.degree
        nz = y.normalized
        F = self.F(nz)
        b, c = y.parts
        out1 = cech_d(b)
        if c is not None:
            out1 = out1 + cup1_matrix(c, F).scale(_sgn(k + 1))
            out2 = cech_d(c)
        else:
            out2 = zero_cochain(self.complex, 0, self.coeffs(b.coeff.ring)[2], nz)
        return ReducedBarCochain(k + 1, out1, out2)

    # maps of the Gysin sequence
    def pullback(self, phi: Cochain) -> ReducedCochain:
        """pi^*: phi -> (phi, 0, 0)."""
        k = phi.degree
        _, c1, c2 = self.coeffs(phi.coeff.ring)
        K = self.complex
        nz = phi.normalized
        return ReducedCochain(
            k, phi, zero_cochain(K, k - 1, c1, nz) if k >= 1 else None,
            zero_cochain(K, k - 2, c2, nz) if k >= 2 else None)

    def pushforward(self, x: ReducedCochain):
        """pi_*: (a, b, c) -> (b, c), or None in degree 0."""
        if x.degree == 0:
            return None
        return ReducedBarCochain(x.degree - 1, x.phi1, x.phi2)

    def cup_F(self, y: ReducedBarCochain) -> Cochain:
        """Bar class of degree k-1 to (-1)^(k+2) (b u1 F + c u2 C(F)) in degree k+1."""
        nz = y.normalized
        k = y.degree + 1
        out = cup1_vector(y.phi1, self.F(nz))
        if y.phi2 is not None:
            out = out + cup2(y.phi2, self.C(nz))
        return out.scale(_sgn(k + 2))

    # closedness
    def is_closed(self, x):
        if isinstance(x, ReducedCochain):
            return self.D(x).is_zero()
        if isinstance(x, ReducedBarCochain):
            return self.Dbar(x).is_zero()
        return cech_d(x).is_zero()


_TWISTS = {}


def twist_for(F: Cochain) -> EulerTwist:
    key = id(F)
    hit = _TWISTS.get(key)
    if hit is None or hit[0] is not F:
        hit = (F, EulerTwist(F))
        _TWISTS[key] = hit
    return hit[1]


def D_F(x: ReducedCochain, F: Cochain) -> ReducedCochain:
    return twist_for(F).D(x)


def Dbar_F(y: ReducedBarCochain, F: Cochain) -> ReducedBarCochain:
    return twist_for(F).Dbar(y)


# linear models -----------------------------------------------------------------

class _Model:
    """A graded free Z-module with a differential, in explicit coordinates."""

    kind = "abstract"

    def __init__(self, twist: EulerTwist, normalized=True):
        self.twist = twist
        self.complex = twist.complex
        self.normalized = normalized
        self._basis = {}
        self._index = {}
        self._matrix = {}
        self._groups = {}

    # subclasses provide: _part_specs(k) -> list of (degree, n_components), _assemble, _parts, _apply
    def basis(self, k):
        hit = self._basis.get(k)
        if hit is None:
            hit = []
            for p, (deg, ncomp) in enumerate(self._part_specs(k)):
                if deg is None or deg < 0:
                    continue
                for t in self.complex.ordered_tuples(deg, increasing=self.normalized):
                    for i in range(ncomp):
                        hit.append((p, t, i))
            self._basis[k] = hit
            self._index[k] = {lab: j for j, lab in enumerate(hit)}
        return hit

    def dim(self, k):
        return len(self.basis(k))

    def index(self, k):
        self.basis(k)
        return self._index[k]

    def vector(self, x, k=None):
        k = x.degree if k is None else k
        idx = self.index(k)
        v = [0] * len(idx)
        for p, part in enumerate(self._parts(x)):
            if part is None:
                continue
            for t, comps in part.values.items():
                for i, c in enumerate(comps):
                    if c:
                        v[idx[(p, t, i)]] = c
        return v

    def element(self, v, k, ring="Z"):
        parts = {}
        for (p, t, i), c in zip(self.basis(k), v):
            if c:
                parts.setdefault(p, {}).setdefault(t, {})[i] = c
        return self._assemble(k, parts, ring)

    def _cochain(self, deg, coeff, entries):
        vals = {}
        for t, comps in entries.items():
            vals[t] = tuple(comps.get(i, 0) for i in range(coeff.ncomp))
        return Cochain(self.complex, deg, coeff, vals, self.normalized, check=False)

    def matrix(self, k):
        """Matrix of the differential C^k -> C^(k+1) (rows indexed by basis(k+1))."""
        hit = self._matrix.get(k)
        if hit is None:
            rows = self.dim(k + 1)
            cols = []
            for j in range(self.dim(k)):
                e = [0] * self.dim(k)
                e[j] = 1
                cols.append(self.vector(self.apply(self.element(e, k)), k + 1))
            hit = la.columns_to_matrix(cols, rows) if cols else [[] for _ in range(rows)]
            self._matrix[k] = hit
        return hit

    def cycles(self, k):
        if k < 0:
            return []
        n = self.dim(k)
        if n == 0:
            return []
        M = self.matrix(k)
        if self.dim(k + 1) == 0:
            return la.identity(n)
        return la.kernel_lattice(M, n)

    def boundaries(self, k):
        if k <= 0 or self.dim(k - 1) == 0 or self.dim(k) == 0:
            return []
        M = self.matrix(k - 1)
        return [list(col) for col in zip(*M)]

    def group(self, k, ring="Z"):
        key = (k, ring)
        hit = self._groups.get(key)
        if hit is None:
            if ring == "Z":
                pres = la.subquotient(self.cycles(k), self.boundaries(k), self.dim(k))
            elif ring == "Q":
                qc = la.nullspace_q(self.matrix(k), self.dim(k)) if self.dim(k + 1) else \
                    [[Fraction(int(i == j)) for i in range(self.dim(k))] for j in range(self.dim(k))]
                pres = la.VectorSpacePresentation(qc, self.boundaries(k), self.dim(k))
            elif ring == "QZ":
                pres = QZPresentation(self, k)
            else:
                raise ReducedError(f"unknown ring {ring!r}")
            hit = CohomologyGroup(self, k, ring, pres)
            self._groups[key] = hit
        return hit


class CechModel(_Model):
    """Plain Cech complex with scalar, vector(n) or upper_matrix(n) coefficients."""

    kind = "cech"

    def __init__(self, twist, shape="scalar", normalized=True):
        super().__init__(twist, normalized)
        self.shape = shape
        n = twist.n
        self.ncomp = {"scalar": 1, "vector": n, "upper_matrix": n * (n - 1) // 2}[shape]

    def _part_specs(self, k):
        return [(k, self.ncomp)]

    def _parts(self, x):
        return [x]

    def _assemble(self, k, parts, ring):
        coeff = CoefficientModule(ring, self.shape, self.twist.n)
        return self._cochain(k, coeff, parts.get(0, {}))

    def apply(self, x):
        return cech_d(x)


class ReducedModel(_Model):
    kind = "reduced"

    def _part_specs(self, k):
        n = self.twist.n
        return [(k, 1), (k - 1 if k >= 1 else None, n), (k - 2 if k >= 2 else None, n * (n - 1) // 2)]

    def _parts(self, x):
        return x.parts

    def _assemble(self, k, parts, ring):
        c0, c1, c2 = self.twist.coeffs(ring)
        return ReducedCochain(
            k, self._cochain(k, c0, parts.get(0, {})),
            self._cochain(k - 1, c1, parts.get(1, {})) if k >= 1 else None,
            self._cochain(k - 2, c2, parts.get(2, {})) if k >= 2 else None)

    def apply(self, x):
        return self.twist.D(x)


class BarModel(_Model):
    kind = "bar"

    def _part_specs(self, k):
        n = self.twist.n
        return [(k, n), (k - 1 if k >= 1 else None, n * (n - 1) // 2)]

    def _parts(self, x):
        return x.parts

    def _assemble(self, k, parts, ring):
        _, c1, c2 = self.twist.coeffs(ring)
        return ReducedBarCochain(
            k, self._cochain(k, c1, parts.get(0, {})),
            self._cochain(k - 1, c2, parts.get(1, {})) if k >= 1 else None)

    def apply(self, x):
        return self.twist.Dbar(x)


class CohomologyClass:
    """A class in a computed group: coordinates plus a closed representative."""

    def __init__(self, group, coordinates, representative):
        self.group = group
        self.coordinates = list(coordinates)
        self.representative = representative

    def is_zero(self):
        return not any(self.coordinates)

    def __repr__(self):
        return f"CohomologyClass({self.group.describe()}, coords={self.coordinates})"


class CohomologyGroup:
    def __init__(self, model, k, ring, presentation):
        self.model = model
        self.degree = k
        self.ring = ring
        self.presentation = presentation

    def describe(self):
        return self.presentation.describe()

    def signature(self):
        return self.presentation.signature()

    @property
    def free_rank(self):
        return self.presentation.free_rank

    @property
    def torsion(self):
        return self.presentation.torsion

    def generators(self):
        ring = "Q" if self.ring == "Q" else "Z"
        return [self.model.element(g, self.degree, ring) for g in self.presentation.generators]

    def _vec(self, x):
        if x.normalized != self.model.normalized:
            if x.normalized:
                raise ReducedError("normalized representative offered to an ordered model")
            x = x.restrict_increasing()
        return self.model.vector(x, self.degree)

    def coordinates(self, x):
        v = self._vec(x)
        if self.ring == "Z":
            if any(isinstance(c, Fraction) and c.denominator != 1 for c in v):
                raise ReducedError("non-integral representative for an integral group")
            v = [int(c) for c in v]
        try:
            return self.presentation.coordinates(v)
        except la.LinAlgError as exc:
            raise VerificationError("representative is not closed", witness=x.to_json()) from exc

    def class_of(self, x):
        return CohomologyClass(self, self.coordinates(x), x)

    def is_zero_class(self, x):
        return not any(self.coordinates(x))

    def element(self, coords):
        """A representative with the given coordinates."""
        v = [0] * self.model.dim(self.degree)
        for c, g in zip(coords, self.presentation.generators):
            for i, a in enumerate(g):
                v[i] += c * a
        ring = "Q" if self.ring == "Q" else "Z"
        return self.model.element(v, self.degree, ring)

    def to_json(self):
        return self.presentation.to_json(lambda g: self.model.element(g, self.degree,
                                                                       "Q" if self.ring == "Q" else "Z").to_json())


class QZPresentation:
    """Cohomology with Q/Z coefficients of a free integral complex.

    With U D V = S the Smith form of the differential out of degree k, the
    Q/Z-cocycles are V y with s_i y_i integral; the divisible part has rank
    (dim - rank D_k - rank D_(k-1)) and the torsion part is generated by the
    classes of V e_i / s_i for the invariant factors s_i >= 2.
    """

    def __init__(self, model, k):
        self.model = model
        n = model.dim(k)
        if n and model.dim(k + 1):
            U, S, V = la.smith_normal_form(model.matrix(k), n)
            diag = la.diagonal(S)
        else:
            diag, V = [], la.identity(n)
        rank_k = sum(1 for d in diag if d)
        rank_prev = la.rank_q(model.matrix(k - 1), model.dim(k - 1)) if k >= 1 and n and model.dim(k - 1) else 0
        self.divisible_rank = n - rank_k - rank_prev
        self.torsion = [d for d in diag if d >= 2]
        self.torsion_generators = []
        for i, d in enumerate(diag):
            if d >= 2:
                col = [Fraction(V[r][i], d) for r in range(n)]
                self.torsion_generators.append(col)
        self.divisible_lines = model.group(k, "Z").presentation.generators[:model.group(k, "Z").free_rank]
        self.free_rank = 0
        self.generators = self.torsion_generators

    def describe(self):
        parts = []
        if self.divisible_rank:
            parts.append("Q/Z" if self.divisible_rank == 1 else f"(Q/Z)^{self.divisible_rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"

    def signature(self):
        return (("divisible", self.divisible_rank), tuple(self.torsion))

    def to_json(self, encode_generator=None):
        return {"divisible_rank": self.divisible_rank, "torsion": list(self.torsion)}


def qz_torsion_generators(group: CohomologyGroup):
    """Q/Z cochains representing the torsion generators of a Q/Z group."""
    pres = group.presentation
    return [group.model.element([c % 1 for c in g], group.degree, "QZ") for g in pres.torsion_generators]


# convenience constructors ----------------------------------------------------------

def reduced_cohomology(K, F, ring="Z", k=0, normalized=True):
    tw = F if isinstance(F, EulerTwist) else twist_for(F)
    return ReducedModel(tw, normalized).group(k, ring)


def bar_cohomology(K, F, ring="Z", k=0, normalized=True):
    tw = F if isinstance(F, EulerTwist) else twist_for(F)
    return BarModel(tw, normalized).group(k, ring)


def cech_cohomology(K, k, ring="Z", shape="scalar", n=1, normalized=True):
    F = zero_cochain(K, 2, CoefficientModule("Z", "vector", n), normalized)
    return CechModel(EulerTwist(F, check=False), shape, normalized).group(k, ring)


# Gysin sequence ------------------------------------------------------------------

class GysinData:
    """All groups and maps of the integral Gysin sequence for a fixed F."""

    def __init__(self, twist: EulerTwist, normalized=True):
        self.twist = twist
        self.cech = CechModel(twist, "scalar", normalized)
        self.red = ReducedModel(twist, normalized)
        self.bar = BarModel(twist, normalized)

    def group(self, which, k, ring="Z"):
        model = {"cech": self.cech, "reduced": self.red, "bar": self.bar}[which]
        return model.group(k, ring)

    def _vec_map(self, src_model, ks, dst_model, kd, fn, ring):
        def f(v):
            x = src_model.element(v, ks, ring)
            y = fn(x)
            if y is None:
                return [0] * dst_model.dim(kd)
            return dst_model.vector(y, kd)
        return f

    def cochain_map(self, name, k, ring="Z"):
        """Vector-level versions of pi^*, pi_*, and cup F indexed by the reduced degree k."""
        tw = self.twist
        if name == "pullback":
            return self._vec_map(self.cech, k, self.red, k, tw.pullback, ring)
        if name == "pushforward":
            return self._vec_map(self.red, k, self.bar, k - 1, tw.pushforward, ring)
        if name == "cupF":
            return self._vec_map(self.bar, k - 1, self.cech, k + 1, tw.cup_F, ring)
        raise ReducedError(name)

    def induced(self, name, k):
        src_dst = {
            "pullback": (("cech", k), ("reduced", k)),
            "pushforward": (("reduced", k), ("bar", k - 1)),
            "cupF": (("bar", k - 1), ("cech", k + 1)),
        }[name]
        (a, ka), (b, kb) = src_dst
        A = self.group(a, ka).presentation
        B = self.group(b, kb).presentation
        return la.induced_map(A, B, self.cochain_map(name, k))

    def induced_q(self, name, k):
        src_dst = {
            "pullback": (("cech", k), ("reduced", k)),
            "pushforward": (("reduced", k), ("bar", k - 1)),
            "cupF": (("bar", k - 1), ("cech", k + 1)),
        }[name]
        (a, ka), (b, kb) = src_dst
        A = self.group(a, ka, "Q").presentation
        B = self.group(b, kb, "Q").presentation
        f = self.cochain_map(name, k, "Q")
        cols = []
        for g in A.generators:
            img = f(g)
            if not B.contains(img):
                raise VerificationError(f"{name} does not preserve rational cocycles")
            cols.append(B.coordinates(img))
        for bvec in A._boundary_basis:
            img = f(bvec)
            if any(B.coordinates(img)):
                raise VerificationError(f"{name} does not preserve rational coboundaries")
        return la.columns_to_matrix(cols, B.free_rank) if cols else [[] for _ in range(B.free_rank)]


class ExactnessReport:
    def __init__(self, label, composite_zero, homology, ring):
        self.label = label
        self.composite_zero = composite_zero
        self.homology = homology
        self.ring = ring

    @property
    def exact(self):
        return self.composite_zero and self.homology is not None and self.homology.is_trivial()

    def to_json(self):
        return {
            "segment": self.label,
            "ring": self.ring,
            "composite_zero": self.composite_zero,
            "defect": None if self.homology is None else
            {"free_rank": self.homology.free_rank, "torsion": list(self.homology.torsion)},
            "exact": self.exact,
        }


class _RankDefect:
    def __init__(self, d):
        self.free_rank = d
        self.torsion = []

    def is_trivial(self):
        return self.free_rank == 0


def verify_exact(f: la.InducedMap, g: la.InducedMap, label="segment"):
    """Exactness of A -f-> B -g-> C at B over Z."""
    zero = la.compose_zero(g, f)
    hom = la.homology_of_maps(f, g) if zero else None
    return ExactnessReport(label, zero, hom, "Z")


def verify_exact_q(Mf, Mg, dim_b, label="segment"):
    """Exactness over Q from matrices in chosen bases: ker g = im f."""
    nf = len(Mf[0]) if Mf and Mf[0] else 0
    ng = len(Mg[0]) if Mg and Mg[0] else dim_b
    if dim_b == 0:
        return ExactnessReport(label, True, _RankDefect(0), "Q")
    comp_zero = True
    if Mg and Mf and nf:
        prod = [[sum(Fraction(Mg[i][l]) * Mf[l][j] for l in range(dim_b)) for j in range(nf)] for i in range(len(Mg))]
        comp_zero = all(c == 0 for row in prod for c in row)
    rank_f = la.rank_q(Mf, nf) if nf else 0
    rank_g = la.rank_q(Mg, ng) if Mg else 0
    defect = dim_b - rank_g - rank_f
    return ExactnessReport(label, comp_zero, _RankDefect(defect) if comp_zero else None, "Q")


def gysin_segments(data: GysinData, k):
    """The three horizontal segments centred at degree k (Z coefficients)."""
    out = []
    pull_k = data.induced("pullback", k)
    push_k = data.induced("pushforward", k) if k >= 1 else None
    if push_k is not None:
        out.append(verify_exact(pull_k, push_k, f"H^{k} -pi*-> HH^{k}_F -pi_*-> Hbar^{k-1}_F"))
        cup_k = data.induced("cupF", k)
        out.append(verify_exact(push_k, cup_k, f"HH^{k}_F -pi_*-> Hbar^{k-1}_F -uF-> H^{k+1}"))
        pull_next = data.induced("pullback", k + 1)
        out.append(verify_exact(cup_k, pull_next, f"Hbar^{k-1}_F -uF-> H^{k+1} -pi*-> HH^{k+1}_F"))
    return out


def gysin_segments_q(data: GysinData, k):
    out = []
    if k < 1:
        return out
    pull_k = data.induced_q("pullback", k)
    push_k = data.induced_q("pushforward", k)
    cup_k = data.induced_q("cupF", k)
    pull_next = data.induced_q("pullback", k + 1)
    dim_red = data.group("reduced", k, "Q").free_rank
    dim_bar = data.group("bar", k - 1, "Q").free_rank
    dim_cech = data.group("cech", k + 1, "Q").free_rank
    out.append(verify_exact_q(pull_k, push_k, dim_red, f"H^{k} -pi*-> HH^{k}_F -pi_*-> Hbar^{k-1}_F"))
    out.append(verify_exact_q(push_k, cup_k, dim_bar, f"HH^{k}_F -pi_*-> Hbar^{k-1}_F -uF-> H^{k+1}"))
    out.append(verify_exact_q(cup_k, pull_next, dim_cech, f"Hbar^{k-1}_F -uF-> H^{k+1} -pi*-> HH^{k+1}_F"))
    return out


def gysin_left_end(data: GysinData):
    """0 -> H^0 -pi*-> HH^0_F is injective (the sequence starts there)."""
    pull = data.induced("pullback", 0)
    src = pull.src
    zero_src = la.quotient_presentation([], 0)
    f0 = la.InducedMap([[] for _ in src.generators], zero_src, src, {"verified": True})
    return verify_exact(f0, pull, "0 -> H^0 -pi*-> HH^0_F")


# the coefficient sequence Z -> Q -> Q/Z ---------------------------------------------

def lift_qz(x):
    """Lift Q/Z values to rationals in [0, 1)."""
    def lift(c):
        if c is None:
            return None
        return c.with_ring("Q")
    if isinstance(x, Cochain):
        return lift(x)
    return x._make([lift(a) for a in x.parts])


def _integral(x):
    parts = [x] if isinstance(x, Cochain) else [a for a in x.parts if a is not None]
    for a in parts:
        for v in a.values.values():
            for c in v:
                if Fraction(c).denominator != 1:
                    return False
    return True


def bockstein(x, twist: EulerTwist):
    """Connecting map: lift to [0,1), apply the differential, check integrality."""
    y = lift_qz(x)
    if isinstance(y, ReducedCochain):
        z = twist.D(y)
    elif isinstance(y, ReducedBarCochain):
        z = twist.Dbar(y)
    else:
        z = cech_d(y)
    if not _integral(z):
        raise VerificationError("Bockstein output is not integral", witness=z.to_json())
    return z.with_ring("Z")


def _kernel_in_coordinates(M, m):
    """Integer kernel of a rational matrix acting on Z^m."""
    if not M or not any(c for row in M for c in row):
        return la.identity(m)
    den = 1
    for row in M:
        for c in row:
            d = Fraction(c).denominator
            den = den * d // _gcd(den, d)
    Mi = [[int(Fraction(c) * den) for c in row] for row in M]
    return la.kernel_lattice(Mi, m)


def verify_coefficient_sequence(model: _Model, k):
    """Checks on ... -> H^k(Q) -> H^k(Q/Z) -b-> H^(k+1)(Z) -> H^(k+1)(Q) -> ...

    Returns a dict of verdicts:
      * torsion_image: ker(H^(k+1)(Z) -> H^(k+1)(Q)) equals the Bockstein image
        (and is the torsion subgroup);
      * kernel_of_bockstein: divisible classes die under the Bockstein and
        the torsion part injects, so its kernel is the image of H^k(Q);
      * rational_iso: H^k(Z) (x) Q -> H^k(Q) is an isomorphism.
    """
    tw = model.twist
    gz_next = model.group(k + 1, "Z")
    gq_next = model.group(k + 1, "Q")
    gqz = model.group(k, "QZ")
    gz = model.group(k, "Z")
    gq = model.group(k, "Q")
    pres = gz_next.presentation
    m = len(pres.generators)
    rels = []
    for i, mod in enumerate(pres.moduli):
        if mod:
            v = [0] * m
            v[i] = mod
            rels.append(v)
    imgs = [gz_next.coordinates(bockstein(x, tw)) for x in qz_torsion_generators(gqz)]
    iota = [gq_next.presentation.coordinates(g) for g in pres.generators]
    iota_m = la.columns_to_matrix(iota, gq_next.free_rank) if iota else []
    out = {}
    if m:
        ker = _kernel_in_coordinates(iota_m, m)
        in_ker = all(not any(la.mat_vec(iota_m, v)) for v in imgs) if iota_m else True
        ker_group = la.subquotient(ker, rels, m) if ker else la.quotient_presentation([], 0)
        torsion_order = 1
        for d in pres.torsion:
            torsion_order *= d
        is_torsion = ker_group.free_rank == 0 and ker_group.order() == torsion_order
        coker = la.subquotient(ker, imgs + rels, m) if ker else ker_group
        out["torsion_image"] = bool(in_ker and is_torsion and coker.is_trivial())
    else:
        out["torsion_image"] = not imgs
    div_ok = True
    for g in gqz.presentation.divisible_lines:
        for t in (Fraction(1, 2), Fraction(1, 3)):
            x = model.element([(t * c) % 1 for c in g], k, "QZ")
            if any(gz_next.coordinates(bockstein(x, tw))):
                div_ok = False
    inj = True
    if imgs:
        sub = la.hermite_rows(imgs + rels, m)
        inj_group = la.subquotient(sub, rels, m)
        expected = 1
        for d in gqz.presentation.torsion:
            expected *= d
        inj = inj_group.free_rank == 0 and inj_group.order() == expected
    out["kernel_of_bockstein"] = div_ok and inj
    cols = [gq.presentation.coordinates(g) for g in gz.presentation.generators[:gz.free_rank]]
    if gz.free_rank != gq.free_rank:
        out["rational_iso"] = False
    elif cols:
        out["rational_iso"] = la.rank_q(la.columns_to_matrix(cols, gq.free_rank), len(cols)) == gq.free_rank
    else:
        out["rational_iso"] = True
    return out


_LADDER = {
    # map name -> (source model, source degree offset, target model, target degree offset)
    "pullback": ("cech", 0, "reduced", 0),
    "pushforward": ("reduced", 0, "bar", -1),
    "cupF": ("bar", -1, "cech", 1),
}


def _qz_test_classes(group):
    """Torsion generators plus halves and thirds of the divisible lines."""
    out = list(qz_torsion_generators(group))
    for g in group.presentation.divisible_lines:
        for t in (Fraction(1, 2), Fraction(1, 3)):
            out.append(group.model.element([(t * c) % 1 for c in g], group.degree, "QZ"))
    return out


def ladder_squares(data: GysinData, k):
    """Residuals of the squares between the Z, Q and Q/Z rows at reduced degree k.

    For each Gysin map f: f commutes with Z -> Q and Q -> Q/Z on cochains, and
    with the Bockstein on classes (up to the sign -1 for cup F, which is an
    anti-chain map).  Returns a list of dicts with a ``commutes`` verdict.
    """
    out = []
    tw = data.twist
    for name, (src, ds, dst, dd) in _LADDER.items():
        ks, kd = k + ds, k + dd
        if ks < 0 or kd < 0:
            continue
        src_model = {"cech": data.cech, "reduced": data.red, "bar": data.bar}[src]
        f = {"pullback": tw.pullback, "pushforward": tw.pushforward, "cupF": tw.cup_F}[name]
        ok = True
        for g in data.group(src, ks, "Z").generators():
            if f(g).with_ring("Q") != f(g.with_ring("Q")):
                ok = False
        out.append({"map": name, "degree": k, "square": "Z->Q", "commutes": ok})
        ok = True
        for g in data.group(src, ks, "Q").generators():
            if f(g).with_ring("QZ") != f(g.with_ring("QZ")):
                ok = False
        out.append({"map": name, "degree": k, "square": "Q->Q/Z", "commutes": ok})
        sign = -1 if name == "cupF" else 1
        target = data.group(dst, kd + 1, "Z")
        ok = True
        for x in _qz_test_classes(src_model.group(ks, "QZ")):
            lhs = bockstein(f(x), tw)
            rhs = f(bockstein(x, tw))
            if any(target.coordinates(lhs - rhs.scale(sign))):
                ok = False
        out.append({"map": name, "degree": k, "square": "bockstein", "sign": sign, "commutes": ok})
    return out


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


# ordered lifts ------------------------------------------------------------------------

def solve_ordered(twist: EulerTwist, k, rhs, bar=False, free=None):
    """An ordered integral cochain y of degree k with D y = rhs, or None.

    ``free`` optionally restricts the unknowns to basis labels it accepts.
    """
    apply = twist.Dbar if bar else twist.D
    model = (BarModel if bar else ReducedModel)(twist, normalized=False)
    labels = [lab for lab in model.basis(k) if free is None or free(lab)]
    row_index = {}
    rows = []

    def row_of(key, create):
        r = row_index.get(key)
        if r is None and create:
            r = row_index[key] = len(rows)
            rows.append({})
        return r

    for j, lab in enumerate(labels):
        img = apply(model.element(_unit(model, k, lab), k))
        for p, part in enumerate(img.parts):
            if part is None:
                continue
            for t, comps in part.values.items():
                for i, c in enumerate(comps):
                    if c:
                        rows[row_of((p, t, i), True)][j] = c
    b = [0] * len(rows)
    for p, part in enumerate(rhs.parts):
        if part is None:
            continue
        for t, comps in part.values.items():
            for i, c in enumerate(comps):
                if c:
                    if Fraction(c).denominator != 1:
                        return None
                    r = row_of((p, t, i), False)
                    if r is None:
                        return None
                    b[r] = int(c)
    sol = la.sparse_solve(rows, len(labels), b) if labels else (None if any(b) else [])
    if sol is None:
        return None
    vec = [0] * model.dim(k)
    idx = model.index(k)
    for lab, v in zip(labels, sol):
        if v:
            vec[idx[lab]] = v
    y = model.element(vec, k)
    if apply(y) != rhs.with_ring("Z"):
        raise VerificationError("sparse solve returned a wrong primitive")
    return y


def ordered_lift(x, twist: EulerTwist):
    """An ordered closed cochain whose restriction to increasing tuples is x.

    Starts from the alternating extension a(x) and subtracts a solution z,
    supported off the increasing tuples, of D z = D a(x).
    """
    if not x.normalized:
        return x
    if isinstance(x, Cochain):
        return alternating_extension(x)
    bar = isinstance(x, ReducedBarCochain)
    ext = x._make([None if a is None else alternating_extension(a) for a in x.parts])
    rhs = (twist.Dbar if bar else twist.D)(ext)
    if rhs.is_zero():
        return ext
    z = solve_ordered(twist, x.degree, rhs, bar,
                      free=lambda lab: any(a >= b for a, b in zip(lab[1], lab[1][1:])))
    if z is None:
        raise VerificationError("no integral ordered lift found", witness=x.to_json())
    return ext - z


def _unit(model, k, lab):
    v = [0] * model.dim(k)
    v[model.index(k)[lab]] = 1
    return v


def random_closed(twist: EulerTwist, k, rng: random.Random, ring="Z", normalized=False, classes=(), nnz=3):
    """A random D_F-closed reduced cochain: coboundary plus combination of given cocycles."""
    y = twist.random(k - 1, rng, ring, normalized, nnz) if k >= 1 else None
    x = twist.D(y) if y is not None else twist.zero(k, ring, normalized)
    for c in classes:
        x = x + c.scale(rng.randint(-2, 2))
    return x


def as_ordered_reduced(x):
    return x._make([None if a is None else as_ordered(a) for a in x.parts])
