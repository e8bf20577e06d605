"""Ordered Cech cochains on a star cover, the Cech differential and the
products used by the reduced complexes.

A cochain of degree k assigns a coefficient to every ordered (k+1)-tuple of
vertices whose support is a simplex (repeats allowed).  Storage is sparse:
absent tuples carry zero.  Values are always stored as a tuple of
components, so a scalar value is a 1-tuple, a vector(n) value an n-tuple and
an upper_matrix(n) value has one entry per pair i<j in lexicographic order.

A cochain may be marked ``normalized``: it then lives on strictly increasing
tuples only.  Every operation here evaluates its output on a tuple using
values on subsequences of that tuple, so restricting to increasing tuples
commutes with all of them.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import defaultdict
from fractions import Fraction

from .complex import SimplicialComplex

RINGS = ("Z", "Q", "QZ", "PP")
SHAPES = ("scalar", "vector", "upper_matrix")


class CochainError(ValueError):
    pass


def matrix_pairs(n: int):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


class CoefficientModule:
    """A coefficient ring together with a value shape."""

    __slots__ = ("ring", "shape", "n", "ncomp", "pairs")

    def __init__(self, ring: str = "Z", shape: str = "scalar", n: int = 1):
        if ring not in RINGS:
            raise CochainError(f"unknown ring {ring!r}")
        if shape not in SHAPES:
            raise CochainError(f"unknown shape {shape!r}")
        self.ring = ring
        self.shape = shape
        self.n = 1 if shape == "scalar" else int(n)
        if shape == "scalar":
            self.ncomp = 1
        elif shape == "vector":
            self.ncomp = self.n
        else:
            self.ncomp = self.n * (self.n - 1) // 2
        self.pairs = matrix_pairs(self.n) if shape == "upper_matrix" else None

    def __eq__(self, other):
        return (
            isinstance(other, CoefficientModule)
            and (self.ring, self.shape, self.n) == (other.ring, other.shape, other.n)
        )

    def __hash__(self):
        return hash((self.ring, self.shape, self.n))

    def __repr__(self):
        if self.shape == "scalar":
            return f"{self.ring}"
        return f"{self.ring}:{self.shape}({self.n})"

    def with_shape(self, shape, n=None):
        return CoefficientModule(self.ring, shape, self.n if n is None else n)

    def with_ring(self, ring):
        return CoefficientModule(ring, self.shape, self.n)

    def shape_label(self):
        return "scalar" if self.shape == "scalar" else f"{self.shape}({self.n})"

    def convert(self, x):
        """Coerce a raw component into this ring."""
        if self.ring == "Z":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise CochainError(f"{x} is not an integer")
                return int(x)
            if isinstance(x, bool) or not isinstance(x, int):
                raise CochainError(f"{x!r} is not an integer")
            return x
        if self.ring == "Q":
            return Fraction(x)
        if self.ring == "QZ":
            return Fraction(x) % 1
        return x

    def is_zero(self, c) -> bool:
        if self.ring == "PP":
            return c.is_zero()
        return c == 0


def _zero_comps(coeff):
    return (0,) * coeff.ncomp


def _finalize(coeff, comps, t):
    """Normalize a freshly computed value; returns None when it vanishes."""
    if coeff.ring == "QZ":
        comps = tuple(Fraction(c) % 1 for c in comps)
    elif coeff.ring == "PP":
        comps = tuple(c.restrict(t) if not isinstance(c, (int, Fraction)) else c for c in comps)
    if all(coeff.is_zero(c) if not isinstance(c, (int, Fraction)) else c == 0 for c in comps):
        return None
    return comps


class Cochain:
    """An ordered Cech cochain with sparse storage."""

    __slots__ = ("complex", "degree", "coeff", "values", "normalized")

    def __init__(self, K: SimplicialComplex, degree: int, coeff: CoefficientModule,
                 values=None, normalized: bool = False, check: bool = True):
        self.complex = K
        self.degree = degree
        self.coeff = coeff
        self.normalized = normalized
        vals = {}
        if values:
            for t, v in values.items():
                t = tuple(t)
                if not isinstance(v, tuple):
                    v = tuple(v) if isinstance(v, list) else (v,)
                if check:
                    if len(t) != degree + 1:
                        raise CochainError(f"tuple {t} has wrong length for degree {degree}")
                    if not K.spans_simplex(t):
                        raise CochainError(f"tuple {t} does not span a simplex")
                    if normalized and any(a >= b for a, b in zip(t, t[1:])):
                        raise CochainError(f"tuple {t} is not increasing in a normalized cochain")
                    if len(v) != coeff.ncomp:
                        raise CochainError(f"value at {t} has {len(v)} components, expected {coeff.ncomp}")
                    v = tuple(coeff.convert(c) for c in v)
                fv = _finalize(coeff, v, t)
                if fv is not None:
                    vals[t] = fv
        self.values = vals

    # basic access -------------------------------------------------------
    def __getitem__(self, t):
        return self.values.get(tuple(t), _zero_comps(self.coeff))

    def get(self, t):
        return self.values.get(t)

    def __len__(self):
        return len(self.values)

    def support(self):
        return sorted(self.values)

    def is_zero(self) -> bool:
        return not self.values

    def __repr__(self):
        return f"Cochain(deg={self.degree}, coeff={self.coeff!r}, nnz={len(self.values)})"

    def _compatible(self, other):
        if not isinstance(other, Cochain):
            raise CochainError("expected a Cochain")
        if other.complex != self.complex or other.degree != self.degree or other.coeff != self.coeff:
            raise CochainError("cochains live on different complexes, degrees or coefficients")
        if other.normalized != self.normalized:
            raise CochainError("cannot mix normalized and ordered cochains")

    def _new(self, values, coeff=None, degree=None):
        return Cochain(self.complex, self.degree if degree is None else degree,
                       coeff or self.coeff, values, self.normalized, check=False)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        self._compatible(other)
        out = dict(self.values)
        for t, v in other.values.items():
            w = out.get(t)
            out[t] = v if w is None else tuple(a + b for a, b in zip(w, v))
        return self._new(out)

    def __neg__(self):
        return self._new({t: tuple(-c for c in v) for t, v in self.values.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        if s == 0:
            return self._new({})
        return self._new({t: tuple(c * s for c in v) for t, v in self.values.items()})

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        try:
            self._compatible(other)
        except CochainError:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def component(self, i: int):
        """The scalar cochain of component i."""
        c = CoefficientModule(self.coeff.ring)
        return self._new({t: (v[i],) for t, v in self.values.items()}, coeff=c)

    def with_ring(self, ring):
        c = self.coeff.with_ring(ring)
        return Cochain(self.complex, self.degree, c, dict(self.values), self.normalized)

    # serialization ----------------------------------------------------------
    def to_json(self):
        def enc(x):
            if isinstance(x, Fraction):
                return str(x) if x.denominator != 1 else int(x)
            if hasattr(x, "to_json"):
                return x.to_json()
            return x

        entries = []
        for t in sorted(self.values):
            v = self.values[t]
            val = enc(v[0]) if self.coeff.shape == "scalar" else [enc(c) for c in v]
            entries.append([list(t), val])
        return {
            "degree": self.degree,
            "coeff": {"ring": self.coeff.ring, "shape": self.coeff.shape_label()},
            "entries": entries,
        }


def parse_shape(label: str):
    label = label.strip()
    if label == "scalar":
        return "scalar", 1
    for shape in ("vector", "upper_matrix"):
        if label.startswith(shape + "(") and label.endswith(")"):
            return shape, int(label[len(shape) + 1:-1])
    raise CochainError(f"bad shape label {label!r}")


def _parse_value(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def cochain_from_json(K, data, normalized=False, ring=None) -> Cochain:
    try:
        degree = int(data["degree"])
        shape, n = parse_shape(data["coeff"]["shape"])
        ring = ring or data["coeff"].get("ring", "Z")
        coeff = CoefficientModule(ring, shape, n)
        values = {}
        for t, v in data["entries"]:
            comps = (_parse_value(v),) if shape == "scalar" else tuple(_parse_value(c) for c in v)
            values[tuple(t)] = comps
    except (KeyError, TypeError, ValueError) as exc:
        raise CochainError(f"malformed cochain JSON: {exc}") from exc
    return Cochain(K, degree, coeff, values, normalized=normalized)


def zero_cochain(K, degree, coeff, normalized=False):
    return Cochain(K, degree, coeff, {}, normalized, check=False)


def _is_increasing(t):
    return all(a < b for a, b in zip(t, t[1:]))


def _accept(K, t, normalized):
    if normalized and not _is_increasing(t):
        return False
    return K.spans_simplex(t)


# Cech differential ------------------------------------------------------------

def coface_candidates(phi: Cochain):
    """Tuples of length k+2 having at least one face in the support of phi."""
    K = phi.complex
    cands = set()
    for s in phi.values:
        ext = K.extension_vertices(s)
        for i in range(len(s) + 1):
            head, tail = s[:i], s[i:]
            for v in ext:
                t = head + (v,) + tail
                if phi.normalized and not _is_increasing(t):
                    continue
                cands.add(t)
    return cands


def cech_d(phi: Cochain) -> Cochain:
    """(d phi)_{t0..t(k+1)} = sum_i (-1)^i phi_{t0..^ti..t(k+1)}."""
    K = phi.complex
    coeff = phi.coeff
    vals = phi.values
    out = {}
    for t in coface_candidates(phi):
        acc = None
        for i in range(len(t)):
            v = vals.get(t[:i] + t[i + 1:])
            if v is None:
                continue
            if i % 2:
                v = tuple(-c for c in v)
            acc = v if acc is None else tuple(a + b for a, b in zip(acc, v))
        if acc is None:
            continue
        fv = _finalize(coeff, acc, t)
        if fv is not None:
            out[t] = fv
    return Cochain(K, phi.degree + 1, coeff, out, phi.normalized, check=False)


# products ------------------------------------------------------------------

def _front_back_product(alpha: Cochain, beta: Cochain, pairing, out_coeff) -> Cochain:
    """Generic (a . b)_{t} = pairing(alpha_{front}, beta_{back}) sharing one vertex."""
    if alpha.complex != beta.complex:
        raise CochainError("cochains live on different complexes")
    if not alpha.normalized and beta.normalized:
        raise CochainError("an ordered cochain cannot be multiplied by a normalized one")
    K = alpha.complex
    normalized = alpha.normalized
    by_first = defaultdict(list)
    for b, vb in beta.values.items():
        by_first[b[0]].append((b[1:], vb))
    acc = {}
    for a, va in alpha.values.items():
        for btail, vb in by_first.get(a[-1], ()):
            t = a + btail
            if not _accept(K, t, normalized):
                continue
            val = pairing(va, vb)
            if val is None:
                continue
            w = acc.get(t)
            acc[t] = val if w is None else tuple(x + y for x, y in zip(w, val))
    out = {}
    for t, v in acc.items():
        fv = _finalize(out_coeff, v, t)
        if fv is not None:
            out[t] = fv
    return Cochain(K, alpha.degree + beta.degree, out_coeff, out, normalized, check=False)


def cup(alpha: Cochain, beta: Cochain) -> Cochain:
    """Front-face/back-face cup product of scalar cochains."""
    if alpha.coeff.shape != "scalar" or beta.coeff.shape != "scalar":
        raise CochainError("cup expects scalar cochains")
    if alpha.coeff.ring != beta.coeff.ring:
        raise CochainError("cup expects a common coefficient ring")
    return _front_back_product(alpha, beta, lambda a, b: (a[0] * b[0],), alpha.coeff)


def _check_euler(F: Cochain, n=None):
    if F.degree != 2 or F.coeff.shape != "vector":
        raise CochainError("Euler cocycle must be a degree-2 vector cochain")
    if n is not None and F.coeff.n != n:
        raise CochainError(f"dimension mismatch: Euler cocycle has n={F.coeff.n}, expected {n}")


def _check_vector_factor(A: Cochain, n):
    if A.coeff.shape != "vector" or A.coeff.n != n:
        raise CochainError(f"right factor must be a vector({n}) cochain")


def cup1_vector(phi: Cochain, F: Cochain) -> Cochain:
    """(phi u1 F)_{l0..l(k+1)} = sum_l phi_{l0..l(k-1), l} F_{l(k-1) l(k) l(k+1), l}.

    F is normally the Euler cocycle; any vector right factor is accepted.
    """
    if phi.coeff.shape != "vector":
        raise CochainError("cup1_vector expects a vector cochain")
    _check_vector_factor(F, phi.coeff.n)
    n = phi.coeff.n

    def pair(a, b):
        return (sum(a[l] * b[l] for l in range(n)),)

    return _front_back_product(phi, F, pair, phi.coeff.with_shape("scalar"))


def cup1_matrix(phi: Cochain, F: Cochain) -> Cochain:
    """Matrix-by-vector product: component l is
    sum_{i<l} phi_{il} F_i - sum_{l<j} phi_{lj} F_j."""
    if phi.coeff.shape != "upper_matrix":
        raise CochainError("cup1_matrix expects an upper_matrix cochain")
    _check_vector_factor(F, phi.coeff.n)
    n = phi.coeff.n
    pairs = phi.coeff.pairs

    def pair(a, b):
        out = [0] * n
        for p, (i, j) in enumerate(pairs):
            c = a[p]
            if isinstance(c, int) and c == 0:
                continue
            out[j] = out[j] + c * b[i]
            out[i] = out[i] - c * b[j]
        return tuple(out)

    return _front_back_product(phi, F, pair, phi.coeff.with_shape("vector", n))


def cup2(phi: Cochain, B: Cochain) -> Cochain:
    """(phi u2 B)_{l0..l(k+1)} = sum_{i<j} phi_{l0..l(k-2), ij} B_{l(k-2)..l(k+1), ij}.

    B is C(F) in the reduced differential; other degrees are allowed.
    """
    if phi.coeff.shape != "upper_matrix" or B.coeff.shape != "upper_matrix":
        raise CochainError("cup2 expects two upper_matrix cochains")
    if phi.coeff.n != B.coeff.n:
        raise CochainError("dimension mismatch in cup2")
    m = phi.coeff.ncomp

    def pair(a, b):
        return (sum(a[p] * b[p] for p in range(m)),)

    return _front_back_product(phi, B, pair, phi.coeff.with_shape("scalar"))


def commutator_cochain(F: Cochain, check: bool = True) -> Cochain:
    """C(F)_{l0l1l2l3, ij} = F_{l0l1l2,i} F_{l0l2l3,j} - F_{l1l2l3,i} F_{l0l1l3,j}."""
    _check_euler(F)
    if check and not cech_d(F).is_zero():
        raise CochainError("F is not a Cech cocycle")
    K = F.complex
    n = F.coeff.n
    pairs = matrix_pairs(n)
    coeff = CoefficientModule(F.coeff.ring, "upper_matrix", n)
    vals = F.values
    by_first = defaultdict(list)
    for f in vals:
        by_first[f[0]].append(f)
    cands = set()
    for a in vals:
        for b in by_first[a[0]]:
            # first term: a = (t0 t1 t2), b = (t0 t2 t3)
            if b[1] == a[2]:
                cands.add((a[0], a[1], a[2], b[2]))
            # second term: a = (t1 t2 t3), b = (t0 t1 t3); here b[1] == a[0]
    for a in vals:
        for c in vals:
            if c[1] == a[0] and c[2] == a[2]:
                cands.add((c[0], a[0], a[1], a[2]))
    out = {}
    zero = _zero_comps(F.coeff)
    for t in cands:
        if not _accept(K, t, F.normalized):
            continue
        t0, t1, t2, t3 = t
        f012 = vals.get((t0, t1, t2), zero)
        f023 = vals.get((t0, t2, t3), zero)
        f123 = vals.get((t1, t2, t3), zero)
        f013 = vals.get((t0, t1, t3), zero)
        comps = tuple(f012[i] * f023[j] - f123[i] * f013[j] for i, j in pairs)
        fv = _finalize(coeff, comps, t)
        if fv is not None:
            out[t] = fv
    return Cochain(K, 3, coeff, out, F.normalized, check=False)


# alternating cochains ------------------------------------------------------

def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _orbit(t):
    """Distinct permutations of t with the sign taking t to them (0 if degenerate)."""
    if len(set(t)) < len(t):
        return None
    out = []
    for perm in itertools.permutations(range(len(t))):
        out.append((tuple(t[p] for p in perm), _perm_sign(perm)))
    return out


def is_alternating(phi: Cochain) -> bool:
    for t, v in phi.values.items():
        orb = _orbit(t)
        if orb is None:
            return False
        for u, s in orb:
            w = phi[u]
            if any(a != s * b for a, b in zip(w, v)):
                return False
    return True


def alternate(phi: Cochain) -> Cochain:
    """Projection onto alternating cochains, (1/(k+1)!) sum_s sign(s) phi_{s t}."""
    if phi.normalized:
        raise CochainError("alternate acts on ordered cochains")
    k1 = phi.degree + 1
    fact = math.factorial(k1)
    cands = set()
    for t in phi.values:
        if len(set(t)) == len(t):
            for u, _ in _orbit(t):
                cands.add(u)
    out = {}
    for t in cands:
        acc = [0] * phi.coeff.ncomp
        for u, s in _orbit(t):
            v = phi.values.get(u)
            if v is not None:
                for i, c in enumerate(v):
                    acc[i] += s * c
        # acc is the signed sum over the orbit of t
        if phi.coeff.ring == "Z":
            if any(c % fact for c in acc):
                raise CochainError("alternation is not integral for this cochain")
            comps = tuple(c // fact for c in acc)
        else:
            comps = tuple(Fraction(c) / fact for c in acc)
        fv = _finalize(phi.coeff, comps, t)
        if fv is not None:
            out[t] = fv
    return Cochain(phi.complex, phi.degree, phi.coeff, out, False, check=False)


def alternating_extension(phi: Cochain) -> Cochain:
    """Extend a cochain given on increasing tuples to the alternating ordered cochain."""
    out = {}
    for t, v in phi.values.items():
        if not _is_increasing(t):
            raise CochainError("alternating_extension expects values on increasing tuples")
        for u, s in _orbit(t):
            out[u] = v if s == 1 else tuple(-c for c in v)
    return Cochain(phi.complex, phi.degree, phi.coeff, out, False, check=False)


def restrict_increasing(phi: Cochain) -> Cochain:
    """Restriction to strictly increasing tuples (a chain map for every operation here)."""
    out = {t: v for t, v in phi.values.items() if _is_increasing(t)}
    return Cochain(phi.complex, phi.degree, phi.coeff, out, True, check=False)


def as_ordered(phi: Cochain) -> Cochain:
    """Reinterpret a normalized cochain as an ordered one (extension by zero)."""
    return Cochain(phi.complex, phi.degree, phi.coeff, dict(phi.values), False, check=False)


# random cochains --------------------------------------------------------------

def random_value(coeff, rng: random.Random, bound=3):
    if coeff.ring == "Z":
        return tuple(rng.randint(-bound, bound) for _ in range(coeff.ncomp))
    if coeff.ring == "Q":
        return tuple(Fraction(rng.randint(-bound * 4, bound * 4), rng.randint(1, 4)) for _ in range(coeff.ncomp))
    if coeff.ring == "QZ":
        return tuple(Fraction(rng.randint(0, 11), 12) for _ in range(coeff.ncomp))
    raise CochainError("random values need a constant ring")


def random_cochain(K, degree, coeff, rng: random.Random, nnz=4, normalized=False, bound=3) -> Cochain:
    """A sparse random cochain with about ``nnz`` nonzero tuples."""
    if degree < 0:
        return zero_cochain(K, degree, coeff, normalized)
    vals = {}
    simplices = [s for d in range(min(degree, K.dim) + 1) for s in K.simplices(d)]
    if normalized:
        pool = K.simplices(degree)
        if not pool:
            return zero_cochain(K, degree, coeff, normalized)
    for _ in range(nnz):
        if normalized:
            t = rng.choice(pool)
        else:
            s = rng.choice(simplices)
            while True:
                t = tuple(rng.choice(s) for _ in range(degree + 1))
                if len(set(t)) == len(s):
                    break
        vals[t] = random_value(coeff, rng, bound)
    return Cochain(K, degree, coeff, vals, normalized, check=False)
