"""Finite simplicial complexes used as the nerve of their own open star cover.

The open star cover {st(v)} of a simplicial complex is a good cover whose
nerve is the complex itself, so an intersection W_{l0} n ... n W_{lk} is
nonempty exactly when the distinct entries of (l0, ..., lk) span a simplex.
"""

from __future__ import annotations

import itertools
import json
import warnings
from functools import lru_cache
from importlib import resources

FIXTURE_NAMES = ("circle3", "sphere2", "torus7", "rp2_6", "sphere3")


class ComplexError(ValueError):
    pass


class SimplicialComplex:
    """Immutable simplicial complex on vertices 0..vertex_count-1."""

    def __init__(self, vertex_count: int, facets):
        self.vertex_count = int(vertex_count)
        self.facets = tuple(sorted(tuple(f) for f in facets))
        simplices = set()
        for f in self.facets:
            for r in range(1, len(f) + 1):
                simplices.update(itertools.combinations(f, r))
        self._simplex_set = frozenset(frozenset(s) for s in simplices)
        self.dim = max(len(f) for f in self.facets) - 1
        by_dim = [[] for _ in range(self.dim + 1)]
        for s in simplices:
            by_dim[len(s) - 1].append(s)
        self._by_dim = tuple(tuple(sorted(level)) for level in by_dim)
        self._facets_over = {}
        self._extend = {}

    def __repr__(self):
        counts = ", ".join(str(len(level)) for level in self._by_dim)
        return f"SimplicialComplex(vertices={self.vertex_count}, f=({counts}))"

    def __eq__(self, other):
        return (
            isinstance(other, SimplicialComplex)
            and self.vertex_count == other.vertex_count
            and self.facets == other.facets
        )

    def __hash__(self):
        return hash((self.vertex_count, self.facets))

    def simplices(self, k: int):
        """All k-simplices as increasing tuples, in lexicographic order."""
        if k < 0 or k > self.dim:
            return []
        return list(self._by_dim[k])

    def face_counts(self):
        return [len(level) for level in self._by_dim]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.face_counts()))

    def is_simplex(self, vertex_set) -> bool:
        return frozenset(vertex_set) in self._simplex_set

    def spans_simplex(self, t) -> bool:
        return len(t) > 0 and frozenset(t) in self._simplex_set

    def facets_containing(self, vertex_set):
        """Facets containing the given simplex; these carry the open star."""
        key = frozenset(vertex_set)
        hit = self._facets_over.get(key)
        if hit is None:
            hit = tuple(f for f in self.facets if key.issubset(f))
            self._facets_over[key] = hit
        return hit

    def extension_vertices(self, vertex_set):
        """Vertices v such that vertex_set plus v is still a simplex."""
        key = frozenset(vertex_set)
        hit = self._extend.get(key)
        if hit is None:
            verts = set()
            for f in self.facets_containing(key):
                verts.update(f)
            hit = tuple(sorted(verts))
            self._extend[key] = hit
        return hit

    def ordered_tuples(self, k: int, increasing: bool = False):
        """Spanning tuples of length k+1 in a canonical order.

        With ``increasing`` only strictly increasing tuples (the simplices
        themselves) are listed; otherwise every ordered tuple with repeats
        whose support is a simplex.
        """
        if k < 0:
            return []
        if increasing:
            return self.simplices(k)
        out = []
        for d in range(min(k, self.dim) + 1):
            for s in self._by_dim[d]:
                for t in itertools.product(s, repeat=k + 1):
                    if len(set(t)) == d + 1:
                        out.append(t)
        out.sort()
        return out

    def to_json(self):
        return {"vertices": self.vertex_count, "facets": [list(f) for f in self.facets]}


def build_complex(facets, vertex_count=None) -> SimplicialComplex:
    """Normalize a facet list into a complex; nested facets are absorbed."""
    facets = [tuple(f) for f in facets]
    if not facets:
        raise ComplexError("empty facet list")
    cleaned = set()
    for f in facets:
        if not f:
            raise ComplexError("empty facet")
        if any((not isinstance(v, int)) or isinstance(v, bool) or v < 0 for v in f):
            raise ComplexError(f"facet {f!r} has non-natural vertex indices")
        if len(set(f)) != len(f):
            raise ComplexError(f"facet {f!r} repeats a vertex")
        cleaned.add(tuple(sorted(f)))
    maximal = [f for f in cleaned if not any(f != g and set(f) < set(g) for g in cleaned)]
    if len(maximal) != len(cleaned):
        warnings.warn("nested facets were absorbed into larger facets", stacklevel=2)
    used = {v for f in maximal for v in f}
    if vertex_count is None:
        vertex_count = max(used) + 1
    if max(used) >= vertex_count:
        raise ComplexError("vertex index out of range")
    if len(used) != vertex_count:
        missing = sorted(set(range(vertex_count)) - used)
        raise ComplexError(f"vertices {missing} lie in no facet")
    return SimplicialComplex(vertex_count, maximal)


def complex_from_json(data) -> SimplicialComplex:
    if not isinstance(data, dict) or "facets" not in data:
        raise ComplexError("complex JSON needs a 'facets' list")
    return build_complex(data["facets"], data.get("vertices"))


@lru_cache(maxsize=None)
def fixture(name: str) -> SimplicialComplex:
    if name not in FIXTURE_NAMES:
        raise ComplexError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")
    text = resources.files("reducedcech").joinpath("data", f"{name}.json").read_text()
    return complex_from_json(json.loads(text))
