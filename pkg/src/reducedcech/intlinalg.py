"""Exact integer and rational linear algebra.

Dense matrices are lists of rows of Python ints.  The module provides Smith
and Hermite normal forms, kernel lattices, Diophantine solving, presentations
of subquotients of lattices, induced maps between presented groups, and a
sparse unit-pivot elimination used for the large ordered complexes.
"""

from __future__ import annotations

import heapq
from fractions import Fraction


class LinAlgError(ValueError):
    pass


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def zeros(m, n):
    return [[0] * n for _ in range(m)]


def shape(M, cols=None):
    m = len(M)
    n = len(M[0]) if m else (cols or 0)
    return m, n


def mat_mul(A, B):
    n = len(B[0]) if B else 0
    out = []
    for row in A:
        acc = [0] * n
        for a, brow in zip(row, B):
            if a:
                for j, b in enumerate(brow):
                    if b:
                        acc[j] += a * b
        out.append(acc)
    return out


def mat_vec(A, x):
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def transpose(A, rows_if_empty=0):
    if not A:
        return [[] for _ in range(rows_if_empty)]
    return [list(c) for c in zip(*A)]


def columns_to_matrix(cols, m):
    """Matrix (list of rows) whose columns are the given vectors of length m."""
    return [[c[i] for c in cols] for i in range(m)]


def determinant(M):
    """Exact determinant via fraction-free Bareiss elimination."""
    n = len(M)
    if n == 0:
        return 1
    A = [row[:] for row in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


# Smith normal form -------------------------------------------------------------

def smith_normal_form(M, cols=None, transforms=True, want_inverse=False):
    """Return (U, D, V) with U*M*V = D, D diagonal with d1 | d2 | ...

    Pivot choice is the nonzero entry of least absolute value, ties broken by
    the lexicographically smallest (row, column).  With ``want_inverse`` a
    fourth item U^{-1} is returned.
    """
    m, n = shape(M, cols)
    A = [list(row) for row in M]
    U = identity(m) if transforms else None
    V = identity(n) if transforms else None
    Ui = identity(m) if (transforms and want_inverse) else None

    def swap_rows(i, j):
        if i == j:
            return
        A[i], A[j] = A[j], A[i]
        if U is not None:
            U[i], U[j] = U[j], U[i]
        if Ui is not None:
            for row in Ui:
                row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        if i == j:
            return
        for row in A:
            row[i], row[j] = row[j], row[i]
        if V is not None:
            for row in V:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        if q == 0:
            return
        rs, rd = A[src], A[dst]
        for j in range(n):
            if rs[j]:
                rd[j] += q * rs[j]
        if U is not None:
            us, ud = U[src], U[dst]
            for j in range(m):
                if us[j]:
                    ud[j] += q * us[j]
        if Ui is not None:
            for row in Ui:
                if row[dst]:
                    row[src] -= q * row[dst]

    def add_col(dst, src, q):
        if q == 0:
            return
        for row in A:
            if row[src]:
                row[dst] += q * row[src]
        if V is not None:
            for row in V:
                if row[src]:
                    row[dst] += q * row[src]

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                a = row[j]
                if a:
                    key = (abs(a), i, j)
                    if best is None or key < best:
                        best = key
        if best is None:
            break
        _, bi, bj = best
        swap_rows(t, bi)
        swap_cols(t, bj)
        while True:
            p = A[t][t]
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    if A[i][t]:
                        clean = False
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    if A[t][j]:
                        clean = False
            if not clean:
                best = None
                for i in range(t, m):
                    a = A[i][t]
                    if a and (best is None or (abs(a), i, t) < best):
                        best = (abs(a), i, t)
                for j in range(t, n):
                    a = A[t][j]
                    if a and (best is None or (abs(a), t, j) < best):
                        best = (abs(a), t, j)
                _, bi, bj = best
                swap_rows(t, bi)
                swap_cols(t, bj)
                continue
            bad = None
            for i in range(t + 1, m):
                row = A[i]
                for j in range(t + 1, n):
                    if row[j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            if U is not None:
                U[t] = [-a for a in U[t]]
            if Ui is not None:
                for row in Ui:
                    row[t] = -row[t]
    if want_inverse:
        return U, A, V, Ui
    return U, A, V


def diagonal(D):
    m, n = shape(D)
    return [D[i][i] for i in range(min(m, n))]


def invariant_factors(M, cols=None):
    """Nonzero diagonal of the Smith form of M."""
    _, D, _ = smith_normal_form(M, cols, transforms=False)
    return [d for d in diagonal(D) if d]


# Hermite normal form -------------------------------------------------------------

def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hermite_rows(rows, n=None):
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Pivots are positive, entries above a pivot are reduced into [0, pivot),
    and zero rows are dropped, so the result is canonical for the lattice.
    """
    A = [list(r) for r in rows]
    if not A:
        return []
    n = len(A[0]) if n is None else n
    r = 0
    for c in range(n):
        if r >= len(A):
            break
        nz = [i for i in range(r, len(A)) if A[i][c]]
        if not nz:
            continue
        i0 = nz[0]
        A[r], A[i0] = A[i0], A[r]
        for i in range(r + 1, len(A)):
            if A[i][c]:
                a, b = A[r][c], A[i][c]
                g, x, y = _xgcd(a, b)
                ra, rb = A[r], A[i]
                new_r = [x * u + y * v for u, v in zip(ra, rb)]
                new_i = [(a // g) * v - (b // g) * u for u, v in zip(ra, rb)]
                A[r], A[i] = new_r, new_i
        if A[r][c] < 0:
            A[r] = [-u for u in A[r]]
        p = A[r][c]
        for i in range(r):
            q = A[i][c] // p
            if q:
                A[i] = [u - q * v for u, v in zip(A[i], A[r])]
        r += 1
    return [row for row in A[:r] if any(row)]


# kernels and solving ----------------------------------------------------------

def kernel_lattice(M, cols=None):
    """Basis vectors (Hermite-reduced) of {x in Z^cols : M x = 0}."""
    m, n = shape(M, cols)
    if n == 0:
        return []
    if m == 0:
        return [row for row in identity(n)]
    _, D, V = smith_normal_form(M, n)
    rank = sum(1 for d in diagonal(D) if d)
    basis = [[V[i][j] for i in range(n)] for j in range(rank, n)]
    return hermite_rows(basis, n)


class SmithSolver:
    """Factor M once and answer Diophantine queries M x = b."""

    def __init__(self, M, cols=None):
        self.m, self.n = shape(M, cols)
        if self.m and self.n:
            self.U, self.D, self.V = smith_normal_form(M, self.n)
            self.diag = diagonal(self.D)
        else:
            self.U, self.D, self.V = identity(self.m), M, identity(self.n)
            self.diag = []
        self.rank = sum(1 for d in self.diag if d)

    def solve(self, b):
        if len(b) != self.m:
            raise LinAlgError("right-hand side has wrong length")
        c = mat_vec(self.U, b) if self.m else []
        y = [0] * self.n
        for i in range(self.rank):
            q, r = divmod(c[i], self.diag[i])
            if r:
                return None
            y[i] = q
        for i in range(self.rank, self.m):
            if c[i]:
                return None
        return mat_vec(self.V, y) if self.n else []


def solve_diophantine(M, b, cols=None):
    """An integer x with M x = b, or None when no integer solution exists."""
    return SmithSolver(M, cols).solve(list(b))


# rational linear algebra --------------------------------------------------------

def rref_q(M, n=None):
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    A = [[Fraction(a) for a in row] for row in M]
    if not A:
        return [], []
    n = len(A[0]) if n is None else n
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [a * inv for a in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def rank_q(M, cols=None):
    return len(rref_q(M, cols)[1])


def nullspace_q(M, cols=None):
    m, n = shape(M, cols)
    if m == 0:
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    R, piv = rref_q(M, n)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(R, piv):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def solve_q(M, b, cols=None):
    m, n = shape(M, cols)
    if m == 0:
        return [Fraction(0)] * n
    aug = [list(row) + [bi] for row, bi in zip(M, b)]
    R, piv = rref_q(aug, n + 1)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for row, pc in zip(R, piv):
        x[pc] = row[n]
    return x


# presentations ---------------------------------------------------------------------

class AbelianGroupPresentation:
    """A finitely generated abelian group Z^r + Z/d1 + ... with d1 | d2 | ...

    ``generators`` are ambient integer vectors: free generators first, then
    one generator per invariant factor.  ``coordinates`` expresses a lattice
    vector in these generators (torsion coordinates reduced mod d).
    """

    def __init__(self, free_rank, torsion, generators, ambient_dim,
                 lattice=None, change=None, order=None, relations=None):
        self.free_rank = free_rank
        self.torsion = list(torsion)
        self.generators = [list(g) for g in generators]
        self.ambient_dim = ambient_dim
        self._lattice = lattice or []
        self._change = change
        self._order = order or []
        self._relations = relations or []
        self._solver = None
        if any(d < 2 for d in self.torsion):
            raise LinAlgError("invariant factors must be at least 2")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise LinAlgError("invariant factors must form a divisibility chain")

    @property
    def invariant_factors(self):
        return self.torsion

    @property
    def moduli(self):
        """Order of each generator's coordinate: 0 for free, d for torsion."""
        return [0] * self.free_rank + self.torsion

    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion

    def order(self):
        if self.free_rank:
            return 0
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def describe(self):
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"AbelianGroupPresentation({self.describe()})"

    def signature(self):
        return (self.free_rank, tuple(self.torsion))

    def lattice_coordinates(self, v):
        """Coordinates of v in the lattice basis, or None if v is outside it."""
        if not self._lattice:
            return [] if not any(v) else None
        if self._solver is None:
            self._solver = SmithSolver(columns_to_matrix(self._lattice, self.ambient_dim), len(self._lattice))
        return self._solver.solve(list(v))

    def contains(self, v):
        return self.lattice_coordinates(v) is not None

    def coordinates(self, v):
        x = self.lattice_coordinates(v)
        if x is None:
            raise LinAlgError("vector is not in the cycle lattice")
        if not x:
            return []
        y = mat_vec(self._change, x)
        out = []
        for idx, mod in zip(self._order, self.moduli):
            c = y[idx]
            out.append(c % mod if mod else c)
        return out

    def is_zero_class(self, v):
        return not any(self.coordinates(v))

    def relation_vectors(self):
        """Ambient vectors spanning the relations (image lattice)."""
        return [list(r) for r in self._relations]

    def to_json(self, encode_generator=None):
        enc = encode_generator or (lambda g: g)
        return {
            "free_rank": self.free_rank,
            "torsion": list(self.torsion),
            "generators": [enc(g) for g in self.generators],
        }


def subquotient(Z, B, ambient_dim=None):
    """Presentation of span(Z) / span(B) for integer vectors.

    ``Z`` must be linearly independent.  Raises LinAlgError when some column
    of B is not in the lattice spanned by Z.
    """
    if ambient_dim is None:
        vecs = list(Z) + list(B)
        ambient_dim = len(vecs[0]) if vecs else 0
    Z = [list(z) for z in Z]
    B = [list(b) for b in B if any(b)]
    r = len(Z)
    if r == 0:
        if B:
            raise LinAlgError("image is not contained in an empty cycle lattice")
        return AbelianGroupPresentation(0, [], [], ambient_dim)
    solver = SmithSolver(columns_to_matrix(Z, ambient_dim), r)
    if solver.rank != r:
        raise LinAlgError("cycle vectors are not independent")
    X = []
    for b in B:
        x = solver.solve(b)
        if x is None:
            raise LinAlgError("image vector not contained in the cycle lattice")
        X.append(x)
    if X:
        Xm = columns_to_matrix(X, r)
        U, D, _V, Ui = smith_normal_form(Xm, len(X), want_inverse=True)
        diag = diagonal(D)
    else:
        U, Ui, diag = identity(r), identity(r), []
    diag = diag + [0] * (r - len(diag))
    free_idx = [i for i in range(r) if diag[i] == 0]
    tors_idx = [i for i in range(r) if diag[i] not in (0, 1)]
    Zm = columns_to_matrix(Z, ambient_dim)

    def gen(i):
        col = [row[i] for row in Ui]
        return mat_vec(Zm, col)

    order = free_idx + tors_idx
    gens = [gen(i) for i in order]
    pres = AbelianGroupPresentation(
        len(free_idx), [diag[i] for i in tors_idx], gens, ambient_dim,
        lattice=Z, change=U, order=order, relations=B)
    pres._solver = solver
    return pres


def quotient_presentation(relations, m):
    """Presentation of Z^m / span(relations) in the standard basis."""
    return subquotient(identity(m), relations, m)


class InducedMap:
    """Matrix of a group homomorphism in chosen generators plus a certificate."""

    def __init__(self, matrix, src, dst, certificate):
        self.matrix = matrix
        self.src = src
        self.dst = dst
        self.certificate = certificate

    def apply(self, coords):
        out = []
        for row, mod in zip(self.matrix, self.dst.moduli):
            c = sum(a * b for a, b in zip(row, coords))
            out.append(c % mod if mod else c)
        return out

    def to_json(self):
        return {"matrix": self.matrix, "certificate": self.certificate}


class WellDefinednessError(LinAlgError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def induced_map(src: AbelianGroupPresentation, dst: AbelianGroupPresentation, f):
    """Group homomorphism induced by a cochain-level linear map f on vectors.

    Verifies that f sends every cycle-lattice basis vector of src to a cycle
    of dst and every relation of src to a relation of dst.
    """
    cycles_checked = 0
    for z in src._lattice:
        if not dst.contains(f(z)):
            raise WellDefinednessError("map does not send cycles to cycles", witness=z)
        cycles_checked += 1
    rel_checked = 0
    for b in src.relation_vectors():
        img = f(b)
        if not dst.contains(img) or any(dst.coordinates(img)):
            raise WellDefinednessError("map does not send relations to relations", witness=b)
        rel_checked += 1
    columns = [dst.coordinates(f(g)) for g in src.generators]
    matrix = columns_to_matrix(columns, len(dst.generators)) if columns else [[] for _ in dst.generators]
    cert = {"cycles_checked": cycles_checked, "relations_checked": rel_checked, "verified": True}
    return InducedMap(matrix, src, dst, cert)


def compose_zero(g: InducedMap, f: InducedMap):
    """True when g o f is the zero homomorphism."""
    for j in range(len(f.src.generators)):
        col = [row[j] for row in f.matrix]
        if any(g.apply(col)):
            return False
    return True


def homology_of_maps(f: InducedMap, g: InducedMap):
    """ker(g) / im(f) for f: A -> B, g: B -> C given g o f = 0.

    Works in the group coordinates of B, where B = Z^m / diag(moduli).
    """
    B = f.dst
    m = len(B.generators)
    C = g.dst
    mc = len(C.generators)
    # kernel of g on B: x in Z^m with g x in relations of C
    cols = []
    for j in range(m):
        cols.append([g.matrix[i][j] for i in range(mc)])
    block = []  # columns: g e_j, then -d_i e_i for torsion coordinates of C
    block.extend(cols)
    for i, mod in enumerate(C.moduli):
        if mod:
            v = [0] * mc
            v[i] = -mod
            block.append(v)
    if mc:
        K = kernel_lattice(columns_to_matrix(block, mc), len(block))
        ker = [vec[:m] for vec in K]
    else:
        ker = [row for row in identity(m)]
    ker = hermite_rows([v for v in ker if any(v)], m) if ker else []
    rels = []
    for j in range(len(f.src.generators)):
        rels.append([f.matrix[i][j] for i in range(m)])
    for i, mod in enumerate(B.moduli):
        if mod:
            v = [0] * m
            v[i] = mod
            rels.append(v)
    return subquotient(ker, rels, m)


# rational presentations ---------------------------------------------------------

class VectorSpacePresentation:
    """Z_Q / B_Q for rational cocycle and coboundary spaces."""

    def __init__(self, cycles, boundaries, ambient_dim):
        self.ambient_dim = ambient_dim
        bnd = [list(map(Fraction, b)) for b in boundaries if any(b)]
        cyc = [list(map(Fraction, z)) for z in cycles]
        basis = []
        rank = 0
        if bnd:
            R, piv = rref_q(bnd, ambient_dim)
            basis = [list(r) for r in R]
            rank = len(piv)
        gens = []
        for z in cyc:
            trial = basis + [z]
            r = rank_q(trial, ambient_dim)
            if r > rank:
                basis.append(z)
                rank = r
                gens.append(z)
        self._boundary_basis = basis[:len(basis) - len(gens)]
        self._cycle_span = cyc
        self.generators = gens
        self.free_rank = len(gens)
        self.torsion = []

    def describe(self):
        return "0" if not self.free_rank else ("Q" if self.free_rank == 1 else f"Q^{self.free_rank}")

    def signature(self):
        return (self.free_rank, ())

    def coordinates(self, v):
        cols = self._boundary_basis + self.generators
        if not cols:
            if any(v):
                raise LinAlgError("vector is not a cycle")
            return []
        M = columns_to_matrix(cols, self.ambient_dim)
        x = solve_q(M, [Fraction(a) for a in v], len(cols))
        if x is None:
            raise LinAlgError("vector is not a cycle")
        return x[len(self._boundary_basis):]

    def contains(self, v):
        try:
            self.coordinates(v)
            return True
        except LinAlgError:
            return False

    def to_json(self, encode_generator=None):
        enc = encode_generator or (lambda g: [str(a) for a in g])
        return {"free_rank": self.free_rank, "torsion": [], "generators": [enc(g) for g in self.generators]}


# sparse elimination -----------------------------------------------------------------

class SparseEliminator:
    """Unit-pivot Gaussian elimination on a sparse integer matrix.

    Rows are dicts column -> value.  Pivots are only taken on entries equal to
    +-1, which keeps the arithmetic integral; what remains is a (hopefully
    small) dense block handled by the Smith form.
    """

    def __init__(self, rows, ncols, rhs=None):
        self.rows = [dict(r) for r in rows]
        self.ncols = ncols
        self.rhs = list(rhs) if rhs is not None else None
        self.col_rows = {}
        for i, r in enumerate(self.rows):
            for c in r:
                self.col_rows.setdefault(c, set()).add(i)
        self.active = set(range(len(self.rows)))
        self.pivots = []

    def eliminate(self):
        heap = [(len(rs), c) for c, rs in self.col_rows.items() if rs]
        heapq.heapify(heap)
        done_cols = set()
        while heap:
            cnt, c = heapq.heappop(heap)
            if c in done_cols:
                continue
            rs = self.col_rows.get(c, set())
            if not rs:
                continue
            if cnt != len(rs):
                heapq.heappush(heap, (len(rs), c))
                continue
            best = None
            for i in rs:
                a = self.rows[i][c]
                if a in (1, -1):
                    ln = len(self.rows[i])
                    if best is None or (ln, i) < best:
                        best = (ln, i)
            if best is None:
                continue
            r = best[1]
            self._pivot(r, c)
            done_cols.add(c)
            for c2 in set(self.rows[r]) | self._touched:
                if c2 not in done_cols and self.col_rows.get(c2):
                    heapq.heappush(heap, (len(self.col_rows[c2]), c2))
        return self

    def _pivot(self, r, c):
        prow = self.rows[r]
        a = prow[c]
        self.active.discard(r)
        for c2 in prow:
            self.col_rows[c2].discard(r)
        touched = set()
        for i in list(self.col_rows.get(c, ())):
            row = self.rows[i]
            f = row[c] * a  # a is a unit, so row[c]/a == row[c]*a
            for c2, v in prow.items():
                nv = row.get(c2, 0) - f * v
                if nv:
                    if c2 not in row:
                        self.col_rows.setdefault(c2, set()).add(i)
                    row[c2] = nv
                else:
                    if c2 in row:
                        del row[c2]
                        self.col_rows[c2].discard(i)
                touched.add(c2)
            if self.rhs is not None:
                self.rhs[i] -= f * self.rhs[r]
        self._touched = touched
        self.pivots.append((r, c))

    _touched = set()

    def remainder(self):
        """Dense block of the surviving rows on the non-pivot columns."""
        pcols = {c for _, c in self.pivots}
        rows = sorted(i for i in self.active if self.rows[i])
        cols = sorted({c for i in rows for c in self.rows[i]} - pcols)
        index = {c: j for j, c in enumerate(cols)}
        dense = []
        for i in rows:
            v = [0] * len(cols)
            for c, a in self.rows[i].items():
                v[index[c]] = a
            dense.append(v)
        return rows, cols, dense


def sparse_rank_and_torsion(rows, ncols):
    """(rank, nonunit invariant factors) of a sparse integer matrix."""
    el = SparseEliminator(rows, ncols).eliminate()
    _, cols, dense = el.remainder()
    inv = invariant_factors(dense, len(cols)) if dense and cols else []
    rank = len(el.pivots) + len(inv)
    return rank, [d for d in inv if d != 1]


def sparse_solve(rows, ncols, rhs):
    """An integer solution of the sparse system, or None."""
    el = SparseEliminator(rows, ncols, rhs).eliminate()
    active_rows, cols, dense = el.remainder()
    x = {}
    for i in el.active:
        if not el.rows[i] and el.rhs[i]:
            return None
    if cols:
        b = [el.rhs[i] for i in active_rows]
        sol = solve_diophantine(dense, b, len(cols))
        if sol is None:
            return None
        for c, v in zip(cols, sol):
            if v:
                x[c] = v
    for r, c in reversed(el.pivots):
        row = el.rows[r]
        a = row[c]
        s = el.rhs[r]
        for c2, v in row.items():
            if c2 != c:
                s -= v * x.get(c2, 0)
        val = s * a
        if val:
            x[c] = val
    out = [0] * ncols
    for c, v in x.items():
        out[c] = v
    return out
