"""Exact integer lattices: Smith and Hermite normal forms, membership, quotients.

Matrices are lists of rows of Python ints so nothing overflows; the entries
in the periodicity lattices grow like 2^(h+n+1).
"""

import json
from dataclasses import dataclass, field
from math import gcd

from .groups import VirtualRep, basis


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A, B):
    if not A:
        return []
    cols = len(B[0]) if B else 0
    return [[sum(a * B[k][j] for k, a in enumerate(row) if a) for j in range(cols)] for row in A]


def _copy(M):
    return [list(map(int, row)) for row in M]


def _shape(M):
    rows = len(M)
    cols = len(M[0]) if rows else 0
    if any(len(r) != cols for r in M):
        raise ValueError("ragged matrix")
    return rows, cols


def det(M):
    """Exact determinant by fraction-free elimination (Bareiss)."""
    n, m = _shape(M)
    if n != m:
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    A = _copy(M)
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


def _egcd(a, b):
    """(g, x, y) with x*a + y*b = g = gcd(a, b) > 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def snf(M):
    """Smith normal form with transforms: returns (D, U, V) with U*M*V = D.

    Pivot is the entry of smallest absolute value in the active block, ties
    broken by lowest (row, column), so the transforms are reproducible.
    """
    rows, cols = _shape(M)
    D = _copy(M)
    U = identity(rows)
    V = identity(cols)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for R in D:
            R[i], R[j] = R[j], R[i]
        for R in V:
            R[i], R[j] = R[j], R[i]

    def add_row(src, dst, q):  # row dst -= q * row src
        if q:
            D[dst] = [a - q * b for a, b in zip(D[dst], D[src])]
            U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, q):  # col dst -= q * col src
        if q:
            for R in D:
                R[dst] -= q * R[src]
            for R in V:
                R[dst] -= q * R[src]

    def combine_rows(t, i):
        a, b = D[t][t], D[i][t]
        if b % a == 0:
            add_row(t, i, b // a)
            return
        g, x, y = _egcd(a, b)
        p, q = a // g, b // g
        for A in (D, U):
            rt, ri = A[t], A[i]
            A[t] = [x * u + y * v for u, v in zip(rt, ri)]
            A[i] = [p * v - q * u for u, v in zip(rt, ri)]

    def combine_cols(t, j):
        a, b = D[t][t], D[t][j]
        if b % a == 0:
            add_col(t, j, b // a)
            return
        g, x, y = _egcd(a, b)
        p, q = a // g, b // g
        for A in (D, V):
            for R in A:
                u, v = R[t], R[j]
                R[t], R[j] = x * u + y * v, p * v - q * u

    t = 0
    while t < min(rows, cols):
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                if D[i][j] and (pivot is None or abs(D[i][j]) < abs(D[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        while True:
            # clear column t and row t with 2x2 Bezout moves, so the pivot
            # becomes the gcd in one step instead of a chain of remainders
            for i in range(t + 1, rows):
                if D[i][t]:
                    combine_rows(t, i)
            for j in range(t + 1, cols):
                if D[t][j]:
                    combine_cols(t, j)
            if any(D[i][t] for i in range(t + 1, rows)):
                continue
            # divisibility: the pivot must divide the whole remaining block
            bad = None
            for i in range(t + 1, rows):
                if any(D[i][j] % D[t][t] for j in range(t + 1, cols)):
                    bad = i
                    break
            if bad is None:
                break
            D[t] = [a + b for a, b in zip(D[t], D[bad])]
            U[t] = [a + b for a, b in zip(U[t], U[bad])]
        if D[t][t] < 0:
            D[t] = [-a for a in D[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return D, U, V


def snf_diagonal(M):
    D, _, _ = snf(M)
    rows, cols = _shape(M)
    return [D[i][i] for i in range(min(rows, cols)) if D[i][i]]


def hnf(M):
    """Row-style Hermite normal form: returns (H, U) with U*M = H.

    H is upper echelon with positive pivots and entries above each pivot
    reduced into [0, pivot); zero rows come last.
    """
    rows, cols = _shape(M)
    H = _copy(M)
    U = identity(rows)
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        while True:
            nz = [i for i in range(r, rows) if H[i][c]]
            if not nz:
                break
            p = min(nz, key=lambda i: (abs(H[i][c]), i))
            H[r], H[p] = H[p], H[r]
            U[r], U[p] = U[p], U[r]
            clean = True
            for i in range(r + 1, rows):
                if H[i][c]:
                    q = H[i][c] // H[r][c]
                    H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
                    if H[i][c]:
                        clean = False
            if clean:
                break
        if r < rows and H[r][c]:
            if H[r][c] < 0:
                H[r] = [-a for a in H[r]]
                U[r] = [-a for a in U[r]]
            for i in range(r):
                q = H[i][c] // H[r][c]
                if q:
                    H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
            r += 1
    return H, U


@dataclass(frozen=True)
class InvariantFactors:
    free_rank: int
    torsion: tuple = ()

    def __post_init__(self):
        t = tuple(int(d) for d in self.torsion if abs(d) != 1)
        for a, b in zip(t, t[1:]):
            if b % a:
                raise ValueError(f"torsion {t} is not a divisibility chain")
        object.__setattr__(self, "torsion", t)

    @property
    def order(self):
        """Order of the torsion part."""
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def __str__(self):
        parts = ["Z"] * self.free_rank + [f"Z/{d}" for d in self.torsion]
        return " ⊕ ".join(parts) if parts else "0"

    def pow2_str(self):
        parts = ["Z"] * self.free_rank + [f"Z/2^{d.bit_length() - 1}" for d in self.torsion]
        return " ⊕ ".join(parts) if parts else "0"

    def to_json(self):
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["free_rank"], tuple(obj["torsion"]))

    @classmethod
    def from_cyclic_orders(cls, orders):
        """Invariant factors of a direct sum of cyclic groups (0 means Z)."""
        free = sum(1 for o in orders if o == 0)
        tors = [o for o in orders if o not in (0, 1)]
        return cls(free, tuple(_chain(tors)))


def _chain(orders):
    """Convert elementary orders into a divisibility chain."""
    primes = {}
    for o in orders:
        n = o
        p = 2
        while n > 1:
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                primes.setdefault(p, []).append(p ** e)
            p += 1
    length = max((len(v) for v in primes.values()), default=0)
    chain = [1] * length
    for p, powers in primes.items():
        powers.sort()
        for k, q in enumerate(powers):
            chain[length - len(powers) + k] *= q
    return [c for c in chain if c != 1]


@dataclass
class IntegerLattice:
    group: object
    generators: list = field(default_factory=list)

    def __post_init__(self):
        for g in self.generators:
            if g.group != self.group:
                raise ValueError("generator over the wrong group")

    @property
    def ambient_rank(self):
        return len(basis(self.group))

    def matrix(self):
        return [list(g.coeffs) for g in self.generators]

    def adjoin(self, *vs):
        return IntegerLattice(self.group, list(self.generators) + list(vs))


def _lattice_snf(L, rank):
    M = L.matrix() if isinstance(L, IntegerLattice) else _copy(L)
    if not M:
        return [], None, identity(rank)
    D, U, V = snf(M)
    diag = [D[i][i] for i in range(min(len(M), rank))]
    return diag, U, V


def quotient(ambient_rank, L):
    """Invariant factors of Z^rank / span(L)."""
    M = L.matrix() if isinstance(L, IntegerLattice) else _copy(L)
    if M and len(M[0]) != ambient_rank:
        raise ValueError("generators do not live in the stated ambient rank")
    diag = [d for d in (snf_diagonal(M) if M else [])]
    return InvariantFactors(ambient_rank - len(diag), tuple(d for d in diag if d != 1))


def _vec(v):
    return list(v.coeffs) if isinstance(v, VirtualRep) else [int(x) for x in v]


def contains(L, v):
    """Membership by back-substitution against the Hermite normal form."""
    if isinstance(L, IntegerLattice) and isinstance(v, VirtualRep) and v.group != L.group:
        raise ValueError("vector over a different group")
    w = _vec(v)
    M = L.matrix() if isinstance(L, IntegerLattice) else _copy(L)
    if not M:
        return not any(w)
    H, _ = hnf(M)
    for row in H:
        lead = next((j for j, a in enumerate(row) if a), None)
        if lead is None:
            break
        if w[lead] % row[lead]:
            return False
        q = w[lead] // row[lead]
        w = [a - q * b for a, b in zip(w, row)]
    return not any(w)


def minimal_multiple(L, v):
    """Least d > 0 with d*v in span(L), or None if no multiple lies in L."""
    w = _vec(v)
    M = L.matrix() if isinstance(L, IntegerLattice) else _copy(L)
    if not any(w):
        return 1
    if not M:
        return None
    D, U, V = snf(M)
    # span(L) = Z^r * D * V^{-1}, so v is in it iff (v V) is in Z^r D.
    wv = [sum(w[k] * V[k][j] for k in range(len(w))) for j in range(len(V[0]))]
    d = 1
    for j, x in enumerate(wv):
        dj = D[j][j] if j < len(D) else 0
        if dj == 0:
            if x:
                return None
            continue
        need = dj // gcd(dj, x)
        d = d * need // gcd(d, need)
    return d


# ----------------------------------------------------------------------- IO

def read_matrix_text(text):
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([int(tok) for tok in line.replace(",", " ").split()])
    _shape(rows)
    return rows


def write_matrix_text(M):
    return "\n".join(" ".join(str(a) for a in row) for row in M) + "\n"


def read_matrix(path):
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("[") or stripped.startswith("{"):
        obj = json.loads(text)
        if isinstance(obj, dict):
            obj = obj["matrix"]
        M = [[int(a) for a in row] for row in obj]
        _shape(M)
        return M
    return read_matrix_text(text)


def matrix_json(M):
    return json.dumps([list(map(int, r)) for r in M])
