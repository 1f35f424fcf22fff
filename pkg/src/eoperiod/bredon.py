"""Bredon homology of representation spheres for C2 and C4, constant Z coefficients.

Cellular chains of S^V are permutation modules Z[X_t].  With constant Mackey
Z (restrictions the identity, transfers the index) the G-level chains are
the invariants, spanned by orbit sums, and H^G_t(S^V) is their homology.

Cell structures (reduced, the base point is dropped):

    S^{a sigma}: Z in degree 0, one copy of Z[G/K] in degrees 1..a, where
                 K is the kernel of sigma; d(x_1) = pt and
                 d(x_i) = x_{i-1} - (-1)^i gamma x_{i-1}.
    S^{b lambda} (C4): Z in degree 0, one free Z[C4] in degrees 1..2b;
                 d(x_1) = pt, d(x_even) = (gamma - 1) x, d(x_odd) = N x.

Products are tensor products with the Koszul sign; negative coefficients
use the degreewise dual complex.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import groups as gr
from ._kernels import smith_diagonal

FREE = 0  # summand order used for Z


@dataclass(frozen=True)
class RepSphereIndex:
    group: gr.GroupId
    coeffs: tuple  # (c, a) for C2, (c, a, b) for C4

    def __post_init__(self):
        if self.group not in (gr.C2, gr.C4):
            raise ValueError("the oracle handles C2 and C4 only")
        want = 2 if self.group == gr.C2 else 3
        if len(self.coeffs) != want:
            raise ValueError(f"{self.group} spheres take {want} coefficients")
        object.__setattr__(self, "coeffs", tuple(int(x) for x in self.coeffs))

    @property
    def dim(self):
        return gr.VirtualRep(self.group, self.coeffs).dim

    @classmethod
    def of(cls, V):
        return cls(V.group, V.coeffs)

    def rep(self):
        return gr.VirtualRep(self.group, self.coeffs)


class PermComplex:
    """Bounded chain complex of permutation modules for a cyclic group C_N.

    degrees: dict t -> (perm, ) where perm[i] is the index of gamma*e_i;
    bound: dict t -> int matrix of d_t: C_t -> C_{t-1} (rows index C_{t-1}).
    """

    def __init__(self, N, perms, bounds):
        self.N = N
        self.perms = {t: np.asarray(p, dtype=np.int64) for t, p in perms.items()}
        self.bounds = {t: np.asarray(b, dtype=np.int64) for t, b in bounds.items()}

    def rank(self, t):
        p = self.perms.get(t)
        return 0 if p is None else len(p)

    def d(self, t):
        b = self.bounds.get(t)
        if b is None:
            return np.zeros((self.rank(t - 1), self.rank(t)), dtype=np.int64)
        return b

    def degrees(self):
        return sorted(self.perms)

    def check(self):
        for t in self.degrees():
            prod = self.d(t - 1) @ self.d(t) if self.rank(t - 2) and self.rank(t) else None
            if prod is not None and prod.any():
                raise AssertionError(f"d^2 != 0 at degree {t}")
            P0 = _perm_matrix(self.perms[t])
            if t - 1 in self.perms:
                P1 = _perm_matrix(self.perms[t - 1])
                if not np.array_equal(self.d(t) @ P0, P1 @ self.d(t)):
                    raise AssertionError(f"boundary not equivariant at degree {t}")
        return True

    def shift(self, k):
        return PermComplex(self.N, {t + k: p for t, p in self.perms.items()},
                           {t + k: b for t, b in self.bounds.items()})

    def dual(self):
        perms = {-t: p for t, p in self.perms.items()}
        bounds = {}
        for t in self.degrees():
            if t + 1 in self.perms:
                bounds[-t] = self.d(t + 1).T.copy()
        return PermComplex(self.N, perms, bounds)

    def tensor(self, other):
        if other.N != self.N:
            raise ValueError("group mismatch")
        perms, index = {}, {}
        for p in self.degrees():
            for q in other.degrees():
                t = p + q
                A, B = self.perms[p], other.perms[q]
                offset = len(perms.get(t, ()))
                block = (B[None, :] + len(B) * A[:, None]).ravel() + offset
                perms.setdefault(t, [])
                perms[t] = list(perms[t]) + list(block)
                index[(p, q)] = (t, offset)
        ranks = {t: len(v) for t, v in perms.items()}
        bounds = {t: np.zeros((ranks.get(t - 1, 0), ranks[t]), dtype=np.int64) for t in perms}
        for (p, q), (t, off) in index.items():
            na, nb = self.rank(p), other.rank(q)
            # d(x (x) y) = dx (x) y + (-1)^p x (x) dy
            if (p - 1, q) in index:
                t1, off1 = index[(p - 1, q)]
                blk = np.kron(self.d(p), np.eye(nb, dtype=np.int64))
                bounds[t][off1:off1 + blk.shape[0], off:off + blk.shape[1]] += blk
            if (p, q - 1) in index:
                t1, off1 = index[(p, q - 1)]
                blk = np.kron(np.eye(na, dtype=np.int64), other.d(q)) * (-1) ** (p % 2)
                bounds[t][off1:off1 + blk.shape[0], off:off + blk.shape[1]] += blk
        out = PermComplex(self.N, perms, {t: b for t, b in bounds.items() if b.size})
        out.blocks = index  # (p, q) -> (degree, offset); element (i, j) sits at offset + i * rank_q + j
        return out


def _perm_matrix(p):
    n = len(p)
    M = np.zeros((n, n), dtype=np.int64)
    M[p, np.arange(n)] = 1
    return M


def unit_complex(N):
    return PermComplex(N, {0: [0]}, {})


def _orbit_perm(N, size, copies=1):
    out = []
    for c in range(copies):
        out += [c * size + (j + 1) % size for j in range(size)]
    return out


def sign_sphere(N, a):
    """S^{a sigma} for C_N acting through C_N/C_{N/2}."""
    if a == 0:
        return unit_complex(N)
    perms = {0: [0]}
    bounds = {}
    for i in range(1, a + 1):
        perms[i] = _orbit_perm(N, 2)
        if i == 1:
            bounds[1] = np.array([[1, 1]])
        else:
            s = -((-1) ** i)
            # columns: x_i, gamma x_i ; rows: x_{i-1}, gamma x_{i-1}
            bounds[i] = np.array([[1, s], [s, 1]])
    return PermComplex(N, perms, bounds)


def rotation_sphere(b):
    """S^{b lambda} for C4 (rotation by a quarter turn)."""
    N = 4
    if b == 0:
        return unit_complex(N)
    perms = {0: [0]}
    bounds = {}
    gamma = _perm_matrix(_orbit_perm(4, 4))
    one = np.eye(4, dtype=np.int64)
    norm = np.ones((4, 4), dtype=np.int64)
    for i in range(1, 2 * b + 1):
        perms[i] = _orbit_perm(4, 4)
        if i == 1:
            bounds[1] = np.ones((1, 4), dtype=np.int64)
        elif i % 2 == 0:
            bounds[i] = gamma - one
        else:
            bounds[i] = norm
    return PermComplex(N, perms, bounds)


@lru_cache(maxsize=None)
def sphere_complex(idx):
    """Chain complex of S^V (V possibly virtual)."""
    N = idx.group.order
    c = idx.coeffs[0]
    parts = [(sign_sphere, N, idx.coeffs[1])]
    if N == 4:
        parts.append((None, N, idx.coeffs[2]))
    pos = unit_complex(N)
    neg = unit_complex(N)
    for maker, n, k in parts:
        if k == 0:
            continue
        cx = maker(n, abs(k)) if maker is not None else rotation_sphere(abs(k))
        if k > 0:
            pos = pos.tensor(cx)
        else:
            neg = neg.tensor(cx)
    out = pos if not neg.degrees() or neg.degrees() == [0] and neg.rank(0) == 1 and len(neg.bounds) == 0 \
        else pos.tensor(neg.dual())
    return out.shift(c)


def _orbits(perm, power):
    """Orbits of gamma^power on the basis."""
    n = len(perm)
    step = np.arange(n)
    for _ in range(power):
        step = perm[step]
    seen = np.full(n, -1)
    orbits = []
    for i in range(n):
        if seen[i] >= 0:
            continue
        orb = []
        j = i
        while seen[j] < 0:
            seen[j] = len(orbits)
            orb.append(j)
            j = step[j]
        orbits.append(orb)
    return orbits, seen


def fixed_complex(cx, subgroup_order):
    """Boundary matrices of the invariants under the subgroup of the given order."""
    N = cx.N
    power = N // subgroup_order  # the subgroup is generated by gamma^power
    orb = {t: _orbits(cx.perms[t], power) for t in cx.degrees()}
    out = {}
    for t in cx.degrees():
        if t - 1 not in orb:
            continue
        D = cx.d(t)
        src, _ = orb[t]
        tgt, _ = orb[t - 1]
        M = np.zeros((len(tgt), len(src)), dtype=np.int64)
        reps = [o[0] for o in tgt]
        for j, o in enumerate(src):
            col = D[:, o].sum(axis=1)
            M[:, j] = col[reps]
        out[t] = M
    ranks = {t: len(orb[t][0]) for t in orb}
    return ranks, out


def _homology(ranks, bounds):
    out = {}
    smith = {t: smith_diagonal(b) if b.size else [] for t, b in bounds.items()}
    for t, n in ranks.items():
        r_out = len(smith.get(t, []))
        into = smith.get(t + 1, [])
        free = n - r_out - len(into)
        summands = [FREE] * free + sorted(d for d in into if d != 1)
        if summands:
            out[t] = summands
    return out


def homology_at_level(idx, subgroup_order):
    cx = sphere_complex(idx)
    ranks, bounds = fixed_complex(cx, subgroup_order)
    return _homology(ranks, bounds)


@lru_cache(maxsize=None)
def homology_column(idx):
    """{t: [orders]} for the G-level reduced Bredon homology (0 = free)."""
    return homology_at_level(idx, idx.group.order)


def underlying_homology(idx):
    return homology_at_level(idx, 1)


def chart_column(idx):
    """{filtration: [orders]} via (stem, f) = (|V| - f, f)."""
    d = idx.dim
    return {d - t: v for t, v in homology_column(idx).items()}


def sphere(group, *coeffs):
    return RepSphereIndex(group, tuple(coeffs))


def format_orders(orders):
    return " ⊕ ".join("Z" if o == FREE else f"Z/{o}" for o in orders) or "0"


# ------------------------------------------------------------------ duality

def coinvariant_homology(idx):
    """Homology of the coinvariant complex C(S^V)_G (orbits as basis)."""
    cx = sphere_complex(idx)
    orb = {t: _orbits(cx.perms[t], 1) for t in cx.degrees()}
    bounds = {}
    for t in cx.degrees():
        if t - 1 not in orb:
            continue
        D = cx.d(t)
        src, _ = orb[t]
        tgt, _ = orb[t - 1]
        M = np.zeros((len(tgt), len(src)), dtype=np.int64)
        for j, o in enumerate(src):
            col = D[:, o[0]]
            for i, o2 in enumerate(tgt):
                M[i, j] = col[o2].sum()
        bounds[t] = M
    return _homology({t: len(orb[t][0]) for t in orb}, bounds)


def dual_column(idx):
    """Chart column of S^{-V} by universal coefficients from the coinvariants of S^V.

    Cochains of S^V with G-invariant values are Hom(C_G, Z), so
    H^t = free part of H_t(C_G) plus the torsion of H_{t-1}(C_G).
    """
    H = coinvariant_homology(idx)
    d = idx.dim
    out = {}
    for t in set(H) | {t + 1 for t in H}:
        orders = [o for o in H.get(t, []) if o == FREE]
        orders += [o for o in H.get(t - 1, []) if o != FREE]
        if orders:
            # degree -t of S^{-V}, filtration -|V| + t
            out[-(d - t)] = sorted(orders)
    return out


def negate(idx):
    return RepSphereIndex(idx.group, tuple(-c for c in idx.coeffs))


def duality_holds(idx):
    got = {f: sorted(v) for f, v in chart_column(negate(idx)).items()}
    return got == dual_column(idx)


# ------------------------------------------------------------------ gold relation

def gold_witness():
    """Chain-level check of u_lam a_sig^2 = 2 u_2sig a_lam in H_2 of S^{lam + 2 sigma} (C4).

    Returns (orders of H_2, coordinates of u_2sig a_lam, coordinates of u_lam a_sig^2).
    """
    from .e2_gen import homology
    lam, sig = rotation_sphere(1), sign_sphere(4, 2)
    cx = lam.tensor(sig)
    # u_lam: norm of the top cell of S^lam; a_lam: its 0-cell
    z_lam = np.ones(lam.rank(2), dtype=np.int64)
    pt_lam = np.ones(1, dtype=np.int64)
    # u_2sig: x_2 + gamma x_2 in S^{2 sigma}; a_sig^2: its 0-cell
    z_sig = np.ones(sig.rank(2), dtype=np.int64)
    pt_sig = np.ones(1, dtype=np.int64)

    def chain(p, q, a, b):
        t, off = cx.blocks[(p, q)]
        v = np.zeros(cx.rank(t), dtype=np.int64)
        v[off:off + len(a) * len(b)] = np.kron(a, b)
        return v

    u2sig_alam = chain(0, 2, pt_lam, z_sig)
    ulam_asig2 = chain(2, 0, z_lam, pt_sig)
    ranks, bounds = fixed_complex(cx, 4)
    orbits, _ = _orbits(cx.perms[2], 1)
    basis = list(range(ranks[2]))
    incoming = bounds[3].T.tolist() if 3 in bounds else []
    out = bounds[2].tolist() if 2 in bounds else []
    H = homology(basis, [FREE] * len(basis), incoming, out, [FREE] * len(out))

    def coords(v):
        vec = {i: int(v[o[0]]) for i, o in enumerate(orbits) if v[o[0]]}
        return H.coordinates(vec)

    return [sm.order for sm in H.summands], coords(u2sig_alam), coords(ulam_asig2)
