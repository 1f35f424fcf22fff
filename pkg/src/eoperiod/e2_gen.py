"""Integer-graded E2 charts of the C4- and C2-slice spectral sequences of
D^{-1}BP^((C4))<1>, the restriction and transfer calculus on named classes,
the d3 pass, and the post-d3 page with its core / bo split.

Chart coordinates are (stem, filtration) with filtration = slice dimension
minus stem.  Positive-cone cells:

    regular <k,k>  (dbar^k), slice dimension 4k, C4 column of S^{k rho_4}
    induced <a,b>  (a > b >= 0), slice dimension 2(a+b), C2 column of S^{(a+b) rho_2}

Regular classes are named dbar^k u_lam^p u_2sig^e a_lam^c a_sig^d with
p + c = k and 2e + d = k; induced classes are transfers
tr(tbar^a gtbar^b u^e a^d) of C2 classes.  The unlocalized chart is used and
the localization is realized by D-shifts; see `d_multiply`.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import bredon as br
from . import groups as gr
from .lattice import hnf, snf

REGULAR = "regular"
INDUCED = "induced"
POSITIVE = "positive"
NEGATIVE = "negative"
CORE = "core"
BO = "bo"
FREE = 0


# ------------------------------------------------------------------ cells

@dataclass(frozen=True, order=True)
class SliceCell:
    kind: str
    a: int
    b: int

    @classmethod
    def regular(cls, k):
        return cls(REGULAR, k, k)

    @classmethod
    def induced(cls, a, b):
        if a <= b:
            raise ValueError("induced cells need a > b")
        return cls(INDUCED, a, b)

    @property
    def dim(self):
        return 4 * self.a if self.kind == REGULAR else 2 * (self.a + self.b)

    def __str__(self):
        return f"<{self.a},{self.b}>"

    def sphere(self):
        """Representation sphere whose column gives the cell's homotopy."""
        if self.kind == REGULAR:
            return br.sphere(gr.C4, self.a, self.a, self.a)
        j = self.a + self.b
        return br.sphere(gr.C2, j, j)


# ------------------------------------------------------------------ names

def _pow(sym, n, sub=""):
    if n == 0:
        return ""
    if sub:
        if n == 1:
            return f"{sym}_{sub}" if len(sub) == 1 else f"{sym}_{{{sub}}}"
        return f"{sym}_{{{n}{sub}}}"
    return sym if n == 1 else f"{sym}^{{{n}}}"


@dataclass(frozen=True, order=True)
class RegularName:
    k: int
    p: int  # u_lambda
    e: int  # u_{2 sigma}
    c: int  # a_lambda
    d: int  # a_sigma

    @property
    def bidegree(self):
        f = 2 * self.c + self.d
        return (4 * self.k - f, f)

    @property
    def cell(self):
        return SliceCell.regular(self.k)

    def key(self):
        return f"R{self.k},{self.p},{self.e},{self.c},{self.d}"

    def __str__(self):
        parts = [_pow("d̄", self.k), _pow("u", self.p, "λ"), _pow("u", 2 * self.e, "σ"),
                 _pow("a", self.c, "λ"), _pow("a", self.d, "σ")]
        return "".join(parts) or "1"


@dataclass(frozen=True, order=True)
class C2Name:
    """tbar^a (gamma tbar)^b u_{2 sigma_2}^e a_{sigma_2}^d at the C2 level."""
    a: int
    b: int
    e: int
    d: int

    @property
    def bidegree(self):
        j = self.a + self.b
        return (2 * j - self.d, self.d)

    def key(self):
        return f"C{self.a},{self.b},{self.e},{self.d}"

    def __str__(self):
        parts = [_pow("t̄", self.a), _pow("γt̄", self.b), _pow("u", 2 * self.e, "σ2"),
                 _pow("a", self.d, "σ2")]
        return "".join(parts) or "1"


@dataclass(frozen=True, order=True)
class InducedName:
    """tr(tbar^a (gamma tbar)^b u^e a^d) with a > b."""
    a: int
    b: int
    e: int
    d: int

    @property
    def bidegree(self):
        return C2Name(self.a, self.b, self.e, self.d).bidegree

    @property
    def cell(self):
        return SliceCell.induced(self.a, self.b)

    def key(self):
        return f"I{self.a},{self.b},{self.e},{self.d}"

    def __str__(self):
        return f"tr({C2Name(self.a, self.b, self.e, self.d)})"


@dataclass(frozen=True, order=True)
class ColumnName:
    """Class read off an oracle column (used for negative cells)."""
    cell: SliceCell
    fil: int
    index: int = 0

    @property
    def bidegree(self):
        return (self.cell.dim - self.fil, self.fil)

    def key(self):
        return f"N{self.cell.kind[0]}{self.cell.a},{self.cell.b},{self.fil},{self.index}"

    def __str__(self):
        return f"[{self.cell}]_{self.fil}"


# ------------------------------------------------- closed-form E2 columns

def regular_order(k, f):
    """Order of the C4 column of S^{k rho_4} at filtration f (k >= 0), None if zero."""
    if k < 0 or f < 0 or f > 3 * k or (f - k) % 2:
        return None
    if k % 2:
        return 2
    if f == 0:
        return FREE
    return 4 if f <= 2 * k else 2


def induced_order(j, d):
    """Order of the C2 column of S^{j rho_2} at filtration d (j >= 0), None if zero."""
    if j < 0 or d < 0 or d > j or (j - d) % 2:
        return None
    return FREE if d == 0 else 2


def regular_generator(k, f):
    if regular_order(k, f) is None:
        return None
    c = min(k, f // 2)
    d = f - 2 * c
    return RegularName(k, k - c, (k - d) // 2, c, d)


def regular_solutions(k, f):
    """All admissible exponent vectors (p, e, c, d) of regular monomials at (k, f)."""
    out = []
    for d in range(0, k + 1):
        if (k - d) % 2 or (f - d) % 2 or f < d:
            continue
        c = (f - d) // 2
        if c > k:
            continue
        out.append(RegularName(k, k - c, (k - d) // 2, c, d))
    return out


def reduce_regular(coef, name):
    """Rewrite coef * monomial as a multiple of the generator at its bidegree.

    Uses the gold relation a_sig^2 u_lam = 2 a_lam u_2sig together with
    2 a_sig = 0; returns (coefficient reduced mod the order, generator) or
    (0, None) when the class vanishes.
    """
    k, p, e, c, d = name.k, name.p, name.e, name.c, name.d
    while d >= 2 and p >= 1:
        p, e, c, d = p - 1, e + 1, c + 1, d - 2
        coef *= 2
    gen = RegularName(k, p, e, c, d)
    f = gen.bidegree[1]
    if gen != regular_generator(k, f):
        raise ValueError(f"monomial {name} does not reduce to the generator at (k={k}, f={f})")
    order = regular_order(k, f)
    if order != FREE:
        coef %= order
    return (coef, gen) if coef else (0, None)


def naming_summand_count(k, f):
    """Number of distinct generators among the admissible monomials at (k, f)."""
    gens = set()
    for name in regular_solutions(k, f):
        coef, g = reduce_regular(1, name)
        if g is not None and coef % 2:
            gens.add(g)
    return len(gens)


# ------------------------------------------------------------------ chart

@dataclass
class ChartClass:
    id: str
    stem: int
    fil: int
    order: int  # 0 = Z
    cell: SliceCell
    name: object
    cone: str = POSITIVE
    tag: str = CORE

    @property
    def bidegree(self):
        return (self.stem, self.fil)

    def to_json(self):
        return {"id": self.id, "stem": self.stem, "fil": self.fil,
                "order": "inf" if self.order == FREE else self.order,
                "cell": str(self.cell), "cell_kind": self.cell.kind,
                "name": str(self.name), "cone": self.cone, "tag": self.tag}


@dataclass
class Chart:
    level: str
    window: tuple  # (stem_min, stem_max, fil_max)
    classes: dict = field(default_factory=dict)  # bidegree -> [ChartClass]

    def add(self, cls):
        self.classes.setdefault(cls.bidegree, []).append(cls)

    def at(self, s, f):
        return self.classes.get((s, f), [])

    def __iter__(self):
        for key in sorted(self.classes):
            yield from self.classes[key]

    def by_id(self):
        return {c.id: c for c in self}

    def orders(self, s, f):
        return sorted(c.order for c in self.at(s, f))

    def in_window(self, s, f):
        lo, hi, fmax = self.window
        return lo <= s <= hi and -fmax <= f <= fmax

    def to_json(self):
        lo, hi, fmax = self.window
        return {"level": self.level, "window": {"stems": [lo, hi], "fmax": fmax},
                "classes": [c.to_json() for c in self]}

    def dumps(self):
        return json.dumps(self.to_json(), indent=1)


def read_chart_json(obj):
    """Summary reader: returns {(stem, fil): sorted orders} for a chart JSON."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    out = {}
    for c in obj["classes"]:
        order = FREE if c["order"] == "inf" else int(c["order"])
        out.setdefault((c["stem"], c["fil"]), []).append(order)
    return {k: sorted(v) for k, v in out.items()}


def _negative_cells(stem_min, level):
    """Negative cells reaching stems >= stem_min: one representative per dimension."""
    out = []
    if level == "C4":
        for k in range(-1, min(stem_min, -1) - 1, -1):
            out.append(SliceCell.regular(k))
    for j in range(-1, 2 * min(stem_min, -1) - 1, -1):
        b = (j - 1) // 2
        out.append(SliceCell.induced(j - b, b))
    return out


def _oracle_orders(cell):
    col = br.chart_column(cell.sphere())
    return {f: list(v) for f, v in col.items()}


def generate(level="C4", stems=(0, 40), fmax=13, negative=True):
    """Assemble the E2 chart on stems [stems[0], stems[1]] and |f| <= fmax.

    Positive cells use the closed-form columns (tested against the oracle);
    negative cells take their columns directly from the oracle.  Induced
    cells of a given negative dimension are represented once.
    """
    lo, hi = stems
    chart = Chart(level, (lo, hi, fmax))
    if level not in ("C4", "C2"):
        raise ValueError("level must be C4 or C2")
    if level == "C4":
        for k in range(0, (hi + fmax) // 4 + 1):
            for f in range(0, min(3 * k, fmax) + 1):
                name = regular_generator(k, f)
                if name is None or not lo <= 4 * k - f <= hi:
                    continue
                chart.add(ChartClass(name.key(), 4 * k - f, f, regular_order(k, f), name.cell, name))
    for j in range(1 if level == "C4" else 0, (hi + fmax) // 2 + 1):
        pairs = [(j - b, b) for b in range(0, j + 1)]
        if level == "C4":
            pairs = [(a, b) for a, b in pairs if a > b]
        for a, b in pairs:
            for d in range(j % 2, min(j, fmax) + 1, 2):
                s = 2 * j - d
                if not lo <= s <= hi:
                    continue
                if level == "C4":
                    name = InducedName(a, b, (j - d) // 2, d)
                    cell = name.cell
                else:
                    name = C2Name(a, b, (j - d) // 2, d)
                    cell = SliceCell(INDUCED if a != b else REGULAR, a, b)
                chart.add(ChartClass(name.key(), s, d, induced_order(j, d), cell, name))
    if negative and lo < 0:
        for cell in _negative_cells(lo, level):
            for f, orders in _oracle_orders(cell).items():
                s = cell.dim - f
                if not (lo <= s <= hi and abs(f) <= fmax):
                    continue
                for i, o in enumerate(orders):
                    name = ColumnName(cell, f, i)
                    chart.add(ChartClass(name.key(), s, f, o, cell, name, cone=NEGATIVE))
    return chart


def contributing_cells(level, stems, fmax):
    """Second enumeration path: cells by slice dimension, columns from the oracle."""
    lo, hi = stems
    cells = []
    if level == "C4":
        cells += [SliceCell.regular(k) for k in range(0, (hi + fmax) // 4 + 1)]
        for j in range(1, (hi + fmax) // 2 + 1):
            cells += [SliceCell.induced(j - b, b) for b in range(0, (j + 1) // 2) if j - b > b]
    if lo < 0:
        cells += _negative_cells(lo, level)
    return cells


def oracle_chart_orders(level, stems, fmax):
    """{bidegree: sorted orders} assembled cell by cell from the oracle."""
    lo, hi = stems
    out = {}
    for cell in contributing_cells(level, stems, fmax):
        for f, orders in _oracle_orders(cell).items():
            s = cell.dim - f
            if lo <= s <= hi and abs(f) <= fmax:
                out.setdefault((s, f), []).extend(orders)
    return {k: sorted(v) for k, v in out.items()}


# ------------------------------------------------- restriction, transfer

def _clean(elem, mod2):
    out = {}
    for n, c in elem.items():
        if mod2(n):
            c %= 2
        if c:
            out[n] = c
    return out


def _c2_clean(elem):
    return _clean(elem, lambda n: n.d > 0)


def restrict(name):
    """Restriction of a C4 E2 basis class to the C2 level, as {C2Name: coef}."""
    if isinstance(name, RegularName):
        if name.d > 0:
            return {}
        return {C2Name(name.k, name.k, name.p, 2 * name.c): 1}
    if isinstance(name, InducedName):
        x = C2Name(name.a, name.b, name.e, name.d)
        y = C2Name(name.b, name.a, name.e, name.d)
        return _c2_clean({x: 1, y: (-1) ** name.b})
    raise TypeError(f"cannot restrict {name!r}")


def restrict_class(cls):
    return restrict(cls.name)


def transfer(elem):
    """Transfer of a C2 element to the C4 level, as {C4 name: coef}."""
    out = {}
    for x, coef in elem.items():
        if x.a > x.b:
            terms = [(InducedName(x.a, x.b, x.e, x.d), coef)]
        elif x.a < x.b:
            terms = [(InducedName(x.b, x.a, x.e, x.d), coef * (-1) ** x.b)]
        elif x.a % 2 == 0 and x.d % 2 == 0:
            # tr(res(m)) = 2m for m = dbar^a u_lam^e u_2sig^{a/2} a_lam^{d/2}
            m = RegularName(x.a, x.e, x.a // 2, x.d // 2, 0)
            terms = [(m, 2 * coef)]
        else:
            terms = []
        for n, c in terms:
            out[n] = out.get(n, 0) + c
    return normalize(out)


def normalize(elem):
    """Reduce coefficients modulo the order of each basis class."""
    out = {}
    for n, c in elem.items():
        if isinstance(n, RegularName):
            c2, g = reduce_regular(c, n)
            if g is not None:
                out[g] = out.get(g, 0) + c2
            continue
        out[n] = out.get(n, 0) + c
    res = {}
    for n, c in out.items():
        order = _order_of(n)
        if order:
            c %= order
        if c:
            res[n] = c
    return res


def _order_of(n):
    if isinstance(n, RegularName):
        return regular_order(n.k, n.bidegree[1])
    if isinstance(n, (InducedName, C2Name)):
        return induced_order(n.a + n.b, n.d)
    raise TypeError(n)


def c2_d3(elem):
    """d3 at the C2 level, generated by d3(u_{2 sigma_2}) = (tbar + gamma tbar) a^3."""
    out = {}
    for x, coef in elem.items():
        if x.e % 2 == 0:
            continue
        for y in (C2Name(x.a + 1, x.b, x.e - 1, x.d + 3), C2Name(x.a, x.b + 1, x.e - 1, x.d + 3)):
            out[y] = out.get(y, 0) + coef * x.e
    return _c2_clean(out)


def c2_d7(elem):
    """d7 at the C2 level on u_{2 sigma_2}^e with e = 2 mod 4, from d7(u_{4 sigma_2}) = tbar^3 a^7."""
    out = {}
    for x, coef in elem.items():
        if x.e % 4 != 2:
            continue
        y = C2Name(x.a + 3, x.b, x.e - 2, x.d + 7)
        out[y] = out.get(y, 0) + coef
    return _c2_clean(out)


def d3(name):
    """d3 of a C4 E2 basis class, {target name: coef}.

    Regular classes are settled by the restriction criterion (the target is
    induced and restriction is injective there); induced classes use
    d3 o tr = tr o d3, which also sees targets with zero restriction.
    """
    if isinstance(name, RegularName):
        if name.d > 0 or name.p % 2 == 0:
            return {}
        return {InducedName(name.k + 1, name.k, name.p - 1, 2 * name.c + 3): 1}
    if isinstance(name, InducedName):
        return transfer(c2_d3({C2Name(name.a, name.b, name.e, name.d): 1}))
    return {}


def restriction_check(name):
    """res(d3 x) == d3(res x) at the C2 level."""
    lhs = {}
    for y, c in d3(name).items():
        for z, c2 in restrict(y).items():
            lhs[z] = lhs.get(z, 0) + c * c2
    return _c2_clean(lhs) == c2_d3(restrict(name))


# ------------------------------------------------------------------ products

def _c2_mul(x, y):
    return C2Name(x.a + y.a, x.b + y.b, x.e + y.e, x.d + y.d)


def multiply(x, y):
    """Product of two C4 E2 basis classes, {name: coef}."""
    if isinstance(x, InducedName) and isinstance(y, RegularName):
        x, y = y, x
    if isinstance(x, RegularName) and isinstance(y, RegularName):
        n = RegularName(x.k + y.k, x.p + y.p, x.e + y.e, x.c + y.c, x.d + y.d)
        return normalize({n: 1})
    if isinstance(x, RegularName) and isinstance(y, InducedName):
        out = {}
        for r, c in restrict(x).items():
            out[_c2_mul(r, C2Name(y.a, y.b, y.e, y.d))] = c
        return transfer(_c2_clean(out))
    if isinstance(x, InducedName) and isinstance(y, InducedName):
        out = {}
        for r, c in restrict(y).items():
            z = _c2_mul(C2Name(x.a, x.b, x.e, x.d), r)
            out[z] = out.get(z, 0) + c
        return transfer(_c2_clean(out))
    raise TypeError("products are defined on positive-cone names")


def multiply_vectors(u, v):
    """Bilinear extension of `multiply` to {name: coef} dictionaries."""
    out = {}
    for x, a in u.items():
        for y, b in v.items():
            for z, c in multiply(x, y).items():
                out[z] = out.get(z, 0) + a * b * c
    return normalize(out)


# D = dbar^2 u_{2 lam} u_{2 sig} realizes the localization in integer degrees.
D_CLASS = RegularName(2, 2, 1, 0, 0)
X_CLASS = RegularName(4, 0, 2, 4, 0)   # (8, 8) periodicity class
Z_CLASS = RegularName(8, 8, 4, 0, 0)   # (32, 0) periodicity class


def d_multiply(cls, chart=None):
    """The chart class D * cls, one D-shift (8, 0) away.

    With a chart, the result is looked up there (ValueError if the shift
    leaves the window); without one, the bare name is returned.  Classes
    whose product is a proper multiple of a generator raise ValueError.
    """
    name = cls.name if isinstance(cls, ChartClass) else cls
    prod = multiply(D_CLASS, name)
    if len(prod) != 1:
        raise ValueError(f"D * {name} is not a single basis class")
    (target, coef), = prod.items()
    if coef != 1:
        # near the slope-3 edge the gold relation makes D * x = 2^i * generator
        raise ValueError(f"D * {name} = {coef} * {target}: outside the D-stable range")
    if chart is None:
        return target
    s, f = target.bidegree
    if not chart.in_window(s, f):
        raise ValueError(f"D-shift of {name} leaves the window")
    for c in chart.at(s, f):
        if c.name == target:
            return c
    raise ValueError(f"{target} not found in chart")


# ------------------------------------------------------------------ d3 pass

@dataclass
class Summand:
    order: int          # 0 = Z
    vector: dict        # {E2 name: coef}
    tag: str = CORE


@dataclass
class Homology:
    """E4 at one bidegree: cycle lattice basis plus adapted generators."""
    basis: list          # E2 names at this bidegree
    summands: list       # [Summand]
    _cycles: list = None  # HNF basis rows of the cycle lattice
    _V: list = None       # transform taking cycle coordinates to summand coordinates
    _diag: list = None

    def coordinates(self, vec):
        """Coordinates of a cycle on the summands (None if not a cycle)."""
        w = [vec.get(n, 0) for n in self.basis]
        y = _echelon_coords(self._cycles, w)
        if y is None:
            return None
        z = [sum(y[i] * self._V[i][j] for i in range(len(y))) for j in range(len(self._V[0]))] \
            if self._V else []
        out = []
        for j, dj in enumerate(self._diag):
            if dj == 1:
                continue
            out.append(z[j] % dj if dj else z[j])
        return out


def _kernel(M, ncols):
    if not M:
        return [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    MT = [[M[i][j] for i in range(len(M))] for j in range(ncols)]
    H, U = hnf(MT)
    return [U[i] for i in range(ncols) if not any(H[i])]


def _echelon_coords(rows, w):
    """Coordinates of w on echelon rows (None if w is not in their span)."""
    w = list(w)
    y = []
    for row in rows:
        lead = next(j for j, a in enumerate(row) if a)
        if w[lead] % row[lead]:
            return None
        q = w[lead] // row[lead]
        y.append(q)
        if q:
            w = [a - q * b for a, b in zip(w, row)]
    return y if not any(w) else None


def _inverse(M):
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                q = A[r][c]
                A[r] = [x - q * y for x, y in zip(A[r], A[c])]
    out = [[x for x in row[n:]] for row in A]
    if any(x.denominator != 1 for row in out for x in row):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


def homology(basis, orders, incoming, out_matrix, out_orders):
    """Homology at one bidegree of a complex of direct sums of cyclic groups.

    incoming: list of image vectors (over basis); out_matrix[i][j]: coefficient
    of target i in d(basis j).
    """
    m, p = len(basis), len(out_orders)
    M = [list(out_matrix[i]) + [out_orders[i] if t == i else 0 for t in range(p)] for i in range(p)]
    K = [row[:m] for row in _kernel(M, m + p)]
    K = [r for r in hnf(K)[0] if any(r)] if K else []
    N = [list(v) for v in incoming if any(v)]
    N += [[o if i == j else 0 for j in range(m)] for i, o in enumerate(orders) if o]
    r = len(K)
    if r == 0:
        return Homology(basis, [], K, [], [])
    X = [_echelon_coords(K, v) for v in N]
    if any(x is None for x in X):
        raise ValueError("d3 does not square to zero")
    if X:
        D, _, V = snf(X)
        diag = [D[j][j] if j < len(D) else 0 for j in range(r)]
    else:
        V = [[int(i == j) for j in range(r)] for i in range(r)]
        diag = [0] * r
    W = _inverse(V)
    summands = []
    for j in range(r):
        if diag[j] == 1:
            continue
        gen = [sum(W[j][i] * K[i][t] for i in range(r)) for t in range(m)]
        summands.append(Summand(diag[j], {basis[t]: gen[t] for t in range(m) if gen[t]}))
    return Homology(basis, summands, K, V, diag)


@dataclass
class D3Record:
    source: object
    target: object
    coef: int

    @property
    def r(self):
        return 3


def d3_seed(chart):
    """All nonzero d3's between E2 basis classes of a C4 chart (positive cone)."""
    out = []
    names = {c.name for c in chart if c.cone == POSITIVE}
    for c in chart:
        if c.cone != POSITIVE:
            continue
        for y, coef in d3(c.name).items():
            if y in names:
                out.append(D3Record(c.name, y, coef))
    return out


def designated_low_core(s, f):
    """The induced classes at filtration 1 and 2 that belong to the core.

    These are the D-translates of tr(tbar a_sig2) at (1, 1) and
    tr(tbar^2 a_sig2^2) at (2, 2); every other induced survivor at filtration
    <= 2 lies in a bo-pattern.
    """
    if s < 0:
        return None
    m, r = divmod(s, 8)
    if (r, f) == (1, 1):
        return InducedName(2 * m + 1, 2 * m, 2 * m, 1)
    if (r, f) == (2, 2):
        return InducedName(2 * m + 2, 2 * m, 2 * m, 2)
    return None


@dataclass
class PostD3Page:
    chart: Chart
    records: list
    homology: dict   # bidegree -> Homology
    core: dict       # bidegree -> Summand (at most one per bidegree)
    bo: dict         # bidegree -> list of orders

    def core_order(self, s, f):
        c = self.core.get((s, f))
        return None if c is None else c.order

    def core_coefficient(self, bidegree, vec):
        """c with vec = c * (core generator) in E4; None if vec is not such a multiple."""
        H = self.homology.get(bidegree)
        core = self.core.get(bidegree)
        if H is None or core is None:
            return 0 if not normalize(vec) else None
        zc = H.coordinates(vec)
        if zc is None:
            return None
        gc = H.coordinates(core.vector)
        piv = next(i for i, x in enumerate(gc) if x)
        orders = [s.order for s in H.summands]
        # solve zc = c * gc componentwise in the cyclic factors
        for c in range(0, core.order if core.order else 1 << 12):
            ok = True
            for z, g, o in zip(zc, gc, orders):
                if (z - c * g) % o if o else z - c * g:
                    ok = False
                    break
            if ok:
                return c
        return None


def post_d3(chart):
    """E4 of the positive cone with the core / bo split."""
    recs = d3_seed(chart)
    out_map, in_map = {}, {}
    for rec in recs:
        out_map.setdefault(rec.source, {})[rec.target] = rec.coef
    homs, core, bo = {}, {}, {}
    lo, hi, fmax = chart.window
    for bideg, classes in chart.classes.items():
        classes = [c for c in classes if c.cone == POSITIVE]
        s, f = bideg
        # d3 neighbours must lie in the window
        if not classes or s >= hi or s <= lo or f + 3 > fmax:
            continue
        basis = [c.name for c in classes]
        orders = [c.order for c in classes]
        src = [c for c in chart.at(s + 1, f - 3) if c.cone == POSITIVE]
        tgt = [c for c in chart.at(s - 1, f + 3) if c.cone == POSITIVE]
        incoming = [[out_map.get(x.name, {}).get(n, 0) for n in basis] for x in src]
        omat = [[out_map.get(n, {}).get(y.name, 0) for n in basis] for y in tgt]
        H = homology(basis, orders, incoming, omat, [y.order for y in tgt])
        homs[bideg] = H
        if not H.summands:
            continue
        if f >= 3:
            if len(H.summands) != 1:
                raise ValueError(f"unexpected E4 multiplicity at {bideg}")
            core[bideg] = H.summands[0]
            continue
        # low filtration: the regular class (or its least cycle multiple) and
        # the designated induced class are core, the rest is bo
        cands = []
        reg = [c.name for c in classes if isinstance(c.name, RegularName)]
        if reg:
            g = reg[0]
            for mult in (1, 2, 4):
                z = H.coordinates({g: mult})
                if z is not None:
                    if any(z):
                        cands.append(Summand(_cyc_order(H, z), {g: mult}))
                    break
        dn = designated_low_core(s, f)
        if dn is not None and dn in basis:
            z = H.coordinates({dn: 1})
            if z is not None and any(z):
                cands.append(Summand(_cyc_order(H, z), {dn: 1}))
        if len(cands) > 1:
            raise ValueError(f"two core candidates at {bideg}")
        rest = [sm.order for sm in H.summands]
        if cands:
            core[bideg] = cands[0]
            rest.remove(cands[0].order)
        if rest:
            bo[bideg] = sorted(rest)
    for bideg, sm in core.items():
        sm.tag = CORE
    return PostD3Page(chart, recs, homs, core, bo)


def _cyc_order(H, z):
    """Order of the element with coordinates z in H."""
    orders = [s.order for s in H.summands]
    if any(x and o == FREE for x, o in zip(z, orders)):
        return FREE
    out = 1
    for x, o in zip(z, orders):
        if x:
            from math import gcd
            k = o // gcd(o, x)
            out = out * k // gcd(out, k)
    return out
