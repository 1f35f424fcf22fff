"""Bidegree calculus for named classes and the norm / transfer differential families.

A class is a monomial in Euler classes a_V, orientation classes u_V and a few
named polynomial generators, optionally multiplied by a transfer
tr_H^G(inner).  Degrees are pairs (RO(G) stem, filtration):

    a_V: (-V, |V|)        u_V: (|V| - V, 0)
    vbar_l: ((2^l - 1) rho_2, 0)   tbar_1, gamma tbar_1: (rho_2, 0)
    dbar = N(tbar_1): (rho_4, 0)
"""

from dataclasses import dataclass, field

from . import groups as gr
from .groups import C2, C4, CYCLIC, QUATERNION, Q8, VirtualRep


@dataclass(frozen=True)
class SymbolDegree:
    ro_degree: VirtualRep
    filtration: int

    def __add__(self, other):
        return SymbolDegree(self.ro_degree + other.ro_degree, self.filtration + other.filtration)

    def __sub__(self, other):
        return SymbolDegree(self.ro_degree - other.ro_degree, self.filtration - other.filtration)


@dataclass(frozen=True)
class Symbol:
    """A named generator with a fixed degree at its level (e.g. vbar_2, N(vbar_2))."""
    name: str
    degree: VirtualRep
    filtration: int = 0


def vbar(ell):
    return Symbol(f"v̄_{ell}", gr.regular(C2) * (2 ** ell - 1))


def tbar1():
    return Symbol("t̄_1", gr.regular(C2))


def gamma_tbar1():
    return Symbol("γt̄_1", gr.regular(C2))


def dbar():
    return Symbol("d̄", gr.regular(C4))


def _orientable(V):
    G = V.group
    if G.kind == CYCLIC:
        return V.coeffs[1] % 2 == 0
    if G.kind == QUATERNION:
        return all(c % 2 == 0 for c in V.coeffs[1:4])
    return True


@dataclass(frozen=True)
class Monomial:
    group: gr.GroupId
    a: VirtualRep = None
    u: VirtualRep = None
    symbols: tuple = ()  # sorted tuple of (Symbol, exponent)

    def __post_init__(self):
        z = gr.zero(self.group)
        a = self.a if self.a is not None else z
        u = self.u if self.u is not None else z
        # u of a trivial representation is the unit
        u = VirtualRep(self.group, (0,) + u.coeffs[1:])
        if not _orientable(u):
            raise ValueError(f"u_V needs an orientable V, got {u}")
        syms = {}
        for s, e in self.symbols:
            if s.degree.group != self.group:
                raise ValueError(f"symbol {s.name} lives over {s.degree.group}, not {self.group}")
            syms[s] = syms.get(s, 0) + e
        ordered = tuple(sorted(((s, e) for s, e in syms.items() if e), key=lambda t: t[0].name))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "symbols", ordered)

    def __mul__(self, other):
        if other.group != self.group:
            raise ValueError("product of classes at different levels")
        return Monomial(self.group, self.a + other.a, self.u + other.u, self.symbols + other.symbols)

    def degree(self):
        G = self.group
        ro = -self.a + (gr.trivial(G, self.u.dim) - self.u)
        fil = self.a.dim
        for s, e in self.symbols:
            ro += s.degree * e
            fil += s.filtration * e
        return SymbolDegree(ro, fil)

    def __str__(self):
        parts = []
        for s, e in self.symbols:
            parts.append(s.name if e == 1 else f"{s.name}^{e}")
        labels = gr.basis(self.group)
        for i in range(1, len(labels)):
            c = self.u.coeffs[i]
            if c:
                parts.append(f"u_{{{_coef(c)}{labels[i]}}}")
        for i in range(len(labels)):
            c = self.a.coeffs[i]
            if c:
                parts.append(f"a_{{{_coef(c)}{labels[i]}}}")
        return " ".join(parts) if parts else "1"


def _coef(c):
    return "" if c == 1 else ("-" if c == -1 else str(c))


def monomial(group, a=None, u=None, symbols=()):
    return Monomial(group, a, u, tuple(symbols))


@dataclass(frozen=True)
class Transfer:
    subgroup: gr.SubgroupRef
    inner: Monomial
    declared: VirtualRep  # the G-level RO-degree of tr(inner)


@dataclass(frozen=True)
class NamedClass:
    level: gr.GroupId
    monomial: Monomial
    transfer: Transfer = None

    def __str__(self):
        out = ""
        if self.transfer is not None:
            H = self.transfer.subgroup.group
            out = f"tr_{{{H}}}^{{{self.level}}}({self.transfer.inner})"
        m = str(self.monomial)
        if m != "1" or not out:
            out = f"{out} {m}".strip()
        return out

    def times(self, mono):
        return NamedClass(self.level, self.monomial * mono, self.transfer)


def named(mono, transfer=None):
    return NamedClass(mono.group, mono, transfer)


def degree_of(c):
    if isinstance(c, Monomial):
        return c.degree()
    d = c.monomial.degree()
    if c.transfer is not None:
        t = c.transfer
        inner = t.inner.degree()
        if gr.restrict(t.declared, t.subgroup) != inner.ro_degree:
            raise ValueError(
                f"transfer of {t.inner} cannot sit in G-degree {t.declared}: restriction mismatch")
        d = d + SymbolDegree(t.declared, inner.filtration)
    return d


@dataclass(frozen=True)
class DifferentialSpec:
    r: int
    source: NamedClass
    coefficient: int
    target: NamedClass

    def __str__(self):
        coef = "" if self.coefficient == 1 else f"{self.coefficient}·"
        return f"d_{self.r}({self.source}) = {coef}{self.target}"


def _restrict_degree(d, H):
    return SymbolDegree(gr.restrict(d.ro_degree, H), d.filtration)


def validate(d):
    """Degree drops by one, filtration rises by r; transfers also checked below."""
    try:
        src = degree_of(d.source)
        tgt = degree_of(d.target)
    except ValueError:
        return False
    if d.r < 2 or tgt.filtration - src.filtration != d.r:
        return False
    if tgt.ro_degree != src.ro_degree - 1:
        return False
    t = d.target.transfer
    if t is not None:
        H = t.subgroup
        lhs = gr.restrict(src.ro_degree - 1, H)
        rhs = t.inner.degree().ro_degree + gr.restrict(d.target.monomial.degree().ro_degree, H)
        if lhs != rhs:
            return False
        if t.inner.degree().filtration + d.target.monomial.degree().filtration - src.filtration != d.r:
            return False
    return True


# ------------------------------------------------------------------ norms

def _subgroup_ref(H, G):
    if isinstance(H, gr.SubgroupRef):
        return H
    if G.kind == CYCLIC:
        return gr.subgroup(G, H.n if H.kind == CYCLIC else 0)
    if G.kind == QUATERNION:
        return gr.subgroup(G, {"Trivial": "e", "Cyclic2Power": "C2center"}[H.kind])
    return gr.subgroup(G, "e" if H.kind == "Trivial" else 0)


def _ind(V, ref):
    which = ref.which if isinstance(ref.which, str) and ref.which.startswith("C4") else None
    return gr.induce(V, ref.parent, which)


def norm_symbol(s, ref):
    k = ref.index
    name = s.name if k == 1 else f"N({s.name})"
    return Symbol(name, _ind(s.degree, ref), k * s.filtration)


def norm_monomial(x, ref):
    """N_H^G of a monomial, with N(u_V) = u_{Ind V} / u_{Ind |V|}."""
    G = ref.parent
    k = ref.index
    if k == 1:
        return x
    a = _ind(x.a, ref)
    u = _ind(x.u, ref) - _ind(gr.trivial(x.group, x.u.dim), ref)
    syms = tuple((norm_symbol(s, ref), e) for s, e in x.symbols)
    return Monomial(G, a, u, syms)


def _negative_u_part(m):
    neg = tuple(-c if c < 0 else 0 for c in m.u.coeffs)
    return VirtualRep(m.group, neg)


def _clear_denominators(src, tgt):
    """Multiply both sides by u_W to make the source's u-exponents nonnegative."""
    W = _negative_u_part(src.monomial)
    if W.is_zero():
        return src, tgt
    mult = Monomial(src.level, None, W)
    return src.times(mult), tgt.times(mult)


def _central(ref):
    H, G = ref.group, ref.parent
    if G.kind == CYCLIC or H.order == 1 or H == G:
        return True
    return G.kind == QUATERNION and ref.which == "C2center"


def hhr_norm_differential(d, G, H=None):
    """d_r(x) = y at H gives d_{k(r-1)+1}(N(x) a_rho_bar) = N(y) at G."""
    if not validate(d):
        raise ValueError("input differential does not pass validation")
    if d.source.transfer is not None or d.target.transfer is not None:
        raise ValueError("norms of transfer-wrapped classes are not supported")
    ref = _subgroup_ref(H if H is not None else d.source.level, G)
    k = ref.index
    if k == 1:
        return d
    Hgrp = ref.group
    rho_bar = _ind(gr.trivial(Hgrp), ref) - gr.trivial(G)
    src = named(norm_monomial(d.source.monomial, ref) * Monomial(G, rho_bar))
    tgt = named(norm_monomial(d.target.monomial, ref))
    src, tgt = _clear_denominators(src, tgt)
    out = DifferentialSpec(k * (d.r - 1) + 1, src, d.coefficient ** k, tgt)
    if not validate(out):
        raise ValueError(f"normed differential fails validation: {out}")
    return out


def norm_transfer_differential(d, G, H=None):
    """Central case: d_r(x) = y at H gives d_r(N(x)) = tr(y x^{k-1}) at G."""
    if not validate(d):
        raise ValueError("input differential does not pass validation")
    ref = _subgroup_ref(H if H is not None else d.source.level, G)
    k = ref.index
    if k == 1:
        return d
    if not _central(ref):
        raise ValueError(f"{ref.group} is not central in {G}; only the central case is supported")
    x = d.source.monomial
    y = d.target.monomial
    inner = y
    for _ in range(k - 1):
        inner = inner * x
    Nx = norm_monomial(x, ref)
    declared = Nx.degree().ro_degree - 1
    src = named(Nx)
    tgt = NamedClass(G, Monomial(G), Transfer(ref, inner, declared))
    src, tgt = _clear_denominators(src, tgt)
    out = DifferentialSpec(d.r, src, d.coefficient, tgt)
    if not validate(out):
        raise ValueError(f"norm-transfer differential fails validation: {out}")
    return out


# ------------------------------------------------------- orientation classes

def c2_orientation_differential(ell):
    """d_{2^{l+1}-1}(u_{2^l sigma_2}) = vbar_l a_{(2^{l+1}-1) sigma_2}."""
    src = named(Monomial(C2, None, gr.sigma(C2, 2 ** ell)))
    tgt = named(Monomial(C2, gr.sigma(C2, 2 ** (ell + 1) - 1), None, ((vbar(ell), 1),)))
    return DifferentialSpec(2 ** (ell + 1) - 1, src, 1, tgt)


def W_ell(G, ell):
    """2^l (Ind_{C_2}^{G}(1) - 1); for cyclic G this is
    2^l sigma + 2^l lambda_1 + 2^{l+1} lambda_2 + ... + 2^{l+n-3} lambda_{n-2}."""
    if G.kind == CYCLIC:
        n = G.n
        W = gr.sigma(G, 2 ** ell)
        for i in range(1, n - 1):
            W += gr.lam(G, i, 2 ** (ell + i - 1))
        return W
    return gr.q8_sign("i", 2 ** ell) + gr.q8_sign("j", 2 ** ell) + gr.q8_sign("k", 2 ** ell)


def theoremD_spec(G, ell):
    """The orientation-class differential on page 2^{l+1} - 1 at level G."""
    r = 2 ** (ell + 1) - 1
    if G == C2:
        return c2_orientation_differential(ell)
    if G.kind == CYCLIC:
        n = G.n
        src = named(Monomial(G, None, gr.lam(G, n - 1, 2 ** (ell + n - 2))))
        inner_u = gr.sigma(C2, 2 ** (ell + n - 1) - 2 ** ell)
        ref = gr.subgroup(G, 1)
    elif G.kind == QUATERNION:
        src = named(Monomial(G, None, gr.quaternion_H(2 ** ell)))
        inner_u = gr.sigma(C2, 3 * 2 ** ell)
        ref = gr.subgroup(G, "C2center")
    else:
        raise ValueError(f"no orientation-class family for {G}")
    inner = Monomial(C2, gr.sigma(C2, r), inner_u, ((vbar(ell), 1),))
    outer = Monomial(G, None, W_ell(G, ell))
    declared = src.monomial.degree().ro_degree - 1 - outer.degree().ro_degree
    tgt = NamedClass(G, outer, Transfer(ref, inner, declared))
    return DifferentialSpec(r, src, 1, tgt)


def theoremD_family(p):
    """One spec per l in 1..h for the pair (h, G)."""
    return [theoremD_spec(p.group, ell) for ell in range(1, p.h + 1)]


def bidegree_summary(d):
    s, t = degree_of(d.source), degree_of(d.target)
    return {
        "page": d.r,
        "source": str(d.source),
        "source_degree": str(s.ro_degree),
        "source_filtration": s.filtration,
        "target": str(d.target),
        "target_degree": str(t.ro_degree),
        "target_filtration": t.filtration,
        "valid": validate(d),
    }


def same_spec(a, b):
    """Structural equality of two specs (used for 'verbatim' comparisons)."""
    return a.r == b.r and a.coefficient == b.coefficient and a.source == b.source and a.target == b.target
