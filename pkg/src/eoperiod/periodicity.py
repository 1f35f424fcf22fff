"""Integer and RO(G)-graded periodicities of EO_h(G) and their lattices."""

from dataclasses import dataclass

from . import groups as gr
from .groups import C2, C4, CYCLIC, QUATERNION, TRIVIAL, Q8, VirtualRep
from .lattice import IntegerLattice, InvariantFactors, contains, minimal_multiple, quotient


@dataclass(frozen=True)
class HeightGroupPair:
    h: int
    group: gr.GroupId

    def __post_init__(self):
        if self.h < 1:
            raise ValueError("height must be positive")
        G = self.group
        if G.kind == CYCLIC:
            if self.h % 2 ** (G.n - 1):
                raise ValueError(f"height {self.h} is not divisible by 2^{G.n - 1} for {G}")
        elif G.kind == QUATERNION:
            if self.h % 4 != 2:
                raise ValueError("Q8 needs h = 4l + 2")
        else:
            raise ValueError("the lattice is only defined for C_{2^n} and Q8")

    @property
    def n(self):
        return self.group.n

    @property
    def m(self):
        return self.h // 2 ** (self.group.n - 1)

    @property
    def ell(self):
        return (self.h - 2) // 4


def P(h, d):
    """Integer periodicity of EO_h(G) from the 2-Sylow subgroup of G_0."""
    if isinstance(d, gr.GroupId):
        d = gr.descriptor_for(d)
    if h < 1:
        raise ValueError("height must be positive")
    S = d.sylow2
    if S.kind == TRIVIAL:
        base = 2
    elif S.kind == CYCLIC:
        base = 2 ** (h + S.n + 1)
    else:
        base = 2 ** (h + 4)
    return d.odd_index * base


# Known integer periodicities: (name, h, |G_0|, Sylow subgroup, period).
KNOWN_PERIODICITIES = [
    ("EO_1(C_2)", 1, 2, C2, 8),
    ("EO_2(C_2)", 2, 2, C2, 16),
    ("EO_2(C_4)", 2, 4, C4, 32),
    ("EO_2(C_6)", 2, 6, C2, 48),
    ("EO_2(Q_8)", 2, 8, Q8, 64),
    ("EO_2(G_24)", 2, 24, Q8, 192),
    ("EO_2(G_48)", 2, 24, Q8, 192),
    ("EO_4(C_2)", 4, 2, C2, 64),
    ("EO_4(C_4)", 4, 4, C4, 128),
    ("EO_4(C_8)", 4, 8, gr.cyclic(3), 256),
    ("EO_4(C_12)", 4, 12, C4, 384),
]


def known_periodicities(h_max=8):
    """The fixed list plus the EO_h(C_2) = 2^{h+2} family for h <= h_max."""
    out = list(KNOWN_PERIODICITIES)
    out += [(f"EO_{h}(C_2) family", h, 2, C2, 2 ** (h + 2)) for h in range(1, h_max + 1)]
    return out


def generators_Lprime(p):
    G = p.group
    if G.kind == CYCLIC:
        n, m = p.n, p.m
        gens = [gr.regular(G)]
        for i in range(1, n + 1):
            e = 2 ** (n - i) * m + n - i
            gens.append(gr.trivial(G, 2 ** (e + 1)) - gr.lam(G, n - i, 2 ** e))
        return IntegerLattice(G, gens)
    ell = p.ell
    gens = [gr.regular(Q8)]
    b = 2 ** (2 * ell + 2)
    for x in "ijk":
        v = gr.trivial(Q8, b) + gr.q8_sign(x, b)
        for y in "ijk":
            if y != x:
                v -= gr.q8_sign(y, b)
        gens.append(v)
    c = 2 ** (p.h + 2)
    for x in "ijk":
        gens.append(gr.trivial(Q8, c) + gr.q8_sign(x, c) - gr.quaternion_H(2 ** (p.h + 1)))
    return IntegerLattice(Q8, gens)


def unit(G):
    return gr.trivial(G)


def complexity(p):
    L = generators_Lprime(p)
    return quotient(L.ambient_rank, L)


def complexity_closed_form(p):
    if p.group.kind == CYCLIC:
        n, m = p.n, p.m
        orders = [2 ** (2 ** (n - i - 1) * m + n - i) for i in range(1, n)]
        orders.append(2 ** (p.h + n + 1))
    else:
        ell = p.ell
        orders = [2 ** (2 * ell + 2), 2 ** (2 * ell + 3), 2 ** (2 * ell + 3), 2 ** (4 * ell + 6)]
    return InvariantFactors.from_cyclic_orders(orders)


def integer_period(p):
    return minimal_multiple(generators_Lprime(p), unit(p.group))


def sylow_descriptor(p):
    return gr.descriptor_for(p.group)


def sharpness_candidate(p):
    G = p.group
    if G.kind == CYCLIC:
        h, n = p.h, p.n
        return gr.trivial(G, 2 ** (h + n - 1)) - gr.lam(G, n - 1, 2 ** (h + n - 2))
    return gr.trivial(Q8, 2 ** (p.h + 2)) - gr.quaternion_H(2 ** p.h)


def sharpness_drop(p):
    L = generators_Lprime(p).adjoin(sharpness_candidate(p))
    return minimal_multiple(L, unit(p.group))


def verify_combination(coeffs, gens, target):
    if len(coeffs) != len(gens):
        raise ValueError("coefficient and generator lists differ in length")
    total = gr.zero(target.group)
    for c, g in zip(coeffs, gens):
        total += g * int(c)
    return total == target


def remark_combination(p):
    """(coefficients, generators, target) exhibiting the integer period in L'."""
    L = generators_Lprime(p)
    G = p.group
    h = p.h
    if G.kind == CYCLIC:
        n, m = p.n, p.m
        coeffs = [2 ** (h + 1)] + [2 ** (h - 2 ** (n - i) * m) for i in range(1, n + 1)]
        return coeffs, L.generators, gr.trivial(G, 2 ** (h + n + 1))
    ell = p.ell
    coeffs = [2 ** (4 * ell + 3), 2 ** (2 * ell + 1), 2 ** (2 * ell + 2), 2 ** (2 * ell + 2), 1, 0, 0]
    return coeffs, L.generators, gr.trivial(Q8, 2 ** (4 * ell + 6))


def q8_dependency_identities(p):
    """The sigma_j and sigma_k members of the third Q8 family in terms of the others.

    Generators are ordered rho, b_i, b_j, b_k, c_i, c_j, c_k; each entry is
    (coefficients over the first five, the dependent generator).
    """
    gens = generators_Lprime(p).generators
    s = 2 ** (2 * p.ell + 1)
    out = []
    for b_idx, c_idx in ((2, 5), (3, 6)):
        coeffs = [0, -s, 0, 0, 1]
        coeffs[b_idx] = s
        out.append((coeffs, gens[:5], gens[c_idx]))
    return out


def sharpness_combination(p):
    """Adjoining the candidate makes the halved period reachable."""
    L = generators_Lprime(p).adjoin(sharpness_candidate(p))
    target = gr.trivial(p.group, sharpness_drop(p))
    return L, target


def induction_checks(p):
    """Subgroup generators whose inductions must lie in L' (as used in the proofs)."""
    G = p.group
    L = generators_Lprime(p)
    out = []
    if G.kind == CYCLIC:
        out.append(("Ind_{C2}(rho_2)", gr.induce(gr.regular(C2), G)))
    else:
        ell = p.ell
        for x in "ijk":
            v = gr.trivial(C4, 2 ** (2 * ell + 2)) - gr.sigma(C4, 2 ** (2 * ell + 2))
            out.append((f"Ind_{{C4<{x}>}}", gr.induce(v, Q8, f"C4{x}")))
    return [(name, v, contains(L, v)) for name, v in out]


@dataclass(frozen=True)
class PeriodicityReport:
    pair: HeightGroupPair
    lattice: IntegerLattice
    complexity: InvariantFactors
    integer_period: int


def report(p):
    L = generators_Lprime(p)
    return PeriodicityReport(p, L, quotient(L.ambient_rank, L), minimal_multiple(L, unit(p.group)))


# The true lattices in the two worked C4 examples.
def true_lattice_C4(h):
    G = C4
    if h == 2:
        gens = [gr.regular(G), VirtualRep(G, (4, -4, 0)), VirtualRep(G, (10, -2, -4))]
    elif h == 4:
        gens = [gr.regular(G), VirtualRep(G, (8, -8, 0)), VirtualRep(G, (36, -4, -16))]
    else:
        raise ValueError("only h = 2 and h = 4 are stored")
    return IntegerLattice(G, gens)
