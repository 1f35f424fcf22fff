"""Group descriptors and 2-local real representation rings of C_{2^n} and Q8.

Representations are integer vectors over a fixed irreducible basis:

    C_{2^n}: (1, sigma, lambda_1, ..., lambda_{n-1})
    Q8:      (1, sigma_i, sigma_j, sigma_k, H)
    e:       (1,)

lambda_i is the plane on which a generator rotates by pi/2^i.  Rotations
whose angles have the same 2-adic valuation are identified, so these are
all the 2-local irreducibles.
"""

import math
import re
from dataclasses import dataclass

TRIVIAL = "Trivial"
CYCLIC = "Cyclic2Power"
QUATERNION = "Quaternion8"

Q8_SUBGROUPS = ("e", "C2center", "C4i", "C4j", "C4k", "Q8")


@dataclass(frozen=True)
class GroupId:
    kind: str
    n: int = 0

    def __post_init__(self):
        if self.kind == CYCLIC:
            if not isinstance(self.n, int) or self.n < 1:
                raise ValueError("Cyclic2Power needs n >= 1")
        elif self.kind in (TRIVIAL, QUATERNION):
            if self.n != 0:
                raise ValueError(f"{self.kind} takes no parameter")
        else:
            raise ValueError(f"unknown group kind {self.kind!r}")

    @property
    def order(self):
        if self.kind == CYCLIC:
            return 2 ** self.n
        if self.kind == QUATERNION:
            return 8
        return 1

    def __str__(self):
        if self.kind == CYCLIC:
            return f"C{2 ** self.n}"
        if self.kind == QUATERNION:
            return "Q8"
        return "e"


def cyclic(n):
    """C_{2^n}; n = 0 gives the trivial group."""
    if n == 0:
        return GroupId(TRIVIAL)
    return GroupId(CYCLIC, n)


E = GroupId(TRIVIAL)
C2 = cyclic(1)
C4 = cyclic(2)
Q8 = GroupId(QUATERNION)


def parse_group(text):
    """Accepts C1, C2, C4, C2^3, Q8, e."""
    t = text.strip().replace(" ", "")
    if t in ("e", "C1", "1", "Trivial"):
        return E
    if t.upper() == "Q8":
        return Q8
    m = re.fullmatch(r"C2\^(\d+)", t)
    if m:
        return cyclic(int(m.group(1)))
    m = re.fullmatch(r"C(\d+)", t)
    if m:
        order = int(m.group(1))
        if order & (order - 1):
            raise ValueError(f"only 2-power cyclic groups are supported, got {text}")
        return cyclic(order.bit_length() - 1)
    raise ValueError(f"cannot parse group {text!r}")


@dataclass(frozen=True)
class SubgroupRef:
    parent: GroupId
    which: object  # int k for cyclic parents, a Q8_SUBGROUPS name for Q8

    def __post_init__(self):
        p = self.parent
        if p.kind == CYCLIC:
            if not isinstance(self.which, int) or not 0 <= self.which <= p.n:
                raise ValueError(f"C{p.order} has no subgroup index {self.which!r}")
        elif p.kind == QUATERNION:
            if self.which not in Q8_SUBGROUPS:
                raise ValueError(f"Q8 has no subgroup {self.which!r}")
        elif self.which not in (0, "e"):
            raise ValueError("the trivial group has only itself")

    @property
    def group(self):
        p = self.parent
        if p.kind == CYCLIC:
            return cyclic(self.which)
        if p.kind == QUATERNION:
            return {"e": E, "C2center": C2, "Q8": Q8}.get(self.which, C4)
        return E

    @property
    def index(self):
        return self.parent.order // self.group.order


def subgroup(parent, which):
    return SubgroupRef(parent, which)


def basis(G):
    if G.kind == CYCLIC:
        return ["1", f"σ_{G.order}"] + [f"λ_{i}" for i in range(1, G.n)]
    if G.kind == QUATERNION:
        return ["1", "σ_i", "σ_j", "σ_k", "ℍ"]
    return ["1"]


def irreducible_dims(G):
    if G.kind == CYCLIC:
        return (1, 1) + (2,) * (G.n - 1)
    if G.kind == QUATERNION:
        return (1, 1, 1, 1, 4)
    return (1,)


@dataclass(frozen=True)
class VirtualRep:
    group: GroupId
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        if len(coeffs) != len(basis(self.group)):
            raise ValueError(f"{self.group} needs {len(basis(self.group))} coefficients")
        object.__setattr__(self, "coeffs", coeffs)

    def _check(self, other):
        if not isinstance(other, VirtualRep) or other.group != self.group:
            raise TypeError("representations over different groups")

    def __add__(self, other):
        if isinstance(other, int):
            other = trivial(self.group, other)
        self._check(other)
        return VirtualRep(self.group, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return VirtualRep(self.group, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, int):
            other = trivial(self.group, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return VirtualRep(self.group, tuple(k * a for a in self.coeffs))

    __rmul__ = __mul__

    def __getitem__(self, i):
        return self.coeffs[i]

    @property
    def dim(self):
        return sum(c * d for c, d in zip(self.coeffs, irreducible_dims(self.group)))

    def is_zero(self):
        return not any(self.coeffs)

    def is_actual(self):
        return all(c >= 0 for c in self.coeffs)

    def __str__(self):
        return format_rep(self)

    def to_json(self):
        return {"group": str(self.group), "basis": basis(self.group), "coeffs": list(self.coeffs)}

    @classmethod
    def from_json(cls, obj):
        return cls(parse_group(obj["group"]), tuple(obj["coeffs"]))

    @classmethod
    def parse(cls, G, text):
        return parse_rep(G, text)


def dim(V):
    return V.dim


def zero(G):
    return VirtualRep(G, (0,) * len(basis(G)))


def unit_vector(G, i, k=1):
    c = [0] * len(basis(G))
    c[i] = k
    return VirtualRep(G, tuple(c))


def trivial(G, k=1):
    return unit_vector(G, 0, k)


def sigma(G, k=1):
    """The sign representation of a cyclic group (lambda_0 = 2 sigma)."""
    if G.kind != CYCLIC:
        raise ValueError("sigma is only defined for cyclic groups")
    return unit_vector(G, 1, k)


def lam(G, i, k=1):
    """lambda_i of C_{2^n}; lambda_0 is normalized to 2 sigma."""
    if G.kind != CYCLIC or not 0 <= i < G.n:
        raise ValueError(f"lambda_{i} is not defined for {G}")
    if i == 0:
        return sigma(G, 2 * k)
    return unit_vector(G, i + 1, k)


def q8_sign(x, k=1):
    return unit_vector(Q8, "ijk".index(x) + 1, k)


def quaternion_H(k=1):
    return unit_vector(Q8, 4, k)


def regular(G):
    if G.kind == CYCLIC:
        c = [1, 1] + [2 ** (i - 1) for i in range(1, G.n)]
        return VirtualRep(G, tuple(c))
    return VirtualRep(G, (1,) * len(basis(G)))


def format_rep(V):
    terms = []
    for c, label in zip(V.coeffs, basis(V.group)):
        if c == 0:
            continue
        if label == "1":
            body = str(abs(c))
        elif abs(c) == 1:
            body = label
        else:
            body = f"{abs(c)}·{label}"
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def _label_index(G, label):
    label = label.strip()
    names = basis(G)
    if label in ("", "1"):
        return 0, 1
    if label in names:
        return names.index(label), 1
    m = re.fullmatch(r"(s|sigma|σ)(?:_?(\d+|i|j|k))?", label)
    if m:
        sub = m.group(2)
        if G.kind == QUATERNION and sub in ("i", "j", "k"):
            return "ijk".index(sub) + 1, 1
        if G.kind == CYCLIC and (sub is None or int(sub) == G.order):
            return 1, 1
    m = re.fullmatch(r"(l|lambda|λ)_?(\d*)", label)
    if m and G.kind == CYCLIC:
        i = int(m.group(2)) if m.group(2) else 1
        if i == 0:
            return 1, 2
        if 1 <= i < G.n:
            return i + 1, 1
    if label in ("H", "ℍ") and G.kind == QUATERNION:
        return 4, 1
    raise ValueError(f"unknown basis label {label!r} for {G}")


def parse_rep(G, text):
    """Parse forms like '3 + 2*s - l', '1 + σ_4 + λ_1', '4ℍ'."""
    s = text.replace("·", "*").replace("−", "-").replace(" ", "")
    if not s:
        raise ValueError("empty representation")
    if s[0] not in "+-":
        s = "+" + s
    coeffs = [0] * len(basis(G))
    terms = re.findall(r"[+-][^+-]*", s)
    if "".join(terms) != s:
        raise ValueError(f"cannot parse representation {text!r}")
    for term in terms:
        m = re.fullmatch(r"([+-])(\d*)\*?(.*)", term)
        sign, num, label = m.groups()
        if not num and not label:
            raise ValueError(f"cannot parse representation {text!r}")
        k = int(num) if num else 1
        idx, mult = _label_index(G, label)
        coeffs[idx] += (-k if sign == "-" else k) * mult
    return VirtualRep(G, tuple(coeffs))


# ---------------------------------------------------------------- res / ind

def _res_cyclic_step(V):
    """C_{2^n} -> C_{2^{n-1}}."""
    n = V.group.n
    H = cyclic(n - 1)
    out = zero(H)
    c = V.coeffs
    out += trivial(H, c[0] + c[1])
    for i in range(1, n):
        k = c[i + 1]
        if k:
            out += lam(H, i - 1, k) if i >= 2 else sigma(H, 2 * k)
    return out


def _ind_cyclic_step(V, G):
    """C_{2^{n-1}} -> C_{2^n}."""
    H = V.group
    out = zero(G)
    c = V.coeffs
    out += (trivial(G) + sigma(G)) * c[0]
    if H.kind == CYCLIC:
        out += lam(G, 1, c[1])
        for i in range(1, H.n):
            out += lam(G, i + 1, 2 * c[i + 1])
    return out


def _q8_res_c4(V, x):
    c = V.coeffs
    H = C4
    signs = dict(zip("ijk", c[1:4]))
    out = trivial(H, c[0] + signs[x])
    out += sigma(H, sum(v for y, v in signs.items() if y != x))
    out += lam(H, 1, 2 * c[4])
    return out


def _q8_res_c2(V):
    c = V.coeffs
    return trivial(C2, c[0] + c[1] + c[2] + c[3]) + sigma(C2, 4 * c[4])


def _q8_ind_c2(V):
    c = V.coeffs
    return VirtualRep(Q8, (c[0], c[0], c[0], c[0], c[1]))


def _q8_ind_c4(V, x):
    c = V.coeffs
    out = trivial(Q8, c[0]) + q8_sign(x, c[0])
    for y in "ijk":
        if y != x:
            out += q8_sign(y, c[1])
    return out + quaternion_H(c[2])


def _as_ref(G, H):
    if isinstance(H, SubgroupRef):
        if H.parent != G:
            raise ValueError(f"{H} is not a subgroup reference of {G}")
        return H
    if isinstance(H, (int, str)):
        return SubgroupRef(G, H)
    raise TypeError("expected a SubgroupRef")


def restrict(V, H):
    """Restriction of V to the subgroup H (a SubgroupRef of V.group)."""
    G = V.group
    ref = _as_ref(G, H)
    if G.kind == CYCLIC:
        W = V
        while W.group.kind == CYCLIC and W.group.n > ref.which:
            if W.group.n == 1:
                W = VirtualRep(E, (W.dim,))
            else:
                W = _res_cyclic_step(W)
        return W
    if G.kind == QUATERNION:
        w = ref.which
        if w == "Q8":
            return V
        if w == "e":
            return VirtualRep(E, (V.dim,))
        if w == "C2center":
            return _q8_res_c2(V)
        return _q8_res_c4(V, w[-1])
    return V


def induce(V, G, H=None):
    """Induction of V (over a subgroup) up to G.

    For Q8 with V over C4 the copy of C4 must be named with H = 'C4i' etc.;
    for cyclic G the subgroup is determined by V.group.
    """
    K = V.group
    if G.kind == CYCLIC:
        if K.kind not in (CYCLIC, TRIVIAL) or (K.kind == CYCLIC and K.n > G.n):
            raise ValueError(f"{K} is not a subgroup of {G}")
        W = V
        k = 0 if K.kind == TRIVIAL else K.n
        for step in range(k + 1, G.n + 1):
            W = _ind_cyclic_step(W, cyclic(step))
        return W
    if G.kind == QUATERNION:
        if K == Q8:
            return V
        if K == E:
            return _q8_ind_c2(_ind_cyclic_step(V, C2))
        if K == C2:
            if H not in (None, "C2center"):
                raise ValueError(f"C2 sits in Q8 only as the center, not {H}")
            return _q8_ind_c2(V)
        if K == C4:
            if H not in ("C4i", "C4j", "C4k"):
                raise ValueError("name the copy of C4 in Q8 (C4i, C4j or C4k)")
            return _q8_ind_c4(V, H[-1])
        raise ValueError(f"{K} is not a subgroup of Q8")
    if K != G:
        raise ValueError(f"{K} is not a subgroup of {G}")
    return V


# ----------------------------------------------------------- character oracle

def _quat_mul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def _quat_inv(p):
    return (p[0], -p[1], -p[2], -p[3])


_Q_UNITS = {"1": (1, 0, 0, 0), "i": (0, 1, 0, 0), "j": (0, 0, 1, 0), "k": (0, 0, 0, 1)}


def _q8_elements():
    out = []
    for u in _Q_UNITS.values():
        out.append(u)
        out.append(tuple(-x for x in u))
    return out


class _FiniteGroup:
    """Explicit elements, multiplication, and real irreducible characters."""

    def __init__(self, G):
        self.G = G
        if G.kind == QUATERNION:
            self.elements = _q8_elements()
            self.mul = _quat_mul
            self.inv = _quat_inv
        else:
            N = G.order
            self.elements = list(range(N))
            self.mul = lambda a, b: (a + b) % N
            self.inv = lambda a: (-a) % N

    def character(self, label_index):
        """Character of the basis irreducible with the given index."""
        G = self.G
        if G.kind == QUATERNION:
            def chi(q):
                if label_index == 0:
                    return 1.0
                if label_index == 4:
                    return 4.0 * q[0]
                axis = label_index
                if q[0] != 0 or q[axis] != 0:
                    return 1.0
                return -1.0
            return chi
        if label_index == 0:
            return lambda g: 1.0
        if label_index == 1:
            return lambda g: (-1.0) ** g
        i = label_index - 1
        return lambda g: 2.0 * math.cos(g * math.pi / 2 ** i)

    def real_irreducibles(self):
        """All real irreducible characters, as (2-local basis index, chi, <chi,chi>)."""
        G = self.G
        if G.kind == QUATERNION:
            return [(idx, self.character(idx), 4.0 if idx == 4 else 1.0) for idx in range(5)]
        if G.kind == TRIVIAL:
            return [(0, lambda g: 1.0, 1.0)]
        N = G.order
        out = [(0, lambda g: 1.0, 1.0), (1, lambda g: (-1.0) ** g, 1.0)]
        for t in range(1, N // 2):
            v = (t & -t).bit_length() - 1
            idx = (G.n - 1 - v) + 1
            out.append((idx, (lambda t: lambda g: 2.0 * math.cos(2 * math.pi * t * g / N))(t), 2.0))
        return out


def _subgroup_embedding(H_ref):
    """(elements of H inside G, map G-element -> H-element or None)."""
    G = H_ref.parent
    H = H_ref.group
    if G.kind == QUATERNION:
        w = H_ref.which
        if w == "Q8":
            return lambda q: q
        if w == "e":
            return lambda q: 0 if q == (1, 0, 0, 0) else None
        if w == "C2center":
            return lambda q: {(1, 0, 0, 0): 0, (-1, 0, 0, 0): 1}.get(q)
        gen = _Q_UNITS[w[-1]]
        powers = {}
        p = (1, 0, 0, 0)
        for m in range(4):
            powers[p] = m
            p = _quat_mul(p, gen)
        return lambda q: powers.get(q)
    N = G.order
    step = N // H.order

    def emb(g):
        return g // step if g % step == 0 else None

    return emb


def frobenius_oracle(V, H, G=None):
    """Induce V from H up to its parent numerically and decompose.

    H is a SubgroupRef whose group matches V.group; the induced character
    comes from the standard formula, and the decomposition is read off by
    inner products against the real irreducible characters of the parent.
    """
    if not V.is_actual():
        raise ValueError("the character oracle needs an actual representation")
    if G is not None and H.parent != G:
        raise ValueError("subgroup reference does not live in G")
    G = H.parent
    if H.group != V.group:
        raise ValueError("V is not a representation of H")
    Gf = _FiniteGroup(G)
    Hf = _FiniteGroup(V.group)
    emb = _subgroup_embedding(H)
    chars_H = [Hf.character(i) for i in range(len(basis(V.group)))]

    def chi_V(h):
        return sum(c * chars_H[i](h) for i, c in enumerate(V.coeffs))

    order_H = V.group.order
    induced = {}
    for g in Gf.elements:
        total = 0.0
        for x in Gf.elements:
            conj = Gf.mul(Gf.mul(x, g), Gf.inv(x))
            h = emb(conj)
            if h is not None:
                total += chi_V(h)
        induced[g] = total / order_H

    coeffs = [0] * len(basis(G))
    residual = dict(induced)
    nG = len(Gf.elements)
    for idx, chi, norm in Gf.real_irreducibles():
        ip = sum(induced[g] * chi(g) for g in Gf.elements) / nG / norm
        k = round(ip)
        if abs(ip - k) > 1e-9:
            raise ValueError(f"non-integral multiplicity {ip} in character decomposition")
        coeffs[idx] += k
        for g in Gf.elements:
            residual[g] -= k * chi(g)
    if max(abs(r) for r in residual.values()) > 1e-9:
        raise ValueError("induced character does not decompose over the table")
    return VirtualRep(G, tuple(coeffs))


def character_restrict(V, H):
    """Restriction computed from characters (oracle for restrict)."""
    H = _as_ref(V.group, H)
    Gf = _FiniteGroup(V.group)
    Hf = _FiniteGroup(H.group)
    emb = _subgroup_embedding(H)
    chars = [Gf.character(i) for i in range(len(basis(V.group)))]
    values = {}
    for g in Gf.elements:
        h = emb(g)
        if h is not None:
            values[h] = sum(c * chars[i](g) for i, c in enumerate(V.coeffs))
    coeffs = [0] * len(basis(H.group))
    n = len(Hf.elements)
    residual = dict(values)
    for idx, chi, norm in Hf.real_irreducibles():
        ip = sum(values[h] * chi(h) for h in Hf.elements) / n / norm
        k = round(ip)
        if abs(ip - k) > 1e-9:
            raise ValueError("non-integral multiplicity in restriction")
        coeffs[idx] += k
        for h in Hf.elements:
            residual[h] -= k * chi(h)
    if max(abs(r) for r in residual.values()) > 1e-9:
        raise ValueError("restricted character does not decompose")
    return VirtualRep(H.group, tuple(coeffs))


def trivial_multiplicity(V):
    return V.coeffs[0]


# ------------------------------------------------------ finite subgroup data

@dataclass(frozen=True)
class FiniteSubgroupDescriptor:
    g0_order: int
    sylow2: GroupId

    def __post_init__(self):
        if self.g0_order < 1:
            raise ValueError("g0_order must be positive")
        s = self.sylow2.order
        if self.g0_order % s:
            raise ValueError("Sylow order does not divide |G_0|")
        odd = self.g0_order // s
        if odd % 2 == 0:
            raise ValueError("2-part of |G_0| must equal the Sylow subgroup's order")

    @property
    def odd_index(self):
        return self.g0_order // self.sylow2.order


def descriptor_for(G):
    return FiniteSubgroupDescriptor(G.order, G)


__all__ = [
    "GroupId", "SubgroupRef", "VirtualRep", "FiniteSubgroupDescriptor",
    "E", "C2", "C4", "Q8", "cyclic", "parse_group", "subgroup", "basis", "dim",
    "regular", "restrict", "induce", "frobenius_oracle", "character_restrict",
    "zero", "trivial", "sigma", "lam", "q8_sign", "quaternion_H", "parse_rep",
    "format_rep", "descriptor_for",
]
