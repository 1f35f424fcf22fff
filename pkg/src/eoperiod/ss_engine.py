"""Replay engine for the higher differentials of the C4 slice spectral sequence.

State is kept on the core part of the post-d3 page, which has at most one
cyclic summand per bidegree.  A summand of E4-order 2^nu (or Z) with E4
generator g is tracked as the subquotient <2^lo g> / <2^hi g>; hi is INF
for Z.  A differential d_r(2^lo_s g_s) = c g_t cuts the target to
hi_t = v2(c) and moves lo_s up by (old hi_t - v2(c)).

Negative-cone survivors are read off positive-cone crossing differentials
(see `duality_mirror`); the homotopy table combines both with
script-asserted 2-extensions.
"""

import json
import re
import time
from dataclasses import dataclass, field
from importlib import resources

from . import e2_gen as e2
from .lattice import InvariantFactors

INF = float("inf")
MAX_R = 13
TAGS = ("restriction", "transchromatic", "leibniz", "tate", "vanishing-forced",
        "degree-forced", "duality", "script")

X_DEG = (8, 8)
Z_DEG = (32, 0)
PERIOD_CLASSES = {X_DEG: e2.X_CLASS, Z_DEG: e2.Z_CLASS}


class ReplayError(Exception):
    """A deduction step failed validation."""


def v2(n):
    n = abs(int(n))
    if n == 0:
        return INF
    return (n & -n).bit_length() - 1


def bideg_str(b):
    return f"({b[0]},{b[1]})"


def parse_bideg(text):
    m = re.fullmatch(r"\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*", text)
    if not m:
        raise ValueError(f"bad bidegree {text!r}")
    return (int(m.group(1)), int(m.group(2)))


@dataclass(frozen=True)
class DifferentialRecord:
    r: int
    source: tuple
    coef: int
    target: tuple
    tag: str = "script"
    note: str = ""

    def __str__(self):
        c = "" if self.coef == 1 else f"{self.coef}*"
        return f"d{self.r} {bideg_str(self.source)} -> {c}{bideg_str(self.target)} [{self.tag}]"

    def law_ok(self):
        s, f = self.source
        return 2 <= self.r <= MAX_R and self.target == (s - 1, f + self.r)

    def shifted(self, ds, df, coef=None, tag="tate", note=""):
        return DifferentialRecord(self.r, (self.source[0] + ds, self.source[1] + df),
                                  self.coef if coef is None else coef,
                                  (self.target[0] + ds, self.target[1] + df), tag, note)

    def to_json(self):
        return {"r": self.r, "source": list(self.source), "coef": self.coef,
                "target": list(self.target), "tag": self.tag, "note": self.note}


@dataclass
class Slot:
    """One core summand: subquotient <2^lo g>/<2^hi g> of Z/2^nu or Z."""
    bidegree: tuple
    nu: float          # INF for Z
    vector: dict       # E4 generator as {E2 name: coef}
    lo: float = 0
    hi: float = None
    kills: list = field(default_factory=list)  # (lo, hi, record, role)
    scale: int = 1     # g = scale * (E2 generator) when g is a regular multiple

    def __post_init__(self):
        if self.hi is None:
            self.hi = self.nu
        if len(self.vector) == 1:
            (name, c), = self.vector.items()
            if isinstance(name, e2.RegularName):
                self.scale = abs(c)

    @property
    def alive(self):
        return self.lo < self.hi

    @property
    def free(self):
        return self.hi == INF

    def order(self):
        if not self.alive:
            return 1
        return e2.FREE if self.free else 2 ** int(self.hi - self.lo)


@dataclass(frozen=True)
class PeriodClass:
    bidegree: tuple
    name: object


PERIODS = [PeriodClass(X_DEG, e2.X_CLASS), PeriodClass(Z_DEG, e2.Z_CLASS)]


class PageState:
    """Core summands of the spectral sequence from E4 on, with the applied log."""

    def __init__(self, page, window):
        self.page4 = page
        self.window = window  # (stem_lo, stem_hi, fmax)
        self.slots = {}
        for b, sm in page.core.items():
            nu = INF if sm.order == e2.FREE else v2(sm.order)
            self.slots[b] = Slot(b, nu, sm.vector)
        self.log = []
        self.skipped = []
        self.must_die = {}  # bidegree -> largest order allowed to survive (1 = dies)
        self.permanent = set()
        self.exhausted = 3

    # -------------------------------------------------------------- queries
    def slot(self, b):
        return self.slots.get(tuple(b))

    def alive(self, b):
        s = self.slot(b)
        return s is not None and s.alive

    def in_window(self, b):
        lo, hi, fmax = self.window
        return lo < b[0] < hi and 0 <= b[1] <= fmax

    def excess(self, b):
        """True if b is marked and still carries more than it may keep."""
        if b not in self.must_die or not self.alive(b):
            return False
        o = self.slot(b).order()
        return o == e2.FREE or o > self.must_die[b]

    def orders(self):
        return {b: s.order() for b, s in sorted(self.slots.items())}

    def survivors(self, below=None):
        """Alive classes; `below` caps the filtration (window artifacts sit above the line)."""
        return {b: s for b, s in sorted(self.slots.items())
                if s.alive and (below is None or b[1] < below)}

    def logged(self, r, source, target, coef=None):
        for rec in self.log:
            if rec.r == r and rec.source == tuple(source) and rec.target == tuple(target):
                if coef is None or rec.coef == coef:
                    return rec
        return None

    # ------------------------------------------------------ coefficients
    # Records carry coefficients on the E2 generator (the naming used in the
    # text); the layer bookkeeping works on the E4 generator g = scale * gen.
    def to_e4(self, b, coef):
        sl = self.slot(b)
        if sl is None or coef % sl.scale:
            raise ReplayError(f"{coef}*{bideg_str(b)} is not a multiple of the E4 generator")
        return coef // sl.scale

    def to_e2(self, b, c4):
        sl = self.slot(b)
        return c4 * (sl.scale if sl is not None else 1)

    # -------------------------------------------------------------- products
    def coefficient(self, b, vec):
        """c with vec = c * g_b on E4, None if vec is not a multiple of g_b."""
        if b not in self.page4.core:
            return 0 if not vec else None
        return self.page4.core_coefficient(b, vec)

    def product(self, b1, b2):
        """(u, b) with g_b1 * g_b2 = u * g_b on E4."""
        s1, s2 = self.slots.get(b1), self.slots.get(b2)
        if s1 is None or s2 is None:
            return None
        vec = e2.multiply_vectors(s1.vector, s2.vector)
        b = (b1[0] + b2[0], b1[1] + b2[1])
        if not vec:
            return (0, b)
        c = self.coefficient(b, vec)
        return None if c is None else (c, b)

    def period_unit(self, p, b):
        """u with P * g_b = u * g_{b + |P|}."""
        s = self.slots.get(b)
        if s is None:
            return None
        vec = e2.multiply_vectors({p.name: 1}, s.vector)
        nb = (b[0] + p.bidegree[0], b[1] + p.bidegree[1])
        if nb not in self.slots:
            return None
        return self.coefficient(nb, vec)

    # -------------------------------------------------------------- apply
    def check(self, rec):
        """Reason the record cannot be applied, or None."""
        if not rec.law_ok():
            return f"bidegree law fails for {rec}"
        src, tgt = self.slot(rec.source), self.slot(rec.target)
        if src is None or not src.alive:
            return f"dead or absent source {bideg_str(rec.source)}"
        if tgt is None or not tgt.alive:
            return f"dead or absent target {bideg_str(rec.target)}"
        if rec.coef % tgt.scale:
            return f"{rec.coef}*{bideg_str(rec.target)} is not a multiple of the E4 generator"
        v = v2(rec.coef // tgt.scale)
        if v == INF:
            return "zero coefficient"
        if v < tgt.lo:
            return f"{rec.coef}*g{bideg_str(rec.target)} is not on the current page"
        if v >= tgt.hi:
            return f"non-essential: {rec.coef}*g{bideg_str(rec.target)} is already zero"
        if tgt.free and not src.free:
            return "torsion source cannot hit a free target"
        if not tgt.free and not src.free and tgt.hi - v > src.hi - src.lo:
            return "source order too small for the image"
        return None

    def apply(self, rec):
        why = self.check(rec)
        if why:
            raise ReplayError(why)
        src, tgt = self.slot(rec.source), self.slot(rec.target)
        v = v2(rec.coef // tgt.scale)
        old_hi = tgt.hi
        tgt.kills.append((v, old_hi, rec, "target"))
        tgt.hi = v
        old_lo = src.lo
        if old_hi == INF:
            src.lo = src.hi = INF
        else:
            src.lo = src.lo + (old_hi - v)
        src.kills.append((old_lo, src.lo, rec, "source"))
        self.log.append(rec)
        return rec

    def try_apply(self, rec):
        why = self.check(rec)
        if why:
            self.skipped.append((rec, why))
            return False
        self.apply(rec)
        return True

    def copy_log(self):
        return list(self.log)


# ------------------------------------------------------------------ derivations

def _find(state, b, r):
    """The logged d_r supported by the class at b (None if there is none)."""
    for rec in state.log:
        if rec.source == b and rec.r == r:
            return rec
    return None


def leibniz(state, known, multiplier, mode="forward"):
    """Records from the Leibniz rule with a multiplier class.

    forward: d(m x) = d(m) x + m d(x), d(m) looked up at the same page
    (zero if m is a certified cycle).
    divide:  known is d(m x); the record for x is the solution y of m y = d(m x).
    """
    m = tuple(multiplier)
    if m == (0, 0):
        return [known]
    r = known.r
    if mode == "forward":
        prod = state.product(m, known.source)
        if prod is None or prod[0] == 0:
            return []
        u, src = prod
        if v2(u) != 0:
            return []
        total = {}
        t2 = state.product(m, known.target)
        if t2 is not None and t2[0]:
            total[t2[1]] = total.get(t2[1], 0) + state.to_e4(known.target, known.coef) * t2[0]
        dm = _find(state, m, r)
        if dm is None and m not in state.permanent:
            raise ReplayError(f"multiplier {bideg_str(m)} is not certified as a d{r}-cycle")
        if dm is not None:
            t3 = state.product(dm.target, known.source)
            if t3 is not None and t3[0]:
                total[t3[1]] = total.get(t3[1], 0) + state.to_e4(dm.target, dm.coef) * t3[0]
        tgt = (src[0] - 1, src[1] + r)
        c = total.get(tgt, 0)
        if not c:
            return []
        return [DifferentialRecord(r, src, state.to_e2(tgt, c * u), tgt, "leibniz",
                                   f"{bideg_str(m)} x {known}")]
    if mode == "divide":
        src = (known.source[0] - m[0], known.source[1] - m[1])
        if src not in state.slots:
            raise ReplayError(f"no class at {bideg_str(src)}")
        prod = state.product(m, src)
        if prod is None or v2(prod[0]) != 0:
            raise ReplayError(f"{bideg_str(m)} x {bideg_str(src)} is not the generator at {bideg_str(known.source)}")
        tgt = (src[0] - 1, src[1] + r)
        t2 = state.product(m, tgt)
        if t2 is None or t2[1] != known.target or not t2[0]:
            raise ReplayError(f"{bideg_str(m)} x {bideg_str(tgt)} misses {bideg_str(known.target)}")
        sl = state.slot(tgt)
        order = 1 << 30 if sl.free else 2 ** int(sl.nu)
        kc = state.to_e4(known.target, known.coef)
        korder = 1 << 30 if state.slot(known.target).free else 2 ** int(state.slot(known.target).nu)
        sols = [c for c in range(1, order + 1) if (c * t2[0] - kc * prod[0]) % korder == 0]
        sols = [c for c in sols if v2(c) < sl.hi]
        if not sols:
            raise ReplayError(f"no solution dividing {known} by {bideg_str(m)}")
        c = sols[0]
        return [DifferentialRecord(r, src, state.to_e2(tgt, c), tgt, "leibniz",
                                   f"{known} / {bideg_str(m)}")]
    raise ValueError(mode)


def leibniz_closure(state, r, multipliers, rounds=20):
    """Apply forward Leibniz with the multipliers until nothing new is produced."""
    added = []
    for _ in range(rounds):
        new = []
        for rec in [x for x in state.log if x.r == r]:
            for m in multipliers:
                for cand in leibniz(state, rec, m):
                    if state.logged(cand.r, cand.source, cand.target) is None and state.try_apply(cand):
                        new.append(cand)
        added += new
        if not new:
            break
    return added


def transchromatic_seed(state):
    """d5 on the classes between the slope-1 and slope-3 lines.

    There the E4 generators are dbar^k u_2sig^e a_lam^k a_sig^d, and the C2
    d3 on u_{2 sigma_2} transported by the shear gives
    d5(dbar^k u_2sig^e a_lam^k a_sig^d) = dbar^{k+1} u_2sig^{e-1} a_lam^{k+1} a_sig^{d+3}
    for e odd.
    """
    out = []
    for b, sl in sorted(state.slots.items()):
        s, f = b
        if f < s or not sl.alive:
            continue
        (name, c), = sl.vector.items() if len(sl.vector) == 1 else ((None, 0),)
        if not isinstance(name, e2.RegularName) or name.p != 0 or name.e % 2 == 0:
            continue
        tgt_name = e2.RegularName(name.k + 1, 0, name.e - 1, name.k + 1, name.d + 3)
        tb = tgt_name.bidegree
        if tb not in state.slots:
            continue
        coef = state.coefficient(tb, e2.normalize({tgt_name: 1}))
        if not coef:
            continue
        rec = DifferentialRecord(5, b, state.to_e2(tb, coef), tb, "transchromatic")
        if rec.law_ok():
            out.append(rec)
    return out


def _period_shift(state, rec, p, power):
    """The record multiplied by p^power, with coefficients in E4 generators."""
    ds, df = p.bidegree[0] * power, p.bidegree[1] * power
    src = (rec.source[0] + ds, rec.source[1] + df)
    tgt = (rec.target[0] + ds, rec.target[1] + df)
    if src not in state.slots or tgt not in state.slots:
        return None
    lo_s, lo_t = (src, tgt) if power < 0 else (rec.source, rec.target)
    n = abs(power)
    us, ut = 1, 1
    cs, ct = lo_s, lo_t
    for _ in range(n):
        a = state.period_unit(p, cs)
        b = state.period_unit(p, ct)
        if a is None or b is None or v2(a) != 0 or v2(b) != 0:
            return None
        us, ut = us * a, ut * b
        cs = (cs[0] + p.bidegree[0], cs[1] + p.bidegree[1])
        ct = (ct[0] + p.bidegree[0], ct[1] + p.bidegree[1])
    # P^n g = us g', P^n h = ut h'
    # units are odd, so the 2-adic valuation of the coefficient is preserved
    coef = state.to_e4(rec.target, rec.coef) * ut * us
    sl = state.slot(tgt)
    if not sl.free:
        coef %= 2 ** int(sl.nu)
    if coef == 0:
        return None
    return rec.shifted(ds, df, state.to_e2(tgt, coef), "tate", f"{bideg_str(p.bidegree)}^{power} x {rec}")


def tate_propagate(state, records, periods=PERIODS, max_power=12):
    """Apply every translate of the records by products of period-class powers."""
    added = []
    lo, hi, fmax = state.window
    for rec in records:
        for a in range(-max_power, max_power + 1):
            for b in range(-3, 4):
                if a == 0 and b == 0:
                    continue
                cur = rec
                ok = True
                for p, n in ((periods[0], a), (periods[1], b)):
                    if n == 0:
                        continue
                    cur = _period_shift(state, cur, p, n)
                    if cur is None:
                        ok = False
                        break
                if not ok:
                    continue
                cur = DifferentialRecord(cur.r, cur.source, cur.coef, cur.target, "tate",
                                         f"{bideg_str(X_DEG)}^{a} {bideg_str(Z_DEG)}^{b} x {rec}")
                if state.logged(cur.r, cur.source, cur.target) is not None:
                    continue
                if state.try_apply(cur):
                    added.append(cur)
    return added


def vanish_mark(state, line=MAX_R):
    """Mark the surviving classes at filtration >= line as must-die."""
    lo, hi, fmax = state.window
    out = {b for b, s in state.slots.items()
           if s.alive and b[1] >= line and lo < b[0] < hi}
    for b in out:
        state.must_die[b] = 1
    return out


def unresolved(state):
    """Must-die classes still alive whose possible partners all lie in the window.

    A class at (s, f) can only meet partners at filtration <= f + 13, so the
    check covers f <= fmax - 13 and stems strictly inside the window.
    """
    lo, hi, fmax = state.window
    return sorted(b for b in state.must_die
                  if state.excess(b) and b[1] <= fmax - MAX_R and lo + 1 < b[0] < hi - 1)


def stem_total(state, n):
    """Summand orders of the surviving core classes in stem n."""
    return sorted(s.order() for b, s in state.slots.items() if b[0] == n and s.alive)


def shifted_page(state, margin=16):
    """Post-d3 page over the state's window widened by `margin` stems."""
    lo, hi, fmax = state.window
    return e2.post_d3(e2.generate("C4", (lo, hi + margin), fmax + 3, negative=False))


def d_shift_unstable(state, page=None):
    """Logged records with an endpoint whose E4 order changes under one D-shift.

    Each entry is (record, [(bidegree, order, order at +(8,0))]).  An empty
    result means every deduction sits in the D-stable range.
    """
    page = page or shifted_page(state)
    out = []
    for rec in state.log:
        bad = []
        for b in (rec.source, rec.target):
            o, o8 = page.core_order(*b), page.core_order(b[0] + 8, b[1])
            if o != o8:
                bad.append((b, o, o8))
        if bad:
            out.append((rec, bad))
    return out


def period_constraint(state, resolved, target_stem, reference=None):
    """Classes in target_stem beyond the resolved stem's E-infinity content.

    `reference` maps a stem to its known orders (used for negative stems);
    otherwise the resolved stem is read from the state.  A Z in the
    reference matches the filtration-0 Z; every other surviving class in the
    target stem is surplus unless matched by order; a torsion class larger
    than an unmatched reference order keeps only that much.
    """
    ref = list(reference) if reference is not None else stem_total(state, resolved)
    out = {}
    for b, s in sorted(state.slots.items(), key=lambda kv: kv[0][1]):
        if b[0] != target_stem or not s.alive:
            continue
        o = s.order()
        if o in ref:
            ref.remove(o)
            continue
        smaller = [x for x in ref if x != e2.FREE and o != e2.FREE and x < o]
        if smaller:
            ref.remove(max(smaller))
            out[b] = max(smaller)
        else:
            out[b] = 1
    state.must_die.update(out)
    return out


def candidates(state, b, rmin=None, rmax=MAX_R):
    """Admissible differentials that could remove the class at b."""
    rmin = rmin if rmin is not None else state.exhausted + 1
    out = []
    s, f = b
    for r in range(rmin, rmax + 1):
        t = (s - 1, f + r)
        if state.alive(t) and t not in state.permanent:
            out.append(DifferentialRecord(r, b, 1, t, "vanishing-forced"))
        src = (s + 1, f - r)
        if state.alive(src) and src not in state.permanent:
            out.append(DifferentialRecord(r, src, 1, b, "vanishing-forced"))
    return out


def force_unique(state, b, rmin=None, role=None):
    """The unique admissible differential removing b, applied.

    role="target" (or "source") keeps only candidates where b plays that role.
    """
    b = tuple(b)
    if not state.excess(b):
        raise ReplayError(f"class {bideg_str(b)} is not marked must-die")
    cands = candidates(state, b, rmin)
    if role == "target":
        cands = [c for c in cands if c.target == b]
    elif role == "source":
        cands = [c for c in cands if c.source == b]
    cands = [c for c in cands if state.check(_fix_coef(state, c)) is None]
    if len(cands) != 1:
        listing = ", ".join(str(c) for c in cands) or "none"
        raise ReplayError(f"class {bideg_str(b)}: {len(cands)} candidates ({listing})")
    rec = _fix_coef(state, cands[0])
    return state.apply(rec)


def _fix_coef(state, rec):
    """Lowest coefficient that hits the current generator of the target."""
    tgt = state.slot(rec.target)
    c = 2 ** int(tgt.lo) * tgt.scale if tgt is not None and tgt.lo != INF else 1
    return DifferentialRecord(rec.r, rec.source, c, rec.target, rec.tag, rec.note)


# ------------------------------------------------------------------ duality

@dataclass(frozen=True)
class MirrorClass:
    bidegree: tuple
    order: int
    partners: tuple      # positive survivors it corresponds to under 32-periodicity
    via: tuple           # the crossing differentials (None for the free part)


def duality_mirror(state, stems=(-32, 0)):
    """Negative-cone E-infinity classes from crossing differentials.

    The Tate spectral sequence is (8,8)-periodic and converges to zero, so
    each layer of a positive survivor y at (n, F) is killed there by some
    d_r from (n+1, F-r).  Multiplying by (8,8)^m moves that differential
    into the positive cone, where it is read from the log; its source
    corresponds to the slice class at (n - 32, F - r + 1) with the order of
    the layer.  A free survivor also leaves a Z at (n - 32, 0).  Layers
    landing in one bidegree form a single cyclic summand.
    """
    pieces = {}
    lo, hi = stems
    for b, s in state.survivors(MAX_R).items():
        n, F = b
        if not lo + 32 <= n < hi + 32:
            continue
        if s.free:
            pieces.setdefault((n - 32, 0), []).append((e2.FREE, b, None))
        vec = dict(s.vector)
        m0 = max(1, -(-(MAX_R - F) // 8))
        found = None
        for m in range(1, m0 + 4):
            vec = e2.multiply_vectors({e2.X_CLASS: 1}, vec)
            if m < m0:
                continue
            found = _crossing_layers(state, (n + 8 * m, F + 8 * m), vec, s.lo, s.hi)
            if found is not None:
                break
        if found is None:
            raise ReplayError(f"no crossing differential found for {bideg_str(b)}")
        for width, rec in found:
            nb = (n - 32, F - rec.r + 1)
            pieces.setdefault(nb, []).append((2 ** width, b, rec))
    out = []
    for nb, items in pieces.items():
        if any(o == e2.FREE for o, _, _ in items):
            order = e2.FREE
        else:
            order = 1
            for o, _, _ in items:
                order *= o
        out.append(MirrorClass(nb, order, tuple(x[1] for x in items), tuple(x[2] for x in items)))
    return sorted(out, key=lambda c: (c.bidegree[0], -c.bidegree[1]))


def _crossing_layers(state, b, vec, lo, hi):
    """[(width, record)] for the layers [lo, hi) of vec at b that are hit, or None.

    Layers killed as sources are skipped; a d3 boundary counts as one
    record.  None means some layer is not accounted for at b.
    """
    H = state.page4.homology.get(b)
    if H is None:
        return None
    z = H.coordinates(vec)
    if z is None:
        return None
    orders = [sm.order for sm in H.summands]
    sl = state.slot(b)
    if all(o and (x << int(min(lo, 60))) % o == 0 for x, o in zip(z, orders)):
        return [] if hi == INF else [(int(hi - lo), D3_BOUNDARY)]
    c = state.coefficient(b, vec)
    if sl is None or not c or sl.free:
        return None
    v = v2(c)
    top = int(sl.nu) if hi == INF else int(min(sl.nu, v + hi))
    out = []
    for layer in range(int(v + lo), top):
        hit = None
        for klo, khi, rec, role in sl.kills:
            if klo <= layer < khi:
                hit = (rec, role)
                break
        if hit is None:
            return None
        rec, role = hit
        if role != "target":
            continue
        if out and out[-1][1] is rec:
            out[-1] = (out[-1][0] + 1, rec)
        else:
            out.append((1, rec))
    return out


D3_BOUNDARY = DifferentialRecord(3, (0, 0), 1, (-1, 3), "restriction", "d3 boundary")  # only r is read


def mirror_records(state, stems=(-32, 0), fmin=-MAX_R, support=None):
    """Negative-cone differentials from the (8,8)-translates of the log.

    A positive record shifted by (8,8)^-a is a Tate differential; when both
    ends sit below filtration 0 it is read at Tate (S, F) -> slice
    (S - 1, F + 1), moved into the stem window by (32,0)-periodicity.  The
    Tate chart is larger than the slice negative cone, so only translates
    with both ends on nonzero slice E2 groups (`support`, from the oracle)
    are kept; returns (kept, dropped).
    """
    if support is None:
        support = negative_e2_support(stems, fmin)
    lo, hi = stems
    seen = {}
    for rec in state.log:
        for a in range(1, 40):
            ts, tf = rec.source[0] - 8 * a, rec.source[1] - 8 * a
            if tf + rec.r >= 0:
                continue
            src = (ts - 1, tf + 1)
            if src[1] < fmin:
                break
            tgt = (src[0] - 1, src[1] + rec.r)
            shift = 32 * ((hi - 1 - src[0]) // 32)
            src, tgt = (src[0] + shift, src[1]), (tgt[0] + shift, tgt[1])
            if not lo <= tgt[0] < hi or not lo <= src[0] < hi:
                continue
            key = (rec.r, src, tgt)
            if key not in seen:
                seen[key] = DifferentialRecord(rec.r, src, rec.coef, tgt, "duality",
                                               f"(8,8)^-{a} of {rec}")
    recs = sorted(seen.values(), key=lambda x: (x.source, x.r))
    kept = [x for x in recs if x.source in support and x.target in support]
    return kept, len(recs) - len(kept)


def negative_e2_support(stems=(-32, 0), fmin=-MAX_R):
    """{bidegree: orders} of the negative cone from the oracle columns."""
    orders = e2.oracle_chart_orders("C4", stems, -fmin)
    return {b: o for b, o in orders.items() if b[1] <= 0 and b[0] < 0 and o}


# ------------------------------------------------------------------ homotopy

@dataclass
class HomotopyTable:
    groups: dict       # n -> InvariantFactors (core)
    bo: dict           # n -> InvariantFactors (bo part, from the post-d3 page)
    pieces: dict       # n -> [(filtration, order)]
    extensions: list   # [(n, from_fil, to_fil)]

    def to_json(self):
        return {str(n): {"core": self.groups[n].to_json(),
                         "bo": self.bo.get(n, InvariantFactors(0, ())).to_json(),
                         "pieces": [[f, "inf" if o == e2.FREE else o] for f, o in self.pieces[n]]}
                for n in sorted(self.groups)} | {"extensions": [list(x) for x in self.extensions]}


def _assemble(pieces, exts):
    """Group from filtration pieces and asserted 2-extension chains."""
    nodes = {f: o for f, o in pieces}
    nxt = {}
    for a, b in exts:
        if a not in nodes or b not in nodes:
            raise ReplayError(f"extension between absent classes {a} -> {b}")
        nxt[a] = b
    targets = set(nxt.values())
    free, torsion = 0, []
    for f in nodes:
        if f in targets:
            continue
        chain = [f]
        while chain[-1] in nxt:
            chain.append(nxt[chain[-1]])
        if any(nodes[x] == e2.FREE for x in chain):
            free += 1
        else:
            o = 1
            for x in chain:
                o *= nodes[x]
            torsion.append(o)
    return InvariantFactors(free, tuple(sorted(torsion)))


def assemble_homotopy(state, mirror, stems, extensions=()):
    lo, hi = stems
    pieces = {n: [] for n in range(lo, hi)}
    for b, s in state.survivors(MAX_R).items():
        if lo <= b[0] < hi:
            pieces[b[0]].append((b[1], s.order()))
    for c in mirror:
        if lo <= c.bidegree[0] < hi:
            pieces[c.bidegree[0]].append((c.bidegree[1], c.order))
    for n in pieces:
        pieces[n].sort()
    exts = {}
    for n, a, b in extensions:
        if lo <= n < hi:
            exts.setdefault(n, []).append((a, b))
    groups = {n: _assemble(pieces[n], exts.get(n, [])) for n in pieces}
    bo = {}
    for (s, f), orders in state.page4.bo.items():
        if lo <= s < hi:
            cur = bo.get(s, [])
            bo[s] = cur + orders
    bo = {n: InvariantFactors.from_cyclic_orders(v) for n, v in bo.items()}
    return HomotopyTable(groups, bo, pieces, list(extensions))


# ------------------------------------------------------------------ scripts

SCRIPT_NAME = "c4_replay.script"


def shipped_script():
    return resources.files("eoperiod").joinpath("data", SCRIPT_NAME).read_text()


_DIFF = re.compile(r"d\s*(\d+)\s+(\(\s*-?\d+\s*,\s*-?\d+\s*\))\s*->\s*(?:(-?\d+)\s*\*\s*)?"
                   r"(\(\s*-?\d+\s*,\s*-?\d+\s*\))(?:\s+tag=([\w-]+))?$")


@dataclass
class Step:
    line: int
    kind: str
    args: dict
    text: str


def parse_script(text):
    steps = []
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _DIFF.fullmatch(line)
        if m:
            steps.append(Step(i, "assert_diff", {
                "r": int(m.group(1)), "source": parse_bideg(m.group(2)),
                "coef": int(m.group(3) or 1), "target": parse_bideg(m.group(4)),
                "tag": m.group(5) or "script"}, line))
            continue
        word, *rest = line.split(None, 1)
        rest = rest[0] if rest else ""
        steps.append(Step(i, word, _kv(rest), line))
    return steps


def _kv(text):
    """Parse `key=value` pairs; bidegree lists are ;-separated."""
    out = {}
    for part in re.findall(r"(\w+)=(\S+)", text):
        out[part[0]] = part[1]
    return out


def _bidegs(text):
    return [parse_bideg(x) for x in re.findall(r"\(-?\d+,-?\d+\)", text)]


@dataclass
class RunResult:
    state: PageState
    mirror: list
    homotopy: HomotopyTable
    negative_records: list
    checks: list
    seconds: float

    def einf_json(self):
        classes = []
        for b, s in self.state.survivors(MAX_R).items():
            classes.append({"stem": b[0], "fil": b[1], "order": _ord(s.order()),
                            "cone": e2.POSITIVE, "tag": e2.CORE})
        for c in self.mirror:
            classes.append({"stem": c.bidegree[0], "fil": c.bidegree[1], "order": _ord(c.order),
                            "cone": e2.NEGATIVE, "tag": e2.CORE, "partners": [list(p) for p in c.partners],
                            "crossing": [None if v is None else (v.note if v is D3_BOUNDARY else str(v))
                                         for v in c.via]})
        lo, hi, fmax = self.state.window
        return {"window": {"stems": [lo, hi], "fmax": fmax}, "classes": classes,
                "differentials": [r.to_json() for r in self.state.log],
                "negative_differentials": [r.to_json() for r in self.negative_records]}

    def pi_json(self):
        return self.homotopy.to_json()

    def svg(self):
        data = self.einf_json()
        lo, hi, fmax = self.state.window
        recs = list(self.state.log) + list(self.negative_records)
        recs = [r for r in recs if r.source[1] <= fmax and r.target[1] <= fmax]
        return render(data["classes"], recs, (min(-32, lo), hi, -MAX_R, fmax),
                      "E-infinity with the replayed differentials")

    def write(self, outdir):
        from pathlib import Path
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "einf.json").write_text(json.dumps(self.einf_json(), indent=1))
        (out / "pi.json").write_text(json.dumps(self.pi_json(), indent=1))
        (out / "chart.svg").write_text(self.svg())
        return out


def _ord(o):
    return "inf" if o == e2.FREE else o


def build_state(stems=(-1, 50), fmax=40):
    lo, hi = stems
    chart = e2.generate("C4", (lo, hi), fmax + 3, negative=False)
    page = e2.post_d3(chart)
    return PageState(page, (lo, hi, fmax))


def run_script(text, stems=(-1, 50), fmax=40, pi_stems=(-32, 40), state=None):
    """Replay a deduction script; returns a RunResult."""
    t0 = time.perf_counter()
    state = state or build_state(stems, fmax)
    extensions, checks = [], []
    known_pi = {}
    for step in parse_script(text):
        try:
            _run_step(state, step, extensions, checks, known_pi)
        except (ReplayError, ValueError, KeyError) as exc:
            raise ReplayError(f"line {step.line} `{step.text}`: {exc}") from exc
    mirror = duality_mirror(state, (pi_stems[0], min(0, pi_stems[1])))
    table = assemble_homotopy(state, mirror, pi_stems, extensions)
    for n, orders in sorted(known_pi.items()):
        want = InvariantFactors.from_cyclic_orders(orders)
        got = table.groups.get(n)
        if got is not None and got != want:
            raise ReplayError(f"pi_{n} assumed {want.to_json()} but the replay gives {got.to_json()}")
        checks.append((0, f"pi_{n} as assumed"))
    support = negative_e2_support((pi_stems[0], 0))
    for c in mirror:
        if c.bidegree not in support:
            raise ReplayError(f"mirror class at {bideg_str(c.bidegree)} has no E2 group under it")
    neg, dropped = mirror_records(state, (pi_stems[0], 0), support=support)
    checks.append((0, f"negative cone: {len(neg)} translates kept, {dropped} outside the slice chart"))
    return RunResult(state, mirror, table, neg, checks, time.perf_counter() - t0)


def _rec_of(step):
    a = step.args
    return DifferentialRecord(a["r"], a["source"], a["coef"], a["target"], a["tag"])


def _run_step(state, step, extensions, checks, known_pi):
    k, a = step.kind, step.args
    if k == "assert_diff":
        rec = _rec_of(step)
        if a["tag"] not in TAGS:
            raise ReplayError(f"unknown tag {a['tag']}")
        state.apply(rec)
    elif k == "transchromatic":
        for rec in transchromatic_seed(state):
            state.try_apply(rec)
    elif k == "permanent":
        state.permanent |= set(_bidegs(step.text))
    elif k == "leibniz":
        r = int(a["r"])
        src, m = _bidegs(step.text)[:2]
        known = _find(state, src, r)
        if known is None:
            raise ReplayError(f"no d{r} logged on {bideg_str(src)}")
        for rec in leibniz(state, known, m, a.get("mode", "forward")):
            if state.logged(rec.r, rec.source, rec.target) is None:
                state.apply(rec)
    elif k == "leibniz_closure":
        leibniz_closure(state, int(a["r"]), _bidegs(step.text))
    elif k == "tate":
        r = int(a["r"])
        tate_propagate(state, [x for x in state.log if x.r == r])
    elif k == "exhausted":
        state.exhausted = int(a["page"])
    elif k == "vanish_mark":
        vanish_mark(state, int(a.get("line", MAX_R)))
    elif k == "pi":
        n = int(a["stem"])
        known_pi[n] = [e2.FREE if x == "inf" else int(x) for x in a.get("orders", "").split(",") if x]
    elif k == "period_constraint":
        n0, n1 = int(a["from"]), int(a["to"])
        period_constraint(state, n0, n1, known_pi.get(n0))
    elif k == "force":
        for b in _bidegs(step.text):
            rmin = int(a["rmin"]) if "rmin" in a else None
            force_unique(state, b, rmin, a.get("role"))
    elif k == "expect":
        kind = a.get("state", "dead")
        for b in _bidegs(step.text):
            sl = state.slot(b)
            ok = sl is not None and (sl.alive if kind == "alive" else not sl.alive)
            if kind.startswith("order"):
                ok = sl is not None and sl.order() == int(kind.split(":")[1])
            if not ok:
                raise ReplayError(f"expected {bideg_str(b)} {kind}")
            checks.append((step.line, step.text))
    elif k == "logged":
        d = _parse_diff(step.text.split(None, 1)[1])
        rec = _rec_of(Step(step.line, "assert_diff", d, step.text))
        # an omitted coefficient matches whatever hits the named class
        want = rec.coef if d["explicit"] else None
        if state.logged(rec.r, rec.source, rec.target, want) is None:
            raise ReplayError(f"{rec} not in the log")
        checks.append((step.line, step.text))
    elif k == "must_die_clear":
        left = unresolved(state)
        if left:
            raise ReplayError(f"must-die classes still alive: {left}")
        checks.append((step.line, step.text))
    elif k == "extension":
        n = int(a["stem"])
        f0, f1 = (int(x) for x in a["fil"].split("->"))
        extensions.append((n, f0, f1))
    else:
        raise ReplayError(f"unknown step {k}")


def _parse_diff(text):
    m = _DIFF.fullmatch(text.strip())
    if not m:
        raise ReplayError(f"bad differential {text!r}")
    return {"r": int(m.group(1)), "source": parse_bideg(m.group(2)), "coef": int(m.group(3) or 1),
            "target": parse_bideg(m.group(4)), "tag": m.group(5) or "script",
            "explicit": m.group(3) is not None}


# ------------------------------------------------------------------ rendering

def render(classes, differentials=(), window=None, title="", unit=14):
    """SVG chart: Z as a box, Z/2^nu as a dot labelled nu (unlabelled for nu = 1).

    classes: iterable of dicts with stem, fil, order and optionally cone, tag.
    Differentials are drawn from (s, f) to (s - 1, f + r) and carry their
    endpoints as data attributes.
    """
    classes = list(classes)
    if window is None:
        stems = [c["stem"] for c in classes] or [0]
        fils = [c["fil"] for c in classes] or [0]
        window = (min(stems), max(stems), min(fils), max(fils))
    s0, s1, f0, f1 = window
    W = (s1 - s0 + 3) * unit
    Hh = (f1 - f0 + 3) * unit

    def xy(s, f, k=0):
        return ((s - s0 + 1) * unit + 3 * k, Hh - (f - f0 + 1) * unit - 3 * k)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{Hh}" '
           f'viewBox="0 0 {W} {Hh}" font-family="sans-serif" font-size="7">',
           f"<title>{title}</title>",
           '<rect width="100%" height="100%" fill="white"/>']
    for s in range(s0, s1 + 1):
        x, _ = xy(s, f0)
        col = "#ccc" if s % 4 else "#999"
        out.append(f'<line x1="{x}" y1="0" x2="{x}" y2="{Hh}" stroke="{col}" stroke-width="0.3"/>')
        if s % 4 == 0:
            out.append(f'<text x="{x}" y="{Hh - 2}" text-anchor="middle">{s}</text>')
    for f in range(f0, f1 + 1):
        _, y = xy(s0, f)
        col = "#ccc" if f % 4 else "#999"
        out.append(f'<line x1="0" y1="{y}" x2="{W}" y2="{y}" stroke="{col}" stroke-width="0.3"/>')
    seen = {}
    for c in classes:
        b = (c["stem"], c["fil"])
        k = seen.get(b, 0)
        seen[b] = k + 1
        x, y = xy(*b, k)
        colour = "#b03030" if c.get("tag") == e2.BO else ("#3050b0" if c.get("cone") == e2.NEGATIVE else "black")
        order = c["order"]
        attrs = f'data-stem="{b[0]}" data-fil="{b[1]}" class="{c.get("tag", "core")}"'
        if order in ("inf", e2.FREE):
            out.append(f'<rect x="{x - 3}" y="{y - 3}" width="6" height="6" fill="none" '
                       f'stroke="{colour}" {attrs}/>')
        else:
            nu = v2(int(order))
            out.append(f'<circle cx="{x}" cy="{y}" r="2.2" fill="{colour}" {attrs}/>')
            if nu > 1:
                out.append(f'<text x="{x + 3}" y="{y - 3}" fill="{colour}">{nu}</text>')
    for d in differentials:
        rec = d if isinstance(d, DifferentialRecord) else DifferentialRecord(
            d["r"], tuple(d["source"]), d["coef"], tuple(d["target"]), d.get("tag", "script"))
        x1, y1 = xy(*rec.source)
        x2, y2 = xy(*rec.target)
        out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="#2a8a2a" stroke-width="0.6" '
                   f'data-r="{rec.r}" data-source="{rec.source[0]},{rec.source[1]}" '
                   f'data-target="{rec.target[0]},{rec.target[1]}"/>')
    out.append("</svg>")
    return "\n".join(out)


def svg_differentials(svg):
    """(r, source, target) triples read back from a rendered chart."""
    out = []
    for m in re.finditer(r'data-r="(\d+)" data-source="(-?\d+),(-?\d+)" data-target="(-?\d+),(-?\d+)"', svg):
        r, a, b, c, d = (int(x) for x in m.groups())
        out.append((r, (a, b), (c, d)))
    return out


def chart_classes(chart):
    return [c.to_json() for c in chart]
