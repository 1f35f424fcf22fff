import itertools
import json
from math import gcd

import pytest
from hypothesis import assume, given, settings, strategies as st

from eoperiod import groups as gr
from eoperiod import lattice as lat
from eoperiod.groups import C2, C4, VirtualRep
from eoperiod.lattice import IntegerLattice, InvariantFactors


def matrices(max_dim=4, bound=8):
    return st.integers(1, max_dim).flatmap(lambda r: st.integers(1, max_dim).flatmap(
        lambda c: st.lists(st.lists(st.integers(-bound, bound), min_size=c, max_size=c),
                           min_size=r, max_size=r)))


def minors_gcd(M, k):
    rows, cols = len(M), len(M[0])
    g = 0
    for R in itertools.combinations(range(rows), k):
        for C in itertools.combinations(range(cols), k):
            g = gcd(g, lat.det([[M[i][j] for j in C] for i in R]))
    return g


# -------------------------------------------------------------------- snf

def test_snf_examples():
    assert lat.snf_diagonal([[1, 1, 1], [4, -4, 0], [16, 0, -8]]) == [1, 4, 32]
    assert lat.snf_diagonal(lat.identity(3)) == [1, 1, 1]
    assert lat.snf_diagonal([[2, 0], [0, 3]]) == [1, 6]


@settings(max_examples=1000, deadline=None)
@given(matrices())
def test_snf_transform_identity(M):
    D, U, V = lat.snf(M)
    assert lat.matmul(lat.matmul(U, M), V) == D
    assert abs(lat.det(U)) == 1
    assert abs(lat.det(V)) == 1
    for i, row in enumerate(D):
        for j, x in enumerate(row):
            if i != j:
                assert x == 0
    diag = [D[i][i] for i in range(min(len(M), len(M[0])))]
    nz = [d for d in diag if d]
    assert all(d > 0 for d in nz)
    assert diag[:len(nz)] == nz
    for a, b in zip(nz, nz[1:]):
        assert b % a == 0


@settings(max_examples=300, deadline=None)
@given(matrices())
def test_snf_matches_determinantal_divisors(M):
    # d_1 ... d_k = gcd of the k x k minors
    diag = lat.snf_diagonal(M)
    prod = 1
    for k in range(1, min(len(M), len(M[0])) + 1):
        g = minors_gcd(M, k)
        if k <= len(diag):
            prod *= diag[k - 1]
            assert g == prod
        else:
            assert g == 0


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.lists(
    st.lists(st.integers(-8, 8), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_quotient_matches_coset_enumeration(M):
    n = len(M)
    d = abs(lat.det(M))
    assume(0 < d <= 400)
    q = lat.quotient(n, M)
    assert q.free_rank == 0
    H, _ = lat.hnf(M)
    pivots = [H[i][i] for i in range(n)]
    reps = list(itertools.product(*[range(p) for p in pivots]))
    assert len(reps) == d
    # |{x : k x in L}| = prod gcd(k, d_i) pins down the invariant factors
    top = max(q.torsion, default=1)
    for k in [k for k in range(1, top + 1) if top % k == 0]:
        killed = sum(1 for x in reps if lat.contains(H, [k * a for a in x]))
        want = 1
        for t in q.torsion:
            want *= gcd(k, t)
        assert killed == want


@settings(max_examples=200, deadline=None)
@given(matrices(), st.randoms(use_true_random=False))
def test_quotient_invariant_under_row_operations(M, rnd):
    cols = len(M[0])
    base = lat.quotient(cols, M)
    N = [row[:] for row in M]
    rnd.shuffle(N)
    for _ in range(4):
        i, j = rnd.randrange(len(N)), rnd.randrange(len(N))
        if i != j:
            q = rnd.randint(-3, 3)
            N[i] = [a + q * b for a, b in zip(N[i], N[j])]
    assert lat.quotient(cols, N) == base


# ------------------------------------------------------------- quotients

def test_quotient_examples():
    L2 = lat_of(C4, [(1, 1, 1), (4, -4, 0), (10, -2, -4)])
    assert lat.quotient(3, L2) == InvariantFactors(0, (2, 32))
    L4 = lat_of(C4, [(1, 1, 1), (8, -8, 0), (36, -4, -16)])
    assert lat.quotient(3, L4) == InvariantFactors(0, (4, 128))
    assert lat.quotient(2, IntegerLattice(C2, [])) == InvariantFactors(2, ())


def lat_of(G, rows):
    return IntegerLattice(G, [VirtualRep(G, r) for r in rows])


def test_contains_examples():
    from eoperiod import periodicity as per
    Lp = per.generators_Lprime(per.HeightGroupPair(1, C2))
    assert lat.contains(Lp, VirtualRep(C2, (8, 0)))
    assert not lat.contains(Lp, VirtualRep(C2, (4, 0)))
    assert lat.contains(Lp, gr.zero(C2))


def test_contains_four_exhaustive():
    # no small combination of the generators equals (4, 0)
    from eoperiod import periodicity as per
    Lp = per.generators_Lprime(per.HeightGroupPair(1, C2))
    gens = [g.coeffs for g in Lp.generators]
    hits = [c for c in itertools.product(range(-20, 21), repeat=len(gens))
            if tuple(sum(ci * g[k] for ci, g in zip(c, gens)) for k in range(2)) == (4, 0)]
    assert hits == []


def test_minimal_multiple_examples():
    from eoperiod import periodicity as per
    for h in range(1, 7):
        Lp = per.generators_Lprime(per.HeightGroupPair(h, C2))
        assert lat.minimal_multiple(Lp, gr.trivial(C2)) == 2 ** (h + 2)
    Lp = per.generators_Lprime(per.HeightGroupPair(2, C4))
    assert lat.minimal_multiple(Lp, gr.trivial(C4)) == 32
    assert lat.minimal_multiple(Lp, gr.regular(C4)) == 1


@settings(max_examples=300, deadline=None)
@given(matrices(), st.lists(st.integers(-6, 6), min_size=4, max_size=4))
def test_membership_and_minimal_multiple(M, v):
    cols = len(M[0])
    v = v[:cols]
    for row in M:
        assert lat.contains(M, row)
    d = lat.minimal_multiple(M, v)
    if d is None:
        for k in range(1, 9):
            assert not lat.contains(M, [k * a for a in v])
    else:
        assert lat.contains(M, [d * a for a in v])
        for k in range(1, d):
            assert not lat.contains(M, [k * a for a in v])


def test_hnf_shape():
    H, U = lat.hnf([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    assert lat.matmul(U, [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == H
    assert abs(lat.det(U)) == 1
    for i in range(3):
        assert H[i][i] > 0
        for j in range(i):
            assert H[i][j] == 0
            assert 0 <= H[j][i] < H[i][i]


def test_matrix_io(tmp_path):
    M = [[1, 2, -3], [0, 4, 5]]
    p = tmp_path / "m.txt"
    p.write_text(lat.write_matrix_text(M))
    assert lat.read_matrix(p) == M
    p.write_text(lat.matrix_json(M))
    assert lat.read_matrix(p) == M
    assert json.loads(lat.matrix_json(M)) == M


def test_invariant_factors_json_and_chain():
    f = InvariantFactors.from_cyclic_orders([2, 4, 0, 2, 1])
    assert f == InvariantFactors(1, (2, 2, 4))
    assert InvariantFactors.from_json(f.to_json()) == f
    assert f.pow2_str() == "Z ⊕ Z/2^1 ⊕ Z/2^1 ⊕ Z/2^2"
    with pytest.raises(ValueError):
        InvariantFactors(0, (4, 2))
