import time

import pytest

from eoperiod import groups as gr
from eoperiod import periodicity as per
from eoperiod.groups import C2, C4, Q8, VirtualRep
from eoperiod.lattice import IntegerLattice, InvariantFactors, contains, minimal_multiple, quotient

CYCLIC_GRID = [per.HeightGroupPair(2 ** (n - 1) * m, gr.cyclic(n)) for n in range(1, 5) for m in (1, 2, 3)]
Q8_GRID = [per.HeightGroupPair(4 * ell + 2, Q8) for ell in range(3)]
GRID = CYCLIC_GRID + Q8_GRID


def test_P_examples():
    assert per.P(2, gr.FiniteSubgroupDescriptor(24, Q8)) == 192
    assert per.P(4, gr.cyclic(3)) == 256
    assert per.P(5, gr.FiniteSubgroupDescriptor(1, gr.E)) == 2
    assert per.P(3, gr.FiniteSubgroupDescriptor(3, gr.E)) == 6


def test_known_periodicities_fast():
    for name, h, order, sylow, want in per.known_periodicities():
        t0 = time.perf_counter()
        got = per.P(h, gr.FiniteSubgroupDescriptor(order, sylow))
        assert time.perf_counter() - t0 < 1e-3
        assert got == want, name


def test_pair_validation():
    with pytest.raises(ValueError):
        per.HeightGroupPair(3, C4)
    with pytest.raises(ValueError):
        per.HeightGroupPair(4, Q8)
    assert per.HeightGroupPair(6, Q8).ell == 1


def test_generators_examples():
    L = per.generators_Lprime(per.HeightGroupPair(2, C4))
    assert set(L.generators) == {VirtualRep(C4, (1, 1, 1)), VirtualRep(C4, (4, -4, 0)), VirtualRep(C4, (16, 0, -8))}
    for h in range(1, 6):
        L = per.generators_Lprime(per.HeightGroupPair(h, C2))
        assert L.generators == [VirtualRep(C2, (1, 1)), VirtualRep(C2, (2 ** (h + 1), -2 ** (h + 1)))]
    L = per.generators_Lprime(per.HeightGroupPair(2, Q8))
    assert len(L.generators) == 7
    assert VirtualRep(Q8, (16, 16, 0, 0, -8)) in L.generators


def test_complexity_examples():
    assert per.complexity(per.HeightGroupPair(2, C4)) == InvariantFactors(0, (4, 32))
    assert per.complexity(per.HeightGroupPair(2, Q8)) == InvariantFactors(0, (4, 8, 8, 64))
    assert per.complexity(per.HeightGroupPair(4, gr.cyclic(3))) == InvariantFactors(0, (4, 16, 256))


@pytest.mark.parametrize("p", GRID, ids=lambda p: f"h{p.h}-{p.group}")
def test_quotient_and_period_on_grid(p):
    assert per.complexity(p) == per.complexity_closed_form(p)
    assert per.integer_period(p) == per.P(p.h, p.group)


@pytest.mark.parametrize("p", GRID, ids=lambda p: f"h{p.h}-{p.group}")
def test_sharpness_drop(p):
    want = 2 ** (p.h + p.n) if p.group.kind == gr.CYCLIC else 2 ** (p.h + 3)
    assert per.sharpness_drop(p) == want


def test_sharpness_c2_halves():
    p = per.HeightGroupPair(1, C2)
    assert per.sharpness_candidate(p) == VirtualRep(C2, (2, -2))
    assert per.sharpness_drop(p) == 4


@pytest.mark.parametrize("p", GRID, ids=lambda p: f"h{p.h}-{p.group}")
def test_unit_combination(p):
    coeffs, gens, target = per.remark_combination(p)
    assert per.verify_combination(coeffs, gens, target)
    assert target == gr.trivial(p.group, per.P(p.h, p.group))


def test_verify_combination_trivial():
    assert per.verify_combination([0, 0], [gr.regular(C4), gr.trivial(C4)], gr.zero(C4))
    with pytest.raises(ValueError):
        per.verify_combination([1], [], gr.zero(C4))


@pytest.mark.parametrize("p", Q8_GRID, ids=lambda p: f"h{p.h}")
def test_q8_dependent_generators(p):
    for coeffs, gens, dep in per.q8_dependency_identities(p):
        assert per.verify_combination(coeffs, gens, dep)
    full = per.generators_Lprime(p)
    five = IntegerLattice(Q8, full.generators[:5])
    assert quotient(5, five) == per.complexity(p)


@pytest.mark.parametrize("p", GRID, ids=lambda p: f"h{p.h}-{p.group}")
def test_inductions_lie_in_lattice(p):
    for name, v, ok in per.induction_checks(p):
        assert ok, name


def test_report_consistency():
    for p in GRID[:6]:
        r = per.report(p)
        assert r.integer_period == minimal_multiple(r.lattice, per.unit(p.group))
        for g in r.lattice.generators:
            assert contains(r.lattice, g)


def test_true_lattices_contain_Lprime():
    for h in (2, 4):
        true = per.true_lattice_C4(h)
        for g in per.generators_Lprime(per.HeightGroupPair(h, C4)).generators:
            assert contains(true, g)
