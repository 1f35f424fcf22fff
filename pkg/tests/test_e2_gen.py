import pytest
from hypothesis import given, settings, strategies as st

from eoperiod import bredon
from eoperiod import e2_gen as e2
from eoperiod.e2_gen import C2Name, FREE, InducedName, RegularName


@pytest.fixture(scope="module")
def chart():
    return e2.generate("C4", (-12, 40), 13)


@pytest.fixture(scope="module")
def page():
    return e2.post_d3(e2.generate("C4", (-1, 60), 16, negative=False))


def test_chart_equals_oracle(chart):
    got = {}
    for c in chart:
        got.setdefault(c.bidegree, []).append(c.order)
    got = {k: sorted(v) for k, v in got.items()}
    assert got == e2.oracle_chart_orders("C4", (-12, 40), 13)


def test_closed_forms_match_oracle():
    for k in range(0, 13):
        col = bredon.chart_column(bredon.sphere(e2.gr.C4, k, k, k))
        for f in range(0, 3 * k + 2):
            want = col.get(f)
            got = e2.regular_order(k, f)
            assert (want is None and got is None) or want == [got], (k, f)
    for j in range(0, 16):
        col = bredon.chart_column(bredon.sphere(e2.gr.C2, j, j))
        for d in range(0, j + 2):
            want = col.get(d)
            got = e2.induced_order(j, d)
            assert (want is None and got is None) or want == [got], (j, d)


def test_named_classes(chart):
    name = RegularName(15, 2, 7, 13, 1)
    assert str(name) == "d̄^{15}u_{2λ}u_{14σ}a_{13λ}a_σ"
    assert name.bidegree == (33, 27)
    assert e2.regular_generator(15, 27) == name
    d2 = RegularName(2, 2, 1, 0, 0)
    assert str(d2) == "d̄^{2}u_{2λ}u_{2σ}"
    at80 = [c for c in chart.at(8, 0) if c.name == d2]
    assert at80 and at80[0].order == FREE
    assert [c.order for c in chart.at(0, 0)] == [FREE]


def test_json_round_trip(chart):
    text = chart.dumps()
    summary = e2.read_chart_json(text)
    for (s, f), orders in summary.items():
        assert orders == sorted(c.order for c in chart.at(s, f))


@pytest.mark.parametrize("k", range(0, 14))
def test_naming_solver_counts(k):
    col = bredon.chart_column(bredon.sphere(e2.gr.C4, k, k, k))
    for f in range(0, 14):
        assert e2.naming_summand_count(k, f) == len(col.get(f, [])), (k, f)


def test_gold_reduction():
    # a_sig^2 u_lam = 2 a_lam u_2sig
    coef, gen = e2.reduce_regular(1, RegularName(2, 2, 0, 0, 2))
    assert gen == RegularName(2, 1, 1, 1, 0)
    assert coef == 2


# -------------------------------------------------------------- D-shifts

def test_d_multiply_examples():
    assert e2.d_multiply(e2.D_CLASS) == RegularName(4, 4, 2, 0, 0)
    assert str(e2.d_multiply(e2.D_CLASS)) == "d̄^{4}u_{4λ}u_{4σ}"
    assert e2.d_multiply(RegularName(0, 0, 0, 0, 0)) == e2.D_CLASS


def regular_names(kmax=12):
    return st.integers(0, kmax).flatmap(lambda k: st.integers(0, 3 * k).map(
        lambda f: e2.regular_generator(k, f))).filter(lambda n: n is not None)


def induced_names(jmax=20):
    return st.integers(1, jmax).flatmap(lambda j: st.tuples(
        st.integers(0, (j - 1) // 2), st.integers(0, j // 2)).map(
        lambda t: InducedName(j - t[0], t[0], (j - (j % 2 + 2 * t[1])) // 2, j % 2 + 2 * t[1])))


@settings(max_examples=200, deadline=None)
@given(st.one_of(regular_names(), induced_names()))
def test_d_multiply_shifts_by_eight(name):
    s, f = name.bidegree
    if isinstance(name, RegularName) and f > 2 * name.k + 1:
        # gold relation: D * x is a proper multiple of the generator (or 0)
        with pytest.raises(ValueError):
            e2.d_multiply(name)
        return
    out = e2.d_multiply(name)
    assert out.bidegree == (s + 8, f)


def test_d_multiply_in_chart(chart):
    c = [x for x in chart.at(8, 0) if x.name == e2.D_CLASS][0]
    assert e2.d_multiply(c, chart).name == RegularName(4, 4, 2, 0, 0)
    top = [x for x in chart.at(40, 0) if isinstance(x.name, RegularName)][0]
    with pytest.raises(ValueError):
        e2.d_multiply(top, chart)


def test_core_is_d_shift_stable(page):
    for s in range(5, 51):
        for f in range(0, 14):
            assert page.core_order(s, f) == page.core_order(s + 8, f), (s, f)


def test_core_has_one_summand_above_two(page):
    for (s, f), sm in page.core.items():
        assert sm.tag == e2.CORE
    for (s, f), H in page.homology.items():
        if f >= 3:
            assert len(H.summands) <= 1


# ------------------------------------------------------ restriction and d3

def test_restrict_examples():
    assert e2.restrict(RegularName(1, 1, 0, 0, 1)) == {}
    assert e2.restrict(e2.D_CLASS) == {C2Name(2, 2, 2, 0): 1}
    # u_{2 sigma} restricts to the unit
    assert e2.restrict(RegularName(0, 0, 1, 0, 0)) == {C2Name(0, 0, 0, 0): 1}


def test_c2_generators():
    assert e2.c2_d3({C2Name(0, 0, 1, 0): 1}) == {C2Name(1, 0, 0, 3): 1, C2Name(0, 1, 0, 3): 1}
    assert e2.c2_d7({C2Name(0, 0, 2, 0): 1}) == {C2Name(3, 0, 0, 7): 1}


@settings(max_examples=300, deadline=None)
@given(st.one_of(regular_names(16), induced_names(30)))
def test_restriction_criterion(name):
    assert e2.restriction_check(name)


@settings(max_examples=200, deadline=None)
@given(st.one_of(regular_names(), induced_names()))
def test_restrict_preserves_bidegree(name):
    for x in e2.restrict(name):
        assert x.bidegree == name.bidegree


@settings(max_examples=200, deadline=None)
@given(regular_names(6), regular_names(6))
def test_restrict_is_multiplicative(x, y):
    lhs = {}
    for z, c in e2.multiply(x, y).items():
        for w, c2 in e2.restrict(z).items():
            lhs[w] = lhs.get(w, 0) + c * c2
    rhs = {}
    for a, ca in e2.restrict(x).items():
        for b, cb in e2.restrict(y).items():
            w = C2Name(a.a + b.a, a.b + b.b, a.e + b.e, a.d + b.d)
            rhs[w] = rhs.get(w, 0) + ca * cb
    norm = lambda v: {k: c % 2 if k.d else c for k, c in v.items() if (c % 2 if k.d else c)}
    assert norm(lhs) == norm(rhs)


def test_d3_on_classes_with_zero_restriction(chart):
    recs = e2.d3_seed(chart)
    for rec in recs:
        assert rec.r == 3
        s, f = rec.source.bidegree
        assert rec.target.bidegree == (s - 1, f + 3)
    for c in chart:
        if isinstance(c.name, RegularName) and c.name.d > 0:
            assert not e2.d3(c.name)


def test_designated_low_core():
    assert e2.designated_low_core(1, 1) == InducedName(1, 0, 0, 1)
    assert e2.designated_low_core(10, 2) == InducedName(4, 2, 2, 2)
    assert e2.designated_low_core(3, 1) is None
