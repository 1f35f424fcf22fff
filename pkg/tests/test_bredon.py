import itertools
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eoperiod import bredon, _kernels
from eoperiod.bredon import FREE, sphere
from eoperiod.groups import C2, C4
from eoperiod.lattice import snf_diagonal

FIXTURE = Path(__file__).parent / "fixtures" / "oracle_columns.json"
C4_BOX = list(itertools.product(range(-4, 5), repeat=3))
C2_BOX = list(itertools.product(range(-4, 5), repeat=2))


def test_sphere_zero():
    assert bredon.homology_column(sphere(C4, 0, 0, 0)) == {0: [FREE]}
    assert bredon.chart_column(sphere(C2, 0, 0)) == {0: [FREE]}


def test_top_group_of_multiples_of_rho():
    # k rho_4 is orientable exactly when k is even; then the top group is Z
    for k in range(1, 7):
        idx = sphere(C4, k, k, k)
        top = bredon.homology_column(idx).get(4 * k)
        assert top == ([FREE] if k % 2 == 0 else None)
        assert bredon.underlying_homology(idx) == {4 * k: [FREE]}


def test_four_rho_has_order_four_at_filtration_eight():
    col = bredon.chart_column(sphere(C4, 4, 4, 4))
    assert max(col[8]) >= 4


def test_c2_columns():
    assert bredon.chart_column(sphere(C2, 2, 2)) == {0: [FREE], 2: [2]}
    assert bredon.chart_column(sphere(C2, 1, 1)) == {1: [2]}


def test_frozen_columns():
    frozen = json.loads(FIXTURE.read_text())
    for key, col in frozen.items():
        g, *coeffs = key.split()
        idx = sphere(C4 if g == "C4" else C2, *map(int, coeffs))
        got = {str(f): v for f, v in bredon.chart_column(idx).items()}
        assert got == col, key


@pytest.mark.parametrize("c", range(-4, 5))
def test_underlying_and_duality_c4(c):
    for a, b in itertools.product(range(-4, 5), repeat=2):
        idx = sphere(C4, c, a, b)
        assert bredon.underlying_homology(idx) == {idx.dim: [FREE]}
        assert bredon.duality_holds(idx), (c, a, b)


def test_underlying_and_duality_c2():
    for c, a in C2_BOX:
        idx = sphere(C2, c, a)
        assert bredon.underlying_homology(idx) == {idx.dim: [FREE]}
        assert bredon.duality_holds(idx), (c, a)


def test_trivial_shift():
    for c, a, b in C4_BOX:
        if c == 4:
            continue
        assert bredon.chart_column(sphere(C4, c + 1, a, b)) == bredon.chart_column(sphere(C4, c, a, b))
    for c, a in C2_BOX:
        if c < 4:
            assert bredon.chart_column(sphere(C2, c + 1, a)) == bredon.chart_column(sphere(C2, c, a))


def test_gold_relation():
    orders, u2sig_alam, ulam_asig2 = bredon.gold_witness()
    assert orders == [4]
    assert u2sig_alam == [1]
    assert ulam_asig2 == [2]


def test_bad_index():
    with pytest.raises(ValueError):
        sphere(C4, 1, 2)
    with pytest.raises(ValueError):
        sphere(C2, 1, 2, 3)


# ------------------------------------------------------------------ kernels

small = st.integers(1, 6).flatmap(lambda r: st.integers(1, 6).flatmap(
    lambda c: st.lists(st.lists(st.sampled_from([0, 0, 0, 1, -1, 2, -2, 4, -4]), min_size=c, max_size=c),
                       min_size=r, max_size=r)))


@settings(max_examples=300, deadline=None)
@given(small)
def test_kernels_agree_with_exact_snf(M):
    want = snf_diagonal(M)
    assert _kernels.smith_diagonal(M, "numpy") == want
    if _kernels.njit is not None:
        assert _kernels.smith_diagonal(M, "numba") == want


def test_kernel_guard_falls_back():
    M = [[2 ** 45, 3], [0, 2 ** 44]]
    assert _kernels.smith_diagonal(M) == snf_diagonal(M)
    assert _kernels.smith_diagonal(np.zeros((0, 0))) == []


def test_backend_env(monkeypatch):
    monkeypatch.setenv("EOPERIOD_KERNEL", "numpy")
    assert _kernels.backend() == "numpy"
    monkeypatch.setenv("EOPERIOD_KERNEL", "numba")
    assert _kernels.backend() == ("numba" if _kernels.njit is not None else "numpy")
