import pytest
from numpy.testing import assert_allclose

from conftest import make_system
from dgprecond.diagnostics import (averaging_constant, dg_norm_equivalence, relative_slope,
                                   spectral_bounds, stability_constant, trace_constants)


@pytest.mark.parametrize("p", range(2, 9))
def test_trace_constants_bounded(p):
    tr, inv = trace_constants(p, h=0.25)
    assert 2.0 <= tr <= 6.0 + 1e-12
    # the inverse trace constant stays below one and approaches it from below
    assert_allclose(inv, p / (p + 1), rtol=1e-10)


def test_trace_constant_independent_of_h():
    assert_allclose(trace_constants(3, 0.1), trace_constants(3, 1.0), rtol=1e-12)


@pytest.mark.parametrize("n", [4, 8])
def test_averaging_constant_bounded(n):
    vals = [averaging_constant(make_system(n=n, p=p), elements=[0, (n // 2) * n + n // 2])
            for p in (2, 3, 4, 5)]
    assert max(vals) < 1.0
    # increments shrink: the constant saturates instead of growing without bound
    inc = [b - a for a, b in zip(vals, vals[1:])]
    assert all(x > y > 0 for x, y in zip(inc, inc[1:]))


def test_averaging_constant_mesh_independent():
    a = averaging_constant(make_system(n=4, p=3), elements=[5])
    b = averaging_constant(make_system(n=8, p=3), elements=[18])
    assert a == pytest.approx(b, rel=1e-8)


@pytest.mark.parametrize("method", ["sipg", "ldg"])
@pytest.mark.parametrize("alpha", [2.0, 10.0, 100.0])
def test_spectral_and_equivalence_brackets(method, alpha):
    ps = (2, 3, 4, 5)
    C1, C2, lo, hi, st = [], [], [], [], []
    for p in ps:
        s = make_system(n=4, p=p, method=method, alpha=alpha)
        c1, c2 = spectral_bounds(s)
        a, b = dg_norm_equivalence(s)
        C1.append(c1), C2.append(c2), lo.append(a), hi.append(b), st.append(stability_constant(s))
    assert max(C1) < 0.25 and min(C1) > 0.15
    assert max(C2) < 50.0
    assert min(lo) > 0.25 and max(hi) < 5.0
    assert max(st) < 4.0
    # upper constants must not drift upward with p, lower ones not downward
    assert relative_slope(ps, C2) <= 0.05
    assert relative_slope(ps, hi) <= 0.05
    assert relative_slope(ps, [1 / x for x in lo]) <= 0.05
    assert relative_slope(ps, st) <= 0.05


def test_relative_slope():
    assert relative_slope([1, 2, 3], [2, 2, 2]) == pytest.approx(0.0)
    assert relative_slope([1, 2, 3], [1, 2, 3]) == pytest.approx(0.5)
