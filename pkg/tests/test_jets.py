import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finsler_pd import jets
from finsler_pd import metrics as M


def test_value_grad_hess_of_composite():
    x, y = jets.seed([0.3, -0.7], order=2)
    f = jets.sin(x) * jets.exp(y) / (1.0 + x * x)
    X, Y = 0.3, -0.7
    val = math.sin(X) * math.exp(Y) / (1 + X * X)
    fx = math.exp(Y) * (math.cos(X) / (1 + X * X) - 2 * X * math.sin(X) / (1 + X * X) ** 2)
    fy = val
    assert f.value == pytest.approx(val, rel=1e-14)
    assert np.allclose(f.grad, [fx, fy], rtol=1e-13, atol=0)
    h = f.hess
    assert h[0, 1] == h[1, 0]
    assert h[1, 1] == pytest.approx(val, rel=1e-13)
    assert h[0, 1] == pytest.approx(fx, rel=1e-13)


def test_elementary_functions_match_analytic_derivatives():
    (t,) = jets.seed([0.4], order=3)
    cases = [
        (jets.sqrt(t), [math.sqrt(0.4), 0.5 / math.sqrt(0.4), -0.25 * 0.4**-1.5, 0.375 * 0.4**-2.5]),
        (jets.log(t), [math.log(0.4), 1 / 0.4, -1 / 0.4**2, 2 / 0.4**3]),
        (jets.tan(t), [math.tan(0.4), 1 / math.cos(0.4) ** 2, None, None]),
        (jets.atanh(t), [math.atanh(0.4), 1 / (1 - 0.16), 2 * 0.4 / (1 - 0.16) ** 2, None]),
        (jets.cos(t), [math.cos(0.4), -math.sin(0.4), -math.cos(0.4), math.sin(0.4)]),
    ]
    for jet, ders in cases:
        d = jet
        for k, want in enumerate(ders):
            if want is not None:
                assert d.value == pytest.approx(want, rel=1e-12), (k, want)
            if k < 3:
                d = d.diff(0)


def test_high_order_derivatives():
    (t,) = jets.seed([0.1], order=7)
    f = jets.exp(2.0 * t)
    for _ in range(7):
        f = f.diff(0)
    assert f.value == pytest.approx(2**7 * math.exp(0.2), rel=1e-12)
    assert f.order == 0


def test_float_dispatch():
    assert jets.sqrt(4.0) == 2.0
    assert jets.value_of(3.5) == 3.5
    assert jets.atanh(0.0) == 0.0


def test_power_and_reciprocal():
    (t,) = jets.seed([1.7], order=3)
    p = t**3
    assert p.diff(0).diff(0).diff(0).value == pytest.approx(6.0)
    r = t.reciprocal()
    assert r.diff(0).value == pytest.approx(-1 / 1.7**2, rel=1e-14)
    q = 2.0 / t - 1.0
    assert q.value == pytest.approx(2 / 1.7 - 1)


def test_truncation_keeps_lower_order_terms():
    x, y = jets.seed([0.2, 0.5], order=4)
    f = jets.exp(x * y)
    g = f.truncate(2)
    assert g.order == 2
    assert g.value == f.value
    assert np.array_equal(g.hess, f.hess)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    st.floats(-1.5, 1.5),
)
def test_product_rule_property(a, b, x0):
    (t,) = jets.seed([x0], order=2)
    pa = a[0] + a[1] * t + a[2] * t * t
    pb = b[0] + b[1] * t + b[2] * t * t
    prod = pa * pb
    va, da = a[0] + a[1] * x0 + a[2] * x0**2, a[1] + 2 * a[2] * x0
    vb, db = b[0] + b[1] * x0 + b[2] * x0**2, b[1] + 2 * b[2] * x0
    assert prod.value == pytest.approx(va * vb, abs=1e-12)
    assert prod.grad[0] == pytest.approx(da * vb + va * db, abs=1e-11)


@pytest.mark.parametrize("name", sorted(M.ZOO))
def test_jets_agree_with_central_differences_on_metrics(name, rng):
    m = M.ZOO[name](2)
    h = 1e-4
    for s in M.random_samples(m, 5, rng):
        z0 = np.array([*s.x, *s.y])
        F = lambda z: float(m.func(z[:2], z[2:]))  # noqa: E731
        jet = m.func(*np.split(np.array(jets.seed(z0, order=2), dtype=object), 2))
        grad_fd = np.array([(F(z0 + h * e) - F(z0 - h * e)) / (2 * h) for e in np.eye(4)])
        hess_fd = np.array(
            [
                [(F(z0 + h * ei + h * ej) - F(z0 + h * ei - h * ej) - F(z0 - h * ei + h * ej) + F(z0 - h * ei - h * ej)) / (4 * h * h) for ej in np.eye(4)]
                for ei in np.eye(4)
            ]
        )
        assert np.max(np.abs(jet.grad - grad_fd)) <= 1e-6 * max(1.0, np.max(np.abs(grad_fd)))
        assert np.max(np.abs(jet.hess - hess_fd)) <= 1e-5 * max(1.0, np.max(np.abs(hess_fd)))
        assert np.allclose(jet.hess, jet.hess.T, rtol=0, atol=1e-14)
