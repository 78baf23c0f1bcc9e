import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from latlab import corpus
from latlab.caps import CapError, cap_extents, cap_measure, kkt_residuals, lemma1_check, support_point, support_value
from latlab.domain import eval_F, supersphere


@pytest.mark.parametrize("name", corpus.NAMES)
def test_axis_support_point(name):
    spec = corpus.load(name)
    for j in range(spec.d):
        np.testing.assert_allclose(support_point(spec, np.eye(spec.d)[j]), np.eye(spec.d)[j], atol=1e-12)


def test_support_point_examples(ball):
    u = np.ones(3) / math.sqrt(3)
    np.testing.assert_allclose(support_point(ball, u), u, atol=1e-13)
    np.testing.assert_allclose(support_point(supersphere(3, 4), u), 3**-0.25 * np.ones(3), atol=1e-13)


@pytest.mark.parametrize("name", corpus.NAMES)
def test_kkt_on_many_directions(name):
    spec = corpus.load(name)
    rng = np.random.default_rng(5)
    for xi in rng.normal(size=(100, spec.d)):
        x = support_point(spec, xi)
        f, angle = kkt_residuals(spec, x, xi)
        assert f < 1e-12 and angle < 1e-8
        assert np.all(np.sign(x[np.abs(xi) > 1e-9]) == np.sign(xi[np.abs(xi) > 1e-9]))


@pytest.mark.parametrize("name", ["ss4_d3", "kn_d3", "ss8_d4"])
def test_support_value_against_optimizer(name):
    # independent maximization of <x, xi> over D with SLSQP
    spec = corpus.load(name)
    rng = np.random.default_rng(6)
    for xi in np.abs(rng.normal(size=(5, spec.d))) + 0.1:
        n = xi / np.linalg.norm(xi)
        res = minimize(
            lambda x: -x @ n,
            x0=np.full(spec.d, 0.1),
            constraints=[{"type": "ineq", "fun": lambda x: -eval_F(spec, x)}],
            method="SLSQP",
            options={"ftol": 1e-14, "maxiter": 500},
        )
        assert support_value(spec, n)[0] == pytest.approx(-res.fun, rel=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(corpus.NAMES), st.lists(st.floats(-1, 1), min_size=5, max_size=5), st.floats(0.1, 10))
def test_support_point_scale_invariant(name, xi, scale):
    spec = corpus.load(name)
    xi = np.array(xi[: spec.d])
    if np.linalg.norm(xi) < 1e-3:
        return
    np.testing.assert_allclose(support_point(spec, xi), support_point(spec, scale * xi), atol=1e-11)


# --- caps --------------------------------------------------------------------------


@pytest.mark.parametrize("delta", [0.01, 0.05, 0.1, 0.2])
def test_ball_cap_measure(ball, delta):
    assert cap_measure(ball, [1, 0, 0], delta) == pytest.approx(2 * math.pi * delta, rel=1e-3)


def test_ball_cap_examples(ball):
    assert cap_measure(ball, [1, 0, 0], 0.1) == pytest.approx(0.62832, abs=1e-4)
    assert cap_measure(ball, [1, 0, 0], 0.2) == pytest.approx(1.25664, abs=1e-4)
    ext = cap_extents(ball, [1, 0, 0], 0.02)
    assert ext[1] == pytest.approx(math.sqrt(2 * 0.02 - 0.02**2), rel=1e-6)
    assert ext[1] == pytest.approx(0.1990, abs=1e-4)


def test_ball_cap_off_axis(ball):
    xi = np.array([0.3, 0.5, 0.8])
    assert cap_measure(ball, xi, 0.05) == pytest.approx(2 * math.pi * 0.05, rel=1e-3)


def test_supersphere_extent_scaling():
    ss4 = supersphere(3, 4)
    # on the axis the cap is {x_2^4 + x_3^4 <= 1 - (1 - delta)^4}, so the extent is that budget to the 1/4
    for delta in [1e-4, 1e-3]:
        ext = cap_extents(ss4, [1, 0, 0], delta)
        assert ext[1] == pytest.approx((1 - (1 - delta) ** 4) ** 0.25, rel=1e-6)
    assert cap_extents(ss4, [1, 0, 0], 1e-4)[1] == pytest.approx(0.1, rel=0.5)


@pytest.mark.parametrize("name", ["ss4_d3", "kn_d3"])
def test_caps_shrink_monotonically(name):
    spec = corpus.load(name)
    xi = np.array([0.8, 0.5, 0.3])
    deltas = [0.1, 0.03, 0.01, 0.003, 0.001]
    meas = [cap_measure(spec, xi, d) for d in deltas]
    ext = [cap_extents(spec, xi, d) for d in deltas]
    assert all(a > b for a, b in zip(meas, meas[1:]))
    assert all(np.all(a >= b) for a, b in zip(ext, ext[1:]))
    assert meas[-1] < 0.1 * meas[0]


def test_deep_cap_is_flagged(ball):
    with pytest.raises((CapError, ValueError)):
        cap_measure(ball, [1, 0, 0], 1.5)


def test_lemma1_ball_ratio_is_two_pi(ball):
    out = lemma1_check(ball, 0, [np.array([1.0, 0, 0])], np.geomspace(10, 1e4, 7))
    ratios = [r["ratio"] for r in out["rows"]]
    np.testing.assert_allclose(ratios, 2 * math.pi, rtol=1e-3)
    assert out["pass"]


def test_lemma1_supersphere_axis_bounded(ss4):
    out = lemma1_check(ss4, 0, [np.array([1.0, 0, 0])], np.geomspace(10, 1e4, 7))
    assert out["pass"]
    assert max(r["ratio"] for r in out["rows"]) < 100


def test_lemma1_rejects_direction_outside_cone(ss4):
    with pytest.raises(ValueError):
        lemma1_check(ss4, 0, [np.array([0.01, 1.0, 0])], [10, 100])
