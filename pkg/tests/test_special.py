import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latlab.filon import PanelRule, graded_breaks
from latlab.special import beta, gamma
from latlab.sphere import sphere_rule


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.25, 1.5, 2.0, 3.7, 7.5, 12.0, 25.0])
def test_gamma_matches_stdlib(x):
    assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-13)


@given(st.floats(min_value=0.05, max_value=30.0))
def test_gamma_recurrence(x):
    assert gamma(x + 1) == pytest.approx(x * gamma(x), rel=1e-12)


def test_gamma_vectorized():
    xs = np.array([0.5, 1.5, 2.5])
    np.testing.assert_allclose(gamma(xs), [math.gamma(v) for v in xs], rtol=1e-13)


def test_beta_half_half_is_pi():
    assert beta(0.5, 0.5) == pytest.approx(math.pi, rel=1e-13)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_sphere_rule_total_area(k):
    _, w = sphere_rule(k, 8)
    area = 2 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)
    assert w.sum() == pytest.approx(area, rel=1e-13)


def test_sphere_rule_second_moment():
    x, w = sphere_rule(2, 10)
    # int_{S^2} x_0^2 = 4 pi / 3
    assert (w * x[:, 0] ** 2).sum() == pytest.approx(4 * math.pi / 3, rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.0, max_value=400.0))
def test_filon_integrates_smooth_function(tau):
    # int_{-1}^{1} (1 - s^2) e^{-i tau s} ds in closed form
    rule = PanelRule(graded_breaks(-1.0, 1.0, depth=6), order=12)
    coef = rule.coefficients(1 - rule.nodes**2)
    got = rule.transform(coef, np.array([tau]))[0]
    w = tau
    if w < 0.5:
        # the closed form cancels badly here; use its even power series
        exact = sum((-1) ** n * w ** (2 * n) / math.factorial(2 * n) * (2 / (2 * n + 1) - 2 / (2 * n + 3)) for n in range(12))
    else:
        exact = 4 * (math.sin(w) - w * math.cos(w)) / w**3
    assert abs(got - exact) < 1e-12
