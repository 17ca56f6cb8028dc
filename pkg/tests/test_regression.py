import numpy as np
import pytest
import statsmodels.api as sm
from hypothesis import given
from hypothesis import strategies as st

from wirechan.regression import TUNE, bisquare, robust_regress


def test_exact_line():
    x = np.linspace(-10, 10, 30)
    line = robust_regress(x, 2 * x + 1)
    assert line.slope == pytest.approx(2.0, abs=1e-9)
    assert line.intercept == pytest.approx(1.0, abs=1e-9)


def test_gross_outliers_vs_ols():
    rng = np.random.default_rng(0)
    x = np.linspace(0, 10, 100)
    y = 2 * x + 1 + rng.normal(0, 0.1, x.size)
    bad = rng.choice(x.size, 10, replace=False)
    y[bad] += 50
    line = robust_regress(x, y)
    assert line.slope == pytest.approx(2.0, abs=0.05)
    assert np.all(np.asarray(line.diagnostics.weights)[bad] < 0.01)
    ols_slope, ols_intercept = np.polyfit(x, y, 1)
    assert abs(ols_intercept - 1.0) > 1.0  # least squares is dragged by the outliers


def test_matches_statsmodels_rlm():
    rng = np.random.default_rng(4)
    x = rng.uniform(-60, -20, 300)
    y = 0.05 - 0.003 * x + rng.standard_t(2, x.size) * 0.01
    line = robust_regress(x, y)
    ref = sm.RLM(y, sm.add_constant(x), M=sm.robust.norms.TukeyBiweight(c=TUNE)).fit(
        scale_est="mad", conv="coefs", tol=1e-10)
    assert line.intercept == pytest.approx(ref.params[0], rel=1e-3, abs=1e-5)
    assert line.slope == pytest.approx(ref.params[1], rel=1e-3)


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=50, unique=True),
       st.floats(-5, 5), st.floats(-5, 5))
def test_clean_data_equals_ols(xs, a, b):
    x = np.array(xs)
    if np.ptp(x) < 1e-3:
        return
    y = a * x + b
    line = robust_regress(x, y)
    ols = np.polyfit(x, y, 1)
    assert line.slope == pytest.approx(ols[0], abs=1e-9)
    assert line.intercept == pytest.approx(ols[1], abs=1e-9)


def test_noiseless_fit_is_ols():
    x = np.arange(20.0)
    y = -0.0028 * x + 0.089
    line = robust_regress(x, y)
    ols = np.polyfit(x, y, 1)
    assert line.slope == pytest.approx(ols[0], abs=1e-9)
    assert line.intercept == pytest.approx(ols[1], abs=1e-9)


@given(st.floats(1.0, 1e6))
def test_bisquare_zero_beyond_radius(u):
    assert bisquare(u) == 0.0 and bisquare(-u) == 0.0


def test_bisquare_shape():
    assert bisquare(0.0) == 1.0
    assert bisquare(0.5) == pytest.approx((1 - 0.25) ** 2)


def test_log_form():
    x = np.linspace(-60, -20, 40)
    line = robust_regress(x, np.exp(-0.0167 * x - 2.26), form="log")
    assert line.form == "log"
    assert line.slope == pytest.approx(-0.0167, abs=1e-9)
    assert line.intercept == pytest.approx(-2.26, abs=1e-9)


@pytest.mark.parametrize("x, y, form", [([1, 1, 1], [1, 2, 3], "linear"),
                                        ([1, 2], [1, 2], "linear"),
                                        ([1, 2, 3], [1, -2, 3], "log"),
                                        ([1, 2, 3], [1, 2], "linear")])
def test_errors(x, y, form):
    with pytest.raises(ValueError):
        robust_regress(x, y, form=form)
