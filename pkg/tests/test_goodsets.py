import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tractdim.geometry import Square
from tractdim.goodsets import (AnalyticGoodSet, PreconditionError,
                               density_lemma_check, export_goodset_csv,
                               good_set, is_admissible)
from tractdim.growth import build_profile
from tractdim.tracts import TractSpec, make_map

EXP = make_map(TractSpec(family="exponential"))
MODEL2 = make_map(TractSpec(family="model", q=2.0))


# ---------------------------------------------------------------------------
# density lemma


def test_density_alpha_equals_beta():
    beta = lambda x: math.exp(x ** 1.5)
    bp = lambda x: 1.5 * math.sqrt(x) * math.exp(x ** 1.5)
    binv = lambda t: math.log(t) ** (1 / 1.5)
    rep = density_lemma_check(beta, beta, 2.0, (2.0, 30.0), 0.05,
                              alpha_prime=bp, beta_prime=bp,
                              beta_inverse=binv)
    assert rep.measured_lower_density == pytest.approx(1.0)
    assert rep.ok


def test_density_linear_alpha_exp_beta():
    rep = density_lemma_check(lambda x: x, math.exp, 2.0, (1.0, 60.0),
                              0.05, alpha_prime=lambda x: 1.0,
                              beta_prime=math.exp, beta_inverse=math.log)
    # psi(t) = t, so the test is 1 <= 2x: true everywhere
    assert rep.measured_lower_density == pytest.approx(1.0)


def test_density_piecewise_bursts():
    # log-slope 10 bursts of width 1 every 10 units, quiet in between:
    # the bad set has density ~1/10, measured good density ~0.9 >= 1/2
    period, width, rate = 10.0, 1.0, 10.0
    quiet = period - width

    def log_alpha(x):
        base, frac = divmod(max(x - 2.0, 0.0), period)
        t = base * (rate * width + 1e-6 * quiet)
        return t + 1e-6 * min(frac, quiet) + rate * max(frac - quiet, 0.0)

    alpha = lambda x: math.exp(log_alpha(x))
    rep = density_lemma_check(alpha, math.exp, 2.0, (2.0, 102.0), 0.02,
                              beta_prime=math.exp, beta_inverse=math.log)
    assert rep.measured_lower_density >= 0.5
    assert rep.measured_lower_density == pytest.approx(0.9, abs=0.03)


def test_density_precondition_alpha_above_beta():
    with pytest.raises(PreconditionError):
        density_lemma_check(lambda x: 2 * math.exp(x), math.exp, 2.0,
                            (1.0, 10.0), 0.1, beta_prime=math.exp,
                            beta_inverse=math.log)


def test_density_needs_k_above_one():
    with pytest.raises(PreconditionError):
        density_lemma_check(math.exp, math.exp, 1.0, (1.0, 5.0), 0.1)


@given(st.floats(0.2, 0.95), st.integers(0, 1000))
@settings(max_examples=25, deadline=None)
def test_density_property_slow_alpha(c0, seed):
    # alpha with log-slope c0 < 1 under beta = exp: good everywhere, so
    # the measured lower density clears (K-1)/K - 0.02 for each K
    del seed
    alpha = lambda x: math.exp(c0 * (x - 1.0))
    for K in (1.5, 2.0, 4.0):
        rep = density_lemma_check(alpha, math.exp, K, (1.0, 41.0), 0.1,
                                  alpha_prime=lambda x: c0 * alpha(x),
                                  beta_prime=math.exp,
                                  beta_inverse=math.log)
        assert rep.measured_lower_density >= (K - 1.0) / K - 0.02


# ---------------------------------------------------------------------------
# good sets


def test_good_set_exp_full_window():
    xs = np.linspace(2.0, 100.0, 2000)
    prof = build_profile(EXP, xs, q=1.0, epsilon=0.1, p=0.25)
    gs = good_set(prof, (2.0, 100.0), grid_step=0.05)
    assert gs.density_in(2.0, 100.0) == pytest.approx(1.0, abs=1e-6)


def test_good_set_model_threshold_p12():
    # ratio 2x <= x^1.2 exactly when x >= 2^5 = 32
    xs = np.linspace(5.0, 50.0, 3000)
    prof = build_profile(MODEL2, xs, q=2.0, epsilon=0.1, p=1.2)
    gs = good_set(prof, (5.0, 50.0), grid_step=0.01)
    assert len(gs.L) == 1
    lo, hi = gs.L.intervals[0]
    assert lo == pytest.approx(32.0, abs=0.05)
    assert hi == pytest.approx(50.0, abs=0.05)


def test_good_set_model_empty_for_small_p():
    # with p = 1.1 the threshold is 2^10 = 1024, beyond the window
    xs = np.linspace(5.0, 50.0, 500)
    prof = build_profile(MODEL2, xs, q=2.0, epsilon=0.1, p=1.1)
    gs = good_set(prof, (5.0, 50.0), grid_step=0.05)
    assert gs.L.length == 0.0


def test_good_set_broken_map_p_zero():
    import cmath
    broken = make_map(TractSpec(
        family="user", eval=lambda z: cmath.exp(z / 100.0),
        deriv=lambda z: cmath.exp(z / 100.0) / 100.0))
    xs = np.linspace(5.0, 50.0, 300)
    prof = build_profile(broken, xs, q=1.0, epsilon=0.1, p=0.0)
    gs = good_set(prof, (5.0, 50.0), grid_step=0.1)
    # ratio 1/100 <= x^0 = 1 everywhere
    assert gs.density_in(5.0, 50.0) == pytest.approx(1.0, abs=1e-6)


def test_good_set_window_outside_grid():
    xs = np.linspace(2.0, 10.0, 50)
    prof = build_profile(EXP, xs, q=1.0, epsilon=0.1, p=0.25)
    with pytest.raises(PreconditionError):
        good_set(prof, (1.0, 20.0))


def test_analytic_good_set_queries():
    L = AnalyticGoodSet(min_x=32.0, p=1.2)
    assert L.contains(40.0) and not L.contains(31.0)
    assert L.length_in(20.0, 50.0) == pytest.approx(18.0)
    assert L.density_in(32.0, 64.0) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# admissibility


FULL = AnalyticGoodSet(min_x=1.0, p=0.25)


def test_admissible_examples():
    ok, reasons = is_admissible(Square(400 + 0j, 150.0), FULL)
    assert ok and not reasons
    ok, reasons = is_admissible(Square(400 + 0j, 90.0), FULL)
    assert not ok and any("size floor" in r for r in reasons)
    ok, reasons = is_admissible(Square(150 + 0j, 120.0), FULL)
    assert not ok and any("Re(z)/2" in r for r in reasons)


def test_admissible_scaled_mode():
    ok, _ = is_admissible(Square(12 + 0j, 4.0), FULL, size_scale=0.02)
    assert ok
    ok, _ = is_admissible(Square(12 + 0j, 1.5), FULL, size_scale=0.02)
    assert not ok


def test_admissible_monotone_in_L():
    # enlarging the good set never flips an admissible square to not
    small = AnalyticGoodSet(min_x=380.0, p=0.25)
    big = AnalyticGoodSet(min_x=1.0, p=0.25)
    sq = Square(400 + 0j, 150.0)
    ok_small, _ = is_admissible(sq, small)
    ok_big, _ = is_admissible(sq, big)
    assert (not ok_small) or ok_big


def test_goodset_csv_export(tmp_path):
    xs = np.linspace(5.0, 50.0, 500)
    prof = build_profile(MODEL2, xs, q=2.0, epsilon=0.1, p=1.2)
    gs = good_set(prof, (5.0, 50.0), grid_step=0.05)
    path = tmp_path / "L.csv"
    export_goodset_csv(gs, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "lo,hi"
    assert len(lines) == 2
