import math

import pytest

from tractdim.dimension import (InsufficientDataError, bracket_dimension,
                                dimension_lower, dimension_upper,
                                make_synthetic_tree, mu_ball_log)
from tractdim.geometry import Square
from tractdim.goodsets import AnalyticGoodSet
from tractdim.levels import build_levels, frostman_measure
from tractdim.offspring import OffspringParams
from tractdim.tracts import TractSpec, make_map
from tractdim.xreal import xf


def test_synthetic_known_dimensions():
    for n, ratio, depth, d in ((4, 0.25, 5, 1.0), (8, 0.25, 4, 1.5),
                               (16, 0.25, 3, 2.0)):
        tree = make_synthetic_tree(n, ratio, depth)
        meas = frostman_measure(tree)
        est = bracket_dimension(tree, meas, target=d, mode="synthetic")
        assert abs(est.lower.t - d) <= 0.05
        assert abs(est.upper.s - d) <= 0.05
        # both estimators meet at d exactly; allow rounding noise in the
        # ordering at equality
        assert est.lower.t <= est.upper.s + 1e-9
        assert est.consistent


def test_synthetic_area_like_tree_gives_two():
    # four children at half scale tile the parent: Lebesgue-like scaling
    tree = make_synthetic_tree(4, 0.5, 5)
    meas = frostman_measure(tree)
    est = bracket_dimension(tree, meas, target=2.0, mode="synthetic")
    assert est.lower.t == pytest.approx(2.0, abs=0.02)


def test_synthetic_plane_filling_cover_sum():
    # nine children at ratio 1/3: critical cover exponent 2
    tree = make_synthetic_tree(9, 1.0 / 3.0, 3)
    up = dimension_upper(tree)
    assert up.s_exact == pytest.approx(2.0, abs=1e-9)


def test_cover_sum_unit_case():
    tree = make_synthetic_tree(4, 0.25, 3)
    up = dimension_upper(tree)
    assert up.s_exact == pytest.approx(1.0, abs=1e-9)


def test_insufficient_levels():
    tree = make_synthetic_tree(4, 0.25, 1)
    frostman_measure(tree)
    with pytest.raises(InsufficientDataError):
        dimension_lower(tree, None)
    with pytest.raises(InsufficientDataError):
        dimension_upper(tree)


def test_mu_ball_monotone_in_r():
    tree = make_synthetic_tree(4, 0.25, 4)
    frostman_measure(tree)
    leaf = tree.leaves()[0]
    prev = None
    d2 = tree.ancestor(leaf, 2).log_diam
    d1 = tree.ancestor(leaf, 1).log_diam
    for theta in (0.0, 0.25, 0.5, 0.75, 1.0):
        log_r = d2 + (d1 - d2) * theta
        v = mu_ball_log(tree, leaf, log_r, 1)
        if prev is not None:
            assert v >= prev - xf(1e-12)
        prev = v


def test_mu_ball_caps_at_parent_mass():
    tree = make_synthetic_tree(4, 0.25, 3)
    frostman_measure(tree)
    leaf = tree.leaves()[0]
    parent1 = tree.ancestor(leaf, 1)
    big = parent1.log_diam
    v = mu_ball_log(tree, leaf, big, 1)
    assert v <= parent1.log_mass + xf(1e-12)


@pytest.fixture(scope="module")
def exp_estimate():
    tmap = make_map(TractSpec(family="exponential"))
    L = AnalyticGoodSet(min_x=1.0, p=0.25)
    params = OffspringParams(delta=0.05, p=0.25, mode="scaled",
                             size_scale=0.02)
    build = build_levels(tmap, None, L, Square(12 + 0j, 4.0), params, 3)
    meas = frostman_measure(build)
    return bracket_dimension(build, meas, target=1.8, mode="scaled",
                             seed=3)


def test_exp_bracket_near_target(exp_estimate):
    est = exp_estimate
    assert abs(est.lower.t - 1.8) <= 0.15
    assert abs(est.upper.s - 1.8) <= 0.15
    assert est.lower.t <= est.upper.s


def test_exp_chords_deepen_toward_target(exp_estimate):
    chords = {j: c for j, c, _ in exp_estimate.lower.window_chords}
    assert chords[2] > chords[1]
    assert chords[2] == pytest.approx(1.8, abs=0.01)


def test_model_bracket_near_target():
    mq = make_map(TractSpec(family="model", q=2.0))
    p = 1.2
    L = AnalyticGoodSet(min_x=mq.asympt.good_min_x(p), p=p)
    params = OffspringParams(delta=0.05, p=p, mode="scaled",
                             size_scale=0.02)
    build = build_levels(mq, None, L, Square(48 + 0j, 16.0), params, 2)
    meas = frostman_measure(build)
    target = 1.0 + 1.0 / (1.0 + p)
    est = bracket_dimension(build, meas, target=target, mode="scaled")
    assert abs(est.lower.t - target) <= 0.15
    assert abs(est.upper.s - target) <= 0.15
    assert est.lower.t <= est.upper.s


def test_estimate_dict_shape(exp_estimate):
    d = exp_estimate.to_dict()
    assert set(d) >= {"mode", "target", "lower", "upper", "consistent"}
    assert set(d["lower"]) >= {"t", "c", "r_tilde"}
    assert "s" in d["upper"]
    assert d["consistent"] is True


def test_synthetic_rejects_bad_args():
    with pytest.raises(ValueError):
        make_synthetic_tree(4, 1.5, 2)
    with pytest.raises(ValueError):
        make_synthetic_tree(0, 0.5, 2)
