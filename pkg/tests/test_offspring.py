import json
import math

import pytest

from tractdim.geometry import Square
from tractdim.goodsets import AnalyticGoodSet, PreconditionError
from tractdim.offspring import (DegenerateConstructionError,
                                OffspringParams, construct_offspring,
                                find_c0, offspring_to_json,
                                verify_offspring)
from tractdim.tracts import TractSpec, make_map

EXP = make_map(TractSpec(family="exponential"))
FULL = AnalyticGoodSet(min_x=1.0, p=0.25)


def scaled_params(**kw):
    base = dict(delta=0.05, p=0.25, mode="scaled", size_scale=0.02)
    base.update(kw)
    return OffspringParams(**base)


def test_params_constants():
    params = scaled_params()
    assert params.c1 == pytest.approx(0.05 ** 2 / 324.0)
    assert params.c2 == pytest.approx(324.0 * 0.05 ** 2)
    assert params.c3 == pytest.approx(0.05 / 240.0)
    with pytest.raises(ValueError):
        OffspringParams(delta=0.5)


def test_construct_forward_oracle():
    # every child centre must map onto its claimed image-square centre,
    # checked by direct evaluation, nothing reused from construction
    params = scaled_params()
    off = construct_offspring(EXP, None, FULL, Square(12 + 0j, 4.0), params)
    assert off.m >= 1
    assert off.m > off.count_floor()
    for ch in off.children:
        img = EXP.eval(ch.center)
        assert abs(img - ch.image_square.center) \
            <= 1e-9 * (1 + abs(ch.image_square.center))
        assert ch.inner_radius < ch.outer_radius


def test_construct_not_admissible_raises():
    params = scaled_params()
    with pytest.raises(PreconditionError):
        construct_offspring(EXP, None, FULL, Square(12 + 0j, 1.0), params)


def test_spacing_by_direct_subtraction():
    params = scaled_params()
    off = construct_offspring(EXP, None, FULL, Square(40 + 0j, 18.0), params)
    assert off.m >= 2
    rep = verify_offspring(EXP, off, params)
    assert rep.ok
    floor = rep.tau_used * max(c.outer_radius for c in off.children)
    res = [c.center.real for c in off.children]
    for a, b in zip(res, res[1:]):
        assert b - a > floor


def test_cluster_separation_floor():
    params = scaled_params()
    off = construct_offspring(EXP, None, FULL, Square(40 + 0j, 18.0), params)
    by_cluster = {}
    for c in off.children:
        by_cluster.setdefault(c.cluster, []).append(c)
    assert len(by_cluster) >= 2
    floor = (0.8 ** params.p) / 40.0 ** params.p
    res = sorted((c.cluster, c.center.real) for c in off.children)
    for (ka, ra), (kb, rb) in zip(res, res[1:]):
        if ka != kb:
            assert rb - ra >= floor * (1 - 1e-9)


def test_verify_catches_perturbed_center():
    params = scaled_params()
    off = construct_offspring(EXP, None, FULL, Square(24 + 0j, 8.0), params)
    assert verify_offspring(EXP, off, params).ok
    victim = off.children[0]
    victim.center = victim.center + 10.0 * params.c2 / 24.0 ** params.p
    rep = verify_offspring(EXP, off, params)
    assert not rep.ok
    assert any(tag in ("center_image", "inner_containment", "spacing")
               for tag, _ in rep.violations)


def test_verify_vacuous_when_empty():
    params = scaled_params()
    off = construct_offspring(EXP, None, FULL, Square(12 + 0j, 4.0), params)
    off.children.clear()
    rep = verify_offspring(EXP, off, params)
    assert rep.degenerate and not rep.violations


def test_degenerate_when_children_fail_size_floor():
    # a large size floor leaves no admissible child square
    params = scaled_params(size_scale=0.02)
    grid_l = AnalyticGoodSet(min_x=1.0, p=0.25)
    big_floor = scaled_params(size_scale=30.0)  # floor 3000 > child size
    with pytest.raises((DegenerateConstructionError, PreconditionError)):
        construct_offspring(EXP, None, grid_l, Square(12 + 0j, 4.0),
                            big_floor)
    del params


def test_image_squares_admissible_scaled():
    params = scaled_params()
    off = construct_offspring(EXP, None, FULL, Square(12 + 0j, 4.0), params)
    from tractdim.goodsets import is_admissible
    for ch in off.children:
        ok, reasons = is_admissible(ch.image_square, FULL,
                                    size_scale=params.scale)
        assert ok, reasons


def test_sandwich_against_formula_constants():
    params = scaled_params()
    off = construct_offspring(EXP, None, FULL, Square(12 + 0j, 4.0), params)
    xep = 12.0 ** params.p
    for ch in off.children:
        assert params.c1 / xep <= ch.inner_radius
        assert ch.outer_radius <= params.c2 / xep


def test_literal_mode_spacing_policy_fails_at_desk_scale():
    # the formula constant c2 = 324 delta^2 exceeds delta for delta =
    # 0.05, so the literal spacing floor is unreachable: the run reports
    # violations rather than silently passing
    params = scaled_params(tau_policy="literal", tau=3.0)
    off = construct_offspring(EXP, None, FULL, Square(40 + 0j, 18.0), params)
    rep = verify_offspring(EXP, off, params)
    assert any(tag in ("spacing", "strip") for tag, _ in rep.violations)


def test_offspring_json_roundtrip():
    params = scaled_params()
    off = construct_offspring(EXP, None, FULL, Square(12 + 0j, 4.0), params)
    rep = verify_offspring(EXP, off, params)
    d = offspring_to_json(off, rep)
    blob = json.loads(json.dumps(d))
    assert blob["m"] == off.m
    assert blob["verification"]["ok"]
    assert blob["children"][0]["u"] == off.children[0].u


def test_find_c0_exp():
    params = scaled_params()
    c0, log = find_c0(EXP, FULL, params, x_lo=6.0, x_hi=40.0, n=10)
    assert c0 is not None and c0 <= 40.0
    assert any(ok for _, ok, _ in log)


def test_twenty_parents_certify():
    import numpy as np
    params = scaled_params()
    for x in np.geomspace(10.0, 70.0, 20):
        r = float(min(0.45 * x, 4.0 + 0.2 * x))
        off = construct_offspring(EXP, None, FULL,
                                  Square(complex(float(x), 0.0), r), params)
        rep = verify_offspring(EXP, off, params)
        assert rep.ok, (x, rep.violations)
        assert off.m > off.count_floor()
