import cmath
import math
import random

import pytest

from tractdim.tracts import (BranchAnchor, ConfigError, TractSpec,
                             inverse_branch, make_map, zip_rate)


def test_unknown_family():
    with pytest.raises(ConfigError):
        make_map(TractSpec(family="mystery"))
    with pytest.raises(ConfigError):
        make_map(TractSpec(family="exponential", lam=0.0))
    with pytest.raises(ConfigError):
        make_map(TractSpec(family="model", q=5.0))


def test_exponential_lam_one():
    m = make_map(TractSpec(family="exponential", lam=1.0))
    for z in (0.5 + 1j, 2.0 - 0.3j):
        assert m.eval(z) == pytest.approx(cmath.exp(z))
        assert m.deriv(z) == pytest.approx(cmath.exp(z))
    assert m.periodic_2pi


def test_exponential_lift_identity_random():
    # exp(F(z)) must equal lam * exp(exp(z)) wherever both sides are
    # representable
    rng = random.Random(11)
    for lam in (1.0, 0.5, 2.0 + 1.0j):
        m = make_map(TractSpec(family="exponential", lam=lam))
        for _ in range(100):
            z = complex(rng.uniform(0.2, 4.0), rng.uniform(-3.0, 3.0))
            lhs = cmath.exp(m.eval(z))
            rhs = lam * cmath.exp(cmath.exp(z))
            assert abs(lhs - rhs) <= 1e-9 * abs(rhs)


def test_periodicity_declared_and_true():
    for spec in (TractSpec(family="exponential", lam=0.7),
                 TractSpec(family="model", q=1.7)):
        m = make_map(spec)
        assert m.periodic_2pi
        rng = random.Random(5)
        for _ in range(50):
            z = complex(rng.uniform(1.0, 5.0), rng.uniform(-0.1, 0.1))
            w1, w2 = m.eval(z), m.eval(z + 2j * math.pi)
            assert abs(w1 - w2) <= 1e-10 * max(1.0, abs(w1))


def test_model_q1_reduces_to_exp():
    m = make_map(TractSpec(family="model", q=1.0))
    assert m.eval(2.0 + 0.2j) == pytest.approx(cmath.exp(2.0 + 0.2j))
    # target dimension for q = 1 is 1 + 1/q = 2
    assert 1.0 + 1.0 / m.params["q"] == 2.0


def test_model_tract_membership():
    m = make_map(TractSpec(family="model", q=2.0))
    assert m.contains(3.0 + 0.05j)
    assert not m.contains(3.0 + 1.0j)       # outside the thin tract
    assert m.contains(3.0 + 0.05j + 2j * math.pi)   # translated component


def test_inverse_branch_fixed_anchor():
    m = make_map(TractSpec(family="exponential"))
    anchor = BranchAnchor(math.e, 1.0)
    assert inverse_branch(m, math.e, anchor) == pytest.approx(1.0)


def test_inverse_branch_log_oracle():
    m = make_map(TractSpec(family="exponential"))
    anchor = BranchAnchor(math.e, 1.0)
    v = inverse_branch(m, 2 * math.e, anchor)
    assert v == pytest.approx(cmath.log(2 * math.e), abs=1e-9)


def test_inverse_branch_sheet_tracking():
    m = make_map(TractSpec(family="exponential"))
    # principal sheet toward the imaginary axis
    v = inverse_branch(m, math.e * 1j, BranchAnchor(math.e, 1.0))
    assert v == pytest.approx(cmath.log(math.e * 1j), abs=1e-9)
    # anchor one sheet up: the continuation keeps that sheet
    up = BranchAnchor(math.e, 1.0 + 2j * math.pi)
    v2 = inverse_branch(m, 2 * math.e, up)
    assert v2 == pytest.approx(cmath.log(2 * math.e) + 2j * math.pi,
                               abs=1e-9)


def test_inverse_branch_roundtrip_random():
    m = make_map(TractSpec(family="exponential", lam=0.5))
    rng = random.Random(3)
    anchor = BranchAnchor(m.eval(2.0), 2.0)
    for _ in range(50):
        target = complex(rng.uniform(2.0, 40.0), rng.uniform(-10.0, 10.0))
        v = inverse_branch(m, target, anchor)
        assert abs(m.eval(v) - target) <= 1e-9 * (1 + abs(target))


def test_model_inverse_exact_agrees_with_newton():
    m = make_map(TractSpec(family="model", q=2.0))
    anchor = BranchAnchor(m.eval(3.0), 3.0)
    target = m.eval(3.2)
    v = inverse_branch(m, target, anchor)
    assert v == pytest.approx(m.inverse_exact(target, 0), abs=1e-8)


def test_zip_rate_exp_increasing():
    m = make_map(TractSpec(family="exponential"))
    res = zip_rate(m, 3.0, 4)
    assert len(res.values) == 4
    assert res.increasing()
    assert not res.exited


def test_zip_rate_log_scale_matches_plain():
    # on a small start the first plain steps agree with the log-scale
    # continuation of each step's log Re
    m = make_map(TractSpec(family="exponential"))
    res = zip_rate(m, 2.0, 3)
    v1 = float(res.log_re_orbit[0])
    assert v1 == pytest.approx(2.0)          # log Re e^2 = 2
    v2 = float(res.log_re_orbit[1])
    assert v2 == pytest.approx(math.exp(2.0))


def test_zip_rate_identity_like_not_zipping():
    m = make_map(TractSpec(
        family="user", eval=lambda z: z, deriv=lambda z: 1.0 + 0j,
        label="identity"))
    res = zip_rate(m, 5.0, 4)
    vals = [float(v) for v in res.values]
    assert vals[0] >= vals[1] >= vals[2] >= vals[3]


def test_zip_rate_exit_flag():
    m = make_map(TractSpec(family="exponential"))
    res = zip_rate(m, complex(0.1, math.pi), 3)
    assert res.exited and res.exit_step == 1
    assert res.values == []
