"""Acceptance criteria, one test per criterion, at stated tolerances.

Each test prints a single PASS line on success (pytest -s shows them);
a failed assertion prints FAIL with the measured values.  Runtime limits
are asserted with the wall clock.
"""

import json
import math
import time

import numpy as np
import pytest

from tractdim.cli import (main, suite_density, suite_growth, suite_koebe,
                          suite_levels, suite_offspring, suite_vitali,
                          DEFAULTS)
from tractdim.dimension import bracket_dimension, make_synthetic_tree
from tractdim.escape import boundary_mask, box_count, classify, \
    fixture_mask
from tractdim.geometry import Square
from tractdim.goodsets import AnalyticGoodSet
from tractdim.levels import build_levels, frostman_measure
from tractdim.offspring import OffspringParams
from tractdim.tracts import TractSpec, make_map


def _cfg(**kw):
    cfg = dict(DEFAULTS)
    cfg.update(kw)
    return cfg


def _report(name, ok, detail, t0, limit):
    dt = time.monotonic() - t0
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail} [{dt:.1f}s]"
    print(line)
    assert ok, line
    assert dt < limit, f"{name} exceeded {limit}s ({dt:.1f}s)"


def test_criterion_1_koebe_suite():
    t0 = time.monotonic()
    payload, ok = suite_koebe(_cfg(), np.random.default_rng(1))
    ok = ok and payload["half_rho_factors_exact"] \
        and payload["worst_slack"] <= 1e-9
    _report("criterion 1 (koebe suite)", ok,
            f"100 maps, worst slack {payload['worst_slack']:.2e}, "
            f"half-rho factors exact={payload['half_rho_factors_exact']}",
            t0, 10.0)


def test_criterion_2_vitali_suite():
    t0 = time.monotonic()
    payload, ok = suite_vitali(_cfg(), np.random.default_rng(2))
    _report("criterion 2 (vitali suite)", ok,
            f"{payload['n_families']} families, "
            f"{len(payload['violations'])} violations", t0, 10.0)


def test_criterion_3_density_lemma():
    t0 = time.monotonic()
    payload, ok = suite_density(_cfg(), np.random.default_rng(3))
    worst = min(r["measured"] - (r["bound"] - 0.02)
                for r in payload["results"])
    _report("criterion 3 (density lemma)", ok,
            f"50 triples, worst margin {worst:.4f}", t0, 30.0)


def test_criterion_4_growth_bounds():
    t0 = time.monotonic()
    payload, ok = suite_growth(_cfg(), np.random.default_rng(4))
    xeps = [r.get("x_epsilon") for r in payload["runs"]
            if "x_epsilon" in r]
    _report("criterion 4 (growth bounds)", ok,
            f"exp and model q in {{1.5, 2}} on 1e4-point grids, "
            f"x_eps={xeps}", t0, 30.0)


def test_criterion_5_offspring_certification():
    t0 = time.monotonic()
    payload, ok = suite_offspring(_cfg(), np.random.default_rng(5))
    n_ok = sum(1 for e in payload["entries"] if e.get("ok"))
    ok = ok and n_ok == 20 and payload["fault_injection_caught"]
    _report("criterion 5 (offspring certification)", ok,
            f"{n_ok}/20 parents certified, fault injection "
            f"caught={payload['fault_injection_caught']}, "
            f"c0={payload['c0_empirical']}", t0, 120.0)


def test_criterion_6_level_lemma_suite():
    t0 = time.monotonic()
    payload, ok = suite_levels(_cfg(), None)
    ok = ok and payload["mass_conservation_error"] <= 1e-12 \
        and payload["distortion_worst"] < 1e4
    _report("criterion 6 (level/lemma suite)", ok,
            f"levels {payload['cells_per_level']}, mass err "
            f"{payload['mass_conservation_error']:.1e}, K "
            f"{payload['distortion_worst']:.3f}, checks "
            f"{payload['checks']}", t0, 300.0)


def test_criterion_7_dimension_bracketing():
    t0 = time.monotonic()
    details = []
    ok = True
    # (i) synthetic self-similar trees of known dimension
    for n, ratio, depth, d in ((4, 0.25, 5, 1.0), (8, 0.25, 4, 1.5),
                               (16, 0.25, 3, 2.0)):
        tree = make_synthetic_tree(n, ratio, depth)
        est = bracket_dimension(tree, frostman_measure(tree), target=d,
                                mode="synthetic")
        ok &= abs(est.lower.t - d) <= 0.05 and abs(est.upper.s - d) <= 0.05
        details.append(f"synthetic d={d}: [{est.lower.t:.3f},"
                       f"{est.upper.s:.3f}]")
    # (ii) exponential family, p = 0.25, target 1.8
    tmap = make_map(TractSpec(family="exponential"))
    L = AnalyticGoodSet(min_x=1.0, p=0.25)
    params = OffspringParams(delta=0.05, p=0.25, mode="scaled",
                             size_scale=0.02)
    build = build_levels(tmap, None, L, Square(12 + 0j, 4.0), params, 3)
    est = bracket_dimension(build, frostman_measure(build), target=1.8,
                            mode="scaled")
    ok &= abs(est.lower.t - 1.8) <= 0.15 and abs(est.upper.s - 1.8) <= 0.15
    ok &= est.lower.t <= est.upper.s
    details.append(f"exp p=0.25: [{est.lower.t:.4f},{est.upper.s:.4f}]")
    # (iii) model q = 2, p = 1.2, target ~1.4545
    mq = make_map(TractSpec(family="model", q=2.0))
    Lq = AnalyticGoodSet(min_x=mq.asympt.good_min_x(1.2), p=1.2)
    pq = OffspringParams(delta=0.05, p=1.2, mode="scaled",
                         size_scale=0.02)
    buildq = build_levels(mq, None, Lq, Square(48 + 0j, 16.0), pq, 2)
    tq = 1.0 + 1.0 / 2.2
    estq = bracket_dimension(buildq, frostman_measure(buildq), target=tq,
                             mode="scaled")
    ok &= abs(estq.lower.t - tq) <= 0.15 and abs(estq.upper.s - tq) <= 0.15
    ok &= estq.lower.t <= estq.upper.s
    details.append(f"model q=2 p=1.2: [{estq.lower.t:.4f},"
                   f"{estq.upper.s:.4f}] target {tq:.4f}")
    _report("criterion 7 (dimension bracketing)", ok,
            "; ".join(details), t0, 600.0)


def test_criterion_8_boxcount_fixtures():
    t0 = time.monotonic()
    scales = [4, 8, 16, 32, 64, 128]
    details = []
    ok = True
    for kind, d in (("plane", 2.0), ("line", 1.0),
                    ("cantor-dust", 1.2619)):
        slope, _ = box_count(fixture_mask(kind, 2048), scales)
        ok &= abs(slope - d) <= 0.1
        details.append(f"{kind}={slope:.4f}")
    grid = classify(1.0, window=(-2.0, 4.0, -math.pi, math.pi),
                    resolution=2048, n_iter=20, threshold_log=50.0)
    slope, _ = box_count(boundary_mask(grid.esc_step),
                         [16, 32, 64, 128, 256, 512])
    ok &= slope >= 1.7
    details.append(f"exponential lam=1 trend={slope:.4f} (heuristic)")
    _report("criterion 8 (box-count fixtures)", ok,
            ", ".join(details), t0, 300.0)


def test_criterion_9_determinism(tmp_path):
    t0 = time.monotonic()
    out = tmp_path / "det"
    assert main(["dimension", "--out", str(out), "--seed", "77",
                 "--no-figures"]) == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()
             if p.suffix in (".json", ".csv")}
    assert main(["dimension", "--out", str(out), "--seed", "77",
                 "--no-figures"]) == 0
    second = {p.name: p.read_bytes() for p in out.iterdir()
              if p.suffix in (".json", ".csv")}
    ok = first == second and len(first) >= 2
    _report("criterion 9 (determinism)", ok,
            f"{sorted(first)} byte-identical across reruns", t0, 120.0)
