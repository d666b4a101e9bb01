"""Command-line front end: verification suites and experiment runs.

Subcommands
-----------
verify     run one of the named suites (koebe, vitali, density, growth,
           offspring, levels) and write a JSON report; exit 0 only when
           the suite holds.
dimension  build the nested families for the configured family, assign
           the mass tree, run both dimension estimators, and emit the
           bracket JSON plus a levels CSV.
boxcount   escape-time grid and box-count slope (heuristic trend), or
           the synthetic fixtures.
growth     export a growth profile CSV.
goodset    export the good-set intervals CSV.

Configuration is a flat ``key = value`` text file; command-line flags
win over file values.  Every report embeds the resolved configuration
and a mode label, outputs are named ``<command>-<seed>.*`` (or a
timestamp when no seed is given) and contain no wall-clock data, so a
fixed config and seed reproduce byte-identical CSV/JSON.  Each command
also renders PNG figures next to its delimited output.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 numeric degeneracy.
"""

import argparse
import cmath
import json
import math
import os
import sys
import time

import numpy as np

from . import figures
from .dimension import (InsufficientDataError, bracket_dimension,
                        make_synthetic_tree)
from .escape import box_count, boundary_mask, classify, fixture_mask, \
    write_pgm
from .geometry import Disk, Square, koebe_bounds, koebe_verify, \
    vitali_select
from .goodsets import (AnalyticGoodSet, PreconditionError,
                       density_lemma_check, export_goodset_csv, good_set,
                       is_admissible)
from .growth import (build_profile, check_growth_bounds,
                     export_profile_csv)
from .levels import (build_levels, density_delta, derivative_floor_check,
                     diameter_sandwich_check, distortion_check,
                     export_levels_csv, frostman_measure, nesting_check,
                     separation_report)
from .offspring import (DegenerateConstructionError, OffspringParams,
                        construct_offspring, find_c0, serialize_offspring,
                        verify_offspring)
from .tracts import ConfigError, TractSpec, make_map

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3

DEFAULTS = {
    "family": "exponential",
    "lam_re": 1.0, "lam_im": 0.0,
    "q": 1.0, "epsilon": 0.1, "p": 0.25,
    "delta": 0.05, "mode": "scaled", "size_scale": 0.02,
    "tau_policy": "measured", "tau": None,
    "n_max": 3, "x0": 12.0, "r0": 4.0,
    "seed": None, "threads": 1, "out": ".",
    "grid_lo": 2.0, "grid_hi": 50.0, "grid_n": 2000,
    "window_lo": 2.0, "window_hi": 100.0, "grid_step": None,
    "resolution": 512, "iterations": 20, "threshold_log": 50.0,
    "re_min": -2.0, "re_max": 4.0, "im_min": -math.pi, "im_max": math.pi,
    "scales": None, "fixture": None,
    "samples": 8, "radii_per_window": 10,
    "s_lo": 0.05, "s_hi": 2.55, "s_step": 0.01,
    "figures": True,
    "corpus": "standard",
}

_FLOAT_KEYS = {"lam_re", "lam_im", "q", "epsilon", "p", "delta",
               "size_scale", "tau", "x0", "r0", "grid_lo", "grid_hi",
               "window_lo", "window_hi", "grid_step", "threshold_log",
               "re_min", "re_max", "im_min", "im_max", "s_lo", "s_hi",
               "s_step"}
_INT_KEYS = {"n_max", "seed", "threads", "grid_n", "resolution",
             "iterations", "samples", "radii_per_window"}
_BOOL_KEYS = {"figures"}


def parse_config_file(path):
    """Flat key = value lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in DEFAULTS:
                raise ConfigError(f"{path}:{ln}: unknown key {key!r}")
            out[key] = val
    return out


def _coerce(key, val):
    if val is None:
        return None
    try:
        if key in _FLOAT_KEYS:
            return float(val)
        if key in _INT_KEYS:
            return int(val)
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {val!r}") from e
    if key in _BOOL_KEYS:
        if isinstance(val, bool):
            return val
        return str(val).lower() in ("1", "true", "yes", "on")
    return val


def resolve_config(args):
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        for k, v in parse_config_file(args.config).items():
            cfg[k] = _coerce(k, v)
    for k in DEFAULTS:
        flag = getattr(args, k, None)
        if flag is not None:
            cfg[k] = _coerce(k, flag)
    return cfg


def _tag(cfg):
    if cfg["seed"] is not None:
        return str(cfg["seed"])
    return time.strftime("%Y%m%d-%H%M%S")


def _emit_json(cfg, name, payload, out_dir):
    payload = dict(payload)
    payload["config"] = {k: v for k, v in sorted(cfg.items())}
    payload["mode_label"] = (
        "literal" if cfg["mode"] == "literal"
        else f"scaled(size_scale={cfg['size_scale']})")
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def make_tract_map(cfg):
    lam = complex(cfg["lam_re"], cfg["lam_im"])
    if cfg["family"] in ("exponential", "exp"):
        return make_map(TractSpec(family="exponential", lam=lam))
    if cfg["family"] == "model":
        return make_map(TractSpec(family="model", q=cfg["q"]))
    raise ConfigError(f"unknown family {cfg['family']!r}")


def make_params(cfg):
    return OffspringParams(
        delta=cfg["delta"], p=cfg["p"], mode=cfg["mode"],
        size_scale=cfg["size_scale"], tau_policy=cfg["tau_policy"],
        tau=cfg["tau"])


def analytic_L(tmap, cfg):
    return AnalyticGoodSet(min_x=tmap.asympt.good_min_x(cfg["p"]),
                           p=cfg["p"])


# ---------------------------------------------------------------------------
# verify suites


def suite_koebe(cfg, rng):
    n_maps = 100
    failures = []
    worst = -math.inf
    for i in range(n_maps):
        kind = i % 3
        if kind == 0:
            a = complex(rng.uniform(5, 50), rng.uniform(-20, 20))
            r = 0.9 * abs(a)
            g, dg = cmath.log, (lambda z: 1.0 / z)
        elif kind == 1:
            big_r = rng.uniform(2.0, 100.0)
            a, r = 0j, big_r / 2.0
            g = (lambda w, R=big_r: w / (1.0 - w / R))
            dg = (lambda w, R=big_r: 1.0 / (1.0 - w / R) ** 2)
        else:
            a = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            r = rng.uniform(0.5, 0.95) * math.pi
            g, dg = cmath.exp, cmath.exp
        rho = rng.uniform(0.1, 0.45)
        import random as _random
        rep = koebe_verify(g, a, r, rho, n_samples=50, deriv=dg,
                           rng=_random.Random(int(rng.integers(1 << 30))))
        if not rep.applicable:
            failures.append((i, "inapplicable"))
        elif rep.violations:
            failures.append((i, rep.violations[:3]))
        worst = max(worst, rep.worst_slack)
    kb = koebe_bounds(1.0, 1.0, 0.5)
    exact = (kb.deriv_lo == 4.0 / 27.0 and kb.deriv_hi == 12.0)
    if not exact:
        failures.append(("factors", (kb.deriv_lo, kb.deriv_hi)))
    return {"suite": "koebe", "n_maps": n_maps, "worst_slack": worst,
            "half_rho_factors_exact": exact,
            "violations": failures}, not failures


def suite_vitali(cfg, rng):
    n_families = 1000
    bad = []
    for fam in range(n_families):
        n = int(rng.integers(5, 120))
        cx = rng.uniform(0, 10, n)
        cy = rng.uniform(0, 10, n)
        rr = np.exp(rng.normal(-1.5, 1.0, n)).clip(1e-3, 3.0)
        disks = [Disk(complex(cx[i], cy[i]), float(rr[i]))
                 for i in range(n)]
        kept = vitali_select(disks)
        kc = np.array([[cx[i], cy[i]] for i in kept])
        kr = rr[list(kept)]
        # pairwise disjoint
        if len(kept) > 1:
            dx = kc[:, None, :] - kc[None, :, :]
            dist = np.hypot(dx[..., 0], dx[..., 1])
            need = kr[:, None] + kr[None, :]
            np.fill_diagonal(dist, np.inf)
            if np.any(dist < need - 1e-12):
                bad.append((fam, "overlap"))
                continue
        # coverage by 4x inflation
        dall = np.hypot(cx[:, None] - kc[None, :, 0],
                        cy[:, None] - kc[None, :, 1])
        covered = (dall + rr[:, None] <= 4.0 * kr[None, :] + 1e-12).any(axis=1)
        if not covered.all():
            bad.append((fam, "coverage"))
    return {"suite": "vitali", "n_families": n_families,
            "violations": bad}, not bad


def _burst_alpha(c, period, width, rate, eps):
    """alpha = exp(piecewise-linear) with log-slope `rate` on bursts.

    Each period ends with one burst, so alpha trails beta = exp from the
    start and the accumulated log-slope never catches up with 1.
    """
    quiet = period - width

    def log_alpha(x):
        base, frac = divmod(max(x - c, 0.0), period)
        t = base * (rate * width + eps * quiet)
        t += eps * min(frac, quiet) + rate * max(frac - quiet, 0.0)
        return t  # alpha(c) = 1

    return lambda x: math.exp(log_alpha(x))


def suite_density(cfg, rng):
    if cfg["corpus"] == "alpha-over-beta":
        # deliberately broken pair: the precondition must trip
        density_lemma_check(lambda x: 2 * math.exp(x), math.exp, 2.0,
                            (1.0, 10.0), 0.1, beta_prime=math.exp,
                            beta_inverse=math.log)
        raise AssertionError("precondition failed to trip")
    step = 0.05
    results = []
    ok_all = True
    ks = [1.5, 2.0, 4.0]
    for i in range(50):
        K = ks[i % 3]
        kind = i % 4
        window = (2.0, 62.0)
        if kind == 0:
            gamma = rng.uniform(1.2, 1.8)
            # keep exp(x^gamma) inside double range on the window
            window = (2.0, min(60.0, 0.95 * 700.0 ** (1.0 / gamma)))
            beta = lambda x, g=gamma: math.exp(x ** g)
            bp = lambda x, g=gamma: g * x ** (g - 1) * math.exp(x ** g)
            binv = lambda t, g=gamma: math.log(t) ** (1.0 / g)
            alpha, ap = beta, bp
        elif kind == 1:
            beta, bp = math.exp, math.exp
            binv = math.log
            alpha, ap = (lambda x: x), (lambda x: 1.0)
        elif kind == 2:
            # log-slope bursts at 10x the allowed rate, ~1/20 duty: the
            # long-run drift stays well under beta's unit log-slope
            beta, bp = math.exp, math.exp
            binv = math.log
            period = rng.uniform(10.0, 14.0)
            width = rng.uniform(0.4, 0.7)
            alpha = _burst_alpha(window[0], period, width, 10.0, 1e-4)
            ap = None
        else:
            c0 = rng.uniform(0.3, 0.9)
            beta, bp = math.exp, math.exp
            binv = math.log
            alpha = lambda x, c=c0: math.exp(c * x - 1.0)
            ap = lambda x, c=c0: c * math.exp(c * x - 1.0)
        rep = density_lemma_check(alpha, beta, K, window, step,
                                  alpha_prime=ap, beta_prime=bp,
                                  beta_inverse=binv)
        results.append({"i": i, "K": K, "kind": kind,
                        "measured": rep.measured_lower_density,
                        "bound": rep.predicted_bound, "ok": rep.ok})
        ok_all &= rep.ok
    return {"suite": "density", "n_triples": 50,
            "results": results}, ok_all


def suite_growth(cfg, rng):
    del rng
    runs = []
    ok_all = True
    cases = [
        ("exponential", dict(lam=1.0), 1.0, (1.0, 50.0)),
        ("model", dict(q=1.5), 1.5, (2.0, 40.0)),
        ("model", dict(q=2.0), 2.0, (2.0, 26.0)),
    ]
    for fam, kw, q, (lo, hi) in cases:
        tmap = make_map(TractSpec(family=fam, **kw))
        xs = np.linspace(lo, hi, 10000)
        prof = build_profile(tmap, xs, q=q, epsilon=cfg["epsilon"],
                             p=cfg["p"], cross_check_every=500)
        rep = check_growth_bounds(prof)
        ok = (rep.all_ok_beyond and rep.monotone and rep.convex)
        ok_all &= ok
        runs.append({
            "family": tmap.label, "x_epsilon": rep.x_epsilon,
            "counts": rep.counts(), "monotone": rep.monotone,
            "convex": rep.convex, "ok": ok,
        })
    # negative control: ratio h'/h == 1/100 must trip the ratio floor
    broken = make_map(TractSpec(
        family="user",
        eval=lambda z: cmath.exp(z / 100.0),
        deriv=lambda z: cmath.exp(z / 100.0) / 100.0,
        label="broken-ratio"))
    xs = np.linspace(5.0, 50.0, 200)
    prof_b = build_profile(broken, xs, q=1.0, epsilon=0.1, p=cfg["p"])
    rep_b = check_growth_bounds(prof_b)
    control_ok = not rep_b.ratio_floor_ok.any()
    ok_all &= control_ok
    runs.append({"family": "broken-ratio",
                 "ratio_floor_failures_everywhere": bool(control_ok)})
    return {"suite": "growth", "runs": runs}, ok_all


def suite_offspring(cfg, rng):
    tmap = make_tract_map(cfg)
    params = make_params(cfg)
    L = analytic_L(tmap, cfg)
    entries = []
    ok_all = True
    xs = np.geomspace(10.0, 70.0, 20)
    for x in xs:
        r = float(min(0.45 * x, 4.0 + 0.2 * x))
        sq = Square(complex(float(x), 0.0), r)
        adm, reasons = is_admissible(sq, L, size_scale=params.scale)
        if not adm:
            entries.append({"x": float(x), "r": r, "skipped": reasons})
            ok_all = False
            continue
        off = construct_offspring(tmap, None, L, sq, params)
        rep = verify_offspring(tmap, off, params)
        count_ok = off.m > off.count_floor()
        entries.append({
            "x": float(x), "r": r, "m": off.m,
            "count_floor": off.count_floor(), "count_ok": count_ok,
            "k_measured": rep.k_measured, "tau_used": rep.tau_used,
            "ok": rep.ok, "violations": [list(v) for v in rep.violations],
        })
        ok_all &= rep.ok and count_ok
    # fault injection: a shifted centre must be caught
    sq = Square(complex(24.0, 0.0), 8.0)
    off = construct_offspring(tmap, None, L, sq, params)
    victim = off.children[len(off.children) // 2]
    bump = 10.0 * params.c2 / (24.0 ** params.p)
    victim.center = victim.center + bump
    rep_fault = verify_offspring(tmap, off, params)
    fault_caught = not rep_fault.ok
    ok_all &= fault_caught
    c0, scan = find_c0(tmap, L, params)
    return {"suite": "offspring", "entries": entries,
            "fault_injection_caught": fault_caught,
            "c0_empirical": c0,
            "c0_scan": [[float(a), bool(b), str(c)] for a, b, c in scan],
            }, ok_all


def suite_levels(cfg, rng):
    del rng
    tmap = make_tract_map(cfg)
    params = make_params(cfg)
    L = analytic_L(tmap, cfg)
    q0 = Square(complex(cfg["x0"], 0.0), cfg["r0"])
    build = build_levels(tmap, None, L, q0, params, cfg["n_max"])
    measure = frostman_measure(build)
    report = {"suite": "levels", "n_levels": build.n_levels,
              "cells_per_level": [len(l) for l in build.levels],
              "truncated": build.truncated,
              "mass_conservation_error": measure.conservation_error,
              "area_proxy_sensitivity": measure.sensitivity}
    ok = build.n_levels >= cfg["n_max"] + 1
    ok &= measure.conservation_error <= 1e-12
    checks = {"sandwich": 0, "nesting": 0, "deriv_floor": 0,
              "recursion": 0, "separation": 0, "density": 0}
    fails = []
    worst_k = 1.0
    for lvl in build.levels[1:]:
        for cell in lvl:
            sw = diameter_sandwich_check(build, cell)
            checks["sandwich"] += 1
            if not (sw["ok"] and sw["shrink_ok"]):
                fails.append(("sandwich", cell.cell_id))
            if not nesting_check(build, cell):
                fails.append(("nesting", cell.cell_id))
            checks["nesting"] += 1
            df = derivative_floor_check(build, cell)
            checks["deriv_floor"] += 1
            if not (df["chain_floor_ok"] and df.get("one_step_ok", True)):
                fails.append(("deriv_floor", cell.cell_id))
            checks["recursion"] += 1
            if not df.get("recursion_ok", True):
                fails.append(("recursion", cell.cell_id))
            worst_k = max(worst_k, distortion_check(build, cell))
    for n in range(build.n_levels - 1):
        for parent in build.levels[n]:
            if parent.cell_id not in build.expansions:
                continue
            checks["separation"] += 1
            srep = separation_report(build, parent)
            if not srep["ok"]:
                fails.append(("separation", parent.cell_id))
            checks["density"] += 1
            _, _, dok = density_delta(build, parent)
            if not dok:
                fails.append(("density", parent.cell_id))
    report["checks"] = checks
    report["failures"] = fails
    report["distortion_worst"] = worst_k
    ok &= not fails and worst_k < 1e4
    report["ok"] = bool(ok)
    return report, bool(ok)


SUITES = {
    "koebe": suite_koebe,
    "vitali": suite_vitali,
    "density": suite_density,
    "growth": suite_growth,
    "offspring": suite_offspring,
    "levels": suite_levels,
}


def cmd_verify(args):
    cfg = resolve_config(args)
    rng = np.random.default_rng(cfg["seed"] if cfg["seed"] is not None
                                else 20260809)
    os.makedirs(cfg["out"], exist_ok=True)
    payload, ok = SUITES[args.suite](cfg, rng)
    payload["ok"] = bool(ok)
    path = _emit_json(cfg, f"verify-{args.suite}-{_tag(cfg)}.json",
                      payload, cfg["out"])
    print(f"{'PASS' if ok else 'FAIL'} verify {args.suite} -> {path}")
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# experiment commands


def cmd_dimension(args):
    cfg = resolve_config(args)
    os.makedirs(cfg["out"], exist_ok=True)
    tmap = make_tract_map(cfg)
    params = make_params(cfg)
    L = analytic_L(tmap, cfg)
    q0 = Square(complex(cfg["x0"], 0.0), cfg["r0"])
    build = build_levels(tmap, None, L, q0, params, cfg["n_max"])
    measure = frostman_measure(build)
    target = 1.0 + 1.0 / (1.0 + cfg["p"])
    s_grid = np.arange(cfg["s_lo"], cfg["s_hi"], cfg["s_step"])
    est = bracket_dimension(
        build, measure, target=target,
        mode=cfg["mode"], samples=cfg["samples"],
        radii_per_window=cfg["radii_per_window"], s_grid=s_grid,
        seed=cfg["seed"] or 0)
    tag = _tag(cfg)
    csv_path = os.path.join(cfg["out"], f"dimension-{tag}.csv")
    export_levels_csv(build, measure, csv_path)
    payload = est.to_dict()
    payload["family"] = tmap.label
    payload["levels"] = {
        "n_levels": build.n_levels,
        "cells_per_level": [len(l) for l in build.levels],
        "mass_conservation_error": measure.conservation_error,
    }
    path = _emit_json(cfg, f"dimension-{tag}.json", payload, cfg["out"])
    if cfg["figures"]:
        figures.render_dimension(
            est, os.path.join(cfg["out"], f"dimension-{tag}.png"))
    print(f"dimension bracket [{est.lower.t:.4f}, {est.upper.s:.4f}] "
          f"target {target:.4f} -> {path}")
    return EXIT_OK


def cmd_boxcount(args):
    cfg = resolve_config(args)
    os.makedirs(cfg["out"], exist_ok=True)
    if cfg["scales"] is None:
        # fixtures scale cleanly everywhere; the escape interface is
        # pixel-starved below box side ~16 at desk resolutions, so the
        # map run defaults to the resolved window
        cfg["scales"] = ("4,8,16,32,64,128" if cfg["fixture"]
                         else "16,32,64,128,256,512")
    scales = [int(s) for s in str(cfg["scales"]).split(",") if s]
    if not scales:
        raise ConfigError("empty scales list")
    tag = _tag(cfg)
    if cfg["fixture"]:
        mask = fixture_mask(cfg["fixture"], n=cfg["resolution"])
        slope, counts = box_count(mask, scales)
        payload = {"fixture": cfg["fixture"], "slope": slope,
                   "scales": scales, "counts": counts,
                   "label": "heuristic finite-scale trend"}
        path = _emit_json(cfg, f"boxcount-{tag}.json", payload, cfg["out"])
        if cfg["figures"]:
            figures.render_boxcount(
                scales, counts, slope,
                os.path.join(cfg["out"], f"boxcount-{tag}.png"),
                label=cfg["fixture"])
        print(f"boxcount fixture {cfg['fixture']}: slope {slope:.4f} "
              f"-> {path}")
        return EXIT_OK
    lam = complex(cfg["lam_re"], cfg["lam_im"])
    grid = classify(lam,
                    window=(cfg["re_min"], cfg["re_max"],
                            cfg["im_min"], cfg["im_max"]),
                    resolution=cfg["resolution"],
                    n_iter=cfg["iterations"],
                    threshold_log=cfg["threshold_log"],
                    threads=cfg["threads"])
    mask = boundary_mask(grid.esc_step)
    slope, counts = box_count(mask, scales)
    pgm = os.path.join(cfg["out"], f"escape-{tag}.pgm")
    write_pgm(pgm, grid.esc_step, grid.n_iter)
    counts_csv = os.path.join(cfg["out"], f"boxcount-{tag}.csv")
    with open(counts_csv, "w") as fh:
        fh.write("scale,count\n")
        for s, c in zip(scales, counts):
            fh.write(f"{s},{c}\n")
    payload = {"lam": [lam.real, lam.imag], "slope": slope,
               "scales": scales, "counts": counts,
               "escaped_fraction": grid.escaped_fraction(),
               "label": "heuristic finite-scale trend, not a dimension"}
    path = _emit_json(cfg, f"boxcount-{tag}.json", payload, cfg["out"])
    if cfg["figures"]:
        figures.render_boxcount(
            scales, counts, slope,
            os.path.join(cfg["out"], f"boxcount-{tag}.png"))
        figures.render_escape(
            grid, os.path.join(cfg["out"], f"escape-{tag}.png"))
    print(f"boxcount slope {slope:.4f} (trend) -> {path}")
    return EXIT_OK


def cmd_growth(args):
    cfg = resolve_config(args)
    os.makedirs(cfg["out"], exist_ok=True)
    tmap = make_tract_map(cfg)
    xs = np.linspace(cfg["grid_lo"], cfg["grid_hi"], cfg["grid_n"])
    prof = build_profile(tmap, xs, q=cfg["q"], epsilon=cfg["epsilon"],
                         p=cfg["p"], cross_check_every=max(
                             1, cfg["grid_n"] // 20))
    rep = check_growth_bounds(prof)
    tag = _tag(cfg)
    csv_path = os.path.join(cfg["out"], f"growth-{tag}.csv")
    export_profile_csv(prof, csv_path)
    payload = {"family": tmap.label, "x_epsilon": rep.x_epsilon,
               "monotone": rep.monotone, "convex": rep.convex,
               "counts": rep.counts()}
    path = _emit_json(cfg, f"growth-{tag}.json", payload, cfg["out"])
    if cfg["figures"]:
        figures.render_growth(
            prof, rep, os.path.join(cfg["out"], f"growth-{tag}.png"))
    print(f"growth profile -> {csv_path} ({path})")
    return EXIT_OK


def cmd_goodset(args):
    cfg = resolve_config(args)
    os.makedirs(cfg["out"], exist_ok=True)
    tmap = make_tract_map(cfg)
    lo, hi = cfg["window_lo"], cfg["window_hi"]
    xs = np.linspace(lo, hi, max(cfg["grid_n"], 2))
    prof = build_profile(tmap, xs, q=cfg["q"], epsilon=cfg["epsilon"],
                         p=cfg["p"])
    step = cfg["grid_step"] or (hi - lo) / 1e4
    gs = good_set(prof, (lo, hi), grid_step=step)
    tag = _tag(cfg)
    csv_path = os.path.join(cfg["out"], f"goodset-{tag}.csv")
    export_goodset_csv(gs, csv_path)
    payload = {"family": tmap.label, "window": [lo, hi],
               "length": gs.L.length,
               "density": gs.density_in(lo, hi),
               "trailing_densities": gs.trailing_densities}
    path = _emit_json(cfg, f"goodset-{tag}.json", payload, cfg["out"])
    if cfg["figures"]:
        figures.render_goodset(
            gs, os.path.join(cfg["out"], f"goodset-{tag}.png"))
    print(f"good set -> {csv_path} ({path})")
    return EXIT_OK


def cmd_offspring_export(args):
    """Hidden helper: one certified step exported as JSON + figure."""
    cfg = resolve_config(args)
    os.makedirs(cfg["out"], exist_ok=True)
    tmap = make_tract_map(cfg)
    params = make_params(cfg)
    L = analytic_L(tmap, cfg)
    sq = Square(complex(cfg["x0"], 0.0), cfg["r0"])
    off = construct_offspring(tmap, None, L, sq, params)
    rep = verify_offspring(tmap, off, params)
    tag = _tag(cfg)
    path = os.path.join(cfg["out"], f"offspring-{tag}.json")
    serialize_offspring(off, rep, path)
    if cfg["figures"]:
        figures.render_offspring(
            off, rep, os.path.join(cfg["out"], f"offspring-{tag}.png"))
    print(f"offspring step m={off.m} ok={rep.ok} -> {path}")
    return EXIT_OK if rep.ok else EXIT_VERIFY


def build_parser():
    ap = argparse.ArgumentParser(
        prog="tractdim",
        description="verification suites and dimension experiments for "
                    "half-plane tract maps")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--mode", choices=["literal", "scaled"])
        p.add_argument("--p", dest="p", type=float)
        p.add_argument("--q", dest="q", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--tau-policy", dest="tau_policy",
                       choices=["measured", "literal"])
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--family")
        p.add_argument("--x0", type=float)
        p.add_argument("--r0", type=float)
        p.add_argument("--size-scale", dest="size_scale", type=float)
        p.add_argument("--no-figures", dest="figures",
                       action="store_false", default=None)

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite", choices=sorted(SUITES))
    add_common(pv)
    pv.add_argument("--corpus", choices=["standard", "alpha-over-beta"])
    pv.set_defaults(func=cmd_verify)

    pd = sub.add_parser("dimension", help="dimension bracketing run")
    add_common(pd)
    pd.add_argument("--samples", type=int)
    pd.add_argument("--radii-per-window", dest="radii_per_window",
                    type=int)
    pd.set_defaults(func=cmd_dimension)

    pb = sub.add_parser("boxcount", help="escape grid box-count trend")
    add_common(pb)
    pb.add_argument("--resolution", type=int)
    pb.add_argument("--iterations", type=int)
    pb.add_argument("--scales")
    pb.add_argument("--fixture",
                    choices=["plane", "line", "cantor-dust"])
    pb.set_defaults(func=cmd_boxcount)

    pg = sub.add_parser("growth", help="export a growth profile")
    add_common(pg)
    pg.add_argument("--grid-lo", dest="grid_lo", type=float)
    pg.add_argument("--grid-hi", dest="grid_hi", type=float)
    pg.add_argument("--grid-n", dest="grid_n", type=int)
    pg.set_defaults(func=cmd_growth)

    ps = sub.add_parser("goodset", help="export the good set")
    add_common(ps)
    ps.add_argument("--window-lo", dest="window_lo", type=float)
    ps.add_argument("--window-hi", dest="window_hi", type=float)
    ps.add_argument("--grid-step", dest="grid_step", type=float)
    ps.add_argument("--grid-n", dest="grid_n", type=int)
    ps.set_defaults(func=cmd_goodset)

    po = sub.add_parser("offspring", help="one certified offspring step")
    add_common(po)
    po.set_defaults(func=cmd_offspring_export)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, PreconditionError, FileNotFoundError,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateConstructionError, InsufficientDataError,
            OverflowError, ZeroDivisionError) as e:
        print(f"degenerate: {e}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
