"""Dimension bracketing on a built level tree.

Lower bound: the mass-distribution principle.  For sampled deepest
cells z, the ball mass mu(B(z, r)) is evaluated across the resolved
range [d_nmax(z), d_1(z)]: inside the window [d_{n+1}, d_n) only cells
of generation n+1 inside Q_n(z) can meet the ball (siblings further up
are separated by at least a diameter), and they sit on an anisotropic
grid whose two spacings (consecutive-child gaps along the abscissa,
2 pi/|(F^n)'| between translate rows) drive a two-regime count exactly
like the two cases of the ball-mass estimate.  The headline exponent is
the least full-range mass-scaling secant over the sampled chains: the
slope of the lower envelope of log mu against log r across the resolved
range.  Per-window chords and a pooled least-squares slope over the
sampled cloud are reported alongside.

Upper bound: per-parent cover sums.  For s in a grid, the ratio
sum (diam child)^s / (diam parent)^s over one parent contracts exactly
when s exceeds log(child count)/log(diameter shrink); the estimate is
the smallest grid s for which every deepest-level parent contracts.

Synthetic self-similar trees (N children of relative size rho on a
grid) have known dimension log N / log(1/rho) and calibrate both
estimators end to end.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .levels import Cell, Expansion, LevelBuild, sibling_log_mass
from .xreal import Xf, xf, xsum

__all__ = [
    "DimensionEstimate",
    "InsufficientDataError",
    "mu_ball_log",
    "dimension_lower",
    "dimension_upper",
    "bracket_dimension",
    "make_synthetic_tree",
]

LOG_2PI = math.log(2.0 * math.pi)


class InsufficientDataError(RuntimeError):
    """Fewer built levels than the estimator needs."""


def _clamp_log_count(raw, log_total):
    """Clamp a log-count between log 1 = 0 and the log of the total."""
    zero = xf(0.0)
    if raw < zero:
        return zero
    if raw > log_total:
        return log_total
    return raw


def mu_ball_log(build, leaf, log_r, window_n):
    """log mu(B(z, r)) for z tracked by `leaf`, r inside window n.

    Counts generation-(window_n + 1) cells meeting the ball around the
    ancestor of `leaf` at that generation.  Complete expansions count by
    enumeration over absolute positions; aggregate ones use the grid
    count with the recorded gaps, all in log space.  The result caps at
    the mass of Q_{window_n}(z).
    """
    anc = build.ancestor(leaf, window_n + 1)
    parent = build.cells[anc.parent_id]
    exp = build.expansions[parent.cell_id]
    kids = build.children[parent.cell_id]
    cap = parent.log_mass
    if exp.complete and all(k.abs_center is not None for k in kids):
        z = anc.abs_center
        rr = float(log_r.exp())
        masses = []
        for k in kids:
            reach = rr + 0.5 * float(k.log_diam_hi.exp())
            if abs(k.abs_center - z) <= reach:
                masses.append(k.log_mass.exp())
        if not masses:
            masses = [anc.log_mass.exp()]
        tot = xsum(masses).log()
        return tot if tot < cap else cap
    # analytic grid count around the tracked chain (log space): the ball
    # spans 2r/gap children along the abscissa and 2r/(2 pi / |(F^n)'|)
    # translate rows, each clamped to the recorded totals
    log_gap_re = exp.log_gap_within - parent.log_deriv
    log_gap_im = xf(LOG_2PI) - parent.log_deriv
    c_re = _clamp_log_count(log_r + math.log(2.0) - log_gap_re,
                            exp.log_n_re)
    c_im = _clamp_log_count(log_r + math.log(2.0) - log_gap_im,
                            exp.log_translates)
    log_mu = sibling_log_mass(build, anc) + c_re + c_im
    return log_mu if log_mu < cap else cap


@dataclass
class LowerEstimate:
    t: float
    log_c: Xf
    r_tilde: Xf
    window_chords: list
    lsq_slope: float
    n_points: int


@dataclass
class UpperEstimate:
    s: float
    s_exact: float
    level: int
    per_parent: list


def _exp_text(v):
    try:
        return v.exp().text()
    except OverflowError:
        return f"exp({v.text()})"


@dataclass
class DimensionEstimate:
    lower: LowerEstimate
    upper: UpperEstimate
    target: float
    mode: str
    slack: float = 0.15

    @property
    def consistent(self):
        return self.lower.t <= self.upper.s + self.slack

    def to_dict(self):
        return {
            "mode": self.mode,
            "target": self.target,
            "lower": {
                "t": self.lower.t,
                "c": _exp_text(self.lower.log_c),
                "r_tilde": _exp_text(self.lower.r_tilde),
                "window_chords": self.lower.window_chords,
                "lsq_slope": self.lower.lsq_slope,
                "n_points": self.lower.n_points,
            },
            "upper": {
                "s": self.upper.s,
                "s_exact": self.upper.s_exact,
                "level": self.upper.level,
            },
            "consistent": self.consistent,
        }


def _pick_leaves(build, samples, rng):
    leaves = build.leaves()
    if len(leaves) <= samples:
        return list(leaves)
    idx = rng.choice(len(leaves), size=samples, replace=False)
    return [leaves[i] for i in sorted(idx)]


def dimension_lower(build, measure, samples=8, radii_per_window=10,
                    seed=0):
    """Mass-distribution exponent from sampled deepest chains.

    Needs at least two built generations below the root.  Returns a
    LowerEstimate whose `t` is the least full-range secant of ancestor
    mass against ancestor diameter over the sampled chains; `log_c`
    makes mu(B(z,r)) <= exp(log_c) * r^t hold on every sampled point and
    `r_tilde` is the largest radius the fit covers.
    """
    del measure  # masses sit on the cells once assigned
    if build.n_levels < 3:
        raise InsufficientDataError(
            f"need >= 2 generations below the root, have "
            f"{build.n_levels - 1}")
    rng = np.random.default_rng(seed)
    leaves = _pick_leaves(build, samples, rng)
    n_deep = build.n_levels - 1

    secants = []
    chords = {}
    pts_u, pts_v = [], []
    points = []
    for leaf in leaves:
        d_of = {j: build.ancestor(leaf, j).log_diam
                for j in range(1, n_deep + 1)}
        m_of = {j: build.ancestor(leaf, j).log_mass
                for j in range(1, n_deep + 1)}
        span = d_of[1] - d_of[n_deep]
        if not span > xf(0.0):
            continue
        secants.append(float((m_of[1] - m_of[n_deep]) / span))
        for j in range(1, n_deep):
            wspan = d_of[j] - d_of[j + 1]
            if wspan > xf(0.0):
                chords.setdefault(j, []).append(
                    float((m_of[j] - m_of[j + 1]) / wspan))
            for theta in np.linspace(0.0, 1.0, radii_per_window,
                                     endpoint=False):
                log_r = d_of[j + 1] + wspan * float(theta)
                log_mu = mu_ball_log(build, leaf, log_r, j)
                points.append((log_r, log_mu))
                pts_u.append(float((log_r - d_of[n_deep]) / span))
                pts_v.append(float((log_mu - m_of[n_deep]) / span))
    if not secants:
        raise InsufficientDataError("no usable chains sampled")

    t = min(secants)
    u = np.asarray(pts_u)
    v = np.asarray(pts_v)
    lsq = float(np.polyfit(u, v, 1)[0]) if len(u) >= 2 else t
    # constant making mu <= c r^t on every sampled point
    log_c = None
    for log_r, log_mu in points:
        cand = log_mu - log_r * t
        if log_c is None or cand > log_c:
            log_c = cand
    if log_c is None:
        log_c = xf(0.0)
    r_tilde = max(build.ancestor(l, 1).log_diam for l in leaves)
    chord_summary = [(j, float(np.median(v)), len(v))
                     for j, v in sorted(chords.items())]
    return LowerEstimate(t=t, log_c=log_c, r_tilde=r_tilde,
                         window_chords=chord_summary, lsq_slope=lsq,
                         n_points=len(points))


def dimension_upper(build, s_grid=None, level=None):
    """Smallest grid exponent contracting every deep parent's cover sum.

    The per-parent ratio at exponent s is  N * (d_child/d_parent)^s  up
    to the recorded child-diameter spread; `s_exact` is the max over
    parents of log N / log(d_parent/d_child).
    """
    if build.n_levels < 3:
        raise InsufficientDataError(
            f"need >= 2 generations below the root, have "
            f"{build.n_levels - 1}")
    if s_grid is None:
        s_grid = np.arange(0.05, 2.55, 0.01)
    if level is None:
        level = build.n_levels - 2
    per_parent = []
    s_exact = 0.0
    for parent in build.levels[level]:
        exp = build.expansions.get(parent.cell_id)
        kids = build.children.get(parent.cell_id)
        if exp is None or not kids:
            continue
        child_diam = max(k.log_diam_hi for k in kids)
        shrink = parent.log_diam - child_diam
        if not shrink > xf(0.0):
            continue
        crit = float(exp.log_N / shrink)
        per_parent.append((parent.cell_id, crit))
        s_exact = max(s_exact, crit)
    if not per_parent:
        raise InsufficientDataError("no expandable parents at deep level")
    s_star = None
    for s in s_grid:
        if s > s_exact:
            s_star = float(s)
            break
    if s_star is None:
        s_star = float(s_grid[-1])
    return UpperEstimate(s=s_star, s_exact=s_exact, level=level,
                         per_parent=per_parent)


def bracket_dimension(build, measure, target, mode, samples=8,
                      radii_per_window=10, s_grid=None, seed=0,
                      slack=0.15):
    lower = dimension_lower(build, measure, samples=samples,
                            radii_per_window=radii_per_window, seed=seed)
    upper = dimension_upper(build, s_grid=s_grid)
    return DimensionEstimate(lower=lower, upper=upper, target=target,
                             mode=mode, slack=slack)


# ---------------------------------------------------------------------------
# synthetic calibration trees


def make_synthetic_tree(n_children, ratio, depth, side=1.0):
    """Self-similar tree of known dimension log N / log(1/ratio).

    Children sit on a ceil(sqrt(N))-square grid inside the parent, each
    of relative size `ratio`, equal masses.  Returns a LevelBuild whose
    expansions are complete, so the estimators run their enumeration
    paths end to end.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0,1)")
    if n_children < 1:
        raise ValueError("need at least one child")
    g = int(math.ceil(math.sqrt(n_children)))
    build = LevelBuild(tmap=None, params=None, q0=None)
    root = Cell(
        n=0, cell_id=build.new_id(), parent_id=None, k_translate=0,
        log_x=xf(0.0), log_r=xf(math.log(side)), im_z=0.0,
        log_deriv=xf(0.0),
        log_diam_lo=xf(math.log(side * math.sqrt(2.0))),
        log_diam_hi=xf(math.log(side * math.sqrt(2.0))),
        log_area_lo=xf(2.0 * math.log(side)),
        log_area_hi=xf(2.0 * math.log(side)),
        rel_re=0.0, rel_im=0.0,
        abs_center=0j,
        log_mass=xf(0.0),
    )
    build.add_cell(root)
    frontier = [(root, side)]
    for _ in range(depth):
        new_frontier = []
        for parent, p_side in frontier:
            c_side = ratio * p_side
            spacing = p_side / g
            cells = []
            count = 0
            for gy in range(g):
                for gx in range(g):
                    if count >= n_children:
                        break
                    count += 1
                    off = complex((gx + 0.5) / g - 0.5,
                                  (gy + 0.5) / g - 0.5) * p_side
                    pos = parent.abs_center + off
                    cells.append(Cell(
                        n=parent.n + 1, cell_id=build.new_id(),
                        parent_id=parent.cell_id, k_translate=gy,
                        log_x=xf(0.0), log_r=xf(math.log(c_side)),
                        im_z=0.0, log_deriv=xf(0.0),
                        log_diam_lo=xf(math.log(c_side * math.sqrt(2.0))),
                        log_diam_hi=xf(math.log(c_side * math.sqrt(2.0))),
                        log_area_lo=xf(2.0 * math.log(c_side)),
                        log_area_hi=xf(2.0 * math.log(c_side)),
                        rel_re=off.real / p_side, rel_im=off.imag / p_side,
                        abs_center=pos,
                        log_mass=parent.log_mass
                        - math.log(float(n_children)),
                    ))
            for c in cells:
                build.add_cell(c)
                new_frontier.append((c, c_side))
            build.expansions[parent.cell_id] = Expansion(
                parent_id=parent.cell_id, complete=True,
                log_N=xf(math.log(float(n_children))),
                log_n_re=xf(math.log(float(n_children))),
                log_translates=xf(0.0),
                log_area_total=xsum(
                    c.log_area_gm.exp() for c in cells).log(),
                log_gap_within=xf(math.log(spacing)),
                log_gap_cluster=xf(math.log(spacing)),
                log_child_inner_rel=xf(math.log(0.5 * c_side)),
                log_child_outer_rel=xf(
                    math.log(0.5 * c_side * math.sqrt(2.0))),
                k_step=1.0,
            )
        frontier = new_frontier
    return build
