"""Growth function h(x) = max_y Re F(x+iy), its derivative and bounds.

The maximiser is found by a coarse scan over one vertical period (or the
tract's y-extent) followed by golden-section refinement.  All values are
held as logs so the same code serves x far beyond the overflow point of
Re F.  At the maximising ordinate the derivative F' is real and equals
h'(x), which gives the derivative without differencing; a central
difference of log h cross-checks it.  Points where the one-sided
difference quotients of h disagree are flagged as non-differentiable and
excluded from good-set construction.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HPoint",
    "GrowthProfile",
    "GrowthBoundsReport",
    "compute_h",
    "compute_h_prime",
    "build_profile",
    "check_growth_bounds",
    "export_profile_csv",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
LOG_4PI = math.log(4.0 * math.pi)


@dataclass(frozen=True)
class HPoint:
    """One growth-function sample: log h(x) and the maximising ordinate."""

    x: float
    log_h: float
    y_max: float
    boundary: bool = False

    @property
    def h(self):
        return math.exp(self.log_h)


def _objective(tmap, x):
    if tmap.log_re is not None:
        return lambda y: tmap.log_re(x, y)
    def obj(y):
        v = tmap.eval(complex(x, y)).real
        return math.log(v) if v > 0 else -math.inf
    return obj


def compute_h(tmap, x, n_scan=256, y_tol=1e-10):
    """Maximise Re F(x + iy) over one period; returns an HPoint.

    For 2*pi*i-periodic maps the scan covers [-pi, pi); otherwise the
    same window is used and a maximum landing on its edge is flagged as
    a boundary hit.
    """
    if x <= tmap.domain_min_re:
        raise ValueError(f"x={x} at or below the domain floor "
                         f"{tmap.domain_min_re}")
    obj = _objective(tmap, x)
    ys = np.linspace(-math.pi, math.pi, n_scan, endpoint=False)
    vals = [obj(float(y)) for y in ys]
    i_best = int(np.argmax(vals))
    if vals[i_best] == -math.inf:
        raise ValueError(f"Re F(x+iy) <= 0 along the whole scan at x={x}")
    step = ys[1] - ys[0]
    lo, hi = ys[i_best] - step, ys[i_best] + step
    # golden-section refinement on [lo, hi]
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = obj(c), obj(d)
    while b - a > y_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = obj(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = obj(d)
    y_best = 0.5 * (a + b)
    # the objective is flat to rounding near the peak, but the maximiser
    # is the root of Im F' along the line; polish it when F' is usable
    y_best = _polish_maximiser(tmap, x, y_best, step)
    log_h = obj(y_best)
    boundary = (not tmap.periodic_2pi) and (
        abs(abs(ys[i_best]) - math.pi) < 2 * step)
    return HPoint(x=x, log_h=log_h, y_max=float(y_best), boundary=boundary)


def _polish_maximiser(tmap, x, y0, span):
    """Bisect Im F'(x+iy) = 0 around y0; falls back to y0 untouched."""
    if tmap.deriv is None or abs(x) > 600.0:
        return y0

    def s(y):
        d = tmap.deriv(complex(x, y))
        m = abs(d)
        return d.imag / m if m > 0 else 0.0

    try:
        ya, yb = y0 - span, y0 + span
        sa, sb = s(ya), s(yb)
    except (OverflowError, ValueError):
        return y0
    # increasing Re F means Im F' < 0 left of the peak, > 0 right of it
    if sa == 0.0:
        return ya
    if sb == 0.0:
        return yb
    if not (sa < 0.0 < sb):
        return y0
    for _ in range(100):
        ym = 0.5 * (ya + yb)
        sm = s(ym)
        if sm == 0.0:
            return ym
        if sm < 0.0:
            ya = ym
        else:
            yb = ym
        if yb - ya <= 1e-15 * max(1.0, abs(ym)):
            break
    return 0.5 * (ya + yb)


def compute_h_prime(tmap, x, hp=None, rel_step=1e-5, cross_tol=1e-3,
                    realness_tol=1e-8):
    """log h'(x) via the derivative at the maximiser, cross-checked.

    At the maximising point z_x the derivative F'(z_x) is real (its
    imaginary part is asserted below `realness_tol` relative).  When the
    map is out of plain evaluation range, the family's closed growth
    form supplies log h'.  A central difference of log h at step
    rel_step*x must agree with h'/h to `cross_tol` relative, otherwise
    the point is reported as non-differentiable.

    Returns (log_hp, flagged).
    """
    if hp is None:
        hp = compute_h(tmap, x)
    if tmap.closed_growth is not None and x > 350.0:
        log_hp = tmap.closed_growth(x)[2]
        return log_hp, False
    z = complex(x, hp.y_max)
    d = tmap.deriv(z)
    if abs(d.imag) > realness_tol * abs(d):
        raise ValueError(
            f"F'(z_x) not real at x={x}: relative imag part "
            f"{abs(d.imag) / abs(d):.3e}")
    log_hp = math.log(abs(d))
    # cross-check: d(log h)/dx == h'/h
    eps = rel_step * max(abs(x), 1.0)
    lh_m = compute_h(tmap, x - eps).log_h
    lh_p = compute_h(tmap, x + eps).log_h
    ratio_cd = (lh_p - lh_m) / (2 * eps)
    ratio = math.exp(log_hp - hp.log_h)
    flagged = abs(ratio_cd - ratio) > cross_tol * max(abs(ratio), 1e-300)
    # one-sided quotients: disagreement marks the countable bad set
    q_left = (hp.log_h - lh_m) / eps
    q_right = (lh_p - hp.log_h) / eps
    if abs(q_left - q_right) > cross_tol * max(abs(q_left), abs(q_right), 1e-300):
        flagged = True
    return log_hp, flagged


@dataclass
class GrowthProfile:
    """Tabulated growth data over an increasing grid (logs throughout)."""

    xs: np.ndarray
    log_h: np.ndarray
    y_max: np.ndarray
    log_hp: np.ndarray
    flagged: np.ndarray
    q: float
    epsilon: float
    p: float
    x_epsilon: float = None
    label: str = ""

    def ratio_log(self, i):
        """log(h'/h) at grid index i."""
        return self.log_hp[i] - self.log_h[i]

    def interp_log_h(self, x):
        return float(np.interp(x, self.xs, self.log_h))

    def interp_ratio_log(self, x):
        return float(np.interp(x, self.xs, self.log_hp - self.log_h))

    def monotone(self, tol=0.0):
        return bool(np.all(np.diff(self.log_h) > tol))

    def convex_log(self, rel_tol=1e-8):
        """Second differences of log h non-negative within tolerance."""
        d2 = np.diff(self.log_h, 2)
        scale = np.maximum(np.abs(self.log_h[1:-1]), 1.0)
        return bool(np.all(d2 >= -rel_tol * scale))


def build_profile(tmap, xs, q, epsilon, p, n_scan=256, use_closed="auto",
                  cross_check_every=0):
    """Tabulate (log h, y_max, log h') over the grid `xs`.

    With `use_closed="auto"` the family's closed growth form is used when
    present (the numeric maximiser is still exercised at a thinning of
    the grid when `cross_check_every` > 0, asserting agreement to 1e-9).
    """
    xs = np.asarray(xs, dtype=float)
    if np.any(np.diff(xs) <= 0):
        raise ValueError("grid must be strictly increasing")
    n = len(xs)
    log_h = np.empty(n)
    y_max = np.empty(n)
    log_hp = np.empty(n)
    flagged = np.zeros(n, dtype=bool)

    closed = tmap.closed_growth if use_closed in ("auto", True) else None
    if closed is not None:
        for i, x in enumerate(xs):
            log_h[i], y_max[i], log_hp[i] = closed(float(x))
        if cross_check_every:
            for i in range(0, n, cross_check_every):
                hp = compute_h(tmap, float(xs[i]), n_scan=n_scan)
                if abs(hp.log_h - log_h[i]) > 1e-9 * max(1.0, abs(log_h[i])):
                    raise AssertionError(
                        f"closed/numeric growth mismatch at x={xs[i]}")
    else:
        for i, x in enumerate(xs):
            hp = compute_h(tmap, float(x), n_scan=n_scan)
            log_h[i] = hp.log_h
            y_max[i] = hp.y_max
            lhp, flag = compute_h_prime(tmap, float(x), hp=hp)
            log_hp[i] = lhp
            flagged[i] = flag or hp.boundary
    return GrowthProfile(xs=xs, log_h=log_h, y_max=y_max, log_hp=log_hp,
                         flagged=flagged, q=q, epsilon=epsilon, p=p,
                         label=tmap.label)


@dataclass
class GrowthBoundsReport:
    """Per-grid-point satisfaction of the four growth inequalities."""

    xs: np.ndarray
    upper_ok: np.ndarray      # log h <= x**(q+eps)
    ratio_floor_ok: np.ndarray  # h'/h >= 1/(4 pi)
    h_floor_ok: np.ndarray    # log h >= x/13
    hp_floor_ok: np.ndarray   # log h' >= x/14
    x_epsilon: float          # smallest grid x beyond which all hold
    monotone: bool
    convex: bool

    @property
    def all_ok_beyond(self):
        return self.x_epsilon is not None and math.isfinite(self.x_epsilon)

    def counts(self):
        return {
            "upper": int(self.upper_ok.sum()),
            "ratio_floor": int(self.ratio_floor_ok.sum()),
            "h_floor": int(self.h_floor_ok.sum()),
            "hp_floor": int(self.hp_floor_ok.sum()),
            "n": len(self.xs),
        }


def check_growth_bounds(profile):
    """Evaluate the growth inequalities over the profile grid."""
    xs = profile.xs
    qe = profile.q + profile.epsilon
    upper_ok = profile.log_h <= xs ** qe + 1e-12 * np.abs(xs ** qe)
    ratio = profile.log_hp - profile.log_h
    ratio_floor_ok = ratio >= -LOG_4PI - 1e-12
    h_floor_ok = profile.log_h >= xs / 13.0 - 1e-12
    hp_floor_ok = profile.log_hp >= xs / 14.0 - 1e-12
    all_ok = upper_ok & ratio_floor_ok & h_floor_ok & hp_floor_ok
    x_eps = None
    # smallest grid point from which every later point passes
    ok_tail = np.logical_and.accumulate(all_ok[::-1])[::-1]
    idx = np.nonzero(ok_tail)[0]
    if len(idx):
        x_eps = float(xs[idx[0]])
    profile.x_epsilon = x_eps
    return GrowthBoundsReport(
        xs=xs, upper_ok=upper_ok, ratio_floor_ok=ratio_floor_ok,
        h_floor_ok=h_floor_ok, hp_floor_ok=hp_floor_ok,
        x_epsilon=x_eps if x_eps is not None else math.inf,
        monotone=profile.monotone(), convex=profile.convex_log(),
    )


def export_profile_csv(profile, path):
    """Write the profile as x, log_h, y_max, log_hp, flagged rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "log_h", "y_max", "log_hp", "flagged"])
        for i in range(len(profile.xs)):
            w.writerow([repr(float(profile.xs[i])),
                        repr(float(profile.log_h[i])),
                        repr(float(profile.y_max[i])),
                        repr(float(profile.log_hp[i])),
                        int(profile.flagged[i])])
