"""Good sets of abscissas and the real density lemma.

The good set L collects the x where the growth ratio h'(x)/h(x) stays
below x^p; squares are admissible when their base interval meets L in
measure at least 7/4 of the half-side and the half-side sits between
the size floor and half the centre abscissa.  The density lemma bounds
from below the density of {x : a'(x) <= K b'(b^{-1}(a(x)))} for an
absolutely continuous a dominated by an increasing differentiable b.

Grid-backed good sets are used on windows where the profile was
tabulated.  For the built-in families the ratio inequality has a closed
form (a single threshold abscissa), which the analytic variant encodes;
image squares of deep cells live far beyond any tabulated window, so
admissibility there uses the analytic form.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import IntervalSet

__all__ = [
    "DensityReport",
    "GoodSet",
    "AnalyticGoodSet",
    "PreconditionError",
    "density_lemma_check",
    "good_set",
    "is_admissible",
    "export_goodset_csv",
]


class PreconditionError(ValueError):
    """An operation's stated precondition fails on the inputs."""


@dataclass
class DensityReport:
    K: float
    window: tuple
    good_set: IntervalSet
    measured_lower_density: float
    predicted_bound: float
    n_cells: int
    n_good: int

    @property
    def ok(self):
        return self.measured_lower_density >= self.predicted_bound - 0.02


def _invert_monotone(f, t, lo, hi, tol=1e-10):
    """Solve f(x) = t for increasing f, expanding [lo, hi] as needed."""
    span = max(1.0, hi - lo)
    while f(hi) < t:
        hi += span
        span *= 2.0
        if span > 1e15:
            raise ValueError("inversion bracket ran away upward")
    span = max(1.0, hi - lo)
    while f(lo) > t:
        lo -= span
        span *= 2.0
        if span > 1e15:
            raise ValueError("inversion bracket ran away downward")
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if f(mid) < t:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def density_lemma_check(alpha, beta, K, window, grid_step,
                        alpha_prime=None, beta_prime=None,
                        beta_inverse=None, density_tolerance=0.02):
    """Classify grid cells by a'(x) <= K psi(a(x)) and measure density.

    `alpha` and `beta` are increasing callables on the window with
    alpha <= beta; psi(t) = beta'(beta^{-1}(t)) is computed by monotone
    bisection unless a closed-form `beta_inverse` is supplied.
    Derivatives default to central differences.  Returns a DensityReport
    whose measured lower density (infimum over trailing windows anchored
    at the left edge) is compared against (K-1)/K.
    """
    c, y_hi = window
    if not K > 1:
        raise PreconditionError(f"K must exceed 1, got {K}")
    if grid_step <= 0 or y_hi <= c:
        raise PreconditionError("empty window or bad grid step")
    xs = np.arange(c, y_hi + 0.5 * grid_step, grid_step)
    a_vals = np.array([alpha(float(x)) for x in xs])
    b_vals = np.array([beta(float(x)) for x in xs])
    if np.any(a_vals > b_vals * (1 + 1e-12) + 1e-12):
        raise PreconditionError("alpha exceeds beta on the window")
    if alpha_prime is None:
        h = 0.5 * grid_step
        alpha_prime = lambda x: (alpha(x + h) - alpha(x - h)) / (2 * h)
    if beta_prime is None:
        hb = 0.5 * grid_step
        beta_prime = lambda x: (beta(x + hb) - beta(x - hb)) / (2 * hb)

    good_cells = []
    n_good = 0
    n_cells = len(xs) - 1
    good_mask = np.zeros(n_cells, dtype=bool)
    for i in range(n_cells):
        xm = 0.5 * (xs[i] + xs[i + 1])
        t = alpha(float(xm))
        if beta_inverse is not None:
            x_inv = beta_inverse(t)
        else:
            x_inv = _invert_monotone(beta, t, c - 1.0, y_hi + 1.0)
        psi = beta_prime(x_inv)
        if psi <= 0:
            raise PreconditionError("beta' must stay positive")
        if alpha_prime(float(xm)) <= K * psi * (1 + 1e-9):
            good_mask[i] = True
            n_good += 1
            good_cells.append((float(xs[i]), float(xs[i + 1])))
    good = IntervalSet(good_cells)

    # infimum of the good fraction over [c, y] for grid right endpoints y
    cum_good = np.concatenate([[0.0], np.cumsum(
        np.where(good_mask, np.diff(xs), 0.0))])
    spans = xs - c
    with np.errstate(invalid="ignore", divide="ignore"):
        fracs = cum_good[1:] / spans[1:]
    measured = float(np.min(fracs)) if len(fracs) else 0.0
    return DensityReport(
        K=K, window=window, good_set=good,
        measured_lower_density=measured,
        predicted_bound=(K - 1.0) / K,
        n_cells=n_cells, n_good=n_good,
    )


@dataclass
class GoodSet:
    """Grid-resolution good set over a window, as an interval union."""

    L: IntervalSet
    p: float
    window: tuple
    trailing_densities: list = field(default_factory=list)

    def contains(self, x):
        return self.L.contains(x)

    def length_in(self, lo, hi):
        return self.L.length_in(lo, hi)

    def density_in(self, a, b):
        if b <= a:
            return 0.0
        return self.length_in(a, b) / (b - a)


@dataclass
class AnalyticGoodSet:
    """Closed-form good set [min_x, inf): ratio inequality is a threshold.

    Built-in families have monotone h'/h versus x^p comparisons, so the
    good set is everything past one abscissa; this form stays valid at
    image scales far beyond any tabulated window.
    """

    min_x: float
    p: float

    @property
    def window(self):
        return (self.min_x, math.inf)

    def contains(self, x):
        return x >= self.min_x

    def length_in(self, lo, hi):
        if hi <= lo:
            return 0.0
        return max(0.0, hi - max(lo, self.min_x))

    def density_in(self, a, b):
        if b <= a:
            return 0.0
        return self.length_in(a, b) / (b - a)


def good_set(profile, window, grid_step=None):
    """Grid good set {x : h'(x)/h(x) <= x^p} over `window` from a profile.

    Cells whose sample point violates the ratio test or is flagged
    non-differentiable are excluded.  Trailing densities over [a, hi]
    for a sweep of left endpoints are recorded (density-one behaviour
    shows as values near 1).
    """
    lo, hi = window
    if lo < profile.xs[0] - 1e-12 or hi > profile.xs[-1] + 1e-12:
        raise PreconditionError(
            f"window {window} outside profile grid "
            f"[{profile.xs[0]}, {profile.xs[-1]}]")
    if grid_step is None:
        grid_step = (hi - lo) / 1e4
    xs = np.arange(lo, hi + 0.5 * grid_step, grid_step)
    cells = []
    p = profile.p
    ratio = np.interp(xs, profile.xs, profile.log_hp - profile.log_h)
    flagged = np.interp(xs, profile.xs, profile.flagged.astype(float)) > 0.0
    for i in range(len(xs) - 1):
        xm = 0.5 * (xs[i] + xs[i + 1])
        rm = 0.5 * (ratio[i] + ratio[i + 1])
        if flagged[i] or flagged[i + 1]:
            continue
        if rm <= p * math.log(xm) * (1 + 1e-9) + 1e-12:
            cells.append((float(xs[i]), float(xs[i + 1])))
    L = IntervalSet(cells)
    gs = GoodSet(L=L, p=p, window=(lo, hi))
    for a in np.linspace(lo, lo + 0.75 * (hi - lo), 4):
        gs.trailing_densities.append((float(a), gs.density_in(float(a), hi)))
    return gs


def is_admissible(square, L, size_scale=1.0):
    """Admissibility of a square against a good set, with reasons.

    Requires size_scale*100 < r < Re(centre)/2 and that the base
    interval meets L in measure at least (7/4) r.  `size_scale` is 1 in
    literal mode; scaled mode shrinks the absolute size floor only.
    """
    r = square.half_side
    x = square.center.real
    reasons = []
    if not r > 100.0 * size_scale:
        reasons.append(f"r <= {100.0 * size_scale:g} (size floor)")
    if not r < 0.5 * x:
        reasons.append("r >= Re(z)/2")
    need = 1.75 * r
    got = L.length_in(x - r, x + r)
    if not got >= need * (1 - 1e-12):
        reasons.append(f"length(base inter L) = {got:.6g} < 7/4 r = {need:.6g}")
    return (not reasons), reasons


def export_goodset_csv(gs, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lo", "hi"])
        for a, b in gs.L:
            w.writerow([repr(a), repr(b)])
