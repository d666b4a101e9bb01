"""Half-plane lifts of maps with a logarithmic tract.

A built-in family provides the lift F directly on (part of) the right
half-plane together with its derivative.  Two families are built in:

* ``exponential`` -- F(z) = e^z + log(lam), the lift of lam*e^w.  The
  tract components are the vertical strips where Re(e^z) is large and
  F is 2*pi*i periodic.

* ``model`` -- F(z) = exp(zeta^q) with zeta the representative of z in
  the component nearest the real axis (principal powers, 1 <= q < 3),
  extended 2*pi*i periodically.  On its component around the positive
  real axis, z -> exp(z^q) is a conformal bijection onto the right
  half-plane, so inverse branches exist globally there; the growth
  function is exp(x^q).

Everything downstream consumes magnitudes through logs, so each family
also exposes `log_re` (log of Re F, -inf where Re F <= 0) and, for the
deep-iteration code paths, closed-form growth data on sign-log scalars.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .xreal import Xf, xf

__all__ = [
    "TractSpec",
    "TractMap",
    "BranchAnchor",
    "AsymptoticModel",
    "ConfigError",
    "BranchContinuationError",
    "ZipResult",
    "make_map",
    "inverse_branch",
    "zip_rate",
]

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Bad family name or parameters."""


class BranchContinuationError(RuntimeError):
    """Newton continuation failed even after path subdivision."""


@dataclass(frozen=True)
class BranchAnchor:
    """A known (image, preimage) pair pinning an inverse branch."""

    image_point: complex
    preimage_point: complex


@dataclass(frozen=True)
class AsymptoticModel:
    """Closed-form growth data on sign-log scalars, for deep levels.

    All arguments and results are Xf values; `u` is a point on the real
    axis of the tract (an abscissa), possibly far beyond double range.
    `log_ratio` must be supplied in closed form rather than as the
    difference log_hp - log_h: at tower scale that difference is
    swallowed by absorption, while the ratio itself stays modest.
    """

    log_h: object       # u -> Xf, log of the growth function at u
    log_hp: object      # u -> Xf, log of its derivative
    log_ratio: object   # u -> Xf, log of h'(u)/h(u), closed form
    good_min_x: object  # p -> float, threshold above which h'/h <= x^p

    def log_r_of(self, u):
        """log(h(u)/h'(u)), the natural covering radius at u."""
        return -self.log_ratio(u)


@dataclass
class TractSpec:
    """Recipe for a built-in or user-supplied lift."""

    family: str
    lam: complex = 1.0
    q: float = 1.0
    eval: object = None
    deriv: object = None
    label: str = ""


@dataclass
class TractMap:
    """Evaluatable lift F with derivative and branch/periodicity data."""

    eval: object
    deriv: object
    domain_min_re: float
    periodic_2pi: bool
    label: str
    magnitude_mode: str = "plain"      # "plain" | "log-scale"
    contains: object = None            # z -> bool, tract membership
    log_re: object = None              # (x, y) -> float, log Re F or -inf
    log_re_grid: object = None         # numpy-vectorised log_re
    closed_growth: object = None       # x -> (log_h, y_x, log_hp)
    inverse_exact: object = None       # (target, k) -> preimage in T_k
    asympt: AsymptoticModel = None
    params: dict = field(default_factory=dict)

    def component_index(self, z):
        """Index k of the 2*pi*i-translated component containing z."""
        return int(round(z.imag / TWO_PI)) if self.periodic_2pi else 0


# ---------------------------------------------------------------------------
# built-in families


def _make_exponential(lam, label):
    if lam == 0:
        raise ConfigError("exponential family needs lam != 0")
    log_lam = cmath.log(lam)
    c = log_lam.real

    def f_eval(z):
        return cmath.exp(z) + log_lam

    def f_deriv(z):
        return cmath.exp(z)

    def f_contains(z):
        return (cmath.exp(z) + log_lam).real > 0

    def f_log_re(x, y):
        t = math.cos(y)
        if x > 700.0:
            return x + math.log(t) if t > 0 else -math.inf
        v = math.exp(x) * t + c
        return math.log(v) if v > 0 else -math.inf

    def f_log_re_grid(x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        t = np.cos(y)
        big = x > 700.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.where(
                big,
                x + np.log(np.where(t > 0, t, np.nan)),
                np.log(np.exp(np.minimum(x, 700.0)) * t + c),
            )
        return np.where(np.isnan(out), -np.inf, out)

    def f_closed_growth(x):
        # h(x) = e^x + Re log lam, maximised at y = 0; h'(x) = e^x
        if x > 700.0:
            return x, 0.0, x
        return math.log(math.exp(x) + c), 0.0, x

    def f_inverse_exact(target, k):
        return cmath.log(target - log_lam) + 2j * math.pi * k

    asympt = AsymptoticModel(
        log_h=lambda u: u,
        log_hp=lambda u: u,
        log_ratio=lambda u: xf(0.0),
        good_min_x=lambda p: 1.0,
    )
    x0 = 0.0 if c >= 0 else math.log(-c) + 1e-9
    return TractMap(
        eval=f_eval, deriv=f_deriv, domain_min_re=max(0.0, x0),
        periodic_2pi=True, label=label or f"exp(lam={lam})",
        magnitude_mode="log-scale", contains=f_contains,
        log_re=f_log_re, log_re_grid=f_log_re_grid,
        closed_growth=f_closed_growth, inverse_exact=f_inverse_exact,
        asympt=asympt, params={"family": "exponential", "lam": lam},
    )


def _make_model(q, label):
    if not 1.0 <= q < 3.0:
        raise ConfigError(f"model family needs 1 <= q < 3, got {q}")

    def rep(z):
        k = int(round(z.imag / TWO_PI))
        return z - 2j * math.pi * k, k

    def f_eval(z):
        zeta, _ = rep(z)
        return cmath.exp(zeta ** q)

    def f_deriv(z):
        zeta, _ = rep(z)
        return q * zeta ** (q - 1.0) * cmath.exp(zeta ** q)

    def f_contains(z):
        zeta, _ = rep(z)
        if zeta.real <= 0:
            return False
        w = zeta ** q
        return abs(w.imag) < 0.5 * math.pi

    def f_log_re(x, y):
        zeta = complex(x, y)
        if zeta.real <= 0:
            return -math.inf
        w = zeta ** q
        t = math.cos(w.imag)
        return w.real + math.log(t) if t > 0 else -math.inf

    def f_log_re_grid(x, y):
        zeta = np.asarray(x, float) + 1j * np.asarray(y, float)
        w = zeta ** q
        t = np.cos(w.imag)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(t > 0, w.real + np.log(np.where(t > 0, t, np.nan)), -np.inf)
        return np.where(np.isnan(out), -np.inf, out)

    def f_closed_growth(x):
        # h(x) = exp(x^q), maximiser on the component axis
        return x ** q, 0.0, x ** q + math.log(q) + (q - 1.0) * math.log(x)

    def f_inverse_exact(target, k):
        # branch of F^{-1} onto component T_k: zeta = (log target)^(1/q)
        return cmath.log(target) ** (1.0 / q) + 2j * math.pi * k

    lq = math.log(q)
    asympt = AsymptoticModel(
        log_h=lambda u: u.powf(q),
        log_hp=lambda u: u.powf(q) + (q - 1.0) * u.log() + xf(lq),
        log_ratio=lambda u: (q - 1.0) * u.log() + xf(lq),
        good_min_x=lambda p: max(1.0, q ** (1.0 / (p - q + 1.0))) if p > q - 1.0
        else math.inf,
    )
    return TractMap(
        eval=f_eval, deriv=f_deriv, domain_min_re=1.0,
        periodic_2pi=True, label=label or f"model(q={q})",
        magnitude_mode="log-scale", contains=f_contains,
        log_re=f_log_re, log_re_grid=f_log_re_grid,
        closed_growth=f_closed_growth, inverse_exact=f_inverse_exact,
        asympt=asympt, params={"family": "model", "q": q},
    )


def make_map(spec):
    """Build a TractMap from a family spec."""
    fam = spec.family.lower()
    if fam in ("exponential", "exp"):
        return _make_exponential(spec.lam, spec.label)
    if fam == "model":
        return _make_model(spec.q, spec.label)
    if fam == "user":
        if spec.eval is None or spec.deriv is None:
            raise ConfigError("user family needs eval and deriv callables")

        def u_log_re(x, y, _e=spec.eval):
            v = _e(complex(x, y)).real
            return math.log(v) if v > 0 else -math.inf

        return TractMap(
            eval=spec.eval, deriv=spec.deriv, domain_min_re=0.0,
            periodic_2pi=False, label=spec.label or "user",
            contains=lambda z, _e=spec.eval: _e(z).real > 0,
            log_re=u_log_re, params={"family": "user"},
        )
    raise ConfigError(f"unknown family {spec.family!r}")


# ---------------------------------------------------------------------------
# inverse branches


def _newton(tmap, target, z0, tol, max_iter):
    z = z0
    err = abs(tmap.eval(z) - target)
    for _ in range(max_iter):
        if err <= tol:
            return z, True
        d = tmap.deriv(z)
        if d == 0:
            return z, False
        step = (tmap.eval(z) - target) / d
        lam = 1.0
        for _ in range(25):
            z_new = z - lam * step
            err_new = abs(tmap.eval(z_new) - target)
            if err_new < err:
                z, err = z_new, err_new
                break
            lam *= 0.5
        else:
            return z, False
    return z, err <= tol


def inverse_branch(tmap, target, anchor, rel_tol=1e-9, max_iter=50,
                   max_subdiv=1024):
    """Continue the inverse branch pinned by `anchor` to `target`.

    Damped Newton on F(z) = target, seeded at the anchor preimage and, on
    failure, re-run along the straight segment from the anchor image to
    the target with successive dyadic subdivision (up to `max_subdiv`
    segments).  The result satisfies |F(z) - target| <= rel_tol*(1+|target|).
    """
    w0 = anchor.image_point
    tol = rel_tol * (1.0 + abs(target))
    nseg = 1
    while nseg <= max_subdiv:
        z = anchor.preimage_point
        ok = True
        for i in range(1, nseg + 1):
            t = w0 + (target - w0) * (i / nseg)
            seg_tol = tol if i == nseg else rel_tol * (1.0 + abs(t))
            z, conv = _newton(tmap, t, z, seg_tol, max_iter)
            if not conv:
                ok = False
                break
        if ok:
            return z
        nseg *= 2
    raise BranchContinuationError(
        f"no branch continuation from {w0} to {target} within "
        f"{max_subdiv} segments")


# ---------------------------------------------------------------------------
# zip-rate diagnostic


@dataclass
class ZipResult:
    """Sequence (1/k) log Re F^k(z); flags if the orbit left the domain."""

    values: list            # Xf per step, k = 1..len
    exited: bool = False
    exit_step: int = None
    capped: bool = False    # log-scale depth exhausted, sequence truncated
    log_re_orbit: list = None

    def increasing(self):
        return all(b > a for a, b in zip(self.values, self.values[1:]))


def zip_rate(tmap, z, n):
    """Per-step averaged log-growth of Re F^k(z) for k = 1..n.

    The orbit is iterated concretely while representable; once the real
    part exceeds double range the built-in families continue on the real
    axis in sign-log coordinates (by then the orbit is real to working
    precision for these families).  If Re F^k drops to zero or below the
    sequence is truncated with the exit flag set.
    """
    vals = []
    log_orbit = []
    cur = complex(z)
    log_x = None  # Xf holding log Re F^k once past double range
    for k in range(1, n + 1):
        if log_x is not None:
            try:
                x_val = log_x.exp()
            except OverflowError:
                return ZipResult(vals, capped=True, log_re_orbit=log_orbit)
            log_x = tmap.asympt.log_h(x_val)
            log_orbit.append(log_x)
            vals.append(log_x / k)
            continue
        if cur.real > 700.0:
            # next image is not representable; continue on the axis
            if tmap.asympt is None or tmap.log_re is None or \
                    abs(cur.imag) > 1e-6 * cur.real:
                return ZipResult(vals, exited=True, exit_step=k,
                                 log_re_orbit=log_orbit)
            lre = tmap.log_re(cur.real, cur.imag)
            if lre == -math.inf:
                return ZipResult(vals, exited=True, exit_step=k,
                                 log_re_orbit=log_orbit)
            log_x = xf(lre)
            log_orbit.append(log_x)
            vals.append(log_x / k)
            continue
        w = tmap.eval(cur)
        if not (w.real > 0):
            return ZipResult(vals, exited=True, exit_step=k,
                             log_re_orbit=log_orbit)
        lre = math.log(w.real)
        log_orbit.append(xf(lre))
        vals.append(xf(lre / k))
        cur = w
    return ZipResult(vals, exited=False, log_re_orbit=log_orbit)
