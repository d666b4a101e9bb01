"""Elementary plane geometry, covering selection and distortion bounds.

Squares here are axis-parallel and described by centre and half-side;
membership is the pair of coordinate inequalities.  Interval sets are
finite unions of closed real intervals, normalised (sorted, disjoint,
touching pieces merged).  The distortion factors follow the classical
bounds for a map univalent on a disk:

    rho/(1+rho)^2 |g'(a)| r  <=  |g(z)-g(a)|  <=  rho/(1-rho)^2 |g'(a)| r
    (1-rho)/(1+rho)^3 |g'(a)| <= |g'(z)| <= (1+rho)/(1-rho)^3 |g'(a)|
    g(B(a,r))  contains  B(g(a), |g'(a)| r / 4)

for z in B(a, rho*r), 0 < rho < 1, plus the linearisation bound
|g(z)-g(w)-g'(a)(z-w)| <= 26 |g'(a)| rho |z-w| for rho < 1/2.
"""

import math
from dataclasses import dataclass, field

__all__ = [
    "Square",
    "Disk",
    "IntervalSet",
    "KoebeBounds",
    "KoebeReport",
    "DomainError",
    "interval_length",
    "vitali_select",
    "koebe_bounds",
    "koebe_verify",
]

MERGE_EPS = 1e-12


class DomainError(ValueError):
    """Parameter outside the domain an operation is defined on."""


@dataclass(frozen=True)
class Square:
    """Closed axis-parallel square S(center, half_side)."""

    center: complex
    half_side: float

    def __post_init__(self):
        if not self.half_side > 0:
            raise ValueError("half_side must be positive")

    def contains(self, z, slack=0.0):
        r = self.half_side + slack
        return (abs(z.real - self.center.real) <= r
                and abs(z.imag - self.center.imag) <= r)

    @property
    def re_interval(self):
        x, r = self.center.real, self.half_side
        return (x - r, x + r)

    @property
    def diameter(self):
        return 2.0 * math.sqrt(2.0) * self.half_side

    @property
    def area(self):
        return 4.0 * self.half_side * self.half_side


@dataclass(frozen=True)
class Disk:
    """Open disk B(center, radius)."""

    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def contains_disk(self, other, slack=0.0):
        return (abs(other.center - self.center) + other.radius
                <= self.radius + slack)

    def intersects(self, other, slack=0.0):
        return abs(other.center - self.center) < other.radius + self.radius - slack


@dataclass
class IntervalSet:
    """Finite union of closed real intervals, kept normalised."""

    intervals: list = field(default_factory=list)

    def __post_init__(self):
        self.intervals = _normalize(self.intervals)

    @staticmethod
    def from_pairs(pairs):
        return IntervalSet(list(pairs))

    @property
    def length(self):
        return math.fsum(b - a for a, b in self.intervals)

    def contains(self, x):
        for a, b in self.intervals:
            if a - MERGE_EPS <= x <= b + MERGE_EPS:
                return True
            if a > x:
                break
        return False

    def intersect_window(self, lo, hi):
        """Intersection with [lo, hi] as a new IntervalSet."""
        if hi < lo:
            return IntervalSet([])
        out = []
        for a, b in self.intervals:
            c, d = max(a, lo), min(b, hi)
            if c <= d:
                out.append((c, d))
        return IntervalSet(out)

    def length_in(self, lo, hi):
        return self.intersect_window(lo, hi).length

    def union(self, other):
        return IntervalSet(self.intervals + other.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)


def _normalize(pairs):
    cleaned = []
    for a, b in pairs:
        a, b = float(a), float(b)
        if b < a:
            raise ValueError(f"interval [{a}, {b}] reversed")
        cleaned.append((a, b))
    cleaned.sort()
    out = []
    for a, b in cleaned:
        if out and a <= out[-1][1] + MERGE_EPS:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def interval_length(s):
    """Lebesgue measure of a normalised interval set."""
    return s.length


def vitali_select(disks):
    """Greedy disjoint subfamily whose 4x inflation covers every input.

    Largest radius first, ties broken by input index; a disk is kept when
    it meets none of the disks already kept.  Returns kept indices in
    selection order.  Every rejected disk meets a kept disk of radius at
    least its own, so it lies inside that disk inflated by 4.
    """
    order = sorted(range(len(disks)), key=lambda i: (-disks[i].radius, i))
    kept = []
    for i in order:
        d = disks[i]
        if all(not d.intersects(disks[j]) for j in kept):
            kept.append(i)
    return kept


@dataclass(frozen=True)
class KoebeBounds:
    """Distortion factors for a univalent map, scaled by |g'(a)| and r."""

    value_lo: float
    value_hi: float
    deriv_lo: float
    deriv_hi: float
    quarter_radius: float


def koebe_bounds(deriv_at_center, r, rho):
    """Bounds on values/derivative of a univalent map on B(a, r) at B(a, rho r)."""
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0,1), got {rho}")
    if deriv_at_center <= 0 or r <= 0:
        raise DomainError("derivative modulus and radius must be positive")
    g, onep, onem = deriv_at_center, 1.0 + rho, 1.0 - rho
    return KoebeBounds(
        value_lo=rho / (onep * onep) * g * r,
        value_hi=rho / (onem * onem) * g * r,
        deriv_lo=onem / (onep ** 3) * g,
        deriv_hi=onep / (onem ** 3) * g,
        quarter_radius=0.25 * g * r,
    )


@dataclass
class KoebeReport:
    """Outcome of checking distortion inequalities on a sampled map."""

    applicable: bool
    violations: list
    worst_slack: float
    pairs_checked: int

    @property
    def ok(self):
        return self.applicable and not self.violations


def koebe_verify(g, a, r, rho, n_samples=50, rel_tol=1e-9, deriv=None, rng=None):
    """Check the distortion and linearisation inequalities on samples.

    `g` is evaluated at the centre `a` and at `n_samples` points of
    B(a, rho*r); `deriv` gives g' (finite differences when omitted).
    Near-violations within `rel_tol` relative slack count as passes; the
    bounds are attained only by extremal maps we never sample.  A map
    that is not numerically injective on the samples yields a report
    flagged inapplicable rather than a violation.
    """
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0,1), got {rho}")
    if rng is None:
        import random
        rng = random.Random(7)
    if deriv is None:
        h = 1e-7 * r
        def deriv(z, _g=g, _h=h):  # noqa: E731 - local finite difference
            return (_g(z + _h) - _g(z - _h)) / (2 * _h)

    ga = g(a)
    gpa = deriv(a)
    agpa = abs(gpa)
    if agpa == 0:
        return KoebeReport(False, [], math.inf, 0)

    pts = []
    for _ in range(n_samples):
        t = rho * r * math.sqrt(rng.random())
        th = 2 * math.pi * rng.random()
        pts.append(a + t * complex(math.cos(th), math.sin(th)))

    vals = [g(z) for z in pts]
    # injectivity screen: sampled images must be pairwise distinct
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dz = abs(pts[i] - pts[j])
            if dz > 1e-12 * r and abs(vals[i] - vals[j]) <= 1e-14 * agpa * dz:
                return KoebeReport(False, [], math.inf, 0)

    kb = koebe_bounds(agpa, r, rho)
    violations = []
    worst = -math.inf
    checked = 0

    def _check(tag, lo, val, hi):
        nonlocal worst, checked
        checked += 1
        scale = max(abs(lo), abs(hi), 1e-300)
        slack_lo = (lo - val) / scale
        slack_hi = (val - hi) / scale
        worst = max(worst, slack_lo, slack_hi)
        if slack_lo > rel_tol or slack_hi > rel_tol:
            violations.append((tag, lo, val, hi))

    for z, gz in zip(pts, vals):
        rr = abs(z - a) / r
        if rr == 0:
            continue
        kb_z = koebe_bounds(agpa, r, rr)
        _check("value", kb_z.value_lo, abs(gz - ga), kb_z.value_hi)
        _check("deriv", kb_z.deriv_lo, abs(deriv(z)), kb_z.deriv_hi)
    # quarter theorem on the shrunken disk B(a, rho r): the image of its
    # boundary stays at distance >= |g'(a)| rho r / 4 from g(a)
    for k in range(32):
        th = 2 * math.pi * (k + 0.5) / 32
        z = a + rho * r * complex(math.cos(th), math.sin(th))
        _check("quarter", 0.25 * agpa * rho * r, abs(g(z) - ga), math.inf)

    if rho < 0.5:
        for i in range(0, len(pts) - 1, 2):
            z, w = pts[i], pts[i + 1]
            if abs(z - w) == 0:
                continue
            lhs = abs(vals[i] - vals[i + 1] - gpa * (z - w))
            _check("linearize", 0.0, lhs, 26.0 * agpa * rho * abs(z - w))

    return KoebeReport(True, violations, worst, checked)
