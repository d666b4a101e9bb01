"""Child regions of an admissible square, with per-run certification.

One step of the construction takes an admissible square S(z, r), picks
well-spread abscissas u_k in the good part of its base via the greedy
covering selection, and around the growth maximiser w_k over each u_k
lays out image squares

    S(F(w_k) + l*delta*rho_k,  delta^2 rho_k),   rho_k = h'(u_k)/x^p,

for l = 0..m_k, m_k = floor(delta * r_k * x^p), r_k = h(u_k)/h'(u_k).
Admissible image squares are pulled back through the inverse branch
pinned at w_k, giving child regions sandwiched between concentric disks
around their centres a_j.  The construction certifies every child by
the distortion bounds, and `verify_offspring` re-checks the four
conclusions (containment sandwich, strip containment, growth floor,
spacing) by independent forward evaluation only.

Two constant policies exist.  The formula constants c1 = delta^2/324,
c2 = 324 delta^2, c3 = delta/240 come from worst-case distortion with
half-radius slack and are extremely loose; the containment sandwich (A)
is checked against them directly.  For spacing and strip margins the
loose c2 would demand gaps no run at desk scale can produce (they hold
only as delta -> 0), so the default "measured" policy uses the certified
per-child outer radii together with tau_eff = 2*K_measured + 2, where
K_measured is the sampled distortion of the step.  The "literal" policy
applies tau * c2 / x^p as written and is expected to fail at desk scale;
both policies are reported side by side.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Disk, Square, koebe_bounds, vitali_select
from .goodsets import PreconditionError, is_admissible
from .tracts import BranchAnchor, inverse_branch

__all__ = [
    "OffspringParams",
    "Child",
    "Cluster",
    "Offspring",
    "OffspringReport",
    "DegenerateConstructionError",
    "construct_offspring",
    "verify_offspring",
    "offspring_to_json",
    "find_c0",
]

SQRT2 = math.sqrt(2.0)


class DegenerateConstructionError(RuntimeError):
    """The step produced no admissible children; diagnostics attached."""

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


@dataclass
class OffspringParams:
    """Step parameters; the formula constants derive from delta."""

    delta: float = 0.05
    p: float = 0.25
    mode: str = "scaled"          # "literal" | "scaled"
    size_scale: float = 0.02
    tau_policy: str = "measured"  # "measured" | "literal"
    tau: float = None             # fixed tau for the literal policy
    c0: float = 6.0               # working floor on Re z, mode-scaled
    u_grid_n: int = 512

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0 / 3.0:
            raise ValueError("delta must lie in (0, 1/3)")
        if self.mode not in ("literal", "scaled"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.tau_policy not in ("measured", "literal"):
            raise ValueError(f"unknown tau policy {self.tau_policy!r}")

    @property
    def scale(self):
        return 1.0 if self.mode == "literal" else self.size_scale

    @property
    def c1(self):
        return self.delta ** 2 / 324.0

    @property
    def c2(self):
        return 324.0 * self.delta ** 2

    @property
    def c3(self):
        return self.delta / 240.0

    def tau_effective(self, k_measured):
        if self.tau_policy == "literal":
            return self.tau if self.tau is not None else 2e4 + 2.0
        return 2.0 * k_measured + 2.0


@dataclass
class Cluster:
    index: int
    u: float
    r_u: float            # h(u)/h'(u)
    w: complex            # maximiser point over u, shifted near Im z
    log_h: float
    log_hp: float
    rho: float            # h'(u)/x^p
    m_k: int
    admissible_ls: list


@dataclass
class Child:
    center: complex          # a_j
    inner_radius: float      # certified inscribed-disk radius
    outer_radius: float      # certified circumscribed-disk radius
    image_square: Square
    anchor: BranchAnchor
    cluster: int
    offset: int
    u: float

    @property
    def inner_disk(self):
        return Disk(self.center, self.inner_radius)

    @property
    def outer_disk(self):
        return Disk(self.center, self.outer_radius)


@dataclass
class Offspring:
    parent: Square
    params: OffspringParams
    children: list
    clusters: list
    sum_rk: float
    length_lprime: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def m(self):
        return len(self.children)

    @property
    def x(self):
        return self.parent.center.real

    def count_floor(self):
        return self.params.c3 * self.parent.half_side * self.x ** self.params.p


def _growth_at(tmap, profile, u):
    """(log_h, y_u, log_hp) at abscissa u, preferring closed forms."""
    if tmap.closed_growth is not None:
        return tmap.closed_growth(u)
    if profile is not None and profile.xs[0] <= u <= profile.xs[-1]:
        lh = profile.interp_log_h(u)
        y = float(np.interp(u, profile.xs, profile.y_max))
        lhp = lh + profile.interp_ratio_log(u)
        return lh, y, lhp
    from .growth import compute_h, compute_h_prime
    hp = compute_h(tmap, u)
    lhp, _ = compute_h_prime(tmap, u, hp=hp)
    return hp.log_h, hp.y_max, lhp


def _lprime_intervals(L, x, r):
    lo = x - 0.25 * r + 1.0
    hi = x + 0.25 * r - 1.0
    if hi < lo:
        return [], 0.0
    if hasattr(L, "L"):
        sub = L.L.intersect_window(lo, hi)
        return list(sub), sub.length
    w_lo = max(lo, L.min_x)
    if hi < w_lo:
        return [], 0.0
    return [(w_lo, hi)], hi - w_lo


def construct_offspring(tmap, profile, L, square, params):
    """Run one construction step on an admissible square.

    Returns an Offspring whose children are certified in construction
    order of the proof: covering selection on the good base, maximiser
    points, image squares filtered by admissibility, inverse-branch
    pullbacks with distortion sandwiches, global sort and spacing data.
    Raises PreconditionError if the square is not admissible and
    DegenerateConstructionError when no admissible child arises.
    """
    ok, reasons = is_admissible(square, L, size_scale=params.scale)
    if not ok:
        raise PreconditionError(f"square not admissible: {'; '.join(reasons)}")
    x = square.center.real
    r = square.half_side
    if not x > params.c0 * params.scale:
        raise PreconditionError(
            f"Re z = {x} at or below the working floor "
            f"{params.c0 * params.scale}")
    xe_p = x ** params.p
    delta = params.delta

    intervals, len_lp = _lprime_intervals(L, x, r)
    diagnostics = {"length_lprime": len_lp, "x": x, "r": r}
    if not intervals:
        raise DegenerateConstructionError(
            "inset base window left no good abscissas (r too small "
            "for the +-1 margins)", diagnostics)

    # candidate abscissas on the good base, then greedy covering choice
    step = (0.25 * r) / params.u_grid_n
    cands = []
    for a, b in intervals:
        n_steps = max(1, int(math.floor((b - a) / step)) + 1)
        for i in range(n_steps + 1):
            u = min(a + i * step, b)
            cands.append(u)
            if u == b:
                break
    cands = sorted(set(cands))
    growth = {u: _growth_at(tmap, profile, u) for u in cands}
    disks = []
    for u in cands:
        lh, _, lhp = growth[u]
        r_u = math.exp(lh - lhp)
        disks.append(Disk(complex(u, 0.0), 3.0 * r_u))
    keep = vitali_select(disks)
    keep.sort(key=lambda i: cands[i])

    clusters = []
    children = []
    sum_rk = 0.0
    for ci, i in enumerate(keep):
        u = cands[i]
        lh, y_u, lhp = growth[u]
        if lh > 700.0:
            raise DegenerateConstructionError(
                f"image scale exp({lh:.3g}) exceeds plain evaluation "
                "range; use the log-scale level builder", diagnostics)
        r_u = math.exp(lh - lhp)
        sum_rk += r_u
        w = complex(u, y_u)
        if tmap.periodic_2pi:
            shift = round((square.center.imag - y_u) / (2 * math.pi))
            w += 2j * math.pi * shift
        if abs(w.imag - square.center.imag) > math.pi + 1e-9:
            raise DegenerateConstructionError(
                f"maximiser ordinate at u={u} cannot be brought within "
                "pi of the square centre (map not periodic)", diagnostics)
        fw = tmap.eval(w)
        if abs(fw.real - math.exp(lh)) > 1e-6 * abs(math.exp(lh)):
            raise DegenerateConstructionError(
                f"growth value and forward evaluation disagree at u={u}",
                diagnostics)
        rho = math.exp(lhp) / xe_p
        m_k = int(math.floor(delta * r_u * xe_p))
        adm_ls = []
        anchor_img, anchor_pre = fw, w
        for l in range(m_k + 1):
            target = fw + l * delta * rho
            child_sq = Square(target, delta ** 2 * rho)
            ok_c, _ = is_admissible(child_sq, L, size_scale=params.scale)
            v = inverse_branch(tmap, target,
                               BranchAnchor(anchor_img, anchor_pre))
            anchor_img, anchor_pre = target, v
            if not ok_c:
                continue
            adm_ls.append(l)
            dfv = abs(tmap.deriv(v))
            r_univ = target.real  # inverse branch is univalent on the half-plane
            rho_loc = SQRT2 * delta ** 2 * rho / r_univ
            kb = koebe_bounds(1.0 / dfv, r_univ, rho_loc)
            outer = kb.value_hi
            # quarter theorem on the inscribed disk of the image square
            inner = koebe_bounds(1.0 / dfv, delta ** 2 * rho, 0.5).quarter_radius
            children.append(Child(
                center=v, inner_radius=inner, outer_radius=outer,
                image_square=child_sq,
                anchor=BranchAnchor(target, v),
                cluster=ci, offset=l, u=u,
            ))
        clusters.append(Cluster(
            index=ci, u=u, r_u=r_u, w=w, log_h=lh, log_hp=lhp, rho=rho,
            m_k=m_k, admissible_ls=adm_ls,
        ))

    children.sort(key=lambda c: c.center.real)
    diagnostics["sum_rk"] = sum_rk
    diagnostics["n_clusters"] = len(clusters)
    if not children:
        raise DegenerateConstructionError(
            "no admissible child squares (delta too large or x too "
            "small for the size floor)", diagnostics)
    return Offspring(parent=square, params=params, children=children,
                     clusters=clusters, sum_rk=sum_rk,
                     length_lprime=len_lp, diagnostics=diagnostics)


def measure_step_distortion(tmap, off, n_samples=16):
    """Largest sampled |F'| ratio over any child's outer disk."""
    worst = 1.0
    for ch in off.children:
        mags = [abs(tmap.deriv(ch.center))]
        for k in range(n_samples):
            th = 2 * math.pi * (k + 0.5) / n_samples
            z = ch.center + ch.outer_radius * complex(math.cos(th),
                                                      math.sin(th))
            mags.append(abs(tmap.deriv(z)))
        worst = max(worst, max(mags) / min(mags))
    return worst


@dataclass
class OffspringReport:
    """Independent forward re-check of the step's four conclusions."""

    violations: list
    margins: dict
    k_measured: float
    tau_used: float
    degenerate: bool
    checks: int

    @property
    def ok(self):
        return not self.violations and not self.degenerate


def verify_offspring(tmap, off, params=None, boundary_samples=16,
                     interior_samples=4, rel_tol=1e-6):
    """Re-check containment, strip, growth and spacing by evaluation.

    Nothing from the construction is reused except the claimed outputs:
    centres, sandwich radii and image squares.  Forward evaluation drives
    every check; inner-disk boundary samples must land inside the image
    square, outer-disk boundary samples outside it, the growth floor and
    pairwise spacing are measured on the claimed centres directly.
    """
    params = params or off.params
    x = off.x
    xe_p = x ** params.p
    violations = []
    checks = 0
    margins = {}

    if off.m == 0:
        return OffspringReport([], {}, 1.0, 0.0, degenerate=True, checks=0)

    k_meas = measure_step_distortion(tmap, off)
    tau = params.tau_effective(k_meas)
    if params.tau_policy == "literal":
        spacing_floor = tau * params.c2 / xe_p
        strip_pad = tau * params.c2 / xe_p
    else:
        max_outer = max(c.outer_radius for c in off.children)
        spacing_floor = tau * max_outer
        strip_pad = tau * max_outer

    def fail(tag, detail):
        violations.append((tag, detail))

    def margin(tag, value):
        margins[tag] = min(margins.get(tag, math.inf), value)

    for j, ch in enumerate(off.children):
        sq = ch.image_square
        fa = tmap.eval(ch.center)
        checks += 1
        err = abs(fa - sq.center) / (1.0 + abs(sq.center))
        margin("center_image", rel_tol - err)
        if err > rel_tol:
            fail("center_image", f"child {j}: |F(a)-s| rel err {err:.3e}")
        # (A) forward: inner-disk boundary maps into the image square
        for k in range(boundary_samples):
            th = 2 * math.pi * (k + 0.25) / boundary_samples
            z = ch.center + ch.inner_radius * (1 - rel_tol) * complex(
                math.cos(th), math.sin(th))
            w = tmap.eval(z)
            checks += 1
            if not sq.contains(w, slack=rel_tol * sq.half_side):
                fail("inner_containment", f"child {j} angle {th:.2f}")
        for k in range(interior_samples):
            th = 2 * math.pi * (k + 0.5) / interior_samples
            z = ch.center + 0.5 * ch.inner_radius * complex(
                math.cos(th), math.sin(th))
            checks += 1
            if not sq.contains(tmap.eval(z), slack=rel_tol * sq.half_side):
                fail("interior_containment", f"child {j} angle {th:.2f}")
        # outer disk boundary must stay out of the open image square
        for k in range(boundary_samples):
            th = 2 * math.pi * (k + 0.75) / boundary_samples
            z = ch.center + ch.outer_radius * (1 + rel_tol) * complex(
                math.cos(th), math.sin(th))
            w = tmap.eval(z)
            checks += 1
            if sq.contains(w, slack=-rel_tol * sq.half_side):
                fail("outer_escape", f"child {j} angle {th:.2f}")
        # formula-constant sandwich ordering
        checks += 1
        if not params.c1 / xe_p <= ch.inner_radius * (1 + 1e-12):
            fail("sandwich_c1", f"child {j}: inner {ch.inner_radius:.3e} "
                                f"below {params.c1 / xe_p:.3e}")
        checks += 1
        if not ch.outer_radius <= params.c2 / xe_p * (1 + 1e-12):
            fail("sandwich_c2", f"child {j}: outer {ch.outer_radius:.3e} "
                                f"above {params.c2 / xe_p:.3e}")
        # (B) strip containment around the parent centre
        dre = abs(ch.center.real - off.parent.center.real) + strip_pad
        dim = abs(ch.center.imag - off.parent.center.imag) + strip_pad
        checks += 1
        margin("strip_re", 0.25 * off.parent.half_side - dre)
        margin("strip_im", math.pi + 1.0 - dim)
        if dre > 0.25 * off.parent.half_side or dim > math.pi + 1.0:
            fail("strip", f"child {j}: padded offsets ({dre:.3g}, {dim:.3g})")
        # (C) growth floor, measured forward and mode-scaled
        floor = params.scale * math.exp(x / 15.0)
        checks += 1
        margin("growth_floor", fa.real / floor - 1.0)
        if not fa.real >= floor:
            fail("growth_floor", f"child {j}: Re F(a) = {fa.real:.3g} "
                                 f"< {floor:.3g}")

    # (D) spacing of consecutive centres
    for j in range(off.m - 1):
        gap = off.children[j + 1].center.real - off.children[j].center.real
        checks += 1
        margin("spacing", gap / spacing_floor - 1.0 if spacing_floor > 0
               else math.inf)
        if not gap > spacing_floor:
            fail("spacing", f"pair {j}: gap {gap:.3e} <= floor "
                            f"{spacing_floor:.3e}")
    # cluster separation floor (4/5)^p / x^p between distinct clusters
    sep_floor = (0.8 ** params.p) / xe_p
    for j in range(off.m - 1):
        a, b = off.children[j], off.children[j + 1]
        if a.cluster != b.cluster:
            gap = b.center.real - a.center.real
            checks += 1
            if not gap >= sep_floor * (1 - 1e-9):
                fail("cluster_separation",
                     f"pair {j}: gap {gap:.3e} < {sep_floor:.3e}")
    # outer disks pairwise disjoint
    for j in range(off.m):
        for i in range(j + 1, off.m):
            a, b = off.children[j], off.children[i]
            checks += 1
            if a.outer_disk.intersects(b.outer_disk, slack=0.0):
                fail("outer_disjoint", f"children {j},{i} overlap")
    # count floor
    checks += 1
    if not off.m > off.count_floor():
        fail("count", f"m = {off.m} <= c3 r x^p = {off.count_floor():.3g}")

    return OffspringReport(violations=violations, margins=margins,
                           k_measured=k_meas, tau_used=tau,
                           degenerate=False, checks=checks)


def offspring_to_json(off, report=None):
    d = {
        "parent": {"re": off.parent.center.real,
                   "im": off.parent.center.imag,
                   "half_side": off.parent.half_side},
        "params": {
            "delta": off.params.delta, "p": off.params.p,
            "mode": off.params.mode, "size_scale": off.params.size_scale,
            "tau_policy": off.params.tau_policy,
            "c1": off.params.c1, "c2": off.params.c2, "c3": off.params.c3,
        },
        "m": off.m,
        "sum_rk": off.sum_rk,
        "children": [
            {
                "re": c.center.real, "im": c.center.imag,
                "inner_radius": c.inner_radius,
                "outer_radius": c.outer_radius,
                "image_square": {"re": c.image_square.center.real,
                                 "im": c.image_square.center.imag,
                                 "half_side": c.image_square.half_side},
                "cluster": c.cluster, "offset": c.offset, "u": c.u,
            }
            for c in off.children
        ],
    }
    if report is not None:
        d["verification"] = {
            "ok": report.ok,
            "violations": [list(v) for v in report.violations],
            "k_measured": report.k_measured,
            "tau_used": report.tau_used,
            "checks": report.checks,
        }
    return d


def find_c0(tmap, L, params, x_lo=6.0, x_hi=80.0, n=30, r_frac=0.35):
    """Smallest abscissa at which a certified step succeeds.

    Scans a geometric grid of centre abscissas with half-side
    r = r_frac * x, returning the first x whose construction verifies
    cleanly, together with the scan log.
    """
    log = []
    for x in np.geomspace(x_lo, x_hi, n):
        sq = Square(complex(float(x), 0.0), r_frac * float(x))
        try:
            off = construct_offspring(tmap, None, L, sq, params)
            rep = verify_offspring(tmap, off, params)
            log.append((float(x), rep.ok, off.m))
            if rep.ok:
                return float(x), log
        except (PreconditionError, DegenerateConstructionError) as e:
            log.append((float(x), False, str(e)))
    return None, log


def serialize_offspring(off, report, path):
    with open(path, "w") as fh:
        json.dump(offspring_to_json(off, report), fh, indent=1,
                  sort_keys=True)
