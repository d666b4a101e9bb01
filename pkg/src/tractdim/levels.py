"""Nested cell families, their pullback geometry and the mass tree.

Level n holds compact cells Q whose n-th image F^n(Q) is an admissible
square S(z_n, r_n).  A level-(n+1) cell arises by running the offspring
step on S(z_n, r_n), translating each child region by 2*pi*i*k while it
stays in the inner quarter square, and pulling back through the branch
chain of its parent.  All per-cell magnitudes (x_n, r_n, |(F^n)'|,
diameters, areas, masses) are held as sign-log scalars, since x_n grows
like an exponential tower in n.

Child counts explode just as fast: one deep cell owns astronomically
many children (count ~ r_n^2 x_n^p).  Levels therefore come in two
flavours, chosen per parent:

* concrete -- at the root level, where the image plane fits ordinary
  doubles: the offspring step runs with Newton pullbacks, is verified by
  forward evaluation, and every child/translate is materialised with an
  absolute base-plane position.

* aggregate -- the closed growth forms of the family supply the exact
  cluster layout (spacing, per-cluster counts, translate counts) on
  sign-log scalars; totals and gap statistics are recorded per parent
  and only a few representative children are materialised to carry the
  recursion.  Masses of representatives are their true shares; the
  remainder stays with the recorded unmaterialised total, so the mass
  identity per parent holds exactly.

Sandwich radii pull back by the chain derivative at the parent's tracked
point; the drift of that derivative across the cell is bounded by the
accumulated per-plane distortion (`dist_bar`), which the distortion
check quantifies and every certified bracket folds in.
"""

import csv
import math
from dataclasses import dataclass

from .geometry import Square
from .goodsets import PreconditionError
from .offspring import (DegenerateConstructionError, construct_offspring,
                        verify_offspring)
from .xreal import Xf, xf, xsum

__all__ = [
    "Cell",
    "Expansion",
    "LevelBuild",
    "FrostmanMeasure",
    "build_levels",
    "frostman_measure",
    "sibling_log_mass",
    "density_delta",
    "distortion_check",
    "derivative_floor_check",
    "separation_check",
    "separation_report",
    "diameter_sandwich_check",
    "nesting_check",
    "export_levels_csv",
]

LOG_2PI = math.log(2.0 * math.pi)
LOG_2 = math.log(2.0)
LOG_PI = math.log(math.pi)
SQRT2 = math.sqrt(2.0)
ZERO = xf(0.0)
ONE = xf(1.0)


@dataclass
class Cell:
    """One cell of one generation, in sign-log coordinates."""

    n: int
    cell_id: int
    parent_id: int
    k_translate: int
    log_x: Xf          # log Re z_n of the image square
    log_r: Xf          # log r_n
    im_z: float        # Im z_n (small for the built-in runs)
    log_deriv: Xf      # log |(F^n)'| at the tracked point
    log_diam_lo: Xf    # certified diameter sandwich (base plane)
    log_diam_hi: Xf
    log_area_lo: Xf    # disk-sandwich area brackets (base plane)
    log_area_hi: Xf
    rel_re: float      # position in the parent's image frame, /r_parent
    rel_im: float
    abs_center: complex = None   # base-plane centre when representable
    concrete_child: object = None
    log_mass: Xf = None
    dist_bar: float = 1.0        # accumulated chain-distortion bound
    log_r_over_x: Xf = None      # log(r_n/x_n) from closed-form parts

    @property
    def log_area_gm(self):
        return (self.log_area_lo + self.log_area_hi) * 0.5

    @property
    def log_diam(self):
        return (self.log_diam_lo + self.log_diam_hi) * 0.5


@dataclass
class Expansion:
    """Aggregate description of the full offspring of one parent cell.

    Counts are held as logs: one deep parent owns e^(10^5)-many children
    and even the along-abscissa count alone leaves double range.
    """

    parent_id: int
    complete: bool
    log_N: Xf                 # log of the total number of children
    log_n_re: Xf              # log of the along-abscissa child count
    log_translates: Xf        # log of the vertical translate count
    log_area_total: Xf        # log sum of child areas (gm proxy)
    log_gap_within: Xf        # log image-plane gap, consecutive children
    log_gap_cluster: Xf       # log image-plane gap, cluster centres
    log_child_inner_rel: Xf   # log child sandwich radii, image plane
    log_child_outer_rel: Xf
    k_step: float             # one-step distortion, measured or bounded
    offspring: object = None  # concrete Offspring when available
    verification: object = None


class LevelBuild:
    """All levels of one run plus indexes for chain walking."""

    def __init__(self, tmap, params, q0):
        self.tmap = tmap
        self.params = params
        self.q0 = q0
        self.levels = []          # list of list[Cell]
        self.cells = {}           # id -> Cell
        self.children = {}        # id -> [Cell]
        self.expansions = {}      # id -> Expansion
        self.truncated = None     # (level, reason) when a level failed
        self._next_id = 0

    def new_id(self):
        i = self._next_id
        self._next_id += 1
        return i

    def add_cell(self, cell):
        self.cells[cell.cell_id] = cell
        while len(self.levels) <= cell.n:
            self.levels.append([])
        self.levels[cell.n].append(cell)
        if cell.parent_id is not None:
            self.children.setdefault(cell.parent_id, []).append(cell)

    def parent(self, cell):
        return self.cells.get(cell.parent_id)

    def ancestor(self, cell, level):
        c = cell
        while c.n > level:
            c = self.cells[c.parent_id]
        return c

    def chain(self, cell):
        """Cells from level 0 down to `cell` along parent links."""
        out = [cell]
        while out[-1].parent_id is not None:
            out.append(self.cells[out[-1].parent_id])
        return list(reversed(out))

    @property
    def n_levels(self):
        return len(self.levels)

    def leaves(self):
        return self.levels[-1]


# ---------------------------------------------------------------------------
# building


def _expand_concrete(build, parent, L, verify=True):
    """Offspring with Newton pullbacks; all translates materialised."""
    params = build.params
    x = float(parent.log_x.exp())
    r = float(parent.log_r.exp())
    square = Square(complex(x, parent.im_z), r)
    off = construct_offspring(build.tmap, None, L, square, params)
    rep = verify_offspring(build.tmap, off, params) if verify else None
    if rep is not None and not rep.ok:
        raise DegenerateConstructionError(
            f"offspring verification failed at cell {parent.cell_id}: "
            f"{rep.violations[:3]}", off.diagnostics)
    k_step = rep.k_measured if rep else 1.0

    deriv_fac = parent.log_deriv.exp()   # |(F^n)'| as a value
    cells = []
    areas = []
    k_max = int(r / (8.0 * math.pi)) + 2
    for ch in off.children:
        fw = ch.image_square.center
        dfv = abs(build.tmap.deriv(ch.center))
        base_in = xf(ch.inner_radius) / deriv_fac
        base_out = xf(ch.outer_radius) / deriv_fac
        for k in range(-k_max, k_max + 1):
            pos = ch.center + 2j * math.pi * k
            if abs(pos.imag - parent.im_z) + ch.outer_radius > 0.25 * r:
                continue
            abs_center = pos if parent.n == 0 else None
            cell = Cell(
                n=parent.n + 1, cell_id=build.new_id(),
                parent_id=parent.cell_id, k_translate=k,
                log_x=xf(math.log(fw.real)),
                log_r=xf(math.log(ch.image_square.half_side)),
                log_r_over_x=xf(math.log(ch.image_square.half_side
                                         / fw.real)),
                im_z=fw.imag,
                log_deriv=parent.log_deriv + math.log(dfv),
                log_diam_lo=(base_in * 2.0).log(),
                log_diam_hi=(base_out * 2.0).log(),
                log_area_lo=(base_in * base_in * math.pi).log(),
                log_area_hi=(base_out * base_out * math.pi).log(),
                rel_re=(pos.real - x) / r,
                rel_im=(pos.imag - parent.im_z) / r,
                abs_center=abs_center,
                concrete_child=ch,
                dist_bar=parent.dist_bar * k_step,
            )
            cells.append(cell)
            areas.append(cell.log_area_gm.exp())
    if not cells:
        raise DegenerateConstructionError(
            "no translate survived the quarter-square filter",
            off.diagnostics)

    res = sorted(c.center.real for c in off.children)
    gaps = [b - a for a, b in zip(res, res[1:]) if b > a]
    gap_within = min(gaps) if gaps else 0.25 * r
    exp = Expansion(
        parent_id=parent.cell_id, complete=True,
        log_N=xf(math.log(float(len(cells)))),
        log_n_re=xf(math.log(float(len(off.children)))),
        log_translates=xf(math.log(float(len(cells))
                                   / float(len(off.children)))),
        log_area_total=xsum(areas).log(),
        log_gap_within=xf(math.log(gap_within)),
        log_gap_cluster=xf(math.log(6.0 * min(c.r_u for c in off.clusters))),
        log_child_inner_rel=xf(math.log(min(c.inner_radius
                                            for c in off.children))),
        log_child_outer_rel=xf(math.log(max(c.outer_radius
                                            for c in off.children))),
        k_step=k_step,
        offspring=off, verification=rep,
    )
    return cells, exp


def _softplus(v):
    """log(1 + e^v) for an Xf value v, absorption-aware."""
    fv = float(v)
    if fv > 36.0:
        return v
    if fv < -700.0:
        return ZERO
    return xf(math.log1p(math.exp(fv)))


def _expand_aggregate(build, parent, L, rel_positions=(-0.2, 0.0, 0.2)):
    """Closed-form offspring totals; a few representatives materialised.

    Requires the family's asymptotic growth model.  The cluster layout
    is uniform for the built-in families (covering selection on equal or
    slowly varying radii): clusters every 6 r_u along the good base,
    m_k + 1 children per cluster spaced delta*rho_k in the image, and
    about r/(4 pi) vertical translates per child.  The relative sandwich
    radii are abscissa-free because rho_k carries h'(u_k) while the
    pullback divides it out again.

    Counts and margins live in log space throughout; quantities whose
    leading parts cancel (window length, r'/x' ratios) come from the
    closed forms, never from tower-scale subtraction.
    """
    am = build.tmap.asympt
    if am is None:
        raise DegenerateConstructionError(
            "cell beyond plain evaluation range and family has no "
            "asymptotic growth model; level truncated", {})
    params = build.params
    delta, p = params.delta, params.p
    x = parent.log_x.exp()     # OverflowError here is the depth cap
    r = parent.log_r.exp()
    p_log_x = parent.log_x * p
    ld2 = 2.0 * math.log(delta)

    # good part of the inset base window, via the analytic threshold
    min_x = getattr(L, "min_x", None)
    if min_x is None:
        min_x = am.good_min_x(p)
    win_lo = x - r * 0.25 + 1.0
    u_hi = x + r * 0.25 - 1.0
    clipped = xf(min_x) > win_lo
    u_lo = xf(min_x) if clipped else win_lo
    if not u_hi > u_lo:
        raise DegenerateConstructionError(
            "good base window empty", {"cell": parent.cell_id})
    if clipped:
        # clipping only happens at modest abscissas, where the plain
        # difference is exact
        length_lp = u_hi - u_lo
    else:
        length_lp = r * 0.5 - 2.0
    if not length_lp > ZERO:
        raise DegenerateConstructionError(
            "inset base window has no length", {"cell": parent.cell_id})

    u_mid = (u_lo + u_hi) * 0.5
    log_ratio_mid = am.log_ratio(u_mid)   # log h'/h, modest by (c)
    log_r_u = -log_ratio_mid
    # clusters every 6 r_u, at least one
    log_ncl = _softplus(length_lp.log() - math.log(6.0) + log_ratio_mid)
    # children per cluster: m_k + 1 with m_k = delta r_u x^p
    log_mk = xf(math.log(delta)) + log_r_u + p_log_x
    log_percl = _softplus(log_mk)
    # vertical translates inside the quarter square
    fq = float(r * 0.25)
    if math.isfinite(fq) and fq < 1e7:
        log_tr = xf(math.log(float(max(
            1, 2 * int(fq / (2 * math.pi)) + 1))))
    else:
        log_tr = r.log() - math.log(4.0 * math.pi)
    log_n_re = log_ncl + log_percl
    log_n = log_n_re + log_tr

    # image-plane sandwich radii (abscissa-free): delta^2/(4 x^p) inside,
    # sqrt(2) delta^2/x^p outside up to the local distortion factor
    log_inner_rel = xf(ld2 - math.log(4.0)) - p_log_x
    rho_loc = float((xf(ld2 + 0.5 * LOG_2) + log_ratio_mid - p_log_x).exp())
    rho_loc = min(rho_loc, 0.49)
    outer_corr = 1.0 / (1.0 - rho_loc) ** 2
    log_outer_rel = xf(ld2 + 0.5 * LOG_2 + math.log(outer_corr)) - p_log_x
    k_step = min(((1.0 + rho_loc) / (1.0 - rho_loc)) ** 4, 1e6)

    log_area_child = (xf(LOG_PI) + log_inner_rel + log_outer_rel
                      - parent.log_deriv * 2.0)
    log_area_total = log_n + log_area_child

    # representative image squares must themselves be admissible: size
    # floor on r' = delta^2 h'(u)/x^p, and r'/x' below one half (the
    # ratio comes from the closed form, its leading parts cancel)
    log_r_child_mid = xf(ld2) + am.log_hp(u_mid) - p_log_x
    if not log_r_child_mid > xf(math.log(100.0 * params.scale)):
        raise DegenerateConstructionError(
            "child squares below the admissible size floor",
            {"cell": parent.cell_id})
    log_r_over_x = xf(ld2) + log_ratio_mid - p_log_x
    if not log_r_over_x < xf(-LOG_2):
        raise DegenerateConstructionError(
            "child squares taller than half their centre abscissa",
            {"cell": parent.cell_id})

    fmk = float(log_mk)
    mk_int = int(math.exp(fmk)) if fmk < 27.0 else None
    if mk_int is not None and mk_int < 1:
        mk_int = None

    cells = []
    for t in rel_positions:
        u = x + r * t
        if u < u_lo or u > u_hi:
            continue
        lh_u = am.log_h(u)
        lhp_u = am.log_hp(u)
        l_choices = (0,) if mk_int is None else (0, mk_int)
        for l_count in l_choices:
            bump = 0.0
            if l_count:
                # l delta/(r_u x^p) <= delta^2 stays float-sized
                bv = xf(math.log(l_count * delta)) \
                    + am.log_ratio(u) - p_log_x
                bump = math.exp(min(float(bv), 0.0))
            log_x_child = lh_u + math.log1p(bump) if bump > 0 else lh_u
            log_r_child = xf(ld2) + lhp_u - p_log_x
            log_deriv_child = parent.log_deriv + lhp_u
            base_in = log_inner_rel - parent.log_deriv
            base_out = log_outer_rel - parent.log_deriv
            abs_center = None
            if parent.abs_center is not None:
                off = float((r * t) / parent.log_deriv.exp()) if t else 0.0
                if math.isfinite(off):
                    abs_center = parent.abs_center + off
            cells.append(Cell(
                n=parent.n + 1, cell_id=build.new_id(),
                parent_id=parent.cell_id, k_translate=0,
                log_x=log_x_child, log_r=log_r_child,
                log_r_over_x=xf(ld2) + am.log_ratio(u) - p_log_x,
                im_z=0.0,
                log_deriv=log_deriv_child,
                log_diam_lo=base_in + LOG_2,
                log_diam_hi=base_out + LOG_2,
                log_area_lo=xf(LOG_PI) + base_in * 2.0,
                log_area_hi=xf(LOG_PI) + base_out * 2.0,
                rel_re=t, rel_im=0.0,
                abs_center=abs_center,
                dist_bar=parent.dist_bar * k_step,
            ))
    if not cells:
        raise DegenerateConstructionError(
            "no representative child landed in the good window",
            {"cell": parent.cell_id})
    exp = Expansion(
        parent_id=parent.cell_id, complete=False,
        log_N=log_n,
        log_n_re=log_n_re,
        log_translates=log_tr,
        log_area_total=log_area_total,
        log_gap_within=xf(math.log(delta * (1 - 26 * delta ** 2)))
        - p_log_x,
        log_gap_cluster=math.log(6.0) + log_r_u,
        log_child_inner_rel=log_inner_rel,
        log_child_outer_rel=log_outer_rel,
        k_step=k_step,
    )
    return cells, exp


def _concrete_feasible(build, parent, enum_cap):
    """Concrete expansion: root level, plain-range image, modest count."""
    if parent.n != 0:
        return False
    try:
        x = float(parent.log_x.exp())
        r = float(parent.log_r.exp())
    except OverflowError:
        return False
    if not (math.isfinite(x) and math.isfinite(r)):
        return False
    if build.tmap.closed_growth is not None:
        if build.tmap.closed_growth(x + 0.25 * r)[0] > 600.0:
            return False
    est = (r / 8.0 + 1.0) * max(1.0, r / (4.0 * math.pi))
    return est <= enum_cap


def build_levels(tmap, profile, L, q0, params, n_max,
                 enum_cap=4096, verify_concrete=True,
                 rel_positions=(-0.2, 0.0, 0.2)):
    """Build the nested families down to generation `n_max`.

    `q0` is the admissible root square (its centre abscissa must exceed
    the mode-scaled working floor).  The root level expands concretely;
    deeper levels use the closed-form aggregate path, since their image
    planes leave double range for every genuine tract family.  A level
    that cannot be built truncates the run with its diagnostic recorded
    on the build.
    """
    del profile  # growth data comes from the map's closed forms
    build = LevelBuild(tmap, params, q0)
    root = Cell(
        n=0, cell_id=build.new_id(), parent_id=None, k_translate=0,
        log_x=xf(math.log(q0.center.real)),
        log_r=xf(math.log(q0.half_side)),
        log_r_over_x=xf(math.log(q0.half_side / q0.center.real)),
        im_z=q0.center.imag,
        log_deriv=ZERO,
        log_diam_lo=xf(math.log(q0.diameter)),
        log_diam_hi=xf(math.log(q0.diameter)),
        log_area_lo=xf(math.log(q0.area)),
        log_area_hi=xf(math.log(q0.area)),
        rel_re=0.0, rel_im=0.0,
        abs_center=q0.center,
    )
    build.add_cell(root)
    for n in range(n_max):
        new_cells = []
        for parent in build.levels[n]:
            try:
                if _concrete_feasible(build, parent, enum_cap):
                    cells, exp = _expand_concrete(
                        build, parent, L, verify=verify_concrete)
                else:
                    cells, exp = _expand_aggregate(
                        build, parent, L, rel_positions=rel_positions)
            except (DegenerateConstructionError, PreconditionError,
                    OverflowError) as e:
                build.truncated = (n + 1, str(e))
                if n == 0:
                    raise
                break
            build.expansions[parent.cell_id] = exp
            for c in cells:
                build.add_cell(c)
            new_cells.extend(cells)
        if build.truncated or not new_cells:
            break
    return build


# ---------------------------------------------------------------------------
# the mass tree


@dataclass
class FrostmanMeasure:
    """Per-cell masses; children split the parent mass by area share."""

    build: LevelBuild
    conservation_error: float
    sensitivity: float       # worst |log mass shift| switching area proxy

    def log_mass(self, cell):
        return cell.log_mass


def frostman_measure(build):
    """Assign masses top-down by the area-proportional splitting rule.

    Each child receives parent_mass * (own area)/(area total over all
    siblings); the total is the enumerated sum for complete expansions
    and the closed-form aggregate otherwise, so the per-parent mass
    identity holds exactly either way.  The conservation error reported
    is the worst re-summation defect over complete expansions, and the
    sensitivity is the worst log-mass shift from switching the area
    proxy to its lower/upper bracket.
    """
    root = build.levels[0][0]
    root.log_mass = ZERO
    worst = 0.0
    sens = 0.0
    for n in range(build.n_levels - 1):
        for parent in build.levels[n]:
            kids = build.children.get(parent.cell_id)
            if not kids:
                continue
            exp = build.expansions[parent.cell_id]
            if exp.complete:
                log_total = xsum(k.log_area_gm.exp() for k in kids).log()
                for k in kids:
                    k.log_mass = parent.log_mass + k.log_area_gm - log_total
                tot = xsum(k.log_mass.exp() for k in kids)
                worst = max(worst,
                            abs(float(tot / parent.log_mass.exp()) - 1.0))
                lo_total = xsum(k.log_area_lo.exp() for k in kids).log()
                hi_total = xsum(k.log_area_hi.exp() for k in kids).log()
                for k in kids:
                    base = float(k.log_area_gm - log_total)
                    sens = max(sens,
                               abs(float(k.log_area_lo - lo_total) - base),
                               abs(float(k.log_area_hi - hi_total) - base))
            else:
                widths = []
                for k in kids:
                    k.log_mass = (parent.log_mass + k.log_area_gm
                                  - exp.log_area_total)
                    widths.append(float(k.log_area_hi - k.log_area_lo))
                # switching the proxy moves child and total together, so
                # the shift is the spread of bracket widths across kids
                if widths:
                    sens = max(sens, 0.5 * (max(widths) - min(widths)))
    for lvl in build.levels:
        for c in lvl:
            if c.log_mass is None:
                raise RuntimeError("mass assignment left a cell unset")
    return FrostmanMeasure(build, conservation_error=worst,
                           sensitivity=sens)


def sibling_log_mass(build, cell):
    """Typical mass of one child of `cell`'s parent (uniform share)."""
    exp = build.expansions[cell.parent_id]
    parent = build.cells[cell.parent_id]
    if exp.complete:
        return cell.log_mass
    return parent.log_mass - exp.log_N


# ---------------------------------------------------------------------------
# per-lemma checks


def density_delta(build, cell):
    """Children-area density of a cell: sum of child areas / own area.

    Returns (delta as Xf, floor as Xf, ok); the floor is the measured-
    constant form (c1^2 c3)/(32 K^2) / x_n^p.
    """
    exp = build.expansions.get(cell.cell_id)
    if exp is None:
        raise ValueError(f"cell {cell.cell_id} has no children")
    params = build.params
    delta_val = (exp.log_area_total - cell.log_area_gm).exp()
    k = max(exp.k_step, 1.0)
    c5 = (params.c1 ** 2 * params.c3) / (32.0 * k * k)
    floor = xf(c5) / (cell.log_x * params.p).exp()
    return delta_val, floor, bool(delta_val >= floor)


def distortion_check(build, cell, n_samples=32):
    """Distortion of the n-step derivative across the cell.

    Level-1 concrete cells sample |F'| directly on the outer disk.
    Deeper cells bound the sampled ratio analytically: at each
    intermediate plane the cell occupies a disk whose radius is the
    own diameter scaled up by that plane's chain derivative, and the
    plane's log-derivative varies by at most its local Lipschitz
    constant times that extent.
    """
    if cell.n == 0:
        return 1.0
    if cell.n == 1 and cell.abs_center is not None:
        tmap = build.tmap
        rad = 0.5 * float(cell.log_diam_hi.exp())
        lo, hi = math.inf, 0.0
        for i in range(n_samples):
            th = 2 * math.pi * (i + 0.5) / n_samples
            z = cell.abs_center + rad * complex(math.cos(th), math.sin(th))
            v = abs(tmap.deriv(z))
            lo, hi = min(lo, v), max(hi, v)
        return hi / lo if lo > 0 else math.inf
    chain = build.chain(cell)
    total_span = 0.0
    for j in range(cell.n):
        anc = chain[j]
        log_extent = cell.log_diam_hi + anc.log_deriv
        lip = _log_deriv_lipschitz(build.tmap, anc.log_x)
        span = float(log_extent.exp() * lip)
        if math.isfinite(span):
            total_span += min(span, 50.0)
        total_span = min(total_span, 50.0)
    return math.exp(total_span)


def _log_deriv_lipschitz(tmap, log_x):
    """Bound on |d/dz log F'| near the real axis at abscissa exp(log_x)."""
    fam = tmap.params.get("family")
    if fam == "model":
        q = tmap.params["q"]
        if q > 1.0:
            return xf(q) * log_x.exp().powf(q - 1.0)
    return ONE


def derivative_floor_check(build, cell):
    """Chain-derivative floor x_n/(8 pi), one-step floor, growth recursion.

    Returns a dict with booleans and sign-log margins (all comparisons
    happen on logs; nothing is exponentiated back).
    """
    out = {}
    params = build.params
    floor = cell.log_x - math.log(8.0 * math.pi)
    out["chain_floor_ok"] = bool(cell.log_deriv >= floor)
    out["chain_floor_margin"] = cell.log_deriv - floor
    parent = build.parent(cell)
    if parent is not None:
        # one step: log|F'| at the last chain point >= log Re F - log 4pi
        last = cell.log_deriv - parent.log_deriv
        one_floor = cell.log_x - math.log(4.0 * math.pi)
        out["one_step_ok"] = bool(last >= one_floor)
        # growth recursion with the mode-scaled floor
        rec_floor = parent.log_x.exp() * (1.0 / 15.0) \
            + math.log(params.scale)
        out["recursion_ok"] = bool(cell.log_x >= rec_floor)
        out["recursion_margin"] = cell.log_x - rec_floor
    return out


def separation_check(build, parent):
    """Sibling cells keep distance at least the larger sibling diameter."""
    return separation_report(build, parent)["ok"]


def separation_report(build, parent):
    kids = build.children.get(parent.cell_id, [])
    exp = build.expansions.get(parent.cell_id)
    if exp is None or not kids:
        return {"ok": True, "vacuous": True}
    k = max(exp.k_step, 1.0)
    tau = build.params.tau_effective(k)
    bound = 2.0 * k / (tau - 2.0) if tau > 2.0 else math.inf
    if exp.complete and all(c.abs_center is not None for c in kids):
        if len(kids) < 2:
            return {"ok": True, "vacuous": True}
        worst = math.inf
        for i in range(len(kids)):
            for j in range(i + 1, len(kids)):
                a, b = kids[i], kids[j]
                da = float(a.log_diam_hi.exp())
                db = float(b.log_diam_hi.exp())
                d = abs(a.abs_center - b.abs_center) - 0.5 * da - 0.5 * db
                worst = min(worst, d / max(da, db))
        return {"ok": worst >= 1.0, "vacuous": False,
                "min_dist_over_diam": worst,
                "bound_2k_over_tau_minus_2": bound}
    # aggregate path: the smallest image-plane gap among the three grid
    # directions against the sandwich diameter, with a K^2 haircut for
    # the pullback
    gap = exp.log_gap_within
    if exp.log_translates > xf(math.log(1.5)) and xf(LOG_2PI) < gap:
        gap = xf(LOG_2PI)
    outer = exp.log_child_outer_rel.exp()
    dist_rel = gap.exp() - outer * 2.0
    if not dist_rel > ZERO:
        return {"ok": False, "vacuous": False, "min_dist_over_diam": 0.0,
                "bound_2k_over_tau_minus_2": bound}
    ratio = dist_rel / (outer * 2.0) / (k * k)
    return {"ok": bool(ratio >= ONE), "vacuous": False,
            "min_dist_over_diam": float(ratio),
            "bound_2k_over_tau_minus_2": bound}


def diameter_sandwich_check(build, cell):
    """Certified diameter inside [c6, c7]/(x_n^p |(F^n)'|), measured K."""
    parent = build.parent(cell)
    if parent is None:
        return {"ok": True, "vacuous": True}
    params = build.params
    k = max(build.expansions[parent.cell_id].k_step, 1.0) * cell.dist_bar
    c6 = 2.0 * params.c1 / k
    c7 = 2.0 * params.c2 * k
    denom = parent.log_x * params.p + parent.log_deriv
    lo = xf(math.log(c6)) - denom
    hi = xf(math.log(c7)) - denom
    ok = bool(lo <= cell.log_diam_lo and cell.log_diam_hi <= hi)
    # shrink consequence: d_{n+1} <= 8 pi c7 / x_n^{p+1}
    shrink = xf(math.log(8.0 * math.pi * c7)) \
        - parent.log_x * (params.p + 1.0)
    return {"ok": ok, "vacuous": False, "lo": lo, "hi": hi,
            "shrink_ok": bool(cell.log_diam_hi <= shrink)}


def nesting_check(build, cell):
    """Child fits in the parent: pullback offset + own radius vs parent."""
    parent = build.parent(cell)
    if parent is None:
        return True
    off_rel = math.hypot(cell.rel_re, cell.rel_im)
    if off_rel == 0.0:
        off_base = ZERO
    else:
        off_base = (parent.log_r + math.log(off_rel)
                    - parent.log_deriv).exp() * cell.dist_bar
    child_rad = (cell.log_diam_hi - LOG_2).exp()
    parent_rad = (parent.log_diam_hi - LOG_2).exp()
    return bool(off_base + child_rad <= parent_rad * (1 + 1e-9))


def export_levels_csv(build, measure, path):
    del measure  # masses already sit on the cells
    cols = ["n", "cell_id", "parent_id", "k_translate", "log_x_n",
            "log_deriv", "log_diam", "area_lo", "area_hi", "mass"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for lvl in build.levels:
            for c in lvl:
                w.writerow([
                    c.n, c.cell_id,
                    c.parent_id if c.parent_id is not None else "",
                    c.k_translate,
                    c.log_x.text(), c.log_deriv.text(), c.log_diam.text(),
                    c.log_area_lo.text(), c.log_area_hi.text(),
                    c.log_mass.text() if c.log_mass is not None else "",
                ])
