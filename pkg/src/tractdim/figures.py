"""Figure rendering for the report path.

Every CLI command that writes delimited output also renders a PNG next
to it.  Figures are diagnostic companions to the CSV/JSON files, not a
replacement: the growth plot shows log h and the ratio bounds, the
good-set plot the interval structure, the dimension plot the sampled
mass-scaling cloud with both estimates, the box-count plot the count
fit over the escape image.
"""

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "render_growth",
    "render_goodset",
    "render_offspring",
    "render_dimension",
    "render_boxcount",
    "render_escape",
]

_SAVE = dict(dpi=110, bbox_inches="tight")


def render_growth(profile, report, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 3.6))
    ax1.plot(profile.xs, profile.log_h, lw=1.2, label="log h")
    ax1.plot(profile.xs, profile.xs / 13.0, "--", lw=0.9,
             label="x/13 floor")
    qe = profile.q + profile.epsilon
    ax1.plot(profile.xs, profile.xs ** qe, ":", lw=0.9,
             label=f"x^{qe:.2f} ceiling")
    ax1.set_xlabel("x")
    ax1.set_ylabel("log h(x)")
    ax1.legend(fontsize=8)
    ratio = profile.log_hp - profile.log_h
    ax2.plot(profile.xs, ratio, lw=1.2, label="log h'/h")
    ax2.axhline(-math.log(4 * math.pi), color="r", ls="--", lw=0.9,
                label="log 1/(4pi)")
    ax2.plot(profile.xs, profile.p * np.log(profile.xs), ":", lw=0.9,
             label=f"p log x, p={profile.p}")
    ax2.set_xlabel("x")
    ax2.legend(fontsize=8)
    title = f"growth profile [{profile.label}]"
    if report is not None and report.x_epsilon is not None:
        title += f"  x_eps={report.x_epsilon:g}"
    fig.suptitle(title, fontsize=10)
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def render_goodset(gs, path):
    fig, ax = plt.subplots(figsize=(8, 2.2))
    for lo, hi in gs.L:
        ax.axvspan(lo, hi, color="tab:blue", alpha=0.5)
    ax.set_xlim(gs.window)
    ax.set_yticks([])
    ax.set_xlabel("x")
    dens = gs.density_in(*gs.window)
    ax.set_title(f"good set, window density {dens:.4f}, p={gs.p}",
                 fontsize=10)
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def render_offspring(off, report, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.2))
    par = off.parent
    x, y, r = par.center.real, par.center.imag, par.half_side
    ax1.add_patch(plt.Rectangle((x - r, y - r), 2 * r, 2 * r,
                                fill=False, color="k", lw=1.0))
    ax1.add_patch(plt.Rectangle((x - r / 4, y - r / 4), r / 2, r / 2,
                                fill=False, color="gray", ls="--", lw=0.8))
    for ch in off.children:
        cx, cy = ch.center.real, ch.center.imag
        ax1.add_patch(plt.Circle((cx, cy), ch.outer_radius,
                                 fill=False, color="tab:red", lw=0.7))
        ax1.plot([cx], [cy], "k.", ms=2)
    ax1.set_aspect("equal")
    ax1.set_title(f"parent and {off.m} child regions", fontsize=10)
    for ch in off.children:
        sq = ch.image_square
        ax2.add_patch(plt.Rectangle(
            (sq.center.real - sq.half_side, sq.center.imag - sq.half_side),
            2 * sq.half_side, 2 * sq.half_side,
            fill=False, color="tab:blue", lw=0.7))
    ax2.set_aspect("equal")
    ax2.autoscale_view()
    ax2.relim()
    ax2.set_title("image squares", fontsize=10)
    ok = "ok" if (report is None or report.ok) else "VIOLATIONS"
    fig.suptitle(f"offspring step at x={x:g}, r={r:g}  [{ok}]", fontsize=10)
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def render_dimension(estimate, path):
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    chords = estimate.lower.window_chords
    if chords:
        ax.bar([f"w{j}" for j, _, _ in chords],
               [c for _, c, _ in chords], color="tab:blue", alpha=0.7,
               label="window chords")
    ax.axhline(estimate.lower.t, color="tab:green", lw=1.2,
               label=f"lower t={estimate.lower.t:.4f}")
    ax.axhline(estimate.upper.s, color="tab:red", lw=1.2, ls="--",
               label=f"upper s={estimate.upper.s:.4f}")
    ax.axhline(estimate.target, color="k", lw=0.8, ls=":",
               label=f"target {estimate.target:.4f}")
    ax.set_ylabel("exponent")
    ax.legend(fontsize=8)
    ax.set_title(f"dimension bracket [{estimate.mode}]", fontsize=10)
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def render_boxcount(scales, counts, slope, path, label=""):
    fig, ax = plt.subplots(figsize=(5.5, 4))
    log_inv = -np.log(np.asarray([float(s) for s in scales]))
    log_n = np.log(np.asarray(counts, dtype=float))
    ax.plot(log_inv, log_n, "o-", ms=4)
    coef = np.polyfit(log_inv, log_n, 1)
    ax.plot(log_inv, np.polyval(coef, log_inv), "--", lw=0.9)
    ax.set_xlabel("log 1/s")
    ax.set_ylabel("log N(s)")
    ax.set_title(f"box counts {label}  slope={slope:.4f} "
                 "(finite-scale trend)", fontsize=10)
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def render_escape(grid, path):
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    re_min, re_max, im_min, im_max = grid.window
    ax.imshow(grid.esc_step, origin="lower",
              extent=(re_min, re_max, im_min, im_max),
              cmap="magma", aspect="auto")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(f"escape steps, lam={grid.lam}, N={grid.n_iter} "
                 "(heuristic trend, not a dimension)", fontsize=10)
    fig.savefig(path, **_SAVE)
    plt.close(fig)
