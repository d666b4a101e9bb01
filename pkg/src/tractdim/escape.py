"""Escape-time classification and box-counting slope, as a cross-check.

This is a finite-scale heuristic and is labelled as such in every
report: box counts of the escaped/retained interface at desk resolution
under-report hairy boundaries, so slopes are a trend, not a dimension.
The iteration is z -> lam*exp(z); a pixel escapes at the first step its
modulus exceeds the threshold (one overflow step past double range is
caught through the IEEE infinities).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EscapeGrid",
    "classify",
    "box_count",
    "boundary_mask",
    "fixture_mask",
    "write_pgm",
]


@dataclass
class EscapeGrid:
    lam: complex
    window: tuple            # (re_min, re_max, im_min, im_max)
    resolution: int
    n_iter: int
    threshold_log: float
    esc_step: np.ndarray     # 0 = retained within n_iter, else first step

    @property
    def escaped(self):
        return self.esc_step > 0

    def escaped_fraction(self):
        return float(self.escaped.mean())


def classify(lam, window=(-2.0, 4.0, -math.pi, math.pi), resolution=512,
             n_iter=20, threshold_log=50.0, threads=1):
    """Escape-time classification of z -> lam*exp(z) on a pixel grid."""
    if lam == 0:
        raise ValueError("lam must be nonzero")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if n_iter > 64:
        raise ValueError("iterate cap is 64")
    re_min, re_max, im_min, im_max = window
    xs = np.linspace(re_min, re_max, resolution)
    ys = np.linspace(im_min, im_max, resolution)
    thresh = threshold_log

    def run_rows(y_block):
        z = xs[None, :] + 1j * y_block[:, None]
        esc = np.zeros(z.shape, dtype=np.int32)
        active = np.ones(z.shape, dtype=bool)
        for k in range(1, n_iter + 1):
            with np.errstate(over="ignore", invalid="ignore"):
                zz = z[active]
                # cap the exponent so inf (not nan) flags the blow-ups
                zz = np.where(zz.real > 1e4, 1e4 + 1j * zz.imag, zz)
                z[active] = lam * np.exp(zz)
                mag = np.abs(z)
            newly = active & ((mag > math.exp(min(thresh, 700.0)))
                              | ~np.isfinite(mag))
            esc[newly] = k
            active &= ~newly
            if not active.any():
                break
        return esc

    if threads <= 1:
        esc = run_rows(ys)
    else:
        blocks = np.array_split(ys, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_rows, blocks))
        esc = np.vstack(parts)
    return EscapeGrid(lam=lam, window=window, resolution=resolution,
                      n_iter=n_iter, threshold_log=threshold_log,
                      esc_step=esc)


def boundary_mask(classification):
    """Pixels adjacent to a different class (4-neighbourhood).

    The classification is per-pixel {escaped at step k | retained}; the
    interface includes both the escaped/retained boundary and the
    boundaries between consecutive escape-step layers, which is the
    structure the escaping set accumulates on at finite depth.  A plain
    boolean mask works too and then gives the binary boundary.
    """
    e = np.asarray(classification)
    b = np.zeros(e.shape, dtype=bool)
    b[:-1, :] |= e[:-1, :] != e[1:, :]
    b[1:, :] |= e[1:, :] != e[:-1, :]
    b[:, :-1] |= e[:, :-1] != e[:, 1:]
    b[:, 1:] |= e[:, 1:] != e[:, :-1]
    return b


def box_count(mask, scales):
    """Least-squares slope of log N(s) against log(1/s) for box sides s.

    `mask` is the boolean set to cover; each scale must divide the grid
    side.  Returns (slope, counts).  A mask that is empty or full is
    degenerate for an interface count and raises ValueError.
    """
    mask = np.asarray(mask, dtype=bool)
    n = mask.shape[0]
    if mask.shape[0] != mask.shape[1]:
        raise ValueError("mask must be square")
    if len(scales) < 3:
        raise ValueError("need at least 3 scales")
    if not mask.any():
        raise ValueError("degenerate mask: nothing to cover")
    counts = []
    for s in scales:
        s = int(s)
        if s <= 0 or n % s != 0:
            raise ValueError(f"scale {s} does not divide grid side {n}")
        view = mask.reshape(n // s, s, n // s, s)
        counts.append(int(view.any(axis=(1, 3)).sum()))
    log_n = np.log(np.asarray(counts, dtype=float))
    log_inv = -np.log(np.asarray([float(s) for s in scales]))
    slope = float(np.polyfit(log_inv, log_n, 1)[0])
    return slope, counts


def fixture_mask(kind, n=2048):
    """Synthetic masks of known box dimension: plane, line, cantor-dust."""
    if kind == "plane":
        return np.ones((n, n), dtype=bool)
    if kind == "line":
        m = np.zeros((n, n), dtype=bool)
        m[n // 2, :] = True
        return m
    if kind == "cantor-dust":
        depth = int(math.floor(math.log(n) / math.log(3.0)))
        t = np.arange(n, dtype=np.float64) / n
        keep = np.ones(n, dtype=bool)
        x = t.copy()
        for _ in range(depth):
            x = x * 3.0
            digit = np.floor(x).astype(int)
            keep &= digit != 1
            x -= digit
        return np.outer(keep, keep)
    raise ValueError(f"unknown fixture {kind!r}")


def write_pgm(path, esc_step, n_iter):
    """Binary PGM of escape steps (retained pixels are black)."""
    esc = np.asarray(esc_step)
    img = np.where(esc > 0,
                   255 - (esc * (200.0 / max(1, n_iter))).astype(np.uint8),
                   0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())
