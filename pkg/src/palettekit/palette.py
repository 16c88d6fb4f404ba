"""Automatic palette extraction by RMSE-bounded convex hull simplification.

The palette is the vertex set of the image's RGB convex hull after greedy
edge-collapse simplification, stopped just before the binned reconstruction
RMSE would exceed the tolerance (default 2/255).  Colors are clamped to the
RGB cube and ordered lightest first.
"""

from dataclasses import dataclass

import numpy as np

from . import colorspace, geomkit

DEFAULT_RMSE_TOL = 2.0 / 255.0
BINS_PER_AXIS = 32
RMSE_CHECK_VERTEX_COUNT = 10
MIN_PALETTE_SIZE = 4
# pairwise color separation guaranteed in every returned palette
SEPARATION = 1e-6
# offset used when padding degenerate (flat) color clouds to a full simplex
_PAD_DELTA = 0.01


@dataclass(frozen=True)
class Palette:
    """Ordered palette colors, each in [0,1]^3.  Order is significant."""

    colors: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "colors", np.ascontiguousarray(np.asarray(self.colors, dtype=np.float64))
        )

    def __len__(self):
        return len(self.colors)

    def to_json_dict(self):
        return {"colors": [[float(c) for c in row] for row in self.colors]}

    @classmethod
    def from_json_dict(cls, data):
        colors = np.asarray(data["colors"], dtype=np.float64)
        if colors.ndim != 2 or colors.shape[1] != 3:
            raise ValueError("palette JSON must hold an array of [r,g,b] rows")
        return cls(colors)


@dataclass(frozen=True)
class BinnedHistogram:
    """Non-empty 32^3 RGB bins: flat bin ids, center colors, pixel counts."""

    bin_ids: np.ndarray
    colors: np.ndarray
    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())


def bin_image(img):
    """Histogram an (H, W, 3) image into 32x32x32 RGB bins."""
    pixels = np.asarray(img, dtype=np.float64).reshape(-1, 3)
    idx = np.clip((pixels * BINS_PER_AXIS).astype(np.int64), 0, BINS_PER_AXIS - 1)
    flat = (idx[:, 0] * BINS_PER_AXIS + idx[:, 1]) * BINS_PER_AXIS + idx[:, 2]
    ids, counts = np.unique(flat, return_counts=True)
    return BinnedHistogram(ids, _bin_centers(ids), counts)


def merge_histograms(hists):
    """Accumulate bin counts across several histograms (video aggregation)."""
    ids = np.concatenate([h.bin_ids for h in hists])
    counts = np.concatenate([h.counts for h in hists])
    uniq, inv = np.unique(ids, return_inverse=True)
    summed = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(summed, inv, counts)
    return BinnedHistogram(uniq, _bin_centers(uniq), summed)


def _bin_centers(ids):
    r = ids // (BINS_PER_AXIS * BINS_PER_AXIS)
    g = (ids // BINS_PER_AXIS) % BINS_PER_AXIS
    b = ids % BINS_PER_AXIS
    return (np.stack([r, g, b], axis=1) + 0.5) / BINS_PER_AXIS


def binned_rmse(hist, hull):
    """Count-weighted RMSE of bin-center distances to the hull (inside = 0)."""
    d, _ = geomkit.distance_to_hull(hull, hist.colors)
    return float(np.sqrt(np.sum(hist.counts * d ** 2) / hist.counts.sum()))


def _clamped_rmse(hull, hist):
    clamped = np.clip(hull.vertices, 0.0, 1.0)
    try:
        chull, _, _ = geomkit.convex_hull_robust(clamped)
    except geomkit.DegenerateInput:
        return np.inf
    return binned_rmse(hist, chull)


def _lightness_order(colors):
    l = colorspace.rgb_to_lab(colors)[:, 0]
    return np.lexsort((colors[:, 2], colors[:, 1], colors[:, 0], -l))


def _enforce_separation(colors):
    """Nudge near-duplicate colors apart so palettes stay pairwise distinct."""
    colors = colors.copy()
    for i in range(len(colors)):
        for j in range(i):
            if np.max(np.abs(colors[i] - colors[j])) <= SEPARATION:
                axis = int(np.argmax(np.abs(colors[i] - 0.5)))
                step = 2 * SEPARATION if colors[i][axis] < 0.5 else -2 * SEPARATION
                colors[i][axis] += step * (i + 1)
    return np.clip(colors, 0.0, 1.0)


def _orthonormal_complement(u):
    """Two deterministic unit vectors orthogonal to u."""
    a = np.eye(3)[np.argmin(np.abs(u))]
    v1 = a - np.dot(a, u) * u
    v1 /= np.linalg.norm(v1)
    return v1, np.cross(u, v1)


def _pad_direction(base, d):
    """Offset base by +-_PAD_DELTA * d, whichever stays farther inside the cube."""
    plus = base + _PAD_DELTA * d
    minus = base - _PAD_DELTA * d
    if np.linalg.norm(np.clip(plus, 0, 1) - plus) <= np.linalg.norm(np.clip(minus, 0, 1) - minus):
        return np.clip(plus, 0, 1)
    return np.clip(minus, 0, 1)


def _degenerate_palette(distinct):
    """Minimal full-rank palette for flat color clouds.

    Keeps the extreme real colors exactly (so eg. a grey ramp's blacks and
    whites survive, and grey pixels stay 2-sparse on the black-white edge) and
    pads with slightly offset colors to reach a 3D simplex.
    """
    centered = distinct - distinct.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    rank = int(np.sum(svals > 1e-7 * max(1.0, svals[0])))
    if rank == 0:
        base = distinct[0]
        signs = np.where(base <= 0.5, 1.0, -1.0)
        pads = [np.clip(base + _PAD_DELTA * s * e, 0, 1) for s, e in zip(signs, np.eye(3))]
        colors = np.vstack([base] + pads)
    elif rank == 1:
        u = np.linalg.svd(centered)[2][0]
        t = centered @ u
        lo, hi = distinct[int(np.argmin(t))], distinct[int(np.argmax(t))]
        mid = 0.5 * (lo + hi)
        v1, v2 = _orthonormal_complement(u)
        colors = np.vstack([lo, hi, _pad_direction(mid, v1), _pad_direction(mid, v2)])
    else:
        # three distinct colors spanning a plane: pad along its normal
        n = np.cross(distinct[1] - distinct[0], distinct[2] - distinct[0])
        n /= np.linalg.norm(n)
        colors = np.vstack([distinct[:3], _pad_direction(distinct.mean(axis=0), n)])
    colors = _enforce_separation(colors)
    return Palette(colors[_lightness_order(colors)])


def palette_from_points(points, hist, rmse_tol=DEFAULT_RMSE_TOL):
    """Shared palette construction from a color point set and its histogram.

    Simplifies the convex hull greedily; once at most 10 vertices remain every
    collapse is vetted against the clamped-hull binned RMSE and the first
    violation stops the walk.  If the smallest accepted hull still violates
    the tolerance, earlier hulls are retried back to the unsimplified one.
    """
    distinct = np.unique(np.asarray(points, dtype=np.float64).reshape(-1, 3), axis=0)
    centered = distinct - (distinct.mean(axis=0) if len(distinct) else 0.0)
    svals = np.linalg.svd(centered, compute_uv=False) if len(distinct) else np.zeros(3)
    rank = int(np.sum(svals > 1e-7 * max(1.0, svals[0] if len(svals) else 0.0)))
    if len(distinct) < MIN_PALETTE_SIZE or rank <= 1:
        return _degenerate_palette(distinct)

    hull0, _, _ = geomkit.convex_hull_robust(distinct)

    def stop(candidate):
        if len(candidate.vertices) > RMSE_CHECK_VERTEX_COUNT:
            return False
        if len(candidate.vertices) < MIN_PALETTE_SIZE:
            return True
        return _clamped_rmse(candidate, hist) > rmse_tol

    sequence = [hull0] + geomkit.simplify_hull(hull0, stop)
    chosen = None
    for hull in reversed(sequence):
        if _clamped_rmse(hull, hist) <= rmse_tol:
            chosen = hull
            break
    if chosen is None:
        chosen = hull0  # tolerance unattainable even unsimplified
    colors = _enforce_separation(np.clip(chosen.vertices, 0.0, 1.0))
    return Palette(colors[_lightness_order(colors)])


def extract_palette(img, rmse_tol=DEFAULT_RMSE_TOL):
    """Palette of automatically chosen size for an (H, W, 3) image."""
    img = np.asarray(img, dtype=np.float64)
    return palette_from_points(img.reshape(-1, 3), bin_image(img), rmse_tol)
