"""Two-level RGBXY layer decomposition with instant relayering.

Stage one (expensive, once per image): the convex hull of the image in 5D
RGBXY-space and convex weights expressing every pixel over its vertices.
Stage two (cheap, per palette): weights of those few thousand hull vertices
over the palette hull, star-tessellated at the darkest palette color.  Final
per-pixel palette weights are the sparse product of the two stages, so a new
palette only costs stage two plus one multiply.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import colorspace, geomkit
from .palette import Palette

_CHUNK = 1 << 18

try:  # optional kernel for the stage product; scipy path is the fallback
    import numba

    @numba.njit
    def _prod6(data6, cols6, right, out):
        n, k = data6.shape
        p = right.shape[1]
        for i in range(n):
            for t in range(k):
                w = data6[i, t]
                c = cols6[i, t]
                for j in range(p):
                    out[i, j] += w * right[c, j]

except ImportError:  # pragma: no cover
    _prod6 = None


@dataclass
class DecompositionState:
    """Cached 5D stage: RGBXY hull vertices and per-pixel vertex weights.

    weight rows are stored fixed-width (6 slots per pixel, the 5D simplex
    size); values are nonnegative and sum to 1 within 1e-6.  Immutable once
    built and safe to share across threads.
    """

    width: int
    height: int
    xy_scale: float
    rgbxy_vertices: np.ndarray  # (Q, 5)
    data6: np.ndarray  # (N, 6) float64
    cols6: np.ndarray  # (N, 6) int32
    # diagnostic: smallest raw barycentric seen before the clamp to zero
    raw_weight_min: float = 0.0

    _csr_cache: sp.csr_matrix = None

    @property
    def pixel_count(self):
        return self.width * self.height

    @property
    def vertex_count(self):
        return len(self.rgbxy_vertices)

    @property
    def w_rgbxy(self):
        """The stage-one weights as a scipy CSR matrix (N x Q)."""
        if self._csr_cache is None:
            n = self.pixel_count
            csr = sp.csr_matrix(
                (
                    # copies: sort_indices() below must not reorder data6 rows
                    self.data6.ravel().copy(),
                    self.cols6.ravel().astype(np.int64),
                    np.arange(0, 6 * n + 1, 6, dtype=np.int64),
                ),
                shape=(n, self.vertex_count),
            )
            csr.sort_indices()
            self._csr_cache = csr
        return self._csr_cache


@dataclass
class LayerWeights:
    """Per-pixel convex weights over the palette colors (dense N x P).

    P is at most a dozen, so a dense row layout beats index-carrying sparse
    storage; rows are nonnegative and sum to 1 within 1e-4.
    """

    width: int
    height: int
    w: np.ndarray
    # smallest raw pre-clamp coordinate that fed this matrix (diagnostic)
    raw_min: float = 0.0

    @property
    def palette_size(self):
        return self.w.shape[1]


def rgbxy_points(img, xy_scale=1.0):
    """Pixels as (r, g, b, x/Dmax, y/Dmax) rows, aspect ratio preserved."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    dmax = float(max(w, h))
    yy, xx = np.mgrid[0:h, 0:w]
    pts = np.empty((h * w, 5))
    pts[:, :3] = img.reshape(-1, 3)
    pts[:, 3] = xx.ravel() * (xy_scale / dmax)
    pts[:, 4] = yy.ravel() * (xy_scale / dmax)
    return pts


def _identity_state(img, pts, xy_scale):
    """Degenerate fallback: every distinct 5D point is its own vertex."""
    h, w = img.shape[:2]
    verts, inv = np.unique(pts, axis=0, return_inverse=True)
    n = h * w
    data6 = np.zeros((n, 6))
    data6[:, 0] = 1.0
    cols6 = np.zeros((n, 6), dtype=np.int32)
    cols6[:, 0] = inv
    return DecompositionState(
        width=w,
        height=h,
        xy_scale=xy_scale,
        rgbxy_vertices=verts,
        data6=data6,
        cols6=cols6,
    )


def precompute_rgbxy(img, xy_scale=1.0):
    """Build the reusable 5D stage for an image (the expensive step)."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    pts = rgbxy_points(img, xy_scale)
    try:
        hull, pts_used, _ = geomkit.convex_hull_robust(pts)
    except geomkit.DegenerateInput:
        # images too small (or too flat even after jitter) for a 5D hull
        return _identity_state(img, pts, xy_scale)
    tess = geomkit.delaunay_tessellate(hull.vertices)

    n = h * w
    data6 = np.empty((n, 6))
    cols6 = np.empty((n, 6), dtype=np.int32)
    raw_min = 0.0
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        sid, bary = tess.weights_batch(pts_used[lo:hi])
        raw_min = min(raw_min, float(bary.min()))
        np.clip(bary, 0.0, None, out=bary)
        bary /= bary.sum(axis=1, keepdims=True)
        data6[lo:hi] = bary
        cols6[lo:hi] = tess.simplices[sid]
    state = DecompositionState(
        width=w,
        height=h,
        xy_scale=xy_scale,
        rgbxy_vertices=tess.vertices,
        data6=data6,
        cols6=cols6,
        raw_weight_min=raw_min,
    )
    _warm_kernel()
    return state


_KERNEL_STATE = "cold"  # cold | ok | disabled


def _warm_kernel():
    """Compile the product kernel and verify it against the scipy path once."""
    global _KERNEL_STATE
    if _prod6 is None or _KERNEL_STATE != "cold":
        return
    rng = np.random.default_rng(0)
    data = rng.random((64, 6))
    cols = rng.integers(0, 16, (64, 6)).astype(np.int32)
    right = rng.random((16, 3))
    out = np.zeros((64, 3))
    _prod6(data, cols, right, out)
    ref = sp.csr_matrix(
        (data.ravel(), cols.ravel().astype(np.int64), np.arange(0, 6 * 64 + 1, 6)),
        shape=(64, 16),
    ) @ right
    _KERNEL_STATE = "ok" if np.abs(out - ref).max() < 1e-12 else "disabled"


def darkest_color_index(colors):
    """Index of the minimum-lightness color; ties go to the lowest index."""
    l = colorspace.rgb_to_lab(np.asarray(colors, dtype=np.float64))[:, 0]
    return int(np.argmin(l))


def compute_w_rgb(pal: Palette, state: DecompositionState, return_raw_min=False):
    """Stage-two weights: RGBXY hull vertices over the palette colors (Q x P).

    The palette hull is star-tessellated at its darkest color so the
    black-white edge always exists and near-grey vertices stay 2-sparse.
    Vertices that fall outside the (gamut-clamped) palette hull take the
    weights of their closest point on it.
    """
    colors = pal.colors
    hull, hull_pts, _ = geomkit.convex_hull_robust(colors)

    # hull vertices back to palette rows (hull construction dedupes/reorders)
    dist = np.linalg.norm(hull.vertices[:, None, :] - hull_pts[None, :, :], axis=2)
    vert_to_pal = dist.argmin(axis=1)

    dark_pal = darkest_color_index(colors)
    candidates = np.flatnonzero(vert_to_pal == dark_pal)
    if len(candidates):
        star = int(candidates[0])
    else:  # darkest palette color not a hull vertex: darkest hull vertex
        star = darkest_color_index(hull.vertices)
    tess = geomkit.star_tessellate(hull, star)

    rgb = state.rgbxy_vertices[:, :3]
    sid, bary = tess.weights_batch(rgb)
    outside = ~hull.contains(rgb, tol=1e-9)
    if outside.any():
        _, closest = geomkit.distance_to_hull(hull, rgb[outside])
        sid_o, bary_o = tess.weights_batch(closest)
        sid[outside] = sid_o
        bary[outside] = bary_o
    raw_min = float(bary.min())
    np.clip(bary, 0.0, None, out=bary)
    bary /= bary.sum(axis=1, keepdims=True)

    w_rgb = np.zeros((len(rgb), len(colors)))
    rows = np.repeat(np.arange(len(rgb)), bary.shape[1])
    cols = vert_to_pal[tess.simplices[sid]].ravel()
    np.add.at(w_rgb, (rows, cols), bary.ravel())
    if return_raw_min:
        return w_rgb, raw_min
    return w_rgb


def compose_weights(state: DecompositionState, w_rgb):
    """Final pixel weights W = W_RGBXY . W_RGB as dense (N, P)."""
    w_rgb = np.ascontiguousarray(w_rgb, dtype=np.float64)
    _warm_kernel()
    if _prod6 is not None and _KERNEL_STATE == "ok":
        out = np.zeros((state.pixel_count, w_rgb.shape[1]))
        _prod6(state.data6, state.cols6, w_rgb, out)
    else:
        out = state.w_rgbxy @ w_rgb
    return LayerWeights(state.width, state.height, out)


def relayer(state: DecompositionState, new_pal: Palette):
    """Recompute layer weights for an edited palette; only stage-two work."""
    w_rgb, raw_min = compute_w_rgb(new_pal, state, return_raw_min=True)
    out = compose_weights(state, w_rgb)
    out.raw_min = min(state.raw_weight_min, raw_min)
    return out


def reconstruct(weights: LayerWeights, pal: Palette):
    """Per-pixel weighted sum of palette colors, clamped to [0,1]."""
    img = weights.w @ pal.colors
    np.clip(img, 0.0, 1.0, out=img)
    return img.reshape(weights.height, weights.width, 3)


def palette_contributions(weights: LayerWeights):
    """Per-color share of total weight mass (the fitting weights W(P_i))."""
    return weights.w.sum(axis=0) / weights.w.shape[0]


def export_layers(weights: LayerWeights, pal: Palette):
    """One RGBA uint8 image per palette color; alpha is the weight column.

    Alphas are quantized with a per-pixel largest-remainder scheme so they sum
    to 255 exactly wherever the weights sum to 1.
    """
    scaled = weights.w * 255.0
    base = np.floor(scaled)
    remainder = scaled - base
    deficit = np.clip(np.round(255.0 - base.sum(axis=1)), 0, weights.palette_size).astype(int)
    order = np.argsort(-remainder, axis=1, kind="stable")
    bump = np.arange(weights.palette_size)[None, :] < deficit[:, None]
    add = np.zeros_like(base)
    np.put_along_axis(add, order, bump.astype(np.float64), axis=1)
    alpha = (base + add).astype(np.uint8)

    rgb8 = np.round(pal.colors * 255.0).astype(np.uint8)
    layers = []
    for i in range(weights.palette_size):
        layer = np.empty((weights.height, weights.width, 4), dtype=np.uint8)
        layer[:, :, :3] = rgb8[i]
        layer[:, :, 3] = alpha[:, i].reshape(weights.height, weights.width)
        layers.append(layer)
    return layers
