"""Video harmonization: one global palette, one template, per-frame recolor.

Frames share a single palette extracted from the union of their per-frame RGB
hull vertices, fitted once with frame-averaged contribution weights; each
frame then recolors through its own decomposition weights.  Temporal
consistency follows by construction.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import decomposer, harmony, pipeline
from .palette import (
    DEFAULT_RMSE_TOL,
    bin_image,
    merge_histograms,
    palette_from_points,
)
from . import geomkit


def _frame_hull_colors(frame):
    """A frame's dense RGB hull vertices (its distinct colors if too flat)."""
    distinct = np.unique(np.asarray(frame, dtype=np.float64).reshape(-1, 3), axis=0)
    centered = distinct - distinct.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if len(distinct) < 4 or not np.sum(svals > 1e-7 * max(1.0, svals[0])) >= 2:
        return distinct
    try:
        hull = geomkit.convex_hull(distinct)
    except geomkit.DegenerateInput:
        return distinct
    return hull.vertices


def video_global_palette(frames, rmse_tol=DEFAULT_RMSE_TOL):
    """Global palette over a frame sequence (aggregated hulls + histograms)."""
    if not len(frames):
        raise ValueError("need at least one frame")
    points = np.vstack([_frame_hull_colors(f) for f in frames])
    hist = merge_histograms([bin_image(f) for f in frames])
    return palette_from_points(points, hist, rmse_tol)


def harmonize_video(
    frames,
    template="auto",
    beta=1.0,
    rmse_tol=DEFAULT_RMSE_TOL,
    xy_scale=1.0,
    workers=1,
    keep_weights=True,
):
    """Harmonize all frames against one global palette and template.

    With keep_weights the per-frame weight matrices from the first pass are
    retained for recoloring; otherwise they are recomputed in a second
    streaming pass, trading compute for memory.  Returns (frames_out, report).
    """
    frames = [np.asarray(f, dtype=np.float64) for f in frames]
    pal = video_global_palette(frames, rmse_tol)

    def frame_weights(frame):
        state = decomposer.precompute_rgbxy(frame, xy_scale)
        return decomposer.relayer(state, pal)

    def map_frames(fn):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                return list(ex.map(fn, frames))
        return [fn(f) for f in frames]

    weights = map_frames(frame_weights)
    contribs = np.stack([decomposer.palette_contributions(w) for w in weights])
    w_avg = contribs.mean(axis=0)
    if not keep_weights:
        weights = None

    fit = pipeline.fit_template_for(pal, w_avg, template)
    lch = pipeline.lch_of(pal)
    harmonized = harmony.harmonize_palette(lch, fit.template, beta)
    new_pal = pipeline.edited_palette(pal, lch, harmonized)

    if weights is None:
        out = map_frames(lambda f: decomposer.reconstruct(frame_weights(f), new_pal))
    else:
        out = [decomposer.reconstruct(w, new_pal) for w in weights]
    report = pipeline.fit_report(fit, beta)
    report["palette"] = pal.to_json_dict()["colors"]
    report["harmonized_palette"] = new_pal.to_json_dict()["colors"]
    report["frames"] = len(frames)
    return out, report
