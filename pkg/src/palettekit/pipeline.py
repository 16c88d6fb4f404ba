"""Image-level orchestration shared by the CLI, the service, and video.

Keeping the sequencing here means every interface produces byte-identical
results for the same inputs: one decomposition, one fitting path, one
recoloring rule (weights stay fixed, colors swap).
"""

import numpy as np

from . import colorspace, decomposer, harmony, transfer
from .palette import DEFAULT_RMSE_TOL, Palette, extract_palette


def lch_of(pal: Palette):
    return colorspace.rgb_to_lch(pal.colors)


def palette_from_lch(lch):
    rgb, _ = colorspace.lch_to_rgb(lch)
    return Palette(np.clip(rgb, 0.0, 1.0))


def edited_palette(pal: Palette, lch_before, lch_after):
    """Palette after an LCh edit; colors that did not move keep their exact
    RGB values (so beta = 0 is a bit-exact identity)."""
    moved = np.any(lch_after != lch_before, axis=1)
    colors = pal.colors.copy()
    if moved.any():
        rgb, _ = colorspace.lch_to_rgb(lch_after[moved])
        colors[moved] = np.clip(rgb, 0.0, 1.0)
    return Palette(colors)


def decompose(img, pal=None, rmse_tol=DEFAULT_RMSE_TOL, xy_scale=1.0):
    """Palette (extracted unless given), 5D state, and layer weights."""
    if pal is None:
        pal = extract_palette(img, rmse_tol)
    state = decomposer.precompute_rgbxy(img, xy_scale)
    weights = decomposer.relayer(state, pal)
    return pal, state, weights


def fit_report(fit: harmony.TemplateFit, beta=None):
    rep = {
        "kind": fit.template.kind,
        "alpha1": fit.template.alpha1,
        "alpha2": fit.template.alpha2,
        "distance": fit.distance,
    }
    if beta is not None:
        rep["beta"] = beta
    return rep


def fit_template_for(pal: Palette, wp, template="auto"):
    """Fit either the requested kind or the optimal template."""
    lch = lch_of(pal)
    if template in (None, "auto", "optimal"):
        return harmony.select_optimal_template(lch, wp)
    return harmony.fit_template(lch, wp, template)


def harmonize_image(img, template="auto", beta=1.0, rmse_tol=DEFAULT_RMSE_TOL, xy_scale=1.0):
    """Full hue-harmonization pipeline for one image.

    Weights are computed against the original palette and kept; only the
    palette colors move, so recoloring is one sparse multiply.
    """
    pal, state, weights = decompose(img, rmse_tol=rmse_tol, xy_scale=xy_scale)
    wp = decomposer.palette_contributions(weights)
    fit = fit_template_for(pal, wp, template)
    lch = lch_of(pal)
    harmonized = harmony.harmonize_palette(lch, fit.template, beta)
    new_pal = edited_palette(pal, lch, harmonized)
    out = decomposer.reconstruct(weights, new_pal)
    report = fit_report(fit, beta)
    report["palette"] = pal.to_json_dict()["colors"]
    report["harmonized_palette"] = new_pal.to_json_dict()["colors"]
    return out, new_pal, report


def lc_harmonize_image(
    img, lc_kind, hue_template="auto", beta=1.0, rmse_tol=DEFAULT_RMSE_TOL, xy_scale=1.0
):
    """Hue harmonization followed by LC-template harmonization."""
    pal, state, weights = decompose(img, rmse_tol=rmse_tol, xy_scale=xy_scale)
    wp = decomposer.palette_contributions(weights)
    lch = lch_of(pal)
    report = {"lc_kind": lc_kind, "beta": beta}
    groups = None
    pivot_per_group = False
    if hue_template not in (None, "none"):
        fit = fit_template_for(pal, wp, hue_template)
        assignment = harmony.assign_axes(lch, fit.template)
        lch = harmony.harmonize_palette(lch, fit.template, beta, assignment)
        report.update(fit_report(fit))
        if not fit.template.is_sector and fit.template.kind != "monochrome":
            groups = [
                np.flatnonzero(assignment.axis_index == j)
                for j in range(fit.template.n_axes)
            ]
            pivot_per_group = True
    eps = harmony.fit_lc_template(lch, wp, lc_kind)
    target = harmony.apply_lc_template(
        lch, wp, lc_kind, eps, groups=groups, pivot_per_group=pivot_per_group
    )
    blended = lch.copy()
    blended[:, :2] += beta * (target[:, :2] - blended[:, :2])
    new_pal = edited_palette(pal, lch_of(pal), blended)
    out = decomposer.reconstruct(weights, new_pal)
    report["epsilon"] = eps
    report["palette"] = pal.to_json_dict()["colors"]
    report["harmonized_palette"] = new_pal.to_json_dict()["colors"]
    return out, new_pal, report


def contrast_image(img, kind, beta=1.0, rmse_tol=DEFAULT_RMSE_TOL, xy_scale=1.0):
    pal, state, weights = decompose(img, rmse_tol=rmse_tol, xy_scale=xy_scale)
    wp = decomposer.palette_contributions(weights)
    lch0 = lch_of(pal)
    out_lch, report = harmony.contrast_operator(lch0, wp, kind, beta)
    new_pal = edited_palette(pal, lch0, out_lch)
    out = decomposer.reconstruct(weights, new_pal)
    report["palette"] = pal.to_json_dict()["colors"]
    report["harmonized_palette"] = new_pal.to_json_dict()["colors"]
    return out, new_pal, report


def transfer_image(
    img, ref_palette: Palette, mode="transfer", ref_weights=None,
    rmse_tol=DEFAULT_RMSE_TOL, xy_scale=1.0,
):
    """Recolor img toward a reference palette via template align/transfer."""
    pal, state, weights = decompose(img, rmse_tol=rmse_tol, xy_scale=xy_scale)
    wp = decomposer.palette_contributions(weights)
    wr = (
        np.asarray(ref_weights, dtype=np.float64)
        if ref_weights is not None
        else harmony.uniform_weights(len(ref_palette))
    )
    lch_i = lch_of(pal)
    lch_r = colorspace.rgb_to_lch(ref_palette.colors)
    if mode == "align":
        out_lch, report = transfer.template_align(lch_i, wp, lch_r, wr)
    elif mode == "transfer":
        out_lch, report = transfer.template_transfer(lch_i, wp, lch_r, wr)
    else:
        raise ValueError(f"unknown transfer mode {mode!r}")
    new_pal = palette_from_lch(out_lch)
    out = decomposer.reconstruct(weights, new_pal)
    report["palette"] = pal.to_json_dict()["colors"]
    report["transferred_palette"] = new_pal.to_json_dict()["colors"]
    return out, new_pal, report
