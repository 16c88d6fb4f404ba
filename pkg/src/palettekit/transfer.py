"""Palette-level color transfer driven by harmonic templates.

Two modes.  Template alignment rotates the whole input palette so its
dominant template axis lands on the reference's, then snaps onto the
reference template.  Template transfer skips the rotation and instead
matches the weighted mean lightness and chroma to the reference after
snapping.  Both edit palette colors only; recoloring reuses the cached
decomposition downstream.
"""

import numpy as np

from . import harmony
from .colorspace import ACHROMATIC_EPS, signed_hue_delta


def _axis_weight_and_chroma(lch, wp, template, assignment):
    """Per-axis total color weight and chroma (sector templates = one axis)."""
    if template.is_sector or template.kind == "monochrome":
        return np.array([wp.sum()]), np.array([lch[:, 1].sum()]), np.array(
            [template.alpha1]
        )
    n = template.n_axes
    w = np.zeros(n)
    c = np.zeros(n)
    for j in range(n):
        sel = assignment.axis_index == j
        w[j] = wp[sel].sum()
        c[j] = lch[sel, 1].sum()
    return w, c, template.axis_angles()


def _main_axis_hue(lch, wp, fit):
    """Hue of the template axis carrying the most color weight.

    Ties go to the larger total chroma, then the lower axis index.
    """
    assignment = harmony.assign_axes(lch, fit.template)
    w, c, angles = _axis_weight_and_chroma(lch, wp, fit.template, assignment)
    order = sorted(range(len(w)), key=lambda j: (-w[j], -c[j], j))
    return float(angles[order[0]])


def template_align(lch_i, wp_i, lch_r, wp_r):
    """Rotate the input palette onto the reference template's orientation.

    Fits optimal templates to both palettes, rotates every input hue by the
    arc between the two main axes, then fully harmonizes (beta = 1) onto the
    reference template.  Returns (new_lch, report).
    """
    lch_i = np.asarray(lch_i, dtype=np.float64)
    fit_i = harmony.select_optimal_template(lch_i, wp_i)
    fit_r = harmony.select_optimal_template(lch_r, wp_r)
    gamma = float(
        signed_hue_delta(_main_axis_hue(lch_i, wp_i, fit_i), _main_axis_hue(lch_r, wp_r, fit_r))
    )
    rotated = lch_i.copy()
    chromatic = rotated[:, 1] >= ACHROMATIC_EPS
    rotated[chromatic, 2] = (rotated[chromatic, 2] + gamma) % 360.0
    out = harmony.harmonize_palette(rotated, fit_r.template, 1.0)
    report = {
        "mode": "align",
        "gamma": gamma,
        "input_template": fit_i.template.kind,
        "input_alpha1": fit_i.template.alpha1,
        "reference_template": fit_r.template.kind,
        "reference_alpha1": fit_r.template.alpha1,
        "reference_alpha2": fit_r.template.alpha2,
    }
    return out, report


def template_transfer(lch_i, wp_i, lch_r, wp_r):
    """Harmonize the input onto the reference template in place, then match
    the reference's weighted mean lightness and chroma by global scaling.

    Returns (new_lch, report); the pre-clamp means match the reference
    exactly, clamping to L in [0,100] and C in [0, 134] happens last.
    """
    lch_i = np.asarray(lch_i, dtype=np.float64)
    lch_r = np.asarray(lch_r, dtype=np.float64)
    wp_i = np.asarray(wp_i, dtype=np.float64)
    wp_r = np.asarray(wp_r, dtype=np.float64)
    fit_r = harmony.select_optimal_template(lch_r, wp_r)
    out = harmony.harmonize_palette(lch_i, fit_r.template, 1.0)

    wi = wp_i / wp_i.sum()
    wr = wp_r / wp_r.sum()
    mean_l_i = float(np.sum(wi * out[:, 0]))
    mean_c_i = float(np.sum(wi * out[:, 1]))
    mean_l_r = float(np.sum(wr * lch_r[:, 0]))
    mean_c_r = float(np.sum(wr * lch_r[:, 1]))
    scale_l = mean_l_r / mean_l_i if mean_l_i > 1e-9 else 1.0
    scale_c = mean_c_r / mean_c_i if mean_c_i > 1e-9 else 1.0
    out[:, 0] *= scale_l
    out[:, 1] *= scale_c
    pre_clamp_l = float(np.sum(wi * out[:, 0]))
    pre_clamp_c = float(np.sum(wi * out[:, 1]))
    out[:, 0] = np.clip(out[:, 0], 0.0, 100.0)
    out[:, 1] = np.clip(out[:, 1], 0.0, harmony.CHROMA_SCALE)
    report = {
        "mode": "transfer",
        "reference_template": fit_r.template.kind,
        "reference_alpha1": fit_r.template.alpha1,
        "reference_alpha2": fit_r.template.alpha2,
        "lightness_scale": scale_l,
        "chroma_scale": scale_c,
        "pre_clamp_mean_l": pre_clamp_l,
        "pre_clamp_mean_c": pre_clamp_c,
        "reference_mean_l": mean_l_r,
        "reference_mean_c": mean_c_r,
    }
    return out, report
