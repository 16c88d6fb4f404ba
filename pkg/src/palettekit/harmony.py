"""Axis-based hue harmony templates, LC templates, and contrast operators.

Palettes here are LCh arrays of shape (P, 3).  Template fitting follows the
weighted hue-arc objective: each color contributes
W(P_i) * L(P_i)/100 * C(P_i)/134 * arc(H(P_i), nearest axis), with colors
inside an analogous sector contributing zero.  Harmonization rotates hue
alone, so lightness and chroma survive bit-exact.
"""

from dataclasses import dataclass

import numpy as np

from . import colorspace
from .colorspace import (
    ACHROMATIC_EPS,
    CHROMA_SCALE,
    LIGHTNESS_SCALE,
    hue_arc_distance,
    signed_hue_delta,
)

KINDS = (
    "monochrome",
    "complementary",
    "single_split",
    "triad",
    "double_split",
    "square",
    "analogous",
)
TWO_DOF_KINDS = ("single_split", "double_split", "analogous")
ALPHA2_RANGE = 15
LC_KINDS = ("LC1", "LC2", "LC3", "LC4", "LC5", "LC6")
CONTRAST_KINDS = (
    "hue",
    "light_dark",
    "complementary",
    "simultaneous",
    "saturation",
    "extension",
    "cold_warm",
)

# classical split offset; the secondary angle widens or narrows it
_BASE_SPLIT = 30.0


class InvalidAngle(ValueError):
    pass


class NoValidTemplate(Exception):
    """Every template kind was excluded (some axis had no assigned color)."""


@dataclass(frozen=True)
class HarmonicTemplate:
    kind: str
    alpha1: float
    alpha2: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidAngle(f"unknown template kind {self.kind!r}")
        if self.kind not in TWO_DOF_KINDS and self.alpha2 != 0.0:
            raise InvalidAngle(f"{self.kind} has no secondary angle")
        if abs(self.alpha2) > ALPHA2_RANGE:
            raise InvalidAngle(f"alpha2 must lie in [-15, 15], got {self.alpha2}")

    @property
    def is_sector(self):
        return self.kind == "analogous"

    def axis_angles(self):
        """Axis angles in [0, 360); for analogous these are the sector bounds."""
        return (self.alpha1 + _canonical_axes(self.kind, self.alpha2)) % 360.0

    def axes(self):
        """(angle, axis_type) pairs; sector bounds come in pairs."""
        kind = "sector_bound" if self.is_sector else "attract"
        return [(float(a), kind) for a in self.axis_angles()]

    @property
    def n_axes(self):
        return len(_canonical_axes(self.kind, self.alpha2))


@dataclass(frozen=True)
class AxisAssignment:
    """Per-color nearest axis, its signed arc, and sector membership."""

    axis_index: np.ndarray
    signed_delta: np.ndarray
    in_sector: np.ndarray
    axis_angles: np.ndarray


@dataclass(frozen=True)
class TemplateFit:
    template: HarmonicTemplate
    distance: float


def _canonical_axes(kind, alpha2=0.0):
    split = _BASE_SPLIT + alpha2
    if kind == "monochrome":
        return np.array([0.0])
    if kind == "complementary":
        return np.array([0.0, 180.0])
    if kind == "single_split":
        return np.array([0.0, 180.0 - split, 180.0 + split])
    if kind == "triad":
        return np.array([0.0, 120.0, 240.0])
    if kind == "double_split":
        return np.array([-split / 2, split / 2, 180.0 - split / 2, 180.0 + split / 2])
    if kind == "square":
        return np.array([0.0, 90.0, 180.0, 270.0])
    if kind == "analogous":
        return np.array([-split, split])
    raise InvalidAngle(f"unknown template kind {kind!r}")


def template_axes(kind, alpha1, alpha2=0.0):
    """Public axis-geometry accessor (angles plus attract/sector role)."""
    return HarmonicTemplate(kind, float(alpha1), float(alpha2)).axes()


def uniform_weights(n):
    """The no-image fallback: every palette color weighs the same."""
    return np.full(n, 1.0 / n)


def _effective_weights(lch, wp):
    lch = np.asarray(lch, dtype=np.float64)
    wp = np.asarray(wp, dtype=np.float64)
    return wp * (lch[:, 0] / LIGHTNESS_SCALE) * (lch[:, 1] / CHROMA_SCALE)


def assign_axes(lch, template):
    """Nearest-axis assignment minimizing the hue arc per color."""
    lch = np.asarray(lch, dtype=np.float64)
    hues = lch[:, 2]
    if template.is_sector:
        half = _BASE_SPLIT + template.alpha2
        s = signed_hue_delta(template.alpha1, hues)
        inside = np.abs(s) <= half
        delta = np.where(inside, 0.0, np.sign(s) * half - s)
        axis = np.where(s < 0, 0, 1)
        axis = np.where(inside, 0, axis)
        return AxisAssignment(axis.astype(int), delta, inside, template.axis_angles())
    angles = template.axis_angles()
    deltas = signed_hue_delta(hues[:, None], angles[None, :])
    j_star = np.abs(deltas).argmin(axis=1)
    delta = deltas[np.arange(len(hues)), j_star]
    return AxisAssignment(
        j_star, delta, np.zeros(len(hues), dtype=bool), angles
    )


def palette_template_distance(lch, wp, template):
    """Weighted arc distance D between a palette and a placed template."""
    lch = np.asarray(lch, dtype=np.float64)
    if template.is_sector:
        half = _BASE_SPLIT + template.alpha2
        d = np.maximum(hue_arc_distance(lch[:, 2], template.alpha1) - half, 0.0)
    else:
        angles = template.axis_angles()
        d = hue_arc_distance(lch[:, 2][:, None], angles[None, :]).min(axis=1)
    return float(np.sum(_effective_weights(lch, wp) * d))


def fit_template(lch, wp, kind):
    """Exhaustive 1-degree grid fit of one template kind.

    alpha1 walks [0, 360]; two-dof kinds also walk alpha2 over [-15, 15].
    Ties prefer the smallest alpha1, then the smallest alpha2.
    """
    lch = np.asarray(lch, dtype=np.float64)
    hues = lch[:, 2]
    w_eff = _effective_weights(lch, wp)
    a1 = np.arange(0.0, 361.0)
    a2 = (
        np.arange(-float(ALPHA2_RANGE), ALPHA2_RANGE + 1.0)
        if kind in TWO_DOF_KINDS
        else np.array([0.0])
    )
    if kind == "analogous":
        half = _BASE_SPLIT + a2
        dc = hue_arc_distance(a1[:, None], hues[None, :])
        d = np.maximum(dc[:, None, :] - half[None, :, None], 0.0)
    else:
        axes = np.stack([_canonical_axes(kind, v) for v in a2])  # (n2, K)
        # normalize before the arc so symmetric placements (eg. triad +120)
        # produce bitwise-equal distances and ties resolve to the smaller angle
        angles = (a1[:, None, None] + axes[None, :, :]) % 360.0
        d = hue_arc_distance(angles[..., None], hues[None, None, None, :]).min(axis=2)
    dist = (d * w_eff[None, None, :]).sum(axis=2)
    flat = int(dist.argmin())  # C-order: alpha1-major, alpha2-minor
    i1, i2 = divmod(flat, dist.shape[1])
    tpl = HarmonicTemplate(kind, float(a1[i1] % 360.0), float(a2[i2]))
    return TemplateFit(tpl, float(dist[i1, i2]))


def _axis_has_colors(lch, template):
    """Exclusion rule: every attract axis needs an assigned chromatic color.

    Monochrome and analogous act as one axis group and are never excluded.
    """
    if template.kind in ("monochrome", "analogous"):
        return True
    chromatic = lch[:, 1] >= ACHROMATIC_EPS
    if not chromatic.any():
        return False
    assign = assign_axes(lch, template)
    filled = np.unique(assign.axis_index[chromatic])
    return len(filled) == template.n_axes


def select_optimal_template(lch, wp, kinds=KINDS):
    """Best-fitting template across kinds, skipping fits with empty axes.

    Ties prefer fewer axes, then the fixed kind order.
    """
    best = None
    for order, kind in enumerate(kinds):
        fit = fit_template(lch, wp, kind)
        if not _axis_has_colors(np.asarray(lch, dtype=np.float64), fit.template):
            continue
        key = (fit.distance, fit.template.n_axes, order)
        if best is None or key < best[0]:
            best = (key, fit)
    if best is None:
        raise NoValidTemplate("no template kind kept all axes assigned")
    return best[1]


def harmonize_palette(lch, template, beta, assignment=None):
    """Rotate each hue by beta times its arc to the assigned axis.

    Leaves lightness and chroma bit-exact; achromatic and sector-interior
    colors pass through.  The assignment is computed once at the fitted
    angles and can be frozen by callers interpolating beta.
    """
    lch = np.asarray(lch, dtype=np.float64)
    if assignment is None:
        assignment = assign_axes(lch, template)
    movable = (lch[:, 1] >= ACHROMATIC_EPS) & ~assignment.in_sector
    out = lch.copy()
    out[movable, 2] = (lch[movable, 2] + beta * assignment.signed_delta[movable]) % 360.0
    return out


# ---------------------------------------------------------------------------
# LC templates: lines in the normalized (x=C/134, y=L/100) plane.


def _lc_plane(lch):
    lch = np.asarray(lch, dtype=np.float64)
    return np.stack([lch[:, 1] / CHROMA_SCALE, lch[:, 0] / LIGHTNESS_SCALE], axis=1)


def _lc_line(kind, eps):
    """Line (origin, unit direction) for an LC kind and its fitted epsilon."""
    if kind == "LC1":
        return np.array([eps, 0.0]), np.array([0.0, 1.0])
    if kind == "LC2":
        return np.array([0.0, eps]), np.array([1.0, 0.0])
    if kind == "LC3":
        t = np.radians(eps)
        return np.array([0.0, 0.0]), np.array([np.cos(t), np.sin(t)])
    if kind == "LC4":
        t = np.radians(eps)
        return np.array([1.0, 0.0]), np.array([np.cos(t), np.sin(t)])
    if kind == "LC5":
        return np.array([eps, 0.0]), np.array([1.0, 1.0]) / np.sqrt(2.0)
    if kind == "LC6":
        return np.array([eps, 0.0]), np.array([-1.0, 1.0]) / np.sqrt(2.0)
    raise ValueError(f"unknown LC kind {kind!r}")


def lc_objective(lch, wp, kind, eps):
    """Weighted sum of squared perpendicular distances to the LC line."""
    pts = _lc_plane(lch)
    wn = np.asarray(wp, dtype=np.float64)
    wn = wn / wn.sum()
    origin, d = _lc_line(kind, eps)
    rel = pts - origin
    perp = rel[:, 0] * (-d[1]) + rel[:, 1] * d[0]
    return float(np.sum(wn * perp ** 2))


def _brute_force_angle(pts, wn, pivot):
    rel = pts - pivot
    thetas = np.radians(np.arange(0.0, 180.0))
    perp = rel[:, 0][None, :] * (-np.sin(thetas)[:, None]) + rel[:, 1][None, :] * np.cos(
        thetas
    )[:, None]
    obj = (wn[None, :] * perp ** 2).sum(axis=1)
    return float(np.degrees(thetas[int(obj.argmin())]))


def fit_lc_template(lch, wp, kind):
    """Fitted epsilon for an LC kind.

    LC1/LC2/LC5/LC6 use the closed-form weighted means; LC3/LC4 brute-force
    the pivoting angle every degree.
    """
    pts = _lc_plane(lch)
    wn = np.asarray(wp, dtype=np.float64)
    wn = wn / wn.sum()
    if kind == "LC1":
        return float(np.sum(wn * pts[:, 0]))
    if kind == "LC2":
        return float(np.sum(wn * pts[:, 1]))
    if kind == "LC5":
        return float(np.sum(wn * (pts[:, 0] - pts[:, 1])))
    if kind == "LC6":
        return float(np.sum(wn * (pts[:, 0] + pts[:, 1])))
    if kind == "LC3":
        return _brute_force_angle(pts, wn, np.array([0.0, 0.0]))
    if kind == "LC4":
        return _brute_force_angle(pts, wn, np.array([1.0, 0.0]))
    raise ValueError(f"unknown LC kind {kind!r}")


def _is_extreme_neutral(pts):
    """Pure black / pure white palette entries stay out of LC harmonization."""
    x, y = pts[:, 0], pts[:, 1]
    return (x < 0.02) & ((y < 0.02) | (y > 0.98))


def apply_lc_template(lch, wp, kind, eps, groups=None, pivot_per_group=False):
    """Snap palette colors onto the fitted LC line, evenly spaced per group.

    Per axis group the two extreme projections stay put and interior colors
    are respaced uniformly between them.  A global offset along the line then
    snaps the color closest to L = 0.5 onto it (skipped when the line cannot
    move lightness).  With pivot_per_group (multi-axis hue context, LC3/LC4)
    each group refits its own pivoting angle around N_LC = (0.5, 0).
    """
    lch = np.asarray(lch, dtype=np.float64)
    pts = _lc_plane(lch)
    wn = np.asarray(wp, dtype=np.float64)
    wn = wn / max(wn.sum(), 1e-300)
    passthrough = _is_extreme_neutral(pts)
    if groups is None:
        groups = [np.arange(len(pts))]

    new_pts = pts.copy()
    dirs = np.zeros((len(pts), 2))
    moved = np.zeros(len(pts), dtype=bool)
    for g in groups:
        g = np.asarray(g, dtype=int)
        g = g[~passthrough[g]]
        if len(g) == 0:
            continue
        if pivot_per_group and kind in ("LC3", "LC4"):
            pivot = np.array([0.5, 0.0])
            theta = _brute_force_angle(pts[g], wn[g] / wn[g].sum(), pivot)
            t = np.radians(theta)
            origin, d = pivot, np.array([np.cos(t), np.sin(t)])
        else:
            origin, d = _lc_line(kind, eps)
        t = (pts[g] - origin) @ d
        order = np.argsort(t, kind="stable")
        positions = np.empty_like(t)
        if len(g) == 1:
            positions[:] = t
        else:
            lo, hi = t[order[0]], t[order[-1]]
            positions[order] = np.linspace(lo, hi, len(g))
        new_pts[g] = origin + positions[:, None] * d
        dirs[g] = d
        moved[g] = True

    # neutral snap: shared offset along the line toward L = 0.5
    snappable = moved & (np.abs(dirs[:, 1]) > 1e-12)
    if snappable.any():
        i = int(np.argmin(np.abs(new_pts[:, 1] - 0.5) + np.where(snappable, 0.0, np.inf)))
        if snappable[i]:
            tau = (0.5 - new_pts[i, 1]) / dirs[i, 1]
            new_pts[moved] += tau * dirs[moved]

    out = lch.copy()
    out[moved, 1] = np.clip(new_pts[moved, 0] * CHROMA_SCALE, 0.0, CHROMA_SCALE)
    out[moved, 0] = np.clip(new_pts[moved, 1] * LIGHTNESS_SCALE, 0.0, LIGHTNESS_SCALE)
    return out


# ---------------------------------------------------------------------------
# Itten contrast operators.


def _primary_hues():
    rgb = np.eye(3)
    return colorspace.rgb_to_lch(rgb)[:, 2]


def _fit_better_of(lch, wp, kinds):
    best = None
    for order, kind in enumerate(kinds):
        fit = fit_template(lch, wp, kind)
        key = (fit.distance, order)
        if best is None or key < best[0]:
            best = (key, fit)
    return best[1]


def _axis_groups(lch, assignment, template):
    if template.is_sector or template.kind == "monochrome":
        return [np.arange(len(lch))]
    return [
        np.flatnonzero(assignment.axis_index == j) for j in range(template.n_axes)
    ]


def _blend_lc(lch, target, beta):
    out = np.asarray(lch, dtype=np.float64).copy()
    out[:, 0] += beta * (target[:, 0] - out[:, 0])
    out[:, 1] += beta * (target[:, 1] - out[:, 1])
    return out


def contrast_operator(lch, wp, kind, beta=1.0):
    """Itten contrast arrangements on a palette.

    Returns (new_lch, report) where report notes the template and parameters
    used.  beta scales hue rotation and any lightness/chroma movement alike.
    """
    lch = np.asarray(lch, dtype=np.float64)
    wp = np.asarray(wp, dtype=np.float64)
    if kind not in CONTRAST_KINDS:
        raise ValueError(f"unknown contrast kind {kind!r}")

    if kind == "hue":
        # triad pinned to the RGB primaries: no rotation to solve
        hues = _primary_hues()
        deltas = signed_hue_delta(lch[:, 2][:, None], hues[None, :])
        j = np.abs(deltas).argmin(axis=1)
        out = lch.copy()
        movable = lch[:, 1] >= ACHROMATIC_EPS
        out[movable, 2] = (
            lch[movable, 2] + beta * deltas[np.arange(len(lch)), j][movable]
        ) % 360.0
        return out, {"kind": kind, "axes": [float(h) for h in hues]}

    if kind in ("light_dark", "saturation"):
        fit = _fit_better_of(lch, wp, ("monochrome", "analogous"))
        assignment = assign_axes(lch, fit.template)
        out = harmonize_palette(lch, fit.template, beta, assignment)
        lc_kind = "LC1" if kind == "light_dark" else "LC2"
        eps = fit_lc_template(out, wp, lc_kind)
        target = apply_lc_template(out, wp, lc_kind, eps)
        out = _blend_lc(out, target, beta)
        return out, {
            "kind": kind,
            "template": fit.template.kind,
            "alpha1": fit.template.alpha1,
            "alpha2": fit.template.alpha2,
            "lc_kind": lc_kind,
            "epsilon": eps,
        }

    if kind in ("complementary", "simultaneous", "cold_warm"):
        if kind == "cold_warm":
            # axes perpendicular to the red-cyan divide
            alpha1 = float((_primary_hues()[0] + 90.0) % 360.0)
            tpl = HarmonicTemplate("complementary", alpha1)
            fit = TemplateFit(tpl, palette_template_distance(lch, wp, tpl))
        else:
            fit = fit_template(lch, wp, "complementary")
        assignment = assign_axes(lch, fit.template)
        out = harmonize_palette(lch, fit.template, beta, assignment)
        report = {
            "kind": kind,
            "template": "complementary",
            "alpha1": fit.template.alpha1,
            "distance": fit.distance,
        }
        if kind == "simultaneous":
            axis_w = np.array(
                [wp[assignment.axis_index == j].sum() for j in range(2)]
            )
            weak = int(axis_w.argmin())
            scale = 1.0 - 0.5 * beta
            sel = assignment.axis_index == weak
            out[sel, 1] *= scale
            report.update(weak_axis=weak, chroma_scale=scale)
        return out, report

    # extension: equalize per-axis L*C*W mass via multiplicative L scaling
    fit = select_optimal_template(lch, wp)
    assignment = assign_axes(lch, fit.template)
    groups = _axis_groups(lch, assignment, fit.template)
    sums = []
    for g in groups:
        sums.append(np.sum(lch[g, 0] * lch[g, 1] * wp[g]))
    sums = np.asarray(sums)
    live = sums > 1e-12
    out = lch.copy()
    if live.sum() >= 2:
        target = float(sums[live].mean())
        for g, s in zip(groups, sums):
            if s <= 1e-12:
                continue
            f = _solve_extension_factor(lch[g, 0], lch[g, 1] * wp[g], target)
            scaled = np.clip(f * lch[g, 0], 0.0, LIGHTNESS_SCALE)
            out[g, 0] = lch[g, 0] + beta * (scaled - lch[g, 0])
    return out, {
        "kind": kind,
        "template": fit.template.kind,
        "alpha1": fit.template.alpha1,
        "alpha2": fit.template.alpha2,
        "distance": fit.distance,
    }


def _solve_extension_factor(l_vals, cw, target):
    """Root of sum(min(f*L, 100) * cw) = target, monotone in f; bisection."""

    def g(f):
        return float(np.sum(np.minimum(f * l_vals, LIGHTNESS_SCALE) * cw))

    f_hi = 1.0
    while g(f_hi) < target and f_hi < 1e6:
        f_hi *= 2.0
    if g(f_hi) < target:
        return f_hi  # saturated: every color at max lightness
    f_lo = 0.0
    for _ in range(80):
        mid = 0.5 * (f_lo + f_hi)
        if g(mid) < target:
            f_lo = mid
        else:
            f_hi = mid
    return 0.5 * (f_lo + f_hi)
