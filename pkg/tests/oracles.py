"""Independent reference implementations used by the test suites.

Deliberately structured differently from the production code: plain loops over
the angle grid, per-point linear programs for hull membership.  They define
what "correct" means for the fitting and geometry paths.
"""

import numpy as np
from scipy.optimize import linprog

from palettekit import colorspace as cs
from palettekit import harmony as hm


def grid_fit_oracle(lch, wp, kind):
    """Exhaustive template fit: alpha1 python loop, alpha2 vectorized.

    Returns (distance, alpha1, alpha2) with the same smallest-angle
    tie-breaking the production fitter documents.
    """
    hues = lch[:, 2]
    w_eff = wp * (lch[:, 0] / 100.0) * (lch[:, 1] / 134.0)
    a2_values = (
        np.arange(-15.0, 16.0) if kind in hm.TWO_DOF_KINDS else np.array([0.0])
    )
    if kind != "analogous":
        axes = np.stack([hm._canonical_axes(kind, v) for v in a2_values])
    best = None
    for a1 in np.arange(0.0, 361.0):
        if kind == "analogous":
            dc = cs.hue_arc_distance(a1, hues)
            d = np.maximum(dc[None, :] - (30.0 + a2_values)[:, None], 0.0)
        else:
            ang = (a1 + axes) % 360.0
            d = cs.hue_arc_distance(ang[:, :, None], hues[None, None, :]).min(axis=1)
        vals = (d * w_eff[None, :]).sum(axis=1)
        k = int(vals.argmin())
        if best is None or vals[k] < best[0]:
            best = (float(vals[k]), float(a1 % 360.0), float(a2_values[k]))
    return best


def lp_hull_vertices(points):
    """Vertex set via feasibility LPs: i is a vertex iff it cannot be written
    as a convex combination of the other points."""
    vertices = set()
    for i in range(len(points)):
        others = np.delete(points, i, axis=0)
        res = linprog(
            np.zeros(len(others)),
            A_eq=np.vstack([others.T, np.ones(len(others))]),
            b_eq=np.concatenate([points[i], [1.0]]),
            bounds=(0, None),
            method="highs",
        )
        if res.status != 0:
            vertices.add(i)
    return vertices
