"""RGB <-> CIE Lab <-> LCh conversions and circular hue arithmetic.

All RGB values are sRGB-companded reflectances in [0, 1] (D65 white point).
LCh is the cylindrical form of CIE Lab: L in [0, 100], C >= 0, hue angle in
degrees normalized to [0, 360).  Functions accept arrays of shape (..., 3)
and are pure; scalars pass through np.asarray.
"""

import numpy as np

# sRGB -> XYZ (D65, 2 degree observer); the white point is the matrix's own
# image of (1,1,1) so greys map exactly onto the achromatic a = b = 0 axis
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE = _RGB_TO_XYZ.sum(axis=1)

# chroma below this is treated as hue-free (hue defined as 0)
ACHROMATIC_EPS = 1e-8
# normalization constants for the unit LC plane (max sRGB chroma ~133.8)
LIGHTNESS_SCALE = 100.0
CHROMA_SCALE = 134.0

_DELTA = 6.0 / 29.0


def srgb_to_linear(c):
    c = np.asarray(c, dtype=np.float64)
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(c):
    # signed companding keeps out-of-gamut negatives visible to callers
    c = np.asarray(c, dtype=np.float64)
    a = np.abs(c)
    return np.sign(c) * np.where(a <= 0.0031308, 12.92 * a, 1.055 * a ** (1.0 / 2.4) - 0.055)


def rgb_to_lab(rgb):
    """sRGB in [0,1] -> CIE Lab, vectorized over leading axes."""
    rgb = np.asarray(rgb, dtype=np.float64)
    xyz = srgb_to_linear(rgb) @ _RGB_TO_XYZ.T / _WHITE
    f = np.where(xyz > _DELTA ** 3, np.cbrt(xyz), xyz / (3 * _DELTA ** 2) + 4.0 / 29.0)
    l = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([l, a, b], axis=-1)


def lab_to_rgb(lab):
    """CIE Lab -> sRGB.  Out-of-gamut results are not clamped here."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    f = np.stack([fx, fy, fz], axis=-1)
    xyz = np.where(f > _DELTA, f ** 3, 3 * _DELTA ** 2 * (f - 4.0 / 29.0))
    return linear_to_srgb(xyz * _WHITE @ _XYZ_TO_RGB.T)


def lab_to_lch(lab):
    lab = np.asarray(lab, dtype=np.float64)
    c = np.hypot(lab[..., 1], lab[..., 2])
    h = np.degrees(np.arctan2(lab[..., 2], lab[..., 1])) % 360.0
    h = np.where(c < ACHROMATIC_EPS, 0.0, h)
    return np.stack([lab[..., 0], c, h], axis=-1)


def lch_to_lab(lch):
    lch = np.asarray(lch, dtype=np.float64)
    hr = np.radians(lch[..., 2])
    return np.stack(
        [lch[..., 0], lch[..., 1] * np.cos(hr), lch[..., 1] * np.sin(hr)], axis=-1
    )


def rgb_to_lch(rgb):
    """sRGB in [0,1] -> LCh with hue in [0, 360) and achromatic hue = 0."""
    return lab_to_lch(rgb_to_lab(rgb))


def lch_to_rgb(lch):
    """LCh -> sRGB clamped to [0,1].

    Returns (rgb, out_of_gamut) where out_of_gamut is a boolean mask of the
    leading axes, True where clamping moved any channel by more than 1e-9.
    """
    raw = lab_to_rgb(lch_to_lab(lch))
    rgb = np.clip(raw, 0.0, 1.0)
    out = np.any(np.abs(raw - rgb) > 1e-9, axis=-1)
    return rgb, out


def normalize_hue(h):
    return np.asarray(h, dtype=np.float64) % 360.0


def hue_arc_distance(h1, h2):
    """Absolute hue difference in degrees, wrapped to [0, 180]."""
    d = np.abs(np.asarray(h1, dtype=np.float64) - np.asarray(h2, dtype=np.float64)) % 360.0
    return np.minimum(d, 360.0 - d)


def signed_hue_delta(h_from, h_to):
    """Shortest signed arc (degrees in [-180, 180)) rotating h_from onto h_to."""
    return (np.asarray(h_to, dtype=np.float64) - np.asarray(h_from, dtype=np.float64) + 180.0) % 360.0 - 180.0


def is_achromatic(lch):
    return np.asarray(lch, dtype=np.float64)[..., 1] < ACHROMATIC_EPS
