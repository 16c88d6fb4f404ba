"""Deterministic synthetic images for tests, demos, and the acceptance suite.

Everything here is seeded and quantized to 8 bits, so repeated runs produce
bit-identical pixels without binary assets in the repository.
"""

import numpy as np
from scipy import ndimage


def _quantize(img):
    return np.round(np.clip(img, 0.0, 1.0) * 255.0) / 255.0


def smooth_noise(height, width, seed, sigma=24.0):
    """Gaussian-smoothed channel noise: a stand-in for soft natural imagery."""
    rng = np.random.default_rng(seed)
    img = np.empty((height, width, 3))
    for c in range(3):
        img[:, :, c] = ndimage.gaussian_filter(rng.standard_normal((height, width)), sigma)
    img -= img.min()
    img /= img.max()
    return _quantize(img)


def blob_scene(height, width, seed, n_blobs=6):
    """Soft colored blobs over a vertical gradient background."""
    rng = np.random.default_rng(seed)
    top, bottom = rng.random(3), rng.random(3)
    t = np.linspace(0, 1, height)[:, None, None]
    img = top * (1 - t) + bottom * t
    img = np.broadcast_to(img, (height, width, 3)).copy()
    yy, xx = np.mgrid[0:height, 0:width]
    for _ in range(n_blobs):
        cy, cx = rng.random(2) * [height, width]
        r = (0.08 + 0.25 * rng.random()) * min(height, width)
        alpha = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * r * r))
        color = rng.random(3)
        img = alpha[..., None] * color + (1 - alpha[..., None]) * img
    return _quantize(img)


def banded_gradient(height, width, seed):
    """Horizontal multi-stop gradient with mild vertical shading."""
    rng = np.random.default_rng(seed)
    stops = rng.random((4, 3))
    x = np.linspace(0, 3, width)
    seg = np.minimum(x.astype(int), 2)
    frac = x - seg
    row = stops[seg] * (1 - frac[:, None]) + stops[seg + 1] * frac[:, None]
    shade = 0.75 + 0.25 * np.linspace(0, 1, height)[:, None, None]
    return _quantize(row[None, :, :] * shade)


def gray_ramp(height=512, width=512, horizontal=True):
    """Pure grayscale ramp; the line-of-greys stress case."""
    ramp = np.linspace(0.0, 1.0, width if horizontal else height)
    img = np.broadcast_to(
        ramp[None, :, None] if horizontal else ramp[:, None, None], (height, width, 3)
    ).copy()
    return _quantize(img)


def simplex_mix(height, width, seed, colors=None):
    """Image whose pixels are smooth convex mixtures of 4 known colors.

    Pure palette colors are planted in the corners so the hull of the pixel
    colors is exactly the tetrahedron of the generators.
    """
    rng = np.random.default_rng(seed)
    if colors is None:
        colors = np.array(
            [[0.9, 0.1, 0.1], [0.1, 0.8, 0.2], [0.15, 0.2, 0.9], [0.95, 0.9, 0.85]]
        )
    colors = np.asarray(colors, dtype=np.float64)
    fields = np.empty((height, width, len(colors)))
    for k in range(len(colors)):
        fields[:, :, k] = ndimage.gaussian_filter(
            rng.random((height, width)), sigma=min(height, width) / 8
        )
    fields -= fields.min(axis=(0, 1)) - 0.02
    weights = fields / fields.sum(axis=2, keepdims=True)
    for k in range(len(colors)):
        weights[k % height, (k * 7) % width] = np.eye(len(colors))[k]
    img = weights @ colors
    return img, weights


def one_megapixel(seed=3):
    """1024x1024 soft scene for the latency and throughput checks."""
    return blob_scene(1024, 1024, seed=seed, n_blobs=6)


def acceptance_corpus():
    """Named corpus of >= 10 deterministic images, each below 1 MP."""
    items = [
        ("noise_a", smooth_noise(384, 512, seed=11, sigma=28)),
        ("noise_b", smooth_noise(320, 320, seed=23, sigma=18)),
        ("noise_c", smooth_noise(256, 384, seed=37, sigma=30)),
        ("blobs_a", blob_scene(360, 480, seed=5, n_blobs=5)),
        ("blobs_b", blob_scene(300, 400, seed=17, n_blobs=7)),
        ("blobs_c", blob_scene(256, 256, seed=29, n_blobs=4)),
        ("grad_a", banded_gradient(320, 480, seed=3)),
        ("grad_b", banded_gradient(280, 420, seed=13)),
        ("mix_a", simplex_mix(320, 320, seed=41)[0]),
        ("mix_b", simplex_mix(288, 352, seed=43)[0]),
        ("blobs_d", blob_scene(224, 336, seed=53, n_blobs=6)),
    ]
    return items
