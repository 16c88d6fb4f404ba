"""File formats and deterministic encoders shared by the CLI and service.

Weights container: one UTF-8 JSON header line ending in '\\n', then nnz
little-endian triplet records (row: u32, col: u32, value: f32).  The cached
decomposition state reuses the same header-plus-payload layout with f64
values and an extra vertex block so relayering stays bit-exact.

All writers go through a write-to-temp + atomic-rename path: no partial
output files survive a crash.
"""

import json
import os
import tempfile
from io import BytesIO

import numpy as np
from PIL import Image

from .decomposer import DecompositionState, LayerWeights
from .palette import Palette

_PNG_LEVEL = 6  # fixed so identical pixels yield identical bytes everywhere


def load_image(path):
    """Image file -> float64 (H, W, 3) in [0, 1]."""
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        return np.asarray(rgb, dtype=np.float64) / 255.0


def to_uint8(img):
    return np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def encode_png(arr):
    """uint8 (H, W, 3|4) -> PNG bytes with pinned encoder settings."""
    mode = "RGBA" if arr.shape[2] == 4 else "RGB"
    buf = BytesIO()
    Image.fromarray(arr, mode).save(buf, format="PNG", compress_level=_PNG_LEVEL)
    return buf.getvalue()


def decode_png(data):
    with Image.open(BytesIO(data)) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0


def atomic_write_bytes(path, data):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write_bytes(path, (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode())


def read_json(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_palette(path, pal: Palette):
    write_json(path, pal.to_json_dict())


def read_palette(path):
    return Palette.from_json_dict(read_json(path))


def save_png(path, img):
    arr = img if img.dtype == np.uint8 else to_uint8(img)
    atomic_write_bytes(path, encode_png(arr))


def _header_line(header):
    return (json.dumps(header, sort_keys=True) + "\n").encode()


def write_weights(path, weights: LayerWeights):
    """Layer weights as the triplet container (row u32, col u32, value f32)."""
    rows, cols = np.nonzero(weights.w)
    vals = weights.w[rows, cols].astype("<f4")
    header = {
        "kind": "weights",
        "dims": [weights.width, weights.height],
        "n": int(weights.w.shape[0]),
        "p": int(weights.w.shape[1]),
        "nnz": int(len(vals)),
        "value_dtype": "<f4",
    }
    rec = np.empty(len(vals), dtype=[("row", "<u4"), ("col", "<u4"), ("value", "<f4")])
    rec["row"] = rows
    rec["col"] = cols
    rec["value"] = vals
    atomic_write_bytes(path, _header_line(header) + rec.tobytes())


def read_weights(path):
    with open(path, "rb") as f:
        header = json.loads(f.readline().decode())
        if header.get("kind") != "weights":
            raise ValueError(f"{path} is not a weights file")
        rec = np.frombuffer(
            f.read(), dtype=[("row", "<u4"), ("col", "<u4"), ("value", "<f4")]
        )
    w = np.zeros((header["n"], header["p"]))
    w[rec["row"], rec["col"]] = rec["value"]
    width, height = header["dims"]
    return LayerWeights(width, height, w)


def write_state(path, state: DecompositionState):
    """Decomposition state cache: header line + vertex block + f64 triplets.

    Values stay f64 so a relayer run from the cache is bit-identical to one
    from a fresh precompute.
    """
    n = state.pixel_count
    header = {
        "kind": "state",
        "dims": [state.width, state.height],
        "n": n,
        "q": int(state.vertex_count),
        "nnz": int(6 * n),
        "xy_scale": state.xy_scale,
        "value_dtype": "<f8",
    }
    rows = np.repeat(np.arange(n, dtype="<u4"), 6)
    rec = np.empty(6 * n, dtype=[("row", "<u4"), ("col", "<u4"), ("value", "<f8")])
    rec["row"] = rows
    rec["col"] = state.cols6.ravel()
    rec["value"] = state.data6.ravel()
    payload = state.rgbxy_vertices.astype("<f8").tobytes() + rec.tobytes()
    atomic_write_bytes(path, _header_line(header) + payload)


def read_state(path):
    with open(path, "rb") as f:
        header = json.loads(f.readline().decode())
        if header.get("kind") != "state":
            raise ValueError(f"{path} is not a state cache")
        q, n = header["q"], header["n"]
        verts = np.frombuffer(f.read(q * 5 * 8), dtype="<f8").reshape(q, 5).copy()
        rec = np.frombuffer(
            f.read(), dtype=[("row", "<u4"), ("col", "<u4"), ("value", "<f8")]
        )
    width, height = header["dims"]
    return DecompositionState(
        width=width,
        height=height,
        xy_scale=header["xy_scale"],
        rgbxy_vertices=verts,
        data6=rec["value"].reshape(n, 6).copy(),
        cols6=rec["col"].reshape(n, 6).astype(np.int32),
    )
