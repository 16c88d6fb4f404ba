"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; plain `pytest` still enforces everything.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from oracles import grid_fit_oracle, lp_hull_vertices
from palettekit import (
    colorspace as cs,
    decomposer as dc,
    fileio,
    geomkit as gk,
    harmony as hm,
    palette as pal,
    pipeline,
    testimages,
    transfer as tr,
    video,
)

RMSE_LIMIT = 3.0 / 255.0


def report(name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else "")
    print(line, flush=True)
    assert ok, line


# ---------------------------------------------------------------------------
# corpus pass shared by the first three criteria (streamed to bound memory)


@pytest.fixture(scope="module")
def corpus_results():
    results = []
    for name, img in testimages.acceptance_corpus():
        t0 = time.perf_counter()
        palette = pal.extract_palette(img)
        state = dc.precompute_rgbxy(img)
        weights = dc.relayer(state, palette)
        elapsed = time.perf_counter() - t0
        recon = dc.reconstruct(weights, palette)
        rmse = float(np.sqrt(np.mean((recon - img) ** 2)))
        row_sums = weights.w.sum(axis=1)
        results.append(
            {
                "name": name,
                "pixels": img.shape[0] * img.shape[1],
                "size": len(palette),
                "rmse": rmse,
                "seconds": elapsed,
                "nnz_ok": bool((np.count_nonzero(state.data6, axis=1) <= 6).all()),
                "state_sum_err": float(np.abs(state.data6.sum(axis=1) - 1).max()),
                "row_sum_err": float(np.abs(row_sums - 1).max()),
                "raw_min": float(min(state.raw_weight_min, weights.raw_min)),
            }
        )
        del state, weights, recon
    return results


def test_reconstruction_fidelity(corpus_results):
    worst = max(r["rmse"] for r in corpus_results)
    slowest = max(r["seconds"] for r in corpus_results)
    ok = (
        len(corpus_results) >= 10
        and all(r["pixels"] <= 1_000_000 for r in corpus_results)
        and worst <= RMSE_LIMIT
        and slowest <= 60.0
    )
    report(
        "reconstruction fidelity (RMSE <= 3/255, <= 60s/image)",
        ok,
        f"n={len(corpus_results)} worst_rmse={worst * 255:.3f}/255 slowest={slowest:.1f}s",
    )


def test_weight_convexity_and_sparsity(corpus_results):
    ok = all(
        r["nnz_ok"]
        and r["state_sum_err"] <= 1e-4
        and r["row_sum_err"] <= 1e-4
        and r["raw_min"] >= -1e-9
        for r in corpus_results
    )
    worst_raw = min(r["raw_min"] for r in corpus_results)
    worst_sum = max(r["row_sum_err"] for r in corpus_results)
    report(
        "weight convexity & sparsity (<= 6 nnz, sums 1 +- 1e-4, raw >= -1e-9)",
        ok,
        f"worst_row_sum_err={worst_sum:.2e} worst_raw_min={worst_raw:.2e}",
    )


def test_palette_size_distribution(corpus_results):
    sizes = sorted(r["size"] for r in corpus_results)
    median = float(np.median(sizes))
    ok = all(4 <= s <= 12 for s in sizes) and 5 <= median <= 9
    report(
        "palette size distribution (sizes in [4,12], median in [5,9])",
        ok,
        f"sizes={sizes} median={median:.1f}",
    )


# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def megapixel_state():
    img = testimages.one_megapixel()
    palette = pal.extract_palette(img)
    state = dc.precompute_rgbxy(img)
    return img, palette, state


def test_relayer_latency_one_megapixel(megapixel_state, rng):
    img, palette, state = megapixel_state
    perturbed = pal.Palette(
        np.clip(palette.colors + rng.uniform(-0.05, 0.05, palette.colors.shape), 0, 1)
    )
    dc.relayer(state, perturbed)  # warm all kernels and caches
    times = []
    for _ in range(5):
        t0 = time.perf_counter()
        dc.relayer(state, perturbed)
        times.append(time.perf_counter() - t0)
    best = min(times)
    report(
        "relayer latency (1 MP, <= 100 ms)",
        best <= 0.100,
        f"best={best * 1000:.1f}ms of {[f'{t*1000:.0f}' for t in times]} q={state.vertex_count}",
    )


def test_line_of_greys_two_sparse(gray_ramp_512):
    palette = pal.extract_palette(gray_ramp_512)
    state = dc.precompute_rgbxy(gray_ramp_512)
    weights = dc.relayer(state, palette)
    frac = float(((weights.w > 1e-3).sum(axis=1) <= 2).mean())
    report(
        "line of greys (>= 99% pixels 2-sparse at 1e-3)",
        frac >= 0.99,
        f"fraction={frac:.4f} palette={len(palette)}",
    )


def test_harmonization_exactness(rng):
    n_palettes = 100
    failures = []
    for k in range(n_palettes):
        n = int(rng.integers(3, 9))
        lch = np.stack(
            [rng.uniform(5, 95, n), rng.uniform(5, 110, n), rng.uniform(0, 360, n)],
            axis=1,
        )
        wp = rng.random(n) + 0.05
        for kind in hm.KINDS:
            fit = hm.fit_template(lch, wp, kind)
            d_o, a1_o, a2_o = grid_fit_oracle(lch, wp, kind)
            if fit.template.alpha1 != a1_o or fit.template.alpha2 != a2_o:
                failures.append((k, kind, "alpha", fit.template.alpha1, a1_o))
                continue
            assignment = hm.assign_axes(lch, fit.template)
            h0 = hm.harmonize_palette(lch, fit.template, 0.0, assignment)
            if not np.array_equal(h0, lch):
                failures.append((k, kind, "beta0"))
            h1 = hm.harmonize_palette(lch, fit.template, 1.0, assignment)
            if not np.array_equal(h1[:, :2], lch[:, :2]):
                failures.append((k, kind, "LC"))
            movable = ~assignment.in_sector & (lch[:, 1] >= cs.ACHROMATIC_EPS)
            if kind == "analogous":
                d = np.maximum(
                    cs.hue_arc_distance(h1[:, 2], fit.template.alpha1)
                    - (30.0 + fit.template.alpha2),
                    0.0,
                )
            else:
                d = cs.hue_arc_distance(
                    h1[:, 2][:, None], fit.template.axis_angles()[None, :]
                ).min(axis=1)
            if movable.any() and d[movable].max() >= 0.5:
                failures.append((k, kind, "snap", float(d[movable].max())))
    report(
        "harmonization exactness (beta identities, 0.5 deg snap, oracle alpha*)",
        not failures,
        f"{n_palettes} palettes x {len(hm.KINDS)} kinds; failures={failures[:3]}",
    )


def test_lc_fit_oracle(rng):
    n_palettes = 100
    worst_closed = 0.0
    worst_angle = 0.0
    for _ in range(n_palettes):
        n = int(rng.integers(3, 8))
        lch = np.stack(
            [rng.uniform(10, 90, n), rng.uniform(10, 100, n), rng.uniform(0, 360, n)],
            axis=1,
        )
        wp = rng.random(n) + 0.05
        for kind in ("LC1", "LC2", "LC5", "LC6"):
            eps = hm.fit_lc_template(lch, wp, kind)
            res = minimize_scalar(
                lambda e: hm.lc_objective(lch, wp, kind, e),
                bounds=(-3.0, 3.0),
                method="bounded",
                options={"xatol": 1e-10},
            )
            worst_closed = max(worst_closed, abs(eps - res.x))
        for kind in ("LC3", "LC4"):
            eps = hm.fit_lc_template(lch, wp, kind)
            grid = np.arange(0.0, 180.0, 0.1)
            vals = np.array([hm.lc_objective(lch, wp, kind, e) for e in grid])
            fine = float(grid[int(vals.argmin())])
            worst_angle = max(
                worst_angle, min(abs(eps - fine), 180.0 - abs(eps - fine))
            )
    ok = worst_closed < 1e-6 and worst_angle <= 1.0
    report(
        "LC fit oracle (closed forms 1e-6, brute force within 1 deg)",
        ok,
        f"worst_closed={worst_closed:.2e} worst_angle={worst_angle:.2f}deg",
    )


def test_geometry_oracles(rng):
    clouds = [(3, int(rng.integers(20, 81))) for _ in range(60)] + [
        (5, int(rng.integers(15, 61))) for _ in range(40)
    ]
    vertex_mismatches = 0
    worst_vol = 0.0
    for dim, n in clouds:
        pts = rng.random((n, dim))
        hull = gk.convex_hull(pts)
        got = {int(np.argmin(np.linalg.norm(pts - v, axis=1))) for v in hull.vertices}
        if got != lp_hull_vertices(pts):
            vertex_mismatches += 1
        tess = gk.delaunay_tessellate(pts)
        worst_vol = max(
            worst_vol, abs(tess.total_volume() - hull.volume) / hull.volume
        )
    monotone_ok = True
    contain_ok = True
    for _ in range(20):
        pts = rng.random((40, 3))
        hull = gk.convex_hull(pts)
        seq = gk.simplify_hull(hull, stop=lambda c: False)
        vols = [hull.volume] + [h.volume for h in seq]
        monotone_ok &= all(a <= b + 1e-12 for a, b in zip(vols, vols[1:]))
        contain_ok &= all(h.contains(pts, tol=1e-9).all() for h in seq)
    ok = vertex_mismatches == 0 and worst_vol < 1e-6 and monotone_ok and contain_ok
    report(
        "geometry oracles (LP vertex sets, tessellation volumes, simplify)",
        ok,
        f"clouds={len(clouds)} mismatches={vertex_mismatches} "
        f"worst_vol_rel={worst_vol:.2e} monotone={monotone_ok} contain={contain_ok}",
    )


def test_video_coherence():
    frames = [testimages.blob_scene(48, 48, seed=200 + k, n_blobs=3) for k in range(10)]
    palette = video.video_global_palette(frames)
    outs, rep = video.harmonize_video(frames, "triad", 0.0)
    worst = max(
        float(np.sqrt(np.mean((o - f) ** 2))) for o, f in zip(outs, frames)
    )
    static, _ = video.harmonize_video([frames[0]] * 10, "triad", 1.0)
    static_ok = all(np.array_equal(static[0], s) for s in static[1:])
    ok = (
        len(rep["palette"]) == len(palette)
        and len(outs) == 10
        and worst <= RMSE_LIMIT
        and static_ok
    )
    report(
        "video coherence (global palette, static identity, beta0 RMSE)",
        ok,
        f"frames=10 palette={len(palette)} beta0_worst_rmse={worst * 255:.3f}/255 static_identical={static_ok}",
    )


def test_transfer_post_conditions(rng):
    worst_mean = 0.0
    worst_gamma = 0.0
    for k in range(20):
        n_i, n_r = int(rng.integers(4, 8)), int(rng.integers(4, 8))
        lch_i = np.stack(
            [rng.uniform(25, 75, n_i), rng.uniform(25, 85, n_i), rng.uniform(0, 360, n_i)],
            axis=1,
        )
        lch_r = np.stack(
            [rng.uniform(25, 75, n_r), rng.uniform(25, 85, n_r), rng.uniform(0, 360, n_r)],
            axis=1,
        )
        wi, wr = rng.random(n_i) + 0.05, rng.random(n_r) + 0.05
        _, rep = tr.template_transfer(lch_i, wi, lch_r, wr)
        worst_mean = max(
            worst_mean,
            abs(rep["pre_clamp_mean_l"] - rep["reference_mean_l"]),
            abs(rep["pre_clamp_mean_c"] - rep["reference_mean_c"]),
        )
        rotation = float(rng.uniform(10, 170))
        rotated = lch_r.copy()
        rotated[:, 2] = (rotated[:, 2] + rotation) % 360.0
        _, rep_a = tr.template_align(rotated, wr, lch_r, wr)
        err = abs(cs.signed_hue_delta(-rotation, rep_a["gamma"]))
        worst_gamma = max(worst_gamma, float(err))
    ok = worst_mean < 1e-6 and worst_gamma <= 1.0
    report(
        "transfer post-conditions (mean L/C match 1e-6, rotation within 1 deg)",
        ok,
        f"worst_mean_err={worst_mean:.2e} worst_gamma_err={worst_gamma:.2f}deg",
    )


# ---------------------------------------------------------------------------
# [SECONDARY] service equivalence and interactive throughput


def _run_cli(*args):
    result = subprocess.run(
        [sys.executable, "-m", "palettekit.cli", *args], capture_output=True, text=True
    )
    assert result.returncode == 0, result.stderr
    return result


def _scripted_session(img, tmp_path, tag):
    """load -> auto_palette -> set_palette -> harmonize, mirrored by the CLI."""
    import json as _json

    from fastapi.testclient import TestClient

    from palettekit.service import create_app

    png = fileio.encode_png(fileio.to_uint8(img))
    in_path = tmp_path / f"{tag}.png"
    fileio.atomic_write_bytes(in_path, png)

    client = TestClient(create_app())
    checks = {}
    with client.websocket_connect("/session") as ws:
        ws.send_text(_json.dumps({"type": "load"}))
        ws.send_bytes(png)
        ready = _json.loads(ws.receive_text())

        ws.send_text(_json.dumps({"type": "auto_palette", "rmse": 2.0}))
        pal_frame = _json.loads(ws.receive_text())
        _json.loads(ws.receive_text())
        auto_preview = ws.receive_bytes()

        ws.send_text(_json.dumps({"type": "set_palette", "colors": pal_frame["colors"]}))
        _json.loads(ws.receive_text())
        _json.loads(ws.receive_text())
        set_preview = ws.receive_bytes()

        ws.send_text(_json.dumps({"type": "harmonize", "kind": "triad", "beta": 1.0}))
        fit_frame = _json.loads(ws.receive_text())
        _json.loads(ws.receive_text())
        _json.loads(ws.receive_text())
        harm_preview = ws.receive_bytes()

    # CLI equivalents with the same parameters
    pal_path = tmp_path / f"{tag}_p.json"
    _run_cli("palette", str(in_path), "--rmse", "2", "--out", str(pal_path))
    cli_palette = json.loads(pal_path.read_text())["colors"]
    checks["palette_values"] = cli_palette == pal_frame["colors"]

    recon_path = tmp_path / f"{tag}_recon.png"
    _run_cli(
        "decompose", str(in_path), "--palette", str(pal_path), "--recolored", str(recon_path)
    )
    recon_bytes = recon_path.read_bytes()
    checks["auto_preview_bytes"] = auto_preview == recon_bytes
    checks["set_preview_bytes"] = set_preview == recon_bytes

    harm_path = tmp_path / f"{tag}_h.png"
    rep_path = tmp_path / f"{tag}_h.json"
    _run_cli(
        "harmonize", str(in_path), "--template", "triad", "--beta", "1",
        "--out", str(harm_path), "--report", str(rep_path),
    )
    checks["harmonize_bytes"] = harm_preview == harm_path.read_bytes()
    rep = json.loads(rep_path.read_text())
    checks["fit_values"] = (
        rep["kind"] == fit_frame["kind"]
        and rep["alpha1"] == fit_frame["alpha1"]
        and rep["alpha2"] == fit_frame["alpha2"]
        and rep["distance"] == fit_frame["distance"]
    )
    return checks


def test_service_cli_equivalence(tmp_path):
    session_images = [
        ("s1", testimages.blob_scene(96, 96, seed=5, n_blobs=4)),
        ("s2", testimages.smooth_noise(80, 112, seed=23, sigma=14)),
        ("s3", testimages.banded_gradient(72, 96, seed=13)),
    ]
    all_checks = {}
    for tag, img in session_images:
        for key, ok in _scripted_session(img, tmp_path, tag).items():
            all_checks[f"{tag}:{key}"] = ok
    bad = [k for k, v in all_checks.items() if not v]
    report(
        "[secondary] service/CLI equivalence (3 scripted sessions)",
        not bad,
        f"checks={len(all_checks)} failing={bad}",
    )


def test_service_preview_throughput(megapixel_state, rng):
    import json as _json

    from fastapi.testclient import TestClient

    from palettekit.service import create_app

    img, palette, _ = megapixel_state
    png = fileio.encode_png(fileio.to_uint8(img))
    client = TestClient(create_app())
    with client.websocket_connect("/session") as ws:
        ws.send_text(_json.dumps({"type": "load"}))
        ws.send_bytes(png)
        ready = _json.loads(ws.receive_text())
        base = np.asarray(ready["palette"])

        def drag(colors):
            ws.send_text(_json.dumps({"type": "set_palette", "colors": colors.tolist()}))
            _json.loads(ws.receive_text())
            _json.loads(ws.receive_text())
            ws.receive_bytes()

        drag(base)  # warm
        n_updates = 10
        t0 = time.perf_counter()
        for k in range(n_updates):
            jitter = 0.04 * np.sin(0.7 * k + np.arange(base.size).reshape(base.shape))
            drag(np.clip(base + jitter, 0.0, 1.0))
        elapsed = time.perf_counter() - t0
    rate = n_updates / elapsed
    report(
        "[secondary] swatch-drag preview rate (>= 5/s on 1 MP)",
        rate >= 5.0,
        f"rate={rate:.1f}/s over {n_updates} updates",
    )
