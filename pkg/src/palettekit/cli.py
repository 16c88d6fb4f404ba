"""Command-line front door: palette, decompose, relayer, harmonize,
lc-harmonize, contrast, transfer, video, serve.

Every subcommand is deterministic for identical inputs and flags, writes
outputs atomically, and exits 0 on success, 2 on usage errors, 1 on
processing errors.  RMSE flags are expressed in 0-255 units to match common
usage (2 means 2/255).
"""

import os
import sys

import click
import numpy as np

from . import decomposer, fileio, harmony, pipeline, video
from .palette import Palette, extract_palette


def _fail(message):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _run(fn):
    try:
        fn()
    except click.ClickException:
        raise
    except Exception as exc:  # processing error -> exit 1, message on stderr
        _fail(exc)


def _rmse_opt(fn):
    return click.option(
        "--rmse",
        type=float,
        default=2.0,
        show_default=True,
        help="Reconstruction RMSE tolerance in 0-255 units.",
    )(fn)


def _xy_opt(fn):
    return click.option(
        "--xy-scale",
        type=float,
        default=1.0,
        show_default=True,
        help="Multiplier on the normalized spatial coordinates.",
    )(fn)


@click.group()
def main():
    """Palette-based image decomposition, harmonization, and transfer."""


@main.command("palette")
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@_rmse_opt
@click.option("--out", required=True, type=click.Path(), help="Palette JSON path.")
@click.option("--report", type=click.Path(), help="Optional report JSON path.")
def palette_cmd(image, rmse, out, report):
    """Extract an automatically sized palette from IMAGE."""

    def go():
        img = fileio.load_image(image)
        pal = extract_palette(img, rmse / 255.0)
        fileio.write_palette(out, pal)
        if report:
            fileio.write_json(report, {"size": len(pal), "rmse_tol": rmse / 255.0})
        click.echo(f"palette: {len(pal)} colors -> {out}")

    _run(go)


def _write_layer_dir(layers, directory):
    os.makedirs(directory, exist_ok=True)
    for i, layer in enumerate(layers):
        fileio.atomic_write_bytes(
            os.path.join(directory, f"layer_{i:02d}.png"), fileio.encode_png(layer)
        )


@main.command("decompose")
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--palette", "palette_path", type=click.Path(exists=True), help="Palette JSON (default: auto-extract).")
@_rmse_opt
@_xy_opt
@click.option("--state", "state_path", type=click.Path(), help="Write the decomposition state cache here.")
@click.option("--weights", "weights_path", type=click.Path(), help="Write the weights container here.")
@click.option("--layers", "layers_dir", type=click.Path(), help="Write per-color RGBA layer PNGs here.")
@click.option("--recolored", type=click.Path(), help="Write the reconstructed PNG here.")
@click.option("--out-palette", type=click.Path(), help="Write the palette used here.")
def decompose_cmd(image, palette_path, rmse, xy_scale, state_path, weights_path, layers_dir, recolored, out_palette):
    """Decompose IMAGE into additive palette layers."""

    def go():
        img = fileio.load_image(image)
        pal = fileio.read_palette(palette_path) if palette_path else None
        pal, state, weights = pipeline.decompose(img, pal, rmse / 255.0, xy_scale)
        if state_path:
            fileio.write_state(state_path, state)
        if weights_path:
            fileio.write_weights(weights_path, weights)
        if layers_dir:
            _write_layer_dir(decomposer.export_layers(weights, pal), layers_dir)
        if recolored:
            fileio.save_png(recolored, decomposer.reconstruct(weights, pal))
        if out_palette:
            fileio.write_palette(out_palette, pal)
        click.echo(
            f"decomposed: {len(pal)} colors, {state.vertex_count} rgbxy vertices"
        )

    _run(go)


@main.command("relayer")
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--state", "state_path", required=True, type=click.Path(), help="State cache (created from IMAGE when missing).")
@click.option("--palette", "palette_path", required=True, type=click.Path(exists=True))
@_xy_opt
@click.option("--weights", "weights_path", type=click.Path())
@click.option("--layers", "layers_dir", type=click.Path())
@click.option("--recolored", type=click.Path())
def relayer_cmd(image, state_path, palette_path, xy_scale, weights_path, layers_dir, recolored):
    """Recompute layer weights for a new palette from the cached state."""

    def go():
        if os.path.exists(state_path):
            state = fileio.read_state(state_path)
        else:
            state = decomposer.precompute_rgbxy(fileio.load_image(image), xy_scale)
            fileio.write_state(state_path, state)
        pal = fileio.read_palette(palette_path)
        weights = decomposer.relayer(state, pal)
        if weights_path:
            fileio.write_weights(weights_path, weights)
        if layers_dir:
            _write_layer_dir(decomposer.export_layers(weights, pal), layers_dir)
        if recolored:
            fileio.save_png(recolored, decomposer.reconstruct(weights, pal))
        click.echo(f"relayered {len(pal)} colors over {state.vertex_count} vertices")

    _run(go)


_TEMPLATE_CHOICES = ("auto",) + harmony.KINDS


@main.command("harmonize")
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--template", type=click.Choice(_TEMPLATE_CHOICES), default="auto", show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@_rmse_opt
@_xy_opt
@click.option("--out", type=click.Path(), help="Recolored PNG (required unless --fit-only).")
@click.option("--report", "report_path", type=click.Path())
@click.option("--fit-only", is_flag=True, help="Only fit and report; no recoloring.")
def harmonize_cmd(image, template, beta, rmse, xy_scale, out, report_path, fit_only):
    """Fit a harmonic template and recolor IMAGE toward it."""
    if not fit_only and not out:
        raise click.UsageError("--out is required unless --fit-only is given")

    def go():
        img = fileio.load_image(image)
        if fit_only:
            pal, _, weights = pipeline.decompose(img, rmse_tol=rmse / 255.0, xy_scale=xy_scale)
            wp = decomposer.palette_contributions(weights)
            fit = pipeline.fit_template_for(pal, wp, template)
            rep = pipeline.fit_report(fit, beta)
            rep["palette"] = pal.to_json_dict()["colors"]
            if report_path:
                fileio.write_json(report_path, rep)
            click.echo(
                f"fit: {fit.template.kind} alpha1={fit.template.alpha1:.0f} "
                f"alpha2={fit.template.alpha2:.0f} D={fit.distance:.6f}"
            )
            return
        result, _, rep = pipeline.harmonize_image(img, template, beta, rmse / 255.0, xy_scale)
        fileio.save_png(out, result)
        if report_path:
            fileio.write_json(report_path, rep)
        click.echo(f"harmonized with {rep['kind']} (alpha1={rep['alpha1']:.0f}) -> {out}")

    _run(go)


@main.command("lc-harmonize")
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", type=click.Choice(harmony.LC_KINDS), required=True)
@click.option("--hue-template", type=click.Choice(("none",) + _TEMPLATE_CHOICES), default="auto", show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@_rmse_opt
@_xy_opt
@click.option("--out", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path())
def lc_harmonize_cmd(image, kind, hue_template, beta, rmse, xy_scale, out, report_path):
    """Lightness-chroma template harmonization (on top of a hue fit)."""

    def go():
        img = fileio.load_image(image)
        result, _, rep = pipeline.lc_harmonize_image(
            img, kind, hue_template, beta, rmse / 255.0, xy_scale
        )
        fileio.save_png(out, result)
        if report_path:
            fileio.write_json(report_path, rep)
        click.echo(f"lc-harmonized with {kind} (epsilon={rep['epsilon']:.4f}) -> {out}")

    _run(go)


@main.command("contrast")
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", type=click.Choice(harmony.CONTRAST_KINDS), required=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@_rmse_opt
@_xy_opt
@click.option("--out", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path())
def contrast_cmd(image, kind, beta, rmse, xy_scale, out, report_path):
    """Apply one of the classical contrast arrangements."""

    def go():
        img = fileio.load_image(image)
        result, _, rep = pipeline.contrast_image(img, kind, beta, rmse / 255.0, xy_scale)
        fileio.save_png(out, result)
        if report_path:
            fileio.write_json(report_path, rep)
        click.echo(f"contrast {kind} -> {out}")

    _run(go)


@main.command("transfer")
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--reference", type=click.Path(exists=True), help="Reference image (palette auto-extracted).")
@click.option("--ref-palette", type=click.Path(exists=True), help="Reference palette JSON (overrides --reference colors).")
@click.option("--mode", type=click.Choice(("align", "transfer")), default="transfer", show_default=True)
@_rmse_opt
@_xy_opt
@click.option("--out", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path())
def transfer_cmd(image, reference, ref_palette, mode, rmse, xy_scale, out, report_path):
    """Recolor IMAGE toward a reference palette via template alignment/transfer."""
    if not reference and not ref_palette:
        raise click.UsageError("provide --reference and/or --ref-palette")

    def go():
        img = fileio.load_image(image)
        ref_weights = None
        if ref_palette:
            pal_r = fileio.read_palette(ref_palette)
        else:
            ref_img = fileio.load_image(reference)
            pal_r, _, w_r = pipeline.decompose(ref_img, rmse_tol=rmse / 255.0, xy_scale=xy_scale)
            ref_weights = decomposer.palette_contributions(w_r)
        result, _, rep = pipeline.transfer_image(
            img, pal_r, mode, ref_weights, rmse / 255.0, xy_scale
        )
        fileio.save_png(out, result)
        if report_path:
            fileio.write_json(report_path, rep)
        click.echo(f"transfer ({mode}) -> {out}")

    _run(go)


@main.group("video")
def video_group():
    """Frame-sequence operations (PNG directories, zero-padded names)."""


def _list_frames(directory):
    names = sorted(
        n for n in os.listdir(directory) if n.lower().endswith((".png", ".jpg", ".jpeg"))
    )
    if not names:
        raise click.UsageError(f"no frames found in {directory}")
    return [os.path.join(directory, n) for n in names]


@video_group.command("harmonize")
@click.option("--frames", "frames_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--template", type=click.Choice(_TEMPLATE_CHOICES), default="auto", show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@_rmse_opt
@_xy_opt
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path())
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--streaming", is_flag=True, help="Recompute weights in a second pass instead of retaining them.")
def video_harmonize_cmd(frames_dir, template, beta, rmse, xy_scale, out_dir, report_path, workers, streaming):
    """Harmonize a frame directory with one global palette."""

    def go():
        paths = _list_frames(frames_dir)
        frames = [fileio.load_image(p) for p in paths]
        outs, rep = video.harmonize_video(
            frames,
            template,
            beta,
            rmse / 255.0,
            xy_scale,
            workers=workers,
            keep_weights=not streaming,
        )
        os.makedirs(out_dir, exist_ok=True)
        for path, frame in zip(paths, outs):
            fileio.save_png(os.path.join(out_dir, os.path.basename(path)), frame)
        if report_path:
            fileio.write_json(report_path, rep)
        click.echo(f"harmonized {len(outs)} frames -> {out_dir}")

    _run(go)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=9800, show_default=True)
@click.option("--max-pixels", type=int, default=4_000_000, show_default=True, help="Reject images larger than this at load.")
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None, help="Static UI bundle to serve at /.")
def serve_cmd(host, port, max_pixels, ui_dir):
    """Run the interactive session service (WebSocket + static UI)."""
    import uvicorn

    from .service import create_app

    app = create_app(max_pixels=max_pixels, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
