"""Per-connection session state and message handling.

A session owns one image, its decomposition state (computed exactly once per
load), the current palette, and the current weights.  Messages are processed
strictly in arrival order; preview-style operations (harmonize, lc, contrast,
transfer) never mutate the current palette, they only recolor through the
fixed weights.
"""

import numpy as np

from .. import colorspace, decomposer, fileio, harmony, pipeline, transfer
from ..palette import Palette, extract_palette
from . import models


class SessionError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class Session:
    def __init__(self, max_pixels=4_000_000, preview_max_edge=1024):
        self.max_pixels = max_pixels
        self.preview_max_edge = preview_max_edge
        self.img = None
        self.state = None
        self.palette = None
        self.weights = None
        self.precompute_count = 0

    # -- helpers ----------------------------------------------------------

    def _require_image(self):
        if self.img is None:
            raise SessionError("no_image", "load an image first")

    def _palette_frame(self, pal, role="current"):
        return models.PaletteFrame(colors=pal.to_json_dict()["colors"], role=role)

    def _preview_frames(self, pal, full=False):
        img8 = fileio.to_uint8(decomposer.reconstruct(self.weights, pal))
        h, w = img8.shape[:2]
        if not full and max(h, w) > self.preview_max_edge:
            step = -(-max(h, w) // self.preview_max_edge)  # ceil division
            img8 = img8[::step, ::step]
        header = models.PreviewFrame(width=img8.shape[1], height=img8.shape[0], full=full)
        return [header, fileio.encode_png(img8)]

    def _set_current_palette(self, pal):
        self.palette = pal
        self.weights = decomposer.relayer(self.state, pal)

    def _contributions(self):
        return decomposer.palette_contributions(self.weights)

    # -- message handlers (each returns a list of frames) ------------------

    def load(self, png_bytes):
        img = fileio.decode_png(png_bytes)
        h, w = img.shape[:2]
        if h * w > self.max_pixels:
            raise SessionError("too_large", f"image has {h*w} pixels, cap is {self.max_pixels}")
        self.img = img
        self.state = decomposer.precompute_rgbxy(img)
        self.precompute_count += 1
        self._set_current_palette(extract_palette(img))
        return [
            models.ReadyFrame(
                palette=self.palette.to_json_dict()["colors"],
                q=self.state.vertex_count,
                width=w,
                height=h,
            )
        ]

    def handle(self, msg, binary=None):
        self._require_image()
        if isinstance(msg, models.AutoPaletteMsg):
            self._set_current_palette(extract_palette(self.img, msg.rmse / 255.0))
            return [self._palette_frame(self.palette)] + self._preview_frames(self.palette)
        if isinstance(msg, models.SetPaletteMsg):
            self._set_current_palette(Palette(np.asarray(msg.colors, dtype=np.float64)))
            return [self._palette_frame(self.palette)] + self._preview_frames(self.palette)
        if isinstance(msg, models.AddColorMsg):
            colors = np.vstack([self.palette.colors, np.asarray(msg.rgb, dtype=np.float64)])
            self._set_current_palette(Palette(colors))
            return [self._palette_frame(self.palette)] + self._preview_frames(self.palette)
        if isinstance(msg, models.FitMsg):
            kinds = tuple(msg.kinds) if msg.kinds else harmony.KINDS
            fit = harmony.select_optimal_template(
                pipeline.lch_of(self.palette), self._contributions(), kinds
            )
            return [
                models.FitReportFrame(
                    kind=fit.template.kind,
                    alpha1=fit.template.alpha1,
                    alpha2=fit.template.alpha2,
                    distance=fit.distance,
                )
            ]
        if isinstance(msg, models.HarmonizeMsg):
            fit = pipeline.fit_template_for(self.palette, self._contributions(), msg.kind)
            lch = pipeline.lch_of(self.palette)
            harmonized = harmony.harmonize_palette(lch, fit.template, msg.beta)
            new_pal = pipeline.edited_palette(self.palette, lch, harmonized)
            return [
                models.FitReportFrame(
                    kind=fit.template.kind,
                    alpha1=fit.template.alpha1,
                    alpha2=fit.template.alpha2,
                    distance=fit.distance,
                ),
                self._palette_frame(new_pal, role="harmonized"),
            ] + self._preview_frames(new_pal)
        if isinstance(msg, models.LcMsg):
            if msg.kind not in harmony.LC_KINDS:
                raise SessionError("bad_kind", f"unknown LC kind {msg.kind!r}")
            new_pal, eps = self._lc_palette(msg)
            return [self._palette_frame(new_pal, role="harmonized")] + self._preview_frames(new_pal)
        if isinstance(msg, models.ContrastMsg):
            if msg.kind not in harmony.CONTRAST_KINDS:
                raise SessionError("bad_kind", f"unknown contrast kind {msg.kind!r}")
            lch = pipeline.lch_of(self.palette)
            out_lch, _ = harmony.contrast_operator(
                lch, self._contributions(), msg.kind, msg.beta
            )
            new_pal = pipeline.edited_palette(self.palette, lch, out_lch)
            return [self._palette_frame(new_pal, role="harmonized")] + self._preview_frames(new_pal)
        if isinstance(msg, models.TransferMsg):
            ref = Palette(np.asarray(msg.ref_palette.colors, dtype=np.float64))
            lch_i = pipeline.lch_of(self.palette)
            lch_r = colorspace.rgb_to_lch(ref.colors)
            wr = harmony.uniform_weights(len(ref))
            if msg.mode == "align":
                out_lch, _ = transfer.template_align(lch_i, self._contributions(), lch_r, wr)
            else:
                out_lch, _ = transfer.template_transfer(lch_i, self._contributions(), lch_r, wr)
            new_pal = pipeline.edited_palette(self.palette, lch_i, out_lch)
            return [self._palette_frame(new_pal, role="transferred")] + self._preview_frames(new_pal)
        if isinstance(msg, models.GetLayersMsg):
            layers = decomposer.export_layers(self.weights, self.palette)
            frames = [
                models.LayersFrame(
                    count=len(layers), width=self.state.width, height=self.state.height
                )
            ]
            frames.extend(fileio.encode_png(layer) for layer in layers)
            return frames
        if isinstance(msg, models.RenderMsg):
            return self._preview_frames(self.palette, full=True)
        if isinstance(msg, models.DebugMsg):
            return [
                models.DebugFrame(
                    precompute_count=self.precompute_count, q=self.state.vertex_count
                )
            ]
        raise SessionError("unknown_type", f"unhandled message {type(msg).__name__}")

    def _lc_palette(self, msg):
        wp = self._contributions()
        lch = pipeline.lch_of(self.palette)
        groups = None
        pivot_per_group = False
        if msg.hue_template not in (None, "none"):
            fit = pipeline.fit_template_for(self.palette, wp, msg.hue_template)
            assignment = harmony.assign_axes(lch, fit.template)
            lch = harmony.harmonize_palette(lch, fit.template, msg.beta, assignment)
            if not fit.template.is_sector and fit.template.kind != "monochrome":
                groups = [
                    np.flatnonzero(assignment.axis_index == j)
                    for j in range(fit.template.n_axes)
                ]
                pivot_per_group = True
        eps = harmony.fit_lc_template(lch, wp, msg.kind)
        target = harmony.apply_lc_template(
            lch, wp, msg.kind, eps, groups=groups, pivot_per_group=pivot_per_group
        )
        blended = lch.copy()
        blended[:, :2] += msg.beta * (target[:, :2] - blended[:, :2])
        return pipeline.edited_palette(self.palette, pipeline.lch_of(self.palette), blended), eps
