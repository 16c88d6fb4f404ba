import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from palettekit import colorspace as cs, harmony as hm


def random_palette(rng, n=6, l=(10, 95), c=(5, 110)):
    return np.stack(
        [rng.uniform(*l, n), rng.uniform(*c, n), rng.uniform(0, 360, n)], axis=1
    )


def oracle_fit(lch, wp, kind):
    """Independent per-angle grid fit (loop over alpha1, numpy over colors)."""
    hues = lch[:, 2]
    w_eff = wp * (lch[:, 0] / 100.0) * (lch[:, 1] / 134.0)
    a2_values = (
        np.arange(-15.0, 16.0) if kind in hm.TWO_DOF_KINDS else np.array([0.0])
    )
    best = None
    for a1 in np.arange(0.0, 361.0):
        for a2 in a2_values:
            if kind == "analogous":
                d = np.maximum(cs.hue_arc_distance(hues, a1) - (30.0 + a2), 0.0)
            else:
                axes = (a1 + hm._canonical_axes(kind, a2)) % 360.0
                d = cs.hue_arc_distance(hues[:, None], axes[None, :]).min(axis=1)
            val = (w_eff * d).sum()
            if best is None or val < best[0]:
                best = (val, a1 % 360.0, a2)
    return best


class TestTemplateAxes:
    def test_triad_canonical(self):
        assert [a for a, _ in hm.template_axes("triad", 0)] == [0.0, 120.0, 240.0]

    def test_complementary_rotated(self):
        assert [a for a, _ in hm.template_axes("complementary", 30)] == [30.0, 210.0]

    def test_square_rotated(self):
        assert [a for a, _ in hm.template_axes("square", 10)] == [10.0, 100.0, 190.0, 280.0]

    def test_sector_axes_are_bounds(self):
        axes = hm.template_axes("analogous", 100, 5)
        assert [t for _, t in axes] == ["sector_bound", "sector_bound"]
        assert [a for a, _ in axes] == [65.0, 135.0]

    def test_invalid_angle(self):
        with pytest.raises(hm.InvalidAngle):
            hm.HarmonicTemplate("single_split", 0.0, 30.0)
        with pytest.raises(hm.InvalidAngle):
            hm.HarmonicTemplate("triad", 0.0, 5.0)


class TestDistance:
    def test_on_axis_zero(self):
        lch = np.array([[60, 50, 20.0], [60, 50, 140.0], [60, 50, 260.0]])
        tpl = hm.HarmonicTemplate("triad", 20.0)
        assert hm.palette_template_distance(lch, hm.uniform_weights(3), tpl) == 0.0

    def test_single_term(self):
        lch = np.array([[50.0, 67.0, 80.0]])
        tpl = hm.HarmonicTemplate("monochrome", 50.0)
        expected = 1.0 * (50.0 / 100.0) * (67.0 / 134.0) * 30.0
        got = hm.palette_template_distance(lch, np.array([1.0]), tpl)
        assert got == pytest.approx(expected, abs=1e-12)

    def test_matches_per_color_loop(self, rng):
        lch = random_palette(rng)
        wp = rng.random(6)
        tpl = hm.HarmonicTemplate("double_split", 73.0, -4.0)
        axes = tpl.axis_angles()
        ref = 0.0
        for i in range(6):
            d = min(cs.hue_arc_distance(lch[i, 2], a) for a in axes)
            ref += wp[i] * lch[i, 0] / 100.0 * lch[i, 1] / 134.0 * d
        assert hm.palette_template_distance(lch, wp, tpl) == pytest.approx(ref, abs=1e-12)

    def test_sector_interior_zero(self):
        lch = np.array([[60, 50, 100.0]])
        tpl = hm.HarmonicTemplate("analogous", 90.0, 0.0)
        assert hm.palette_template_distance(lch, np.ones(1), tpl) == 0.0


class TestFit:
    def test_single_color_monochrome(self):
        lch = np.array([[60.0, 50.0, 137.0]])
        fit = hm.fit_template(lch, np.ones(1), "monochrome")
        assert fit.template.alpha1 == 137.0
        assert fit.distance == pytest.approx(0.0, abs=1e-12)

    def test_complementary_pair(self):
        lch = np.array([[60, 50, 10.0], [60, 50, 190.0]])
        fit = hm.fit_template(lch, hm.uniform_weights(2), "complementary")
        assert fit.template.alpha1 == 10.0
        assert fit.distance == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("kind", hm.KINDS)
    def test_matches_oracle_with_tie_breaks(self, kind, rng):
        for _ in range(4):
            lch = random_palette(rng, n=5)
            wp = rng.random(5)
            fit = hm.fit_template(lch, wp, kind)
            val, a1, a2 = oracle_fit(lch, wp, kind)
            assert fit.template.alpha1 == a1 % 360.0
            assert fit.template.alpha2 == a2
            assert fit.distance == pytest.approx(val, abs=1e-12)

    def test_weight_scaling_invariance(self, rng):
        lch = random_palette(rng)
        wp = rng.random(6)
        for kind in hm.KINDS:
            f1 = hm.fit_template(lch, wp, kind)
            f2 = hm.fit_template(lch, wp * 7.5, kind)
            assert f1.template == f2.template


class TestSelectOptimal:
    def test_exact_triad(self):
        lch = np.array([[60, 50, 0.0], [60, 50, 120.0], [60, 50, 240.0]])
        fit = hm.select_optimal_template(lch, hm.uniform_weights(3))
        assert fit.template.kind == "triad"
        assert fit.distance == pytest.approx(0.0, abs=1e-12)

    def test_single_color_excludes_multi_axis(self):
        lch = np.array([[60.0, 50.0, 200.0]])
        fit = hm.select_optimal_template(lch, np.ones(1))
        assert fit.template.kind == "monochrome"

    def test_matches_exhaustive_oracle(self, rng):
        for _ in range(3):
            lch = random_palette(rng, n=4)
            wp = rng.random(4)
            fit = hm.select_optimal_template(lch, wp)
            candidates = []
            for order, kind in enumerate(hm.KINDS):
                val, a1, a2 = oracle_fit(lch, wp, kind)
                tpl = hm.HarmonicTemplate(kind, a1, a2)
                if hm._axis_has_colors(lch, tpl):
                    candidates.append((val, tpl.n_axes, order, kind))
            best = min(candidates)
            assert fit.template.kind == best[3]


class TestHarmonize:
    def test_beta_zero_is_bit_identity(self, rng):
        lch = random_palette(rng)
        fit = hm.fit_template(lch, hm.uniform_weights(6), "square")
        out = hm.harmonize_palette(lch, fit.template, 0.0)
        assert np.array_equal(out, lch)

    @pytest.mark.parametrize("kind", hm.KINDS)
    def test_beta_one_snaps_to_axes(self, kind, rng):
        lch = random_palette(rng, n=7)
        fit = hm.fit_template(lch, hm.uniform_weights(7), kind)
        assignment = hm.assign_axes(lch, fit.template)
        out = hm.harmonize_palette(lch, fit.template, 1.0, assignment)
        assert np.array_equal(out[:, :2], lch[:, :2])  # L and C untouched
        movable = ~assignment.in_sector
        if kind == "analogous":
            d = np.maximum(
                cs.hue_arc_distance(out[:, 2], fit.template.alpha1)
                - (30.0 + fit.template.alpha2),
                0.0,
            )
        else:
            d = cs.hue_arc_distance(
                out[:, 2][:, None], fit.template.axis_angles()[None, :]
            ).min(axis=1)
        assert d[movable].max() < 0.5

    def test_hue_linear_in_beta(self, rng):
        lch = random_palette(rng)
        fit = hm.fit_template(lch, hm.uniform_weights(6), "triad")
        assignment = hm.assign_axes(lch, fit.template)
        h0 = hm.harmonize_palette(lch, fit.template, 0.0, assignment)[:, 2]
        h1 = hm.harmonize_palette(lch, fit.template, 1.0, assignment)[:, 2]
        h_half = hm.harmonize_palette(lch, fit.template, 0.5, assignment)[:, 2]
        mid = (h0 + 0.5 * cs.signed_hue_delta(h0, h1)) % 360.0
        assert np.allclose(h_half, mid, atol=1e-9)

    def test_achromatic_untouched(self):
        lch = np.array([[50.0, 0.0, 0.0], [60.0, 40.0, 90.0]])
        fit = hm.fit_template(lch, hm.uniform_weights(2), "monochrome")
        out = hm.harmonize_palette(lch, fit.template, 1.0)
        assert np.array_equal(out[0], lch[0])


class TestLcFit:
    def test_vertical_line_exact(self):
        lch = np.array([[20.0, 40.2, 10.0], [50.0, 40.2, 50.0], [80.0, 40.2, 90.0]])
        eps = hm.fit_lc_template(lch, hm.uniform_weights(3), "LC1")
        assert eps == pytest.approx(40.2 / 134.0, abs=1e-12)

    def test_lc5_diagonal_exact(self):
        # colors on x - y = d in the normalized plane
        d = 0.17
        y = np.array([0.2, 0.45, 0.7])
        x = y + d
        lch = np.stack([y * 100.0, x * 134.0, np.full(3, 120.0)], axis=1)
        eps = hm.fit_lc_template(lch, hm.uniform_weights(3), "LC5")
        assert eps == pytest.approx(d, abs=1e-12)

    @pytest.mark.parametrize("kind", ("LC1", "LC2", "LC5", "LC6"))
    def test_closed_form_matches_numeric(self, kind, rng):
        for _ in range(5):
            lch = random_palette(rng, n=5)
            wp = rng.random(5)
            eps = hm.fit_lc_template(lch, wp, kind)
            res = minimize_scalar(
                lambda e: hm.lc_objective(lch, wp, kind, e),
                bounds=(-3.0, 3.0),
                method="bounded",
                options={"xatol": 1e-10},
            )
            assert abs(eps - res.x) < 1e-6

    @pytest.mark.parametrize("kind", ("LC3", "LC4"))
    def test_brute_force_matches_refinement(self, kind, rng):
        for _ in range(5):
            lch = random_palette(rng, n=5)
            wp = rng.random(5)
            eps = hm.fit_lc_template(lch, wp, kind)
            grid = np.arange(0.0, 180.0, 0.1)
            vals = np.array([hm.lc_objective(lch, wp, kind, e) for e in grid])
            fine = grid[int(vals.argmin())]
            assert min(abs(eps - fine), 180.0 - abs(eps - fine)) <= 1.0


class TestLcApply:
    def test_two_colors_keep_projections(self, rng):
        lch = random_palette(rng, n=2, l=(30, 70), c=(30, 70))
        wp = hm.uniform_weights(2)
        eps = hm.fit_lc_template(lch, wp, "LC1")
        out = hm.apply_lc_template(lch, wp, "LC1", eps)
        # vertical line: projections keep each color's own lightness + offset
        shift = out[0, 0] - lch[0, 0]
        assert out[1, 0] - lch[1, 0] == pytest.approx(shift, abs=1e-9)
        assert np.allclose(out[:, 1], eps * 134.0, atol=1e-9)

    def test_colinear_unchanged_up_to_snap(self):
        y = np.array([0.30, 0.40, 0.50, 0.60])
        lch = np.stack([y * 100.0, np.full(4, 53.6), np.full(4, 200.0)], axis=1)
        wp = hm.uniform_weights(4)
        eps = hm.fit_lc_template(lch, wp, "LC1")
        out = hm.apply_lc_template(lch, wp, "LC1", eps)
        assert np.allclose(out[:, 0], y * 100.0, atol=1e-9)  # snap already exact
        assert np.allclose(out[:, 1], lch[:, 1], atol=1e-9)

    @pytest.mark.parametrize("kind", hm.LC_KINDS)
    def test_on_line_and_uniform_spacing(self, kind, rng):
        lch = random_palette(rng, n=5, l=(35, 65), c=(35, 65))
        wp = rng.random(5)
        eps = hm.fit_lc_template(lch, wp, kind)
        out = hm.apply_lc_template(lch, wp, kind, eps)
        pts = np.stack([out[:, 1] / 134.0, out[:, 0] / 100.0], axis=1)
        origin, d = hm._lc_line(kind, eps)
        rel = pts - origin
        perp = rel[:, 0] * (-d[1]) + rel[:, 1] * d[0]
        assert np.abs(perp).max() < 1e-9
        t = np.sort(rel @ d)
        gaps = np.diff(t)
        assert np.abs(gaps - gaps[0]).max() < 1e-9

    def test_hue_never_changes(self, rng):
        lch = random_palette(rng, n=6)
        wp = rng.random(6)
        for kind in hm.LC_KINDS:
            eps = hm.fit_lc_template(lch, wp, kind)
            out = hm.apply_lc_template(lch, wp, kind, eps)
            assert np.array_equal(out[:, 2], lch[:, 2])

    def test_pure_black_white_passthrough(self):
        lch = np.array([[0.5, 0.5, 0.0], [99.0, 0.5, 0.0], [50.0, 60.0, 120.0], [40.0, 50.0, 240.0]])
        wp = hm.uniform_weights(4)
        eps = hm.fit_lc_template(lch, wp, "LC1")
        out = hm.apply_lc_template(lch, wp, "LC1", eps)
        assert np.array_equal(out[0], lch[0])
        assert np.array_equal(out[1], lch[1])


class TestContrast:
    def test_hue_on_primaries_unchanged(self):
        hues = cs.rgb_to_lch(np.eye(3))[:, 2]
        lch = np.stack([np.full(3, 60.0), np.full(3, 70.0), hues], axis=1)
        out, rep = hm.contrast_operator(lch, hm.uniform_weights(3), "hue", 1.0)
        assert np.allclose(out[:, 2], hues, atol=1e-9)

    def test_cold_warm_axes_perpendicular_to_red_cyan(self, rng):
        lch = random_palette(rng)
        out, rep = hm.contrast_operator(lch, hm.uniform_weights(6), "cold_warm", 1.0)
        red_hue = cs.rgb_to_lch([1.0, 0.0, 0.0])[2]
        # perpendicularity is fixed geometry, independent of the palette
        assert rep["alpha1"] == pytest.approx((red_hue + 90.0) % 360.0, abs=1e-9)

    def test_extension_equalizes_axis_mass(self, rng):
        # two well-separated hue clusters so the optimal template is 2-axis
        lch = np.array(
            [[70.0, 60.0, 10.0], [60.0, 50.0, 15.0], [30.0, 40.0, 190.0], [40.0, 45.0, 185.0]]
        )
        wp = hm.uniform_weights(4)
        out, rep = hm.contrast_operator(lch, wp, "extension", 1.0)
        fit = hm.select_optimal_template(lch, wp)
        assignment = hm.assign_axes(lch, fit.template)
        sums = []
        for j in range(fit.template.n_axes):
            sel = assignment.axis_index == j
            sums.append(np.sum(out[sel, 0] * out[sel, 1] * wp[sel]))
        assert sums[0] == pytest.approx(sums[1], abs=1e-6)

    def test_simultaneous_scales_weak_axis_chroma(self):
        lch = np.array([[60.0, 80.0, 0.0], [60.0, 80.0, 180.0]])
        wp = np.array([0.8, 0.2])
        out, rep = hm.contrast_operator(lch, wp, "simultaneous", 1.0)
        assert rep["weak_axis"] == 1
        weak = int(np.flatnonzero(lch[:, 2] == 180.0))
        assert out[weak, 1] == pytest.approx(80.0 * 0.5, abs=1e-9)

    def test_beta_zero_identity_for_rotational_kinds(self, rng):
        lch = random_palette(rng)
        wp = hm.uniform_weights(6)
        for kind in ("hue", "complementary", "cold_warm", "simultaneous"):
            out, _ = hm.contrast_operator(lch, wp, kind, 0.0)
            assert np.array_equal(out, lch), kind
