import numpy as np
import pytest

from sawkit.afm import (
    fit_step_heights,
    height_histogram,
    remove_line_tilt,
    rms_roughness,
    three_point_level,
)
from sawkit.errors import FitError, ValidationError
from sawkit.spectra import AfmImage, synth_terrace_image

PITCH = (1e-9, 1e-9)


def noise_image(sigma, shape=(128, 128), seed=0):
    rng = np.random.default_rng(seed)
    return AfmImage(sigma * rng.standard_normal(shape), PITCH)


class TestRemoveLineTilt:
    def test_constant_image_becomes_zero(self):
        img = AfmImage(np.full((32, 32), 3.2e-9), PITCH)
        out = remove_line_tilt(img, order=0)
        assert np.max(np.abs(out.heights_m)) < 1e-22

    def test_per_row_linear_ramp_annihilated(self, rng):
        a = rng.standard_normal((48, 1)) * 1e-9
        b = rng.standard_normal((48, 1)) * 1e-12
        x = np.arange(64)
        img = AfmImage(a + b * x, PITCH)
        out = remove_line_tilt(img, order=1)
        assert np.max(np.abs(out.heights_m)) < 1e-20

    def test_idempotent(self):
        img = synth_terrace_image((64, 64), noise_sigma_m=8e-11,
                                  tilt_m_per_px=(2e-12, 1e-12), rng_seed=3)
        once = remove_line_tilt(img)
        twice = remove_line_tilt(once)
        assert np.max(np.abs(twice.heights_m - once.heights_m)) < 1e-22

    def test_invariant_to_added_row_ramps(self, rng):
        # arbitrary per-row linear trends are exactly absorbed
        base = synth_terrace_image((48, 64), noise_sigma_m=5e-11, rng_seed=4)
        a = rng.standard_normal((48, 1)) * 1e-9
        b = rng.standard_normal((48, 1)) * 1e-12
        ramped = AfmImage(base.heights_m + a + b * np.arange(64), PITCH)
        out_base = remove_line_tilt(base)
        out_ramp = remove_line_tilt(ramped)
        assert np.allclose(out_ramp.heights_m, out_base.heights_m, atol=1e-20)

    def test_terraces_survive_row_offset_drift(self):
        # order-0 flattening removes per-row drift without touching the
        # staircase structure (every row crosses the same terrace pattern)
        clean = synth_terrace_image((96, 96), step_m=2e-10, noise_sigma_m=4e-11,
                                    rng_seed=5)
        drifted = AfmImage(clean.heights_m + 3e-12 * np.arange(96)[:, None]
                           + 5e-11 * np.random.default_rng(5).standard_normal((96, 1)),
                           PITCH)
        restored = remove_line_tilt(drifted, order=0)
        reference = remove_line_tilt(clean, order=0)
        assert np.max(np.abs(restored.heights_m - reference.heights_m)) < 1e-12

    def test_row_shorter_than_order_rejected(self):
        img = AfmImage(np.zeros((16, 16)), PITCH)
        with pytest.raises(ValidationError):
            remove_line_tilt(img, order=5)


class TestThreePointLevel:
    def test_plane_leveled_to_zero(self):
        x = np.arange(64)
        y = np.arange(48)[:, None]
        img = AfmImage(1e-12 * x + 2e-12 * y + 5e-10, PITCH)
        out = three_point_level(img, (5, 5), (50, 10), (20, 40))
        assert np.max(np.abs(out.heights_m)) < 1e-21

    def test_already_level_image_unchanged(self):
        img = AfmImage(np.full((32, 32), 7e-10), PITCH)
        out = three_point_level(img, (2, 2), (20, 5), (10, 25))
        assert np.max(np.abs(out.heights_m)) < 1e-21

    def test_reference_terrace_lands_at_zero(self):
        # tilted noisy terrace: after leveling on three points of the middle
        # terrace, the plane passes through the sampled medians exactly and
        # the terrace mean sits at zero within the noise
        img = synth_terrace_image((128, 128), step_m=2e-10, noise_sigma_m=3e-11,
                                  tilt_m_per_px=(2e-12, 1e-12), rng_seed=8)
        pts = [(55, 10), (70, 64), (60, 120)]
        out = three_point_level(img, *pts)
        plane = img.heights_m - out.heights_m
        for px, py in pts:
            patch = img.heights_m[py - 1:py + 2, px - 1:px + 2]
            assert plane[py, px] == pytest.approx(float(np.median(patch)),
                                                  abs=1e-18)
        middle = out.heights_m[:, 58:68]
        assert abs(middle.mean()) < 3e-11

    def test_collinear_points_rejected(self):
        img = AfmImage(np.zeros((32, 32)), PITCH)
        with pytest.raises(ValidationError):
            three_point_level(img, (1, 1), (5, 5), (9, 9))


class TestRmsRoughness:
    def test_constant_image_zero(self):
        assert rms_roughness(AfmImage(np.full((16, 16), 4e-9), PITCH)) == 0.0

    def test_two_level_image_analytic(self):
        h = np.zeros((16, 16))
        h[:, 8:] = 3e-10
        assert rms_roughness(AfmImage(h, PITCH)) == pytest.approx(1.5e-10,
                                                                  rel=1e-12)

    def test_gaussian_noise_sigma_recovered(self):
        img = noise_image(168.7e-12, seed=7)
        assert rms_roughness(img) == pytest.approx(168.7e-12, rel=0.02)

    def test_translation_invariance(self):
        img = noise_image(1e-10, seed=1)
        shifted = AfmImage(img.heights_m + 5e-9, PITCH)
        assert rms_roughness(shifted) == pytest.approx(rms_roughness(img),
                                                       rel=1e-10)

    def test_linear_height_scaling(self):
        img = noise_image(1e-10, seed=2)
        doubled = AfmImage(2.0 * img.heights_m, PITCH)
        assert rms_roughness(doubled) == 2.0 * rms_roughness(img)


class TestStepHeights:
    def test_three_terrace_steps_recovered(self):
        for step in (2.0e-10, 2.4e-10):
            img = synth_terrace_image((160, 160), step_m=step,
                                      noise_sigma_m=8e-11, rng_seed=13)
            result = fit_step_heights(img)
            assert result.mean_step_m == pytest.approx(step, rel=0.15)
            assert result.centers_m[0] < result.centers_m[1] < result.centers_m[2]
            assert len(result.step_heights_m) == 2
            assert result.mean_step_err_m > 0
            # width-based uncertainty tracks the terrace noise
            assert result.width_err_m == pytest.approx(8e-11, rel=0.3)

    def test_single_terrace_reports_mode_count(self):
        img = synth_terrace_image((128, 128), n_terraces=1,
                                  noise_sigma_m=8e-11, rng_seed=0)
        with pytest.raises(FitError, match="1 resolvable"):
            fit_step_heights(img)

    def test_offset_invariance_of_steps(self):
        img = synth_terrace_image((128, 128), step_m=2e-10, noise_sigma_m=6e-11,
                                  rng_seed=21)
        lifted = AfmImage(img.heights_m + 1e-9, PITCH)
        a = fit_step_heights(img)
        b = fit_step_heights(lifted)
        assert b.mean_step_m == pytest.approx(a.mean_step_m, rel=1e-6)

    def test_histogram_bin_floor(self):
        # nearly smooth data would produce absurdly fine bins without a floor
        img = noise_image(2e-11, shape=(64, 64), seed=3)
        centers, counts = height_histogram(img)
        assert centers.size >= 2
        assert centers[1] - centers[0] >= 1e-11 - 1e-24
