import numpy as np
import pytest
from scipy import fft

from racer.estimators import geometric_median
from racer.exceptions import ConfigurationError, DomainError, NoMassError
from racer.synthetic.noise import NOISE_MODELS, NoiseSpec, add_noise, colored_filter, deviation, make_rng, snr
from racer.synthetic.scenes import PartialObject, SceneSpec, draw_object, render_scene


def test_render_centered_and_shifted_disk():
    image, truth = render_scene(SceneSpec((41, 41), "disk", 10))
    assert truth == (20, 20)
    assert image.min() == 0 and image.max() == 1
    _, shifted_truth = render_scene(SceneSpec((41, 41), "disk", 10, shift=(4, -6)))
    assert shifted_truth == (24, 14)


@pytest.mark.parametrize("kind", ["disk", "blob", "hedgehog", "elongated"])
def test_scene_truth_is_grid_gm(kind):
    image, truth = render_scene(SceneSpec((51, 51), kind, 12, shift=(3, -2)))
    assert truth == geometric_median(image)
    assert 0 <= image.min() and image.max() <= 1


def test_raster_object():
    raster = np.zeros((5, 5))
    raster[1:4, 1:4] = 1
    image, truth = render_scene(SceneSpec((21, 21), "raster", 3, shift=(2, 2), raster=raster))
    assert image.sum() == 9
    assert truth == (12, 12)


def test_partial_object_is_cut_and_keeps_truth():
    spec = SceneSpec((61, 101), "disk", 10, second=PartialObject((0, 40), "disk", 10, scale=0.5, visible=0.5))
    image, truth = render_scene(spec)
    main = draw_object("disk", (61, 101), spec.center, 10)
    partial = image - main
    assert truth == geometric_median(main)
    assert partial.max() == 0.5
    # the far half of the partial disk is removed
    assert partial[:, spec.center[1] + 41:].sum() == 0
    assert partial[:, spec.center[1] + 31:spec.center[1] + 41].sum() > 0


def test_partial_object_needs_an_offset():
    with pytest.raises(DomainError):
        PartialObject((0, 0), "disk", 10)
    with pytest.raises(DomainError):
        PartialObject((0, 30), "disk", 10, visible=1.5)


def test_hedgehog_keeps_its_background_inside_the_disk():
    image = draw_object("hedgehog", (121, 121), (60, 60), 50)
    assert image[60, 60] == 1
    # spike on the horizontal axis, background between spikes, nothing outside the disk
    assert image[60, 100] == 0.7
    assert image[60 - 40, 60 + 15] == 0.3
    assert image[60, 111] == 0 and image[5, 5] == 0
    assert np.count_nonzero(image) == np.count_nonzero(draw_object("disk", (121, 121), (60, 60), 50))
    np.testing.assert_array_equal(image, image.T)
    np.testing.assert_array_equal(image, image[::-1, :])


def test_scene_errors():
    with pytest.raises(DomainError):
        render_scene(SceneSpec((41, 41), "disk", 10, shift=(15, 0)))
    with pytest.raises(ConfigurationError):
        SceneSpec((41, 41), "triangle", 10)
    with pytest.raises(ConfigurationError):
        SceneSpec((41, 41), "raster", 10)


def test_snr_examples():
    clean = draw_object("blob", (21, 21), (10, 10), 6)
    assert snr(clean, clean) == np.inf
    assert snr(clean, 2 * clean) == 1
    with pytest.raises(DomainError):
        snr(clean, clean[:-1])


@pytest.mark.parametrize("model", NOISE_MODELS)
@pytest.mark.parametrize("target", [1 / 2, 1 / 10, 1 / 45, 1 / 200])
def test_noise_is_calibrated(model, target):
    clean = draw_object("hedgehog", (61, 61), (30, 30), 20)
    noisy = add_noise(clean, NoiseSpec(model, target, seed=3))
    assert snr(clean, noisy) == pytest.approx(target, rel=0.05)


def test_uniform_noise_has_positive_mean():
    clean = draw_object("disk", (31, 31), (15, 15), 8)
    for seed in range(10):
        noise = add_noise(clean, NoiseSpec("uniform-positive", 0.1, seed)) - clean
        assert noise.min() >= 0
        assert noise.mean() > 0


def test_colored_noise_spectrum_decays():
    shape = (64, 64)
    clean = draw_object("disk", shape, (32, 32), 10)
    power = np.zeros(shape)
    for seed in range(20):
        noise = add_noise(clean, NoiseSpec("colored", 0.5, seed)) - clean
        power += np.abs(fft.fft2(noise)) ** 2
    ky, kx = np.meshgrid(fft.fftfreq(64) * 64, fft.fftfreq(64) * 64, indexing="ij")
    rho = np.hypot(ky, kx)
    octaves = [(1, 2), (2, 4), (4, 8), (8, 16), (16, 32)]
    band_power = [power[(rho >= lo) & (rho < hi)].mean() for lo, hi in octaves]
    assert all(a >= b for a, b in zip(band_power, band_power[1:]))


def test_colored_filter():
    filt = colored_filter((8, 8))
    assert filt[0, 0] == 1
    assert filt[0, 1] == pytest.approx(1 / np.sqrt(2))
    assert filt[4, 4] == pytest.approx(1 / np.sqrt(33))


def test_noise_is_reproducible_and_keyed_by_cell():
    clean = draw_object("disk", (21, 21), (10, 10), 5)
    spec = NoiseSpec("gaussian-iid", 0.5, seed=9)
    np.testing.assert_array_equal(add_noise(clean, spec, (1, 2, 3)), add_noise(clean, spec, (1, 2, 3)))
    assert not np.array_equal(add_noise(clean, spec, (1, 2, 3)), add_noise(clean, spec, (1, 2, 4)))
    np.testing.assert_array_equal(make_rng(9, (0, 1)).random(4), make_rng(9, (0, 1)).random(4))


def test_noise_errors():
    with pytest.raises(ConfigurationError):
        NoiseSpec("poisson")
    with pytest.raises(ConfigurationError):
        NoiseSpec("colored", 0)
    with pytest.raises(NoMassError):
        add_noise(np.zeros((5, 5)), NoiseSpec())


@pytest.mark.parametrize("estimate, truth, expected", [((4, 4), (4, 4), 0), ((3, 4), (1, 1), 5), ((0, 9), (2, 3), 8)])
def test_deviation(estimate, truth, expected):
    assert deviation(estimate, truth) == expected
