import numpy as np
import pytest

from racer.averaging import AveragerBackend
from racer.estimators import (CenteringConfig, center_of_mass, cm_variance_landscape, e_max, geometric_median, gm_landscape,
                              local_gm_landscape, normalize_nonneg, ring_sums, scm_center, scm_landscape, select_argmin,
                              theorem2_condition)
from racer.exceptions import ConfigurationError, DomainError, NoMassError
from racer.grid_geometry import SearchGrid, composed_distance_map, ring_cardinalities
from racer.testing_utils import brute_gm_landscape, brute_ring_sums, brute_scm_landscape, ceil_distance, integer_blob


def delta(extent, p, mass=1.0):
    image = np.zeros(extent)
    image[p] = mass
    return image


def uniform_disk(extent, center, radius):
    rows, cols = np.indices(extent)
    return (np.hypot(rows - center[0], cols - center[1]) <= radius).astype(float)


@pytest.mark.parametrize("image, expected", [
    ([[1, 2], [3, 4]], [[0, 1], [2, 3]]),
    (np.zeros((3, 3)), np.zeros((3, 3))),
    ([[-1, 0], [1, 2]], [[0, 1], [2, 3]]),
])
def test_normalize_nonneg(image, expected):
    np.testing.assert_array_equal(normalize_nonneg(image), expected)


def test_center_of_mass():
    assert center_of_mass(delta((5, 9), (3, 7))) == (3, 7)
    assert center_of_mass(uniform_disk((21, 21), (10, 10), 6)) == (10, 10)
    image = np.zeros((3, 2))
    image[0, 0], image[2, 0] = 1, 2
    assert center_of_mass(image) == (1, 0)


def test_center_of_mass_rounds_half_away_from_zero():
    image = np.zeros((1, 4))
    image[0, 1] = image[0, 2] = 1
    assert center_of_mass(image) == (0, 2)


def test_zero_mass_is_rejected():
    with pytest.raises(NoMassError):
        center_of_mass(np.zeros((4, 4)))
    with pytest.raises(NoMassError):
        gm_landscape(np.zeros((4, 4)))
    with pytest.raises(NoMassError):
        scm_landscape(np.full((9, 9), 3.0), CenteringConfig(2))


def test_gm_single_pixel():
    landscape = gm_landscape(delta((7, 8), (2, 5)))
    assert landscape.argmin == (2, 5)
    assert landscape.cost_at((2, 5)) == 0


def test_gm_two_masses_on_a_line():
    image = np.array([[1.0, 0, 0, 0, 1.0]])
    landscape = gm_landscape(image, metric="euclidean")
    np.testing.assert_allclose(landscape.cost, [[4, 4, 4, 4, 4]])
    assert landscape.argmin == (0, 0)
    assert gm_landscape(image, metric="euclidean", tie_break="center").argmin == (0, 2)


@pytest.mark.parametrize("metric", ["composed", "euclidean"])
def test_gm_landscape_matches_brute_force(metric):
    rng = np.random.default_rng(3)
    image = rng.integers(0, 5, size=(7, 9)).astype(float)
    np.testing.assert_allclose(gm_landscape(image, metric).cost, brute_gm_landscape(image, metric), rtol=1e-12, atol=1e-9)


def test_gm_fft_path_agrees_with_direct():
    rng = np.random.default_rng(0)
    image = rng.integers(0, 4, size=(70, 66)).astype(float)
    landscape = gm_landscape(image)
    for x in [(0, 0), (35, 30), (69, 65), (12, 50)]:
        expected = (image * composed_distance_map(image.shape, x)).sum()
        assert landscape.cost_at(x) == pytest.approx(expected, rel=1e-9)


def test_gm_is_pulled_off_the_full_object():
    extent = (31, 61)
    main = integer_blob(extent, (15, 14), 6, peak=10)
    image = main + integer_blob(extent, (15, 44), 5, peak=6)
    assert geometric_median(image)[1] > geometric_median(main)[1]
    cfg = CenteringConfig(8)
    assert scm_center(image, cfg).center == scm_center(main, cfg).center


def test_unknown_metric():
    with pytest.raises(ConfigurationError):
        gm_landscape(np.ones((3, 3)), metric="manhattan")


def test_cm_variance_landscape_minimized_at_cm():
    image = integer_blob((25, 25), (11, 13), 6, anisotropy=(1.0, 1.2))
    assert cm_variance_landscape(image).argmin == center_of_mass(image)


def test_local_gm_landscape():
    # every disk of radius 4 around the 3x3 search grid covers the delta
    image = delta((11, 11), (5, 6), 3.0)
    landscape = local_gm_landscape(image, 4)
    assert landscape.argmin == (5, 6)
    assert landscape.domain == SearchGrid((11, 11), 4)
    assert landscape.cost_at((4, 4)) == 3.0 * 3
    # a disk without mass has zero cost
    far = delta((21, 21), (4, 4))
    assert local_gm_landscape(far, 4).cost_at((16, 16)) == 0


def test_ring_sums_delta_and_constant():
    profile = ring_sums(delta((11, 11), (5, 5), 2.5), (5, 5), 4)
    np.testing.assert_array_equal(profile.z, [2.5, 0, 0, 0, 0])
    np.testing.assert_array_equal(profile.u, [2.5] * 5)
    constant = ring_sums(np.full((11, 11), 3.0), (5, 4), 4)
    np.testing.assert_array_equal(constant.z, 3.0 * ring_cardinalities(4))


def test_ring_sums_match_brute_force():
    rng = np.random.default_rng(11)
    image = rng.integers(0, 10, size=(9, 9)).astype(float)
    for p in [(4, 4), (3, 5), (5, 3)]:
        profile = ring_sums(image, p, 3)
        np.testing.assert_array_equal(profile.z, brute_ring_sums(image, p, 3))
        np.testing.assert_array_equal(profile.u, np.cumsum(profile.z))


def test_ring_sums_outside_search_grid():
    with pytest.raises(DomainError):
        ring_sums(np.ones((9, 9)), (1, 4), 3)


def test_telescoping_identity():
    rng = np.random.default_rng(5)
    image = rng.integers(0, 7, size=(9, 9)).astype(float)
    R, p = 4, (4, 4)
    weighted = sum((R + 1 - ceil_distance(p, s)) * image[s] for s in np.ndindex(9, 9) if ceil_distance(p, s) <= R)
    assert ring_sums(image, p, R).u.sum() == weighted


def test_e_max():
    assert e_max(delta((11, 11), (5, 5), 4.0), 2) == 4.0
    assert e_max(np.ones((11, 11)), 3) == ring_cardinalities(3).sum()
    with pytest.raises(NoMassError):
        e_max(np.zeros((7, 7)), 2)


def test_scm_landscape_of_delta():
    landscape = scm_landscape(delta((11, 11), (5, 6), 2.0), CenteringConfig(3))
    assert landscape.argmin == (5, 6)
    assert landscape.cost_min == 0
    assert np.count_nonzero(landscape.cost == 0) == 1
    assert landscape.e_max == 2.0


def test_scm_landscape_of_centered_disk():
    landscape = scm_landscape(uniform_disk((21, 21), (10, 10), 4), CenteringConfig(6))
    assert landscape.argmin == (10, 10)


def test_scm_cost_forms_agree():
    rng = np.random.default_rng(1)
    image = rng.random((25, 25))
    cfg = CenteringConfig(5, check_forms=True)
    normalized = scm_landscape(image, cfg)
    raw = scm_landscape(image, cfg, kind="sCM")
    np.testing.assert_allclose(raw.cost, normalized.cost * normalized.e_max, rtol=1e-12)
    assert raw.argmin == normalized.argmin


def test_scm_landscape_matches_brute_force():
    rng = np.random.default_rng(2)
    image = rng.integers(0, 6, size=(9, 9)).astype(float)
    image[0, 0] = 0
    R = 3
    cost, e_max_value = brute_scm_landscape(image, R)
    landscape = scm_landscape(image, CenteringConfig(R, normalize=False), kind="sCM")
    assert landscape.e_max == e_max_value
    np.testing.assert_allclose(landscape.cost, cost, rtol=1e-12, atol=1e-9)


def test_scm_landscape_is_thread_independent():
    rng = np.random.default_rng(7)
    image = rng.random((47, 39))
    for backend in ["exact-ring", AveragerBackend("polar-quadrature")]:
        single = scm_landscape(image, CenteringConfig(7, backend=backend, threads=1))
        many = scm_landscape(image, CenteringConfig(7, backend=backend, threads=4))
        np.testing.assert_array_equal(single.cost, many.cost)
        assert single.argmin == many.argmin


def test_scm_landscape_rejects_wrong_kind():
    with pytest.raises(ConfigurationError):
        scm_landscape(np.ones((9, 9)), CenteringConfig(2), kind="GM")


@pytest.mark.parametrize("kwargs", [{"radius": 0}, {"radius": 2.5}, {"radius": 3, "tie_break": "random"}, {"radius": 3, "threads": 0},
                                    {"radius": 3, "backend": "pswf"}])
def test_centering_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        CenteringConfig(**kwargs)


def test_scm_center_full_image():
    image = uniform_disk((41, 41), (22, 17), 5)
    result = scm_center(image, CenteringConfig(7))
    assert result.center == (22, 17)
    assert result.window_origin == (0, 0)
    assert result.e_max == image.sum()


def test_scm_center_with_initial_center_returns_image_coordinates():
    image = uniform_disk((80, 90), (50, 61), 5)
    image += uniform_disk((80, 90), (15, 15), 9)
    result = scm_center(image, CenteringConfig(7), initial_center=(48, 60))
    assert result.center == (50, 61)
    assert result.window_origin == (34, 46)
    # the landscape is reported in the coordinates of the full image as well
    landscape = result.landscape
    assert landscape.argmin == result.center
    assert landscape.domain.origin == (34 + 7, 46 + 7)
    assert landscape.cost_at(result.center) == result.cost_min
    frame = landscape.to_frame()
    best = frame.loc[frame.cost.idxmin()]
    assert (best.row, best.col) == result.center
    assert frame.row.min() == 41 and frame.col.min() == 53


def test_scm_center_clips_window_at_the_border():
    image = uniform_disk((60, 60), (8, 9), 4)
    result = scm_center(image, CenteringConfig(6), initial_center=(5, 5))
    assert result.center == (8, 9)
    assert result.window_origin == (0, 0)


def test_scm_center_initial_center_outside_image():
    with pytest.raises(ConfigurationError):
        scm_center(np.ones((30, 30)), CenteringConfig(3), initial_center=(-20, 10))


def test_select_argmin_center_rule():
    cost = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]])
    domain = SearchGrid((7, 7), 2)
    assert select_argmin(cost, domain) == (2, 3)
    assert select_argmin(cost, domain, tie_break="center") == (3, 3)


def test_theorem2_condition_examples():
    holds, satisfied = theorem2_condition(delta((11, 11), (5, 5)), 3)
    assert holds and satisfied.all()
    holds, _ = theorem2_condition(uniform_disk((21, 21), (10, 10), 4), 6)
    assert holds


def test_landscape_to_frame():
    landscape = scm_landscape(uniform_disk((15, 13), (7, 6), 2), CenteringConfig(4))
    frame = landscape.to_frame()
    assert list(frame.columns) == ["row", "col", "cost"]
    assert len(frame) == len(landscape.domain)
    best = frame.loc[frame.cost.idxmin()]
    assert (best.row, best.col) == landscape.argmin
