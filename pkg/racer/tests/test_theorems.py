"""Properties linking the sCM landscape to the grid geometric median on noise-free images."""
import numpy as np
import pytest

from racer.estimators import CenteringConfig, e_max, geometric_median, is_local_minimum, scm_landscape, theorem2_condition
from racer.grid_geometry import composed_distance_map
from racer.testing_utils import integer_hedgehog, random_blob_instance, random_two_object_instance, support_radius


@pytest.fixture(scope="module")
def blob_instances():
    rng = np.random.default_rng(2024)
    return [random_blob_instance(rng) for _ in range(100)]


def test_blob_instances_cover_radii_up_to_twelve(blob_instances):
    radii = [R for _, R in blob_instances]
    assert max(radii) == 12 + 2 and min(radii) >= 3 + 2
    for image, R in blob_instances:
        assert image.shape[0] <= 41
        assert support_radius(image, geometric_median(image)) <= R - 2


def test_gm_is_local_minimum_of_scm(blob_instances):
    for image, R in blob_instances:
        mu = geometric_median(image)
        landscape = scm_landscape(image, CenteringConfig(R))
        assert is_local_minimum(landscape, mu)


def test_scm_recovers_gm_when_condition_holds(blob_instances):
    checked = 0
    for image, R in blob_instances:
        mu = geometric_median(image)
        holds, _ = theorem2_condition(image, R, mu)
        if holds:
            checked += 1
            assert scm_landscape(image, CenteringConfig(R)).argmin == mu
    assert checked > 0


@pytest.mark.parametrize("alpha", [0.1, 1, 10])
def test_constant_background_keeps_argmin(blob_instances, alpha):
    for image, R in blob_instances:
        cfg = CenteringConfig(R, normalize=False)
        assert scm_landscape(image + alpha, cfg).argmin == scm_landscape(image, cfg).argmin


def test_partial_second_object_does_not_move_scm():
    rng = np.random.default_rng(7)
    for _ in range(50):
        composite, main, R = random_two_object_instance(rng)
        assert e_max(composite, R) == main.sum()
        cfg = CenteringConfig(R)
        with_partial = scm_landscape(composite, cfg)
        alone = scm_landscape(main, cfg)
        assert with_partial.argmin == alone.argmin
        # centers whose disks cannot reach the partial object see identical costs
        rows = alone.argmin[0] - with_partial.domain.row_start + 1
        np.testing.assert_array_equal(with_partial.cost[:rows], alone.cost[:rows])


@pytest.mark.parametrize("radius", [16, 20, 24])
def test_thin_ring_condition_counter_instance(radius):
    R = radius + 2
    extent = (2 * (R + radius) + 1,) * 2
    center = (R + radius, R + radius)
    image = (composed_distance_map(extent, center) == radius).astype(float)
    holds, satisfied = theorem2_condition(image, R, center)
    assert not holds
    assert not satisfied.all()


def test_scm_stable_over_radius():
    image = integer_hedgehog((101, 101), 30)
    mu = geometric_median(image)
    centers = {scm_landscape(image, CenteringConfig(R)).argmin for R in range(17, 31)}
    assert centers == {mu}
