import numpy as np
import pytest

from racer.emd import delta_image, emd_exact, emd_to_delta, min_cost_flow
from racer.estimators import CenteringConfig, scm_landscape, theorem2_condition
from racer.exceptions import NoMassError, OracleSizeError


def test_delta_image():
    image = np.array([[1.0, -2.0], [3.0, 0.0]])
    delta = delta_image(image, (0, 0))
    assert delta.mass == 6
    np.testing.assert_array_equal(delta.to_array(), [[6, 0], [0, 0]])
    spike = np.zeros((3, 4))
    spike[1, 2] = 2.5
    np.testing.assert_array_equal(delta_image(spike, (1, 2)).to_array(), spike)


def test_delta_image_mass_is_absolute_sum():
    rng = np.random.default_rng(0)
    image = rng.normal(size=(4, 4))
    assert delta_image(image, (2, 1)).mass == np.abs(image).sum()


def test_emd_to_delta_examples():
    spike = np.zeros((5, 5))
    spike[2, 3] = 4.0
    assert emd_to_delta(spike, (2, 3)) == 0
    unit = np.zeros((8, 8))
    unit[3, 4] = 1.0
    assert emd_to_delta(unit, (0, 0)) == 5
    with pytest.raises(NoMassError):
        emd_to_delta(np.zeros((3, 3)), (1, 1))


def test_emd_exact_examples():
    rng = np.random.default_rng(1)
    image = rng.integers(0, 4, size=(5, 5)).astype(float) + 0.5
    assert emd_exact(image, image) == pytest.approx(0, abs=1e-12)
    a, b = np.zeros((6, 6)), np.zeros((6, 6))
    a[0, 0], b[3, 4] = 1.0, 1.0
    assert emd_exact(a, b) == 5
    assert emd_exact(a, b, metric="euclidean") == 5
    a[0, 0], b[1, 1] = 2.0, 2.0
    b[3, 4] = 0
    assert emd_exact(a, b, metric="euclidean") == pytest.approx(np.sqrt(2))


def test_emd_exact_limits():
    with pytest.raises(OracleSizeError):
        emd_exact(np.ones((9, 3)), np.ones((3, 3)))
    with pytest.raises(NoMassError):
        emd_exact(np.zeros((3, 3)), np.ones((3, 3)))


def test_flows_respect_marginals_with_unequal_masses():
    supply = {(0, 0): 2.0, (0, 3): 1.0}
    demand = {(2, 2): 1.5}
    flows = min_cost_flow(supply, demand, metric="euclidean")
    assert sum(flows.values()) == pytest.approx(1.5)
    for pixel, mass in supply.items():
        assert sum(f for (i, _), f in flows.items() if i == pixel) <= mass + 1e-9
    # (0, 3) is closer to (2, 2) than (0, 0), so it ships all of its mass first
    assert flows[((0, 3), (2, 2))] == pytest.approx(1.0)


def test_emd_is_symmetric_for_equal_masses():
    rng = np.random.default_rng(3)
    a = rng.integers(0, 3, size=(4, 4)).astype(float)
    b = np.roll(a, 1, axis=1)
    assert emd_exact(a, b) == pytest.approx(emd_exact(b, a), rel=1e-9)


def test_emd_to_delta_matches_transport_oracle():
    rng = np.random.default_rng(2)
    for _ in range(200):
        extent = tuple(int(n) for n in rng.integers(1, 9, size=2))
        image = rng.random(extent) * (rng.random(extent) < 0.6)
        image[tuple(rng.integers(0, n) for n in extent)] += 1.0
        p = tuple(int(rng.integers(0, n)) for n in extent)
        oracle = emd_exact(image, delta_image(image, p).to_array())
        assert emd_to_delta(image, p) == pytest.approx(oracle, rel=1e-9)


def test_scm_center_minimizes_emd_to_delta():
    rng = np.random.default_rng(5)
    checked = 0
    R = 2
    for _ in range(500):
        if checked == 20:
            break
        image = np.zeros((7, 7))
        center = tuple(int(c) for c in rng.integers(2, 5, size=2))
        image[center] = rng.integers(3, 8)
        for dr, dc in [(-1, 0), (1, 0), (0, -1), (0, 1)]:
            image[center[0] + dr, center[1] + dc] = rng.integers(0, 4)
        holds, _ = theorem2_condition(image, R)
        if not holds:
            continue
        checked += 1
        mu_s = scm_landscape(image, CenteringConfig(R)).argmin
        at_center = emd_exact(image, delta_image(image, mu_s).to_array())
        for q in np.ndindex(image.shape):
            assert at_center <= emd_exact(image, delta_image(image, q).to_array()) + 1e-9
    assert checked == 20
