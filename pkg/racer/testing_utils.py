import math

import numpy as np

from racer.estimators import geometric_median
from racer.utils import window_center


def ceil_distance(a, b):
    return math.ceil(math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2))


def integer_blob(extent, center, radius, peak=8, anisotropy=(1.0, 1.0)):
    # integer intensities keep every sum exact; support is the Euclidean disk of ``radius``
    rows, cols = np.indices(extent)
    dr, dc = rows - center[0], cols - center[1]
    sigma = radius / 2
    values = np.round(peak * np.exp(-((dr / anisotropy[0]) ** 2 + (dc / anisotropy[1]) ** 2) / (2 * sigma ** 2)))
    return np.where(np.hypot(dr, dc) <= radius, values, 0.0)


def integer_hedgehog(extent, diameter, body=4, spike=2):
    """Point-symmetric hedgehog with integer intensities centered on the window center."""
    center = window_center(extent)
    radius = diameter // 2
    rows, cols = np.indices(extent)
    dr, dc = rows - center[0], cols - center[1]
    distance = np.hypot(dr, dc)
    on_spike = (dr == 0) | (dc == 0) | (np.abs(dr) == np.abs(dc))
    image = np.where(distance <= 0.6 * radius, float(body), 0.0)
    image[(distance > 0.6 * radius) & (distance <= radius) & on_spike] = spike
    return image


def support_radius(image, p):
    """Largest composed distance from ``p`` to a pixel with non-zero intensity."""
    return max(ceil_distance(p, s) for s in zip(*np.nonzero(image)))


def random_blob_instance(rng, max_extent=41, max_radius=12):
    """Noise-free single-blob image of radius at most ``max_radius`` and the bound R = radius + 2.

    Blobs whose support reaches further than ``radius`` from their GM are redrawn, so every
    radius-R disk around the GM and its 8 neighbors holds the whole object. Returns (image, R).
    """
    while True:
        radius = int(rng.integers(3, max_radius + 1))
        margin = radius + 5
        extent = int(rng.integers(2 * margin + 1, max(2 * margin + 2, max_extent + 1)))
        center = (int(rng.integers(margin, extent - margin)), int(rng.integers(margin, extent - margin)))
        anisotropy = tuple(rng.uniform(0.8, 1.25, size=2))
        image = integer_blob((extent, extent), center, radius, peak=int(rng.integers(4, 16)), anisotropy=anisotropy)
        if support_radius(image, geometric_median(image)) <= radius:
            return image, radius + 2


def random_two_object_instance(rng):
    """Main blob plus a weaker, truncated partial object far enough away for the separation result.

    The partial object carries at most a quarter of the main object's mass and the composed
    gap between the two supports is at least 2R + 3. Returns (composite, main_alone, R).
    """
    radius = int(rng.integers(3, 9))
    R = radius + 2
    partial_radius = int(rng.integers(2, radius + 1))
    gap = 2 * R + 3 + int(rng.integers(0, 4))
    extent = (2 * R + 3 + radius + gap + partial_radius + R + 3, 2 * R + 7)
    center = (R + 2, extent[1] // 2)
    main = integer_blob(extent, center, radius, peak=12)
    partial_center = (center[0] + radius + gap + partial_radius, center[1] + int(rng.integers(-2, 3)))
    partial = integer_blob(extent, partial_center, partial_radius, peak=int(rng.integers(1, 4)))
    # drop the far half of the partial object
    rows = np.indices(extent)[0]
    partial[rows > partial_center[0]] = 0
    while partial.sum() > 0.25 * main.sum():
        partial = np.floor(partial / 2)
    return main + partial, main, R


def brute_ring_sums(image, p, R):
    z = np.zeros(R + 1)
    height, width = image.shape
    for r in range(height):
        for c in range(width):
            m = ceil_distance(p, (r, c))
            if m <= R:
                z[m] += image[r, c]
    return z


def brute_gm_landscape(image, metric="composed"):
    height, width = image.shape
    cost = np.zeros((height, width))
    for x in np.ndindex(height, width):
        for s in np.ndindex(height, width):
            d = ceil_distance(x, s) if metric == "composed" else math.hypot(x[0] - s[0], x[1] - s[1])
            cost[x] += image[s] * d
    return cost


def brute_scm_landscape(image, R):
    """Unnormalized sCM cost over the search grid, sum_l (E_max - u_p[l]), by explicit loops."""
    height, width = image.shape
    grid = [(r, c) for r in range(R, height - R) for c in range(R, width - R)]
    u = {p: np.cumsum(brute_ring_sums(image, p, R)) for p in grid}
    e_max = max(profile[R] for profile in u.values())
    cost = np.zeros((height - 2 * R, width - 2 * R))
    for p, profile in u.items():
        cost[p[0] - R, p[1] - R] = np.sum(e_max - profile)
    return cost, e_max


def brute_xcorr_shift(test, template, origin, max_shift):
    center = window_center(test.shape)
    best, best_shift = -np.inf, None
    th, tw = template.shape
    for dr in range(-max_shift, max_shift + 1):
        for dc in range(-max_shift, max_shift + 1):
            top, left = center[0] + dr - origin[0], center[1] + dc - origin[1]
            if top < 0 or left < 0 or top + th > test.shape[0] or left + tw > test.shape[1]:
                continue
            score = np.sum(template * test[top:top + th, left:left + tw])
            if score > best:
                best, best_shift = score, (dr, dc)
    return best_shift