"""Rotational averaging backends.

Both backends are expressed as banks of sparse linear filters ("taps") evaluated over the
search grid by shifted slice additions. The exact-ring backend has one unit-weight filter
per ring A_m. The polar backend has one bilinear filter per radial sample, averaging the
image over ``n_angular`` points of a circle, followed by a small matrix that integrates
the angular means back onto the rings.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from joblib import Parallel, delayed
from scipy.ndimage import map_coordinates

from racer.exceptions import ConfigurationError, DomainError
from racer.grid_geometry import composed_distance_map, ring_offsets, search_grid
from racer.synthetic.noise import snr
from racer.utils import as_image

BACKENDS = ("exact-ring", "polar-quadrature")
RING_WEIGHTS = ("pixel", "annulus")


@dataclass(frozen=True)
class RadialProfile:
    center: tuple
    z: np.ndarray
    u: np.ndarray

    @classmethod
    def from_ring_sums(cls, center, z):
        return cls(tuple(center), z, np.cumsum(z))

    @property
    def radius(self):
        return len(self.z) - 1


@dataclass(frozen=True)
class AveragerBackend:
    kind: str = "exact-ring"
    n_radial: int = None
    n_angular: int = None
    ring_weights: str = "pixel"

    def __post_init__(self):
        if self.kind not in BACKENDS:
            raise ConfigurationError(f"unknown averaging backend {self.kind!r}, choose one of {', '.join(BACKENDS)}")
        if self.ring_weights not in RING_WEIGHTS:
            raise ConfigurationError(f"unknown ring weighting {self.ring_weights!r}, choose one of {', '.join(RING_WEIGHTS)}")
        for name in ("n_radial", "n_angular"):
            value = getattr(self, name)
            if value is not None and value < 4:
                raise ConfigurationError(f"{name} must be at least 4, got {value}")

    def resolve(self, R):
        """Sample counts for radius R: n_radial = 2R and n_angular = max(16, ceil(2 pi R)) unless set."""
        n_radial = self.n_radial or max(4, 2 * R)
        n_angular = self.n_angular or max(16, math.ceil(2 * math.pi * R))
        if self.kind == "polar-quadrature" and self.ring_weights == "annulus" and n_radial < R:
            raise ConfigurationError(f"annulus ring weights need n_radial >= R, got n_radial={n_radial} for R={R}")
        return n_radial, n_angular


EXACT_RING = AveragerBackend()


@lru_cache(maxsize=None)
def ring_taps(R):
    return tuple((table, None) for table in ring_offsets(R))


@lru_cache(maxsize=None)
def polar_taps(R, n_radial, n_angular):
    """Bilinear filters averaging the image over a circle of radius k R / n_radial, k = 0..n_radial."""
    theta = 2 * np.pi * np.arange(n_angular) / n_angular
    span = 2 * R + 3
    taps = []
    for k in range(n_radial + 1):
        r = k * R / n_radial
        y, x = r * np.sin(theta), r * np.cos(theta)
        y0, x0 = np.floor(y), np.floor(x)
        fy, fx = y - y0, x - x0
        rows, cols = y0.astype(int) + R + 1, x0.astype(int) + R + 1
        kernel = np.zeros((span, span))
        np.add.at(kernel, (rows, cols), (1 - fy) * (1 - fx))
        np.add.at(kernel, (rows + 1, cols), fy * (1 - fx))
        np.add.at(kernel, (rows, cols + 1), (1 - fy) * fx)
        np.add.at(kernel, (rows + 1, cols + 1), fy * fx)
        kernel /= n_angular
        kernel[np.abs(kernel) < 1e-12] = 0
        nz_rows, nz_cols = np.nonzero(kernel)
        offsets = np.stack([nz_rows - R - 1, nz_cols - R - 1], axis=1)
        assert np.abs(offsets).max(initial=0) <= R
        weights = kernel[nz_rows, nz_cols]
        offsets.setflags(write=False)
        weights.setflags(write=False)
        taps.append((offsets, weights))
    return tuple(taps)


@lru_cache(maxsize=None)
def ring_integration_matrix(R, n_radial, ring_weights="pixel"):
    """Matrix mapping angular means at the radial samples to ring masses z[0..R].

    ``pixel`` gives every member of A_m the linearly interpolated angular mean at its own radius.
    ``annulus`` multiplies the mean over samples in (m-1, m] by the ring area pi (2m - 1), so a constant image
    integrates to 1 + pi R^2. Bilinear sampling smears a point mass over about one pixel: for a delta the
    total u[R] overshoots its mass by about 21% with ``pixel`` and 77% with ``annulus`` weights.
    """
    weights = np.zeros((R + 1, n_radial + 1))
    if ring_weights == "pixel":
        for m, table in enumerate(ring_offsets(R)):
            t = np.hypot(table[:, 0], table[:, 1]) * n_radial / R
            lower = np.minimum(np.floor(t).astype(int), n_radial - 1)
            frac = t - lower
            np.add.at(weights[m], lower, 1 - frac)
            np.add.at(weights[m], lower + 1, frac)
    else:
        radii = np.arange(n_radial + 1) * R / n_radial
        weights[0, 0] = 1.0
        for m in range(1, R + 1):
            inside = np.nonzero((radii > m - 1) & (radii <= m))[0]
            weights[m, inside] = np.pi * (2 * m - 1) / len(inside)
    weights.setflags(write=False)
    return weights


def _backend_taps(R, backend):
    if backend.kind == "exact-ring":
        return ring_taps(R)
    n_radial, n_angular = backend.resolve(R)
    return polar_taps(R, n_radial, n_angular)


def apply_taps(image, R, taps, row_start=0, row_stop=None):
    """Evaluate every filter of ``taps`` at the search-grid rows [row_start, row_stop)."""
    height, width = image.shape
    grid_rows = height - 2 * R
    row_stop = grid_rows if row_stop is None else row_stop
    out = np.zeros((len(taps), row_stop - row_start, width - 2 * R))
    for channel, (offsets, weights) in enumerate(taps):
        acc = out[channel]
        for i, (dr, dc) in enumerate(offsets):
            block = image[R + row_start + dr:R + row_stop + dr, R + dc:width - R + dc]
            if weights is None:
                acc += block
            else:
                acc += weights[i] * block
    return out


def _row_blocks(n_rows, threads):
    bounds = np.linspace(0, n_rows, min(threads, n_rows) + 1).astype(int)
    return list(zip(bounds[:-1], bounds[1:]))


def filter_maps(image, R, taps, threads=1):
    """Run ``apply_taps`` over contiguous row blocks of the search grid, one block per thread.

    Every output pixel sees the same sequence of additions whatever the blocking, so the
    result does not depend on ``threads``.
    """
    grid_rows = image.shape[0] - 2 * R
    if threads <= 1 or grid_rows < 2:
        return apply_taps(image, R, taps)
    blocks = Parallel(n_jobs=threads, prefer="threads")(
        delayed(apply_taps)(image, R, taps, start, stop) for start, stop in _row_blocks(grid_rows, threads))
    return np.concatenate(blocks, axis=1)


def ring_sum_maps(image, R, backend=EXACT_RING, threads=1):
    """z_p[m] for every search-grid pixel p, as an array of shape (R + 1, *grid.shape)."""
    image = as_image(image)
    search_grid(image.shape, R)
    maps = filter_maps(image, R, _backend_taps(R, backend), threads=threads)
    if backend.kind == "exact-ring":
        return maps
    n_radial, _ = backend.resolve(R)
    return np.tensordot(ring_integration_matrix(R, n_radial, backend.ring_weights), maps, axes=1)


def exact_ring_sums(image, p, R):
    image = as_image(image)
    grid = search_grid(image.shape, R)
    if p not in grid:
        raise DomainError(f"pixel {tuple(p)} is not in the search grid rows [{grid.row_start}, {grid.row_stop}) "
                          f"cols [{grid.col_start}, {grid.col_stop}) for R={R}")
    window = image[p[0] - R:p[0] + R + 1, p[1] - R:p[1] + R + 1]
    z = apply_taps(window, R, ring_taps(R))[:, 0, 0]
    return RadialProfile.from_ring_sums(p, z)


def polar_profile(image, p, R, backend):
    """Polar-quadrature profile at a single center, resampled with ``map_coordinates``."""
    n_radial, n_angular = backend.resolve(R)
    radii = np.arange(n_radial + 1) * R / n_radial
    theta = 2 * np.pi * np.arange(n_angular) / n_angular
    rows = p[0] + radii[:, None] * np.sin(theta)[None, :]
    cols = p[1] + radii[:, None] * np.cos(theta)[None, :]
    samples = map_coordinates(image, [rows.ravel(), cols.ravel()], order=1, mode="constant", cval=0.0)
    angular_mean = samples.reshape(n_radial + 1, n_angular).mean(axis=1)
    z = ring_integration_matrix(R, n_radial, backend.ring_weights) @ angular_mean
    return RadialProfile.from_ring_sums(p, z)


def radial_profile(image, p, R, backend=EXACT_RING):
    if backend.kind == "exact-ring":
        return exact_ring_sums(image, p, R)
    image = as_image(image)
    grid = search_grid(image.shape, R)
    if p not in grid:
        raise DomainError(f"pixel {tuple(p)} is not in the search grid for R={R}")
    return polar_profile(image, p, R, backend)


def rotational_average(image, center, R):
    """Replace every pixel of B_R(center) by the mean of its ring; zero outside the disk."""
    image = as_image(image)
    distance = composed_distance_map(image.shape, center)
    inside = distance <= R
    labels = distance[inside]
    means = np.bincount(labels, weights=image[inside], minlength=R + 1) / np.maximum(np.bincount(labels, minlength=R + 1), 1)
    averaged = np.zeros_like(image)
    averaged[inside] = means[labels]
    return averaged


def snr_gain_of_averaging(clean, noisy, center, R):
    """SNR of the raw pair and of the pair after rotational averaging about ``center``."""
    clean, noisy = as_image(clean, "clean"), as_image(noisy, "noisy")
    if clean.shape != noisy.shape:
        raise DomainError(f"clean image {clean.shape} and noisy image {noisy.shape} differ in extent")
    if center not in search_grid(clean.shape, R):
        raise DomainError(f"center {tuple(center)} is not in the search grid for R={R}")
    before = snr(clean, noisy)
    after = snr(rotational_average(clean, center, R), rotational_average(noisy, center, R))
    return before, after
