import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from racer.exceptions import ConfigurationError, DomainError


def ceil_sqrt(squared):
    # exact ceil(sqrt(n)) for non-negative integer arrays, float sqrt only gives the first guess
    squared = np.asarray(squared, dtype=np.int64)
    root = np.floor(np.sqrt(squared)).astype(np.int64)
    root = np.where(root * root > squared, root - 1, root)
    root = np.where((root + 1) * (root + 1) <= squared, root + 1, root)
    return root + (root * root < squared)


def composed_distance(a, b):
    """Ceiling of the Euclidean distance between two pixels."""
    squared = (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2
    root = math.isqrt(squared)
    return root if root * root == squared else root + 1


def composed_distance_map(extent, center):
    """Composed distance from ``center`` to every pixel of an image of the given extent."""
    height, width = extent
    rows, cols = np.ogrid[:height, :width]
    return ceil_sqrt((rows - center[0]) ** 2 + (cols - center[1]) ** 2)


def euclidean_distance_map(extent, center):
    height, width = extent
    rows, cols = np.ogrid[:height, :width]
    return np.hypot(rows - center[0], cols - center[1])


@dataclass(frozen=True)
class Ring:
    center: tuple
    m: int
    members: tuple

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class SearchGrid:
    """Rectangular block of candidate centers whose radius-R disks lie inside the image.

    A radius of 0 gives the whole image, which is the domain of the global GM landscape. ``offset`` places
    an image of ``extent`` cropped from a larger one, so that members are reported in the larger image.
    """
    extent: tuple
    radius: int
    offset: tuple = (0, 0)

    @property
    def row_start(self):
        return self.radius + self.offset[0]

    @property
    def row_stop(self):
        return self.extent[0] - self.radius + self.offset[0]

    @property
    def col_start(self):
        return self.radius + self.offset[1]

    @property
    def col_stop(self):
        return self.extent[1] - self.radius + self.offset[1]

    @property
    def window_center(self):
        return (self.offset[0] + self.extent[0] // 2, self.offset[1] + self.extent[1] // 2)

    @property
    def origin(self):
        return (self.row_start, self.col_start)

    @property
    def shape(self):
        return (self.row_stop - self.row_start, self.col_stop - self.col_start)

    @property
    def members(self):
        return [(r, c) for r in range(self.row_start, self.row_stop) for c in range(self.col_start, self.col_stop)]

    def __len__(self):
        return self.shape[0] * self.shape[1]

    def __contains__(self, p):
        return self.row_start <= p[0] < self.row_stop and self.col_start <= p[1] < self.col_stop

    def to_local(self, p):
        return (p[0] - self.row_start, p[1] - self.col_start)

    def to_image(self, index):
        return (int(index[0]) + self.row_start, int(index[1]) + self.col_start)


def _check_center(center, extent):
    height, width = extent
    if not (0 <= center[0] < height and 0 <= center[1] < width):
        raise DomainError(f"pixel {tuple(center)} lies outside the {height}x{width} image")


def ring(center, m, extent):
    """Pixels ``s`` of the image with m-1 < |center - s| <= m; ``{center}`` for m = 0."""
    if m < 0:
        raise DomainError(f"ring index must be non-negative, got {m}")
    _check_center(center, extent)
    if m == 0:
        return Ring(tuple(center), 0, (tuple(center),))
    distance = composed_distance_map(extent, center)
    members = tuple((int(r), int(c)) for r, c in zip(*np.nonzero(distance == m)))
    return Ring(tuple(center), m, members)


def disk(center, R, extent):
    if R < 0:
        raise DomainError(f"disk radius must be non-negative, got {R}")
    _check_center(center, extent)
    distance = composed_distance_map(extent, center)
    return [(int(r), int(c)) for r, c in zip(*np.nonzero(distance <= R))]


def max_radius(extent):
    return (min(extent) - 1) // 2


def search_grid(extent, R):
    height, width = extent
    if R < 0:
        raise ConfigurationError(f"radius must be non-negative, got {R}")
    if 2 * R + 1 > min(height, width):
        raise ConfigurationError(f"radius {R} needs an image of at least {2 * R + 1}x{2 * R + 1} pixels but the image is {height}x{width}; "
                                 f"use --radius <= {max_radius(extent)}")
    return SearchGrid((height, width), R)


@lru_cache(maxsize=None)
def ring_offsets(R):
    """Offset tables (dr, dc) of the rings 0..R around a canonical center.

    Returned arrays are read-only and shared between callers.
    """
    span = np.arange(-R, R + 1)
    dr, dc = np.meshgrid(span, span, indexing="ij")
    distance = ceil_sqrt(dr ** 2 + dc ** 2)
    tables = []
    for m in range(R + 1):
        mask = distance == m
        table = np.stack([dr[mask], dc[mask]], axis=1)
        table.setflags(write=False)
        tables.append(table)
    return tuple(tables)


@lru_cache(maxsize=None)
def disk_offsets(R):
    """All (dr, dc, composed distance) triples of B_R, ordered ring by ring."""
    rows = [np.column_stack([table, np.full(len(table), m)]) for m, table in enumerate(ring_offsets(R))]
    table = np.concatenate(rows, axis=0)
    table.setflags(write=False)
    return table


def ring_cardinalities(R):
    return np.array([len(table) for table in ring_offsets(R)])
