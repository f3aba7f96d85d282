from dataclasses import dataclass

import numpy as np

from racer.estimators import geometric_median
from racer.exceptions import ConfigurationError, DomainError
from racer.utils import window_center

OBJECTS = ("disk", "blob", "hedgehog", "elongated", "raster")
HEDGEHOG_BACKGROUND = 0.3
HEDGEHOG_SPIKE = 0.7


@dataclass(frozen=True)
class PartialObject:
    """A second, possibly truncated object placed at ``offset`` from the main object's center.

    ``visible`` is the fraction of its width that is kept, measured from the side facing the
    main object; ``scale`` multiplies its intensities.
    """
    offset: tuple
    object: str = "disk"
    radius: int = 10
    scale: float = 1.0
    visible: float = 0.5

    def __post_init__(self):
        if not any(self.offset):
            raise DomainError("a partial object needs a nonzero offset from the main object")
        if not 0 <= self.visible <= 1:
            raise DomainError(f"visible is a fraction of the partial object's width, got {self.visible}")


@dataclass(frozen=True)
class SceneSpec:
    extent: tuple = (101, 101)
    object: str = "disk"
    object_radius: int = 10
    shift: tuple = (0, 0)
    second: PartialObject = None
    raster: np.ndarray = None

    def __post_init__(self):
        if self.object not in OBJECTS:
            raise ConfigurationError(f"unknown object {self.object!r}, choose one of {', '.join(OBJECTS)}")
        if self.object == "raster" and self.raster is None:
            raise ConfigurationError("object 'raster' needs a raster image")

    @property
    def center(self):
        row, col = window_center(self.extent)
        return (row + self.shift[0], col + self.shift[1])


def _offsets(extent, center):
    rows, cols = np.indices(extent)
    return rows - center[0], cols - center[1]


def draw_object(kind, extent, center, radius, raster=None):
    """Noise-free object with intensities in [0, 1], centered on the pixel ``center``."""
    dr, dc = _offsets(extent, center)
    distance = np.hypot(dr, dc)
    if kind == "disk":
        return (distance <= radius).astype(np.float64)
    if kind == "blob":
        sigma = radius / 2
        return np.where(distance <= radius, np.exp(-distance ** 2 / (2 * sigma ** 2)), 0.0)
    if kind == "hedgehog":
        # a picture cut to a disk: dim background, bright round body and eight spikes along the axes and diagonals
        on_axis = (np.abs(dr) <= 1) | (np.abs(dc) <= 1)
        on_diagonal = (np.abs(dr - dc) <= 1) | (np.abs(dr + dc) <= 1)
        picture = np.where(distance <= 0.6 * radius, 1.0, np.where(on_axis | on_diagonal, HEDGEHOG_SPIKE, HEDGEHOG_BACKGROUND))
        return np.where(distance <= radius, picture, 0.0)
    if kind == "elongated":
        return ((dr / (radius / 3)) ** 2 + (dc / radius) ** 2 <= 1).astype(np.float64)
    raster = np.asarray(raster, dtype=np.float64)
    height, width = raster.shape
    top, left = center[0] - height // 2, center[1] - width // 2
    if top < 0 or left < 0 or top + height > extent[0] or left + width > extent[1]:
        raise DomainError(f"raster of shape {raster.shape} centered at {center} does not fit the {extent[0]}x{extent[1]} image")
    image = np.zeros(extent)
    image[top:top + height, left:left + width] = raster
    return image


def _check_fits(extent, center, radius):
    if center[0] - radius < 0 or center[1] - radius < 0 or center[0] + radius >= extent[0] or center[1] + radius >= extent[1]:
        raise DomainError(f"object of radius {radius} at {tuple(center)} does not fit in the {extent[0]}x{extent[1]} image")


def render_partial(spec, main_center):
    second = spec.second
    center = (main_center[0] + second.offset[0], main_center[1] + second.offset[1])
    image = second.scale * draw_object(second.object, spec.extent, center, second.radius)
    # cut away the far side of the object along the line joining the two centers
    direction = np.array(second.offset, dtype=np.float64)
    direction /= np.linalg.norm(direction)
    dr, dc = _offsets(spec.extent, center)
    along = dr * direction[0] + dc * direction[1]
    image[along > (2 * second.visible - 1) * second.radius] = 0.0
    return image


def render_scene(spec):
    """Noise-free scene and its ground truth, the grid GM of the main object alone."""
    center = spec.center
    if spec.object != "raster":
        _check_fits(spec.extent, center, spec.object_radius)
    main = draw_object(spec.object, spec.extent, center, spec.object_radius, raster=spec.raster)
    truth = geometric_median(main)
    image = main if spec.second is None else main + render_partial(spec, center)
    return image, truth
