import numpy as np
from sklearn.utils.validation import check_array

from racer.exceptions import DomainError


def as_image(image, name="image"):
    # 2-D, finite and non-empty
    try:
        return check_array(image, dtype=np.float64, copy=False)
    except ValueError as e:
        raise DomainError(f"invalid {name}: {e}") from e


def window_center(extent):
    return (extent[0] // 2, extent[1] // 2)


def round_half_away(x):
    return int(np.sign(x) * np.floor(np.abs(x) + 0.5))


def integer_shift(image, shift):
    """Translate ``image`` by an integer (drow, dcol), filling uncovered pixels with zeros."""
    image = np.asarray(image)
    dr, dc = int(shift[0]), int(shift[1])
    height, width = image.shape
    shifted = np.zeros_like(image)
    if abs(dr) >= height or abs(dc) >= width:
        return shifted
    src_rows = slice(max(0, -dr), height - max(0, dr))
    dst_rows = slice(max(0, dr), height - max(0, -dr))
    src_cols = slice(max(0, -dc), width - max(0, dc))
    dst_cols = slice(max(0, dc), width - max(0, -dc))
    shifted[dst_rows, dst_cols] = image[src_rows, src_cols]
    return shifted


def crop_window(extent, center, half_width):
    """Bounds of the (2*half_width+1)-wide window around ``center``, clipped to the image.

    Returns (row_start, row_stop, col_start, col_stop).
    """
    height, width = extent
    return (max(0, center[0] - half_width), min(height, center[0] + half_width + 1),
            max(0, center[1] - half_width), min(width, center[1] + half_width + 1))
