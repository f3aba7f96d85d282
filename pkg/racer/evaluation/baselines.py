from dataclasses import dataclass

import numpy as np
from scipy import signal
from scipy.ndimage import gaussian_filter

from racer.exceptions import ConfigurationError, DomainError
from racer.synthetic.noise import NoiseSpec, add_noise
from racer.utils import as_image, integer_shift, window_center

CORRELATION_METHODS = ("direct", "fft")


@dataclass(frozen=True)
class Template:
    """Reference image for template matching; ``origin`` is the pixel that marks the object center."""
    values: np.ndarray
    origin: tuple


@dataclass(frozen=True)
class RfaConfig:
    max_iters: int = 20
    convergence_tol: float = 0.5
    max_shift: int = 10

    def __post_init__(self):
        if self.max_iters < 1:
            raise ConfigurationError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.max_shift < 0:
            raise ConfigurationError(f"max_shift must be non-negative, got {self.max_shift}")


def correlation_map(test, template, method="direct"):
    """Raw correlation sum_ij T(i, j) I(k + i, l + j) for every placement (k, l) of the template inside ``test``."""
    if method not in CORRELATION_METHODS:
        raise ConfigurationError(f"unknown correlation method {method!r}, choose one of {', '.join(CORRELATION_METHODS)}")
    test = as_image(test, "test image")
    values = as_image(template.values, "template")
    if values.shape[0] > test.shape[0] or values.shape[1] > test.shape[1]:
        raise DomainError(f"template of shape {values.shape} is larger than the test image {test.shape}")
    return signal.correlate(test, values, mode="valid", method=method)


def cross_correlation_shift(test, template, max_shift, method="direct"):
    """Shift (drow, dcol) of the correlation peak.

    At shift (0, 0) the template origin sits on the test-image center; admissible shifts keep
    the whole template inside the image and have |drow|, |dcol| <= max_shift. Ties go to the
    lexicographically smallest shift.
    """
    scores = correlation_map(test, template, method)
    center = window_center(np.shape(test))
    top = (center[0] - template.origin[0], center[1] - template.origin[1])
    rows = np.arange(scores.shape[0]) - top[0]
    cols = np.arange(scores.shape[1]) - top[1]
    admissible = (np.abs(rows)[:, None] <= max_shift) & (np.abs(cols)[None, :] <= max_shift)
    if not admissible.any():
        raise DomainError(f"no shift within {max_shift} pixels keeps the template inside the test image")
    masked = np.where(admissible, scores, -np.inf)
    k, l = np.unravel_index(np.argmax(masked), masked.shape)
    return int(rows[k]), int(cols[l])


def gaussian_template(extent, width):
    """Isotropic Gaussian of standard deviation width / 2 and unit peak at the window center."""
    if not width > 0:
        raise ConfigurationError(f"template width must be positive, got {width}")
    center = window_center(extent)
    rows, cols = np.indices(extent)
    sigma = width / 2
    values = np.exp(-((rows - center[0]) ** 2 + (cols - center[1]) ** 2) / (2 * sigma ** 2))
    return Template(values, center)


def object_template(clean, center, half_width):
    """Cut a (2 half_width + 1)-wide template around ``center`` from a noise-free image."""
    clean = as_image(clean)
    values = clean[center[0] - half_width:center[0] + half_width + 1, center[1] - half_width:center[1] + half_width + 1]
    if values.shape != (2 * half_width + 1, 2 * half_width + 1):
        raise DomainError(f"template window of half width {half_width} around {tuple(center)} leaves the image")
    return Template(values.copy(), (half_width, half_width))


def noisy_template(template, target_snr, seed, cell=()):
    values = add_noise(template.values, NoiseSpec("gaussian-iid", target_snr, seed), cell)
    return Template(values, template.origin)


def lowpass_template(template, sigma):
    return Template(gaussian_filter(template.values, sigma), template.origin)


def _best_lag(reference, image, max_shift):
    """Integer translation t maximizing sum_p reference(p) image(p - t), |t| <= max_shift."""
    padded = np.pad(reference, max_shift)
    scores = signal.correlate(padded, image, mode="valid", method="direct")
    k, l = np.unravel_index(np.argmax(scores), scores.shape)
    return int(k) - max_shift, int(l) - max_shift


def rfa_align(images, cfg=RfaConfig(), return_n_iter=False):
    """Translation-only reference-free alignment.

    Each image is correlated against the sum of all other images at their current shifts and
    moved to the correlation peak. Images are updated one after the other within an
    iteration. Iterations stop after ``cfg.max_iters`` or once the mean per-image change of
    shift, |drow| + |dcol|, is at most ``cfg.convergence_tol``.
    """
    images = [as_image(image) for image in images]
    if len(images) < 2:
        raise DomainError(f"reference-free alignment needs at least two images, got {len(images)}")
    if len({image.shape for image in images}) > 1:
        raise DomainError("all images of a stack must share one extent")
    max_shift = min(cfg.max_shift, min(images[0].shape) - 1)
    shifts = np.zeros((len(images), 2), dtype=int)
    shifted = [image.copy() for image in images]
    total = np.sum(shifted, axis=0)
    n_iter = 0
    for n_iter in range(1, cfg.max_iters + 1):
        change = 0
        for i, image in enumerate(images):
            reference = total - shifted[i]
            lag = _best_lag(reference, shifted[i], max_shift)
            new_shift = np.clip(shifts[i] + lag, -max_shift, max_shift)
            change += int(np.abs(new_shift - shifts[i]).sum())
            if (new_shift != shifts[i]).any():
                total -= shifted[i]
                shifts[i] = new_shift
                shifted[i] = integer_shift(image, shifts[i])
                total += shifted[i]
        if change / len(images) <= cfg.convergence_tol:
            break
    result = [(int(dr), int(dc)) for dr, dc in shifts]
    if return_n_iter:
        return result, n_iter
    return result
