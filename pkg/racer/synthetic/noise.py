from dataclasses import dataclass

import numpy as np
from scipy import fft

from racer.exceptions import ConfigurationError, DomainError, NoMassError

NOISE_MODELS = ("gaussian-iid", "uniform-positive", "colored")


@dataclass(frozen=True)
class NoiseSpec:
    model: str = "gaussian-iid"
    target_snr: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.model not in NOISE_MODELS:
            raise ConfigurationError(f"unknown noise model {self.model!r}, choose one of {', '.join(NOISE_MODELS)}")
        if not self.target_snr > 0:
            raise ConfigurationError(f"target SNR must be positive, got {self.target_snr}")


def make_rng(seed, cell=()):
    """Counter-based generator for one benchmark cell.

    Streams are keyed by (seed, cell) only, so cells can be drawn in any order or in parallel.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(cell))))


def snr(clean, noisy):
    """||clean||^2 / ||noisy - clean||^2, ``inf`` when the two images are equal."""
    clean, noisy = np.asarray(clean, dtype=np.float64), np.asarray(noisy, dtype=np.float64)
    if clean.shape != noisy.shape:
        raise DomainError(f"clean image {clean.shape} and noisy image {noisy.shape} differ in extent")
    noise_energy = np.sum((noisy - clean) ** 2)
    if noise_energy == 0:
        return np.inf
    return float(np.sum(clean ** 2) / noise_energy)


def colored_filter(shape):
    """1 / sqrt(1 + rho^2) with rho the radial index of the integer frequency bins."""
    ky = fft.fftfreq(shape[0]) * shape[0]
    kx = fft.fftfreq(shape[1]) * shape[1]
    rho_squared = ky[:, None] ** 2 + kx[None, :] ** 2
    return 1.0 / np.sqrt(1.0 + rho_squared)


def draw_noise(model, shape, rng):
    if model == "gaussian-iid":
        return rng.standard_normal(shape)
    if model == "uniform-positive":
        return rng.random(shape)
    white = rng.standard_normal(shape)
    return fft.ifft2(fft.fft2(white) * colored_filter(shape)).real


def add_noise(clean, spec, cell=()):
    """Add noise of ``spec.model`` to ``clean`` scaled so that snr(clean, result) == spec.target_snr."""
    clean = np.asarray(clean, dtype=np.float64)
    signal_energy = np.sum(clean ** 2)
    if signal_energy == 0:
        raise NoMassError("cannot calibrate noise against an all-zero clean image")
    noise = draw_noise(spec.model, clean.shape, make_rng(spec.seed, cell))
    scale = np.sqrt(signal_energy / (spec.target_snr * np.sum(noise ** 2)))
    return clean + scale * noise


def deviation(estimate, truth):
    """Sum of the per-axis pixel deviations |drow| + |dcol|."""
    return abs(int(estimate[0]) - int(truth[0])) + abs(int(estimate[1]) - int(truth[1]))
