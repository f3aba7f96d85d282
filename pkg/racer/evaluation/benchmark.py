import itertools
import sys
import time
from dataclasses import replace

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from racer.estimators import CenteringConfig, center_of_mass, geometric_median, normalize_nonneg, scm_center
from racer.evaluation.baselines import Template, cross_correlation_shift, gaussian_template, lowpass_template, noisy_template
from racer.exceptions import ConfigurationError, RacerError
from racer.synthetic.noise import NoiseSpec, add_noise, deviation
from racer.synthetic.scenes import render_scene
from racer.utils import window_center

TABLE_COLUMNS = ["method", "noise_model", "snr", "seed", "dev_row", "dev_col", "dev_sum", "runtime_ms"]
# spawn-key prefix of the noisy templates, kept apart from the (model, snr, seed) cells
TEMPLATE_STREAM = 1000


class BenchmarkContext:
    """Everything a method needs besides the noisy image: radius, templates and the window center."""

    def __init__(self, scene, radius, max_shift=None, lowpass_sigma=2.0, base_seed=0, backend="exact-ring"):
        self.scene = scene
        self.radius = radius
        self.center = window_center(scene.extent)
        self.max_shift = max_shift if max_shift is not None else min(scene.extent) // 4
        self.config = CenteringConfig(radius, backend=backend)
        self.templates = self._make_templates(lowpass_sigma, base_seed)

    def _make_templates(self, lowpass_sigma, base_seed):
        centered, centered_truth = render_scene(replace(self.scene, shift=(0, 0), second=None))
        half_width = self.scene.object_radius + 1
        top = (self.center[0] - half_width, self.center[1] - half_width)
        values = centered[top[0]:top[0] + 2 * half_width + 1, top[1]:top[1] + 2 * half_width + 1].copy()
        clean = Template(values, (centered_truth[0] - top[0], centered_truth[1] - top[1]))
        noisy_low = noisy_template(clean, 0.5, base_seed, (TEMPLATE_STREAM, 1))
        return {
            "clean": clean,
            "noisy-2.5": noisy_template(clean, 2.5, base_seed, (TEMPLATE_STREAM, 0)),
            "noisy-0.5": noisy_low,
            "lowpass": lowpass_template(noisy_low, lowpass_sigma),
            "gaussian": gaussian_template(values.shape, self.scene.object_radius),
        }

    def xcorr(self, noisy, template):
        shift = cross_correlation_shift(noisy, self.templates[template], self.max_shift)
        return (self.center[0] + shift[0], self.center[1] + shift[1])


METHODS = {
    "scm": lambda noisy, ctx: scm_center(noisy, ctx.config).center,
    "cm": lambda noisy, ctx: center_of_mass(normalize_nonneg(noisy)),
    "gm": lambda noisy, ctx: geometric_median(normalize_nonneg(noisy)),
    "xcorr-clean": lambda noisy, ctx: ctx.xcorr(noisy, "clean"),
    "xcorr-noisy-2.5": lambda noisy, ctx: ctx.xcorr(noisy, "noisy-2.5"),
    "xcorr-noisy-0.5": lambda noisy, ctx: ctx.xcorr(noisy, "noisy-0.5"),
    "xcorr-lowpass": lambda noisy, ctx: ctx.xcorr(noisy, "lowpass"),
    "xcorr-gaussian": lambda noisy, ctx: ctx.xcorr(noisy, "gaussian"),
}


def _run_cell(clean, truth, ctx, methods, model, snr, seed, cell, record_runtime):
    noisy = add_noise(clean, NoiseSpec(model, snr, seed), cell)
    rows = []
    for method in methods:
        start = time.perf_counter()
        try:
            estimate = METHODS[method](noisy, ctx)
        except RacerError as e:
            print(f"{method} failed on {model} noise at SNR {snr}, cell {cell}: {e}", file=sys.stderr)
            rows.append([method, model, snr, cell[-1], -1, -1, -1, np.nan])
            continue
        runtime = (time.perf_counter() - start) * 1000 if record_runtime else 0.0
        dev_row, dev_col = abs(estimate[0] - truth[0]), abs(estimate[1] - truth[1])
        rows.append([method, model, snr, cell[-1], dev_row, dev_col, deviation(estimate, truth), runtime])
    return rows


def sweep(scene, noise_models, snr_grid, methods, n_seeds, radius, base_seed=0, threads=1, max_shift=None, lowpass_sigma=2.0,
          record_runtime=True, verbose=False):
    """
    Deviation of every method from the ground truth over a grid of noise models, SNRs and seeds.

    Each (noise model, SNR, seed) cell draws its noise from its own counter-based stream, so the
    table does not depend on ``threads`` or on the order in which cells run. Failing methods are
    recorded as rows with deviation -1.

    :return: pandas.DataFrame with columns method, noise_model, snr, seed, dev_row, dev_col, dev_sum, runtime_ms
    """
    unknown = [method for method in methods if method not in METHODS]
    if unknown:
        raise ConfigurationError(f"unknown benchmark methods {unknown}, available: {', '.join(METHODS)}")
    clean, truth = render_scene(scene)
    ctx = BenchmarkContext(scene, radius, max_shift=max_shift, lowpass_sigma=lowpass_sigma, base_seed=base_seed)
    cells = [(model, snr, seed, (i, j, seed)) for (i, model), (j, snr), seed in
             itertools.product(enumerate(noise_models), enumerate(snr_grid), range(n_seeds))]
    results = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_run_cell)(clean, truth, ctx, methods, model, snr, base_seed, cell, record_runtime)
        for model, snr, seed, cell in tqdm(cells, disable=not verbose))
    return pd.DataFrame([row for rows in results for row in rows], columns=TABLE_COLUMNS)


def summarize(table):
    """Mean and median deviation per (method, noise model, SNR), ignoring failed runs."""
    ok = table[table.dev_sum >= 0]
    return ok.groupby(["method", "noise_model", "snr"]).dev_sum.agg(["mean", "median"]).reset_index()
