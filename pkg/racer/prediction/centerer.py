import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted
from tqdm import tqdm

from racer.averaging import AveragerBackend
from racer.estimators import CenteringConfig, center_of_mass, scm_center
from racer.evaluation.baselines import RfaConfig, rfa_align
from racer.exceptions import ConfigurationError, DomainError, NoMassError
from racer.utils import as_image, integer_shift, window_center

STACK_METHODS = ("scm", "rfa", "cm")


class SurrogateCenterer(BaseEstimator):
    """
    Centers an object in a noisy image at the minimizer of the surrogate-center-of-mass landscape.

    :param radius: Upper bound R on the object radius, in pixels. Must be strictly larger than
        the radius of the object; the object may sit anywhere in the search grid of pixels whose
        radius-R disk lies inside the image.
    :param backend: 'exact-ring' sums the image over the rings of the composed metric,
        'polar-quadrature' approximates the rotational average by bilinear polar sampling.
    :param tie_break: 'lexicographic' or 'center'. Which minimizer to report when several
        candidates share the lowest cost.
    :param normalize: Whether to subtract the image minimum before centering. The sCM needs
        non-negative images.
    :param n_radial: Number of radial samples of the polar backend, default 2R.
    :param n_angular: Number of angular samples of the polar backend, default max(16, ceil(2 pi R)).
    :param ring_weights: 'pixel' or 'annulus'. How the polar backend integrates angular means onto rings.
    :param tie_tol: Relative tolerance under which two costs count as tied.
    :param n_jobs: Threads used for the landscape evaluation. Results do not depend on it.
    """

    def __init__(self, radius=10, backend="exact-ring", tie_break="lexicographic", normalize=True, n_radial=None, n_angular=None,
                 ring_weights="pixel", tie_tol=1e-9, n_jobs=1):
        self.radius = radius
        self.backend = backend
        self.tie_break = tie_break
        self.normalize = normalize
        self.n_radial = n_radial
        self.n_angular = n_angular
        self.ring_weights = ring_weights
        self.tie_tol = tie_tol
        self.n_jobs = n_jobs

    def _config(self):
        backend = AveragerBackend(self.backend, n_radial=self.n_radial, n_angular=self.n_angular, ring_weights=self.ring_weights)
        return CenteringConfig(self.radius, tie_break=self.tie_break, backend=backend, normalize=self.normalize,
                               tie_tol=self.tie_tol, threads=self.n_jobs)

    def fit(self, X, y=None, initial_center=None):
        result = scm_center(as_image(X), self._config(), initial_center=initial_center)
        self.center_ = result.center
        self.landscape_ = result.landscape
        self.e_max_ = result.e_max
        self.cost_min_ = result.cost_min
        self.window_origin_ = result.window_origin
        return self

    def predict(self, X):
        """Centers of a list or 3-D stack of images, as an (n_images, 2) integer array."""
        check_is_fitted(self, "center_")
        config = self._config()
        return np.array([scm_center(as_image(image), config).center for image in X], dtype=int).reshape(-1, 2)

    def fit_predict(self, X, y=None):
        return self.fit(X).center_


def center_slice(image, method, config):
    """Center record of one stack slice; zero-mass slices give a sentinel record."""
    try:
        if method == "cm":
            return {"center": center_of_mass(image - image.min()), "cost_min": np.nan, "e_max": np.nan}
        result = scm_center(image, config)
        return {"center": result.center, "cost_min": result.cost_min, "e_max": result.e_max}
    except NoMassError:
        return {"center": None, "cost_min": np.nan, "e_max": np.nan}


class StackCenterer(BaseEstimator):
    """
    Centers every slice of a particle stack independently (method 'scm' or 'cm') or jointly by
    translation-only reference-free alignment ('rfa').

    After ``fit``, ``results_`` holds one record per slice in input order and ``shifts_`` the
    integer translation that moves each slice's center onto the window center.
    """

    def __init__(self, radius=10, method="scm", backend="exact-ring", tie_break="lexicographic", normalize=True, n_radial=None, n_angular=None,
                 ring_weights="pixel", tie_tol=1e-9, n_jobs=1, rfa_max_iters=20, rfa_tol=0.5, max_shift=None, verbose=False):
        self.radius = radius
        self.method = method
        self.backend = backend
        self.tie_break = tie_break
        self.normalize = normalize
        self.n_radial = n_radial
        self.n_angular = n_angular
        self.ring_weights = ring_weights
        self.tie_tol = tie_tol
        self.n_jobs = n_jobs
        self.rfa_max_iters = rfa_max_iters
        self.rfa_tol = rfa_tol
        self.max_shift = max_shift
        self.verbose = verbose

    def fit(self, X, y=None):
        if self.method not in STACK_METHODS:
            raise ConfigurationError(f"unknown stack method {self.method!r}, choose one of {', '.join(STACK_METHODS)}")
        images = [as_image(image) for image in X]
        extent = images[0].shape if images else (0, 0)
        target = window_center(extent)
        backend = AveragerBackend(self.backend, n_radial=self.n_radial, n_angular=self.n_angular, ring_weights=self.ring_weights)
        config = CenteringConfig(self.radius, tie_break=self.tie_break, backend=backend, normalize=self.normalize, tie_tol=self.tie_tol)
        if self.method == "rfa" and len(images) == 1:
            raise DomainError("reference-free alignment needs at least two images, use method 'scm' for a single one")
        if self.method == "rfa" and images:
            max_shift = self.max_shift if self.max_shift is not None else 2 * self.radius
            shifts = rfa_align(images, RfaConfig(self.rfa_max_iters, self.rfa_tol, max_shift))
            records = [{"center": (target[0] - dr, target[1] - dc), "cost_min": np.nan, "e_max": np.nan} for dr, dc in shifts]
        else:
            iterator = tqdm(images, disable=not self.verbose)
            records = Parallel(n_jobs=self.n_jobs, prefer="threads")(delayed(center_slice)(image, self.method, config) for image in iterator)
        self.results_ = []
        self.shifts_ = []
        for index, record in enumerate(records):
            center = record["center"]
            self.results_.append({"particle_index": index, "row": -1 if center is None else center[0], "col": -1 if center is None else center[1],
                                  "cost_min": record["cost_min"], "e_max": record["e_max"], "backend": self.backend if self.method == "scm" else self.method,
                                  "R": self.radius})
            self.shifts_.append((0, 0) if center is None else (target[0] - center[0], target[1] - center[1]))
        return self

    def transform(self, X):
        """Apply the fitted integer shifts to ``X`` with zero fill."""
        check_is_fitted(self, "shifts_")
        shifted = [integer_shift(image, shift) for image, shift in zip(X, self.shifts_)]
        return np.array(shifted) if shifted else np.zeros_like(np.asarray(X))

    def shift_summary(self):
        check_is_fitted(self, "shifts_")
        return shift_summary(self.shifts_)


def shift_summary(shifts):
    """Mean and median Euclidean length of the per-particle shifts."""
    lengths = np.hypot(*np.asarray(shifts, dtype=np.float64).reshape(-1, 2).T)
    if len(lengths) == 0:
        return {"mean_shift": 0.0, "median_shift": 0.0, "n_particles": 0}
    return {"mean_shift": float(lengths.mean()), "median_shift": float(np.median(lengths)), "n_particles": int(len(lengths))}
