from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from scipy import signal

from racer.averaging import EXACT_RING, AveragerBackend, RadialProfile, exact_ring_sums, ring_sum_maps  # noqa: F401
from racer.exceptions import ConfigurationError, DomainError, NoMassError
from racer.grid_geometry import SearchGrid, ceil_sqrt, composed_distance, disk_offsets, search_grid
from racer.utils import as_image, crop_window, round_half_away

METRICS = ("composed", "euclidean")
TIE_BREAKS = ("lexicographic", "center")
KINDS = ("sCM", "sCM-normalized", "GM", "localGM", "CM-variance")

# images up to this many pixels get the exact direct GM convolution
DIRECT_GM_MAX_PIXELS = 64 * 64


@dataclass
class CenteringConfig:
    """Parameters of the surrogate-center-of-mass search.

    :param radius: Bound R on the object radius, strictly larger than the radius of the object.
    :param tie_break: 'lexicographic' picks the first minimizer in row-major order, 'center' the
        minimizer closest to the window center.
    :param backend: Rotational averaging backend, see ``racer.averaging.AveragerBackend``.
    :param normalize: Subtract the image minimum before centering.
    :param tie_tol: Costs within this relative tolerance of the minimum count as tied.
    :param threads: Number of threads for the landscape evaluation; results do not depend on it.
    :param check_forms: Evaluate both algebraic forms of the sCM cost and assert they agree.
    """
    radius: int
    tie_break: str = "lexicographic"
    backend: AveragerBackend = field(default_factory=AveragerBackend)
    normalize: bool = True
    tie_tol: float = 1e-9
    threads: int = 1
    check_forms: bool = False

    def __post_init__(self):
        if isinstance(self.backend, str):
            self.backend = AveragerBackend(self.backend)
        if int(self.radius) != self.radius or self.radius < 1:
            raise ConfigurationError(f"radius must be a positive integer, got {self.radius}")
        self.radius = int(self.radius)
        if self.tie_break not in TIE_BREAKS:
            raise ConfigurationError(f"unknown tie-break rule {self.tie_break!r}, choose one of {', '.join(TIE_BREAKS)}")
        if self.threads < 1:
            raise ConfigurationError(f"threads must be at least 1, got {self.threads}")


@dataclass
class Landscape:
    kind: str
    cost: np.ndarray
    domain: SearchGrid
    argmin: tuple
    e_max: float = None

    @property
    def cost_min(self):
        return float(self.cost[self.domain.to_local(self.argmin)])

    def cost_at(self, p):
        if p not in self.domain:
            raise DomainError(f"pixel {tuple(p)} is outside the landscape domain")
        return float(self.cost[self.domain.to_local(p)])

    def translated(self, offset):
        """The same landscape with its domain moved by ``offset``, e.g. from a crop window into the full image."""
        domain = replace(self.domain, offset=(self.domain.offset[0] + offset[0], self.domain.offset[1] + offset[1]))
        argmin = (self.argmin[0] + offset[0], self.argmin[1] + offset[1])
        return replace(self, domain=domain, argmin=argmin)

    def to_frame(self):
        rows, cols = np.indices(self.cost.shape)
        return pd.DataFrame({"row": (rows + self.domain.row_start).ravel(),
                             "col": (cols + self.domain.col_start).ravel(),
                             "cost": self.cost.ravel()})


@dataclass
class CenteringResult:
    center: tuple
    cost_min: float
    e_max: float
    landscape: Landscape
    window_origin: tuple = (0, 0)


def normalize_nonneg(image):
    image = as_image(image)
    return image - image.min()


def _check_mass(image):
    total = image.sum()
    if not total > 0:
        raise NoMassError()
    return total


def select_argmin(cost, domain, tie_break="lexicographic", tie_tol=1e-9):
    """Grid position of the minimum of ``cost``, applying the tie-break rule to near-equal values."""
    lowest = cost.min()
    tied = cost <= lowest + tie_tol * max(abs(lowest), 1.0)
    candidates = np.argwhere(tied)
    if tie_break == "center" and len(candidates) > 1:
        target = domain.window_center
        distances = [composed_distance(domain.to_image(c), target) for c in candidates]
        # argmin keeps the first, i.e. row-major, candidate among equal distances
        return domain.to_image(candidates[int(np.argmin(distances))])
    return domain.to_image(candidates[0])


def center_of_mass(image):
    image = as_image(image)
    total = _check_mass(image)
    rows, cols = np.indices(image.shape)
    return (round_half_away((rows * image).sum() / total), round_half_away((cols * image).sum() / total))


def _distance_kernel(extent, metric):
    height, width = extent
    dr = np.arange(-(height - 1), height)[:, None]
    dc = np.arange(-(width - 1), width)[None, :]
    if metric == "composed":
        return ceil_sqrt(dr ** 2 + dc ** 2).astype(np.float64)
    return np.hypot(dr, dc)


def check_metric(metric):
    if metric not in METRICS:
        raise ConfigurationError(f"unknown metric {metric!r}, choose one of {', '.join(METRICS)}")


def gm_landscape(image, metric="composed", tie_break="lexicographic", tie_tol=1e-9):
    """Sum over all pixels p of I(p) d(p, x), for every pixel x of the image."""
    check_metric(metric)
    image = as_image(image)
    _check_mass(image)
    method = "direct" if image.size <= DIRECT_GM_MAX_PIXELS else "fft"
    cost = signal.convolve(_distance_kernel(image.shape, metric), image, mode="valid", method=method)
    domain = SearchGrid(image.shape, 0)
    return Landscape("GM", cost, domain, select_argmin(cost, domain, tie_break, tie_tol))


def geometric_median(image, metric="composed", tie_break="lexicographic"):
    return gm_landscape(image, metric, tie_break).argmin


def cm_variance_landscape(image, tie_break="lexicographic"):
    """Frechet variance sum_p I(p) |p - x|^2 over all pixels x."""
    image = as_image(image)
    total = _check_mass(image)
    rows, cols = np.indices(image.shape)
    mean_row, mean_col = (rows * image).sum() / total, (cols * image).sum() / total
    spread = (((rows - mean_row) ** 2 + (cols - mean_col) ** 2) * image).sum()
    cost = total * ((rows - mean_row) ** 2 + (cols - mean_col) ** 2) + spread
    domain = SearchGrid(image.shape, 0)
    return Landscape("CM-variance", cost, domain, select_argmin(cost, domain, tie_break))


def local_gm_landscape(image, R, metric="composed", tie_break="lexicographic"):
    """Sum over s in B_R(x) of I(s) d(s, x), for x in the search grid."""
    check_metric(metric)
    image = as_image(image)
    domain = search_grid(image.shape, R)
    height, width = image.shape
    cost = np.zeros(domain.shape)
    for dr, dc, d in disk_offsets(R):
        if d == 0:
            continue
        weight = d if metric == "composed" else np.hypot(dr, dc)
        cost += weight * image[R + dr:height - R + dr, R + dc:width - R + dc]
    return Landscape("localGM", cost, domain, select_argmin(cost, domain, tie_break))


def ring_sums(image, p, R):
    """Ring masses z[m] = sum over A_m(p) of I, and their cumulative sums u."""
    return exact_ring_sums(image, p, R)


def disk_mass_map(image, R, threads=1):
    """u_p[R], the mass inside B_R(p), for every search-grid pixel."""
    return ring_sum_maps(image, R, EXACT_RING, threads=threads).sum(axis=0)


def e_max(image, R):
    image = as_image(image)
    value = disk_mass_map(image, R).max()
    if not value > 0:
        raise NoMassError()
    return float(value)


def scm_cost_forms(u_maps, e_max_value):
    """The two algebraically equivalent sCM costs, both scaled by 1 / E_max.

    Returns (sum_l (1 - u_p[l] / E_max), ((R + 1) E_max - sum_l u_p[l]) / E_max).
    """
    n_rings = u_maps.shape[0]
    deviation_form = (1 - u_maps / e_max_value).sum(axis=0)
    energy_form = (n_rings * e_max_value - u_maps.sum(axis=0)) / e_max_value
    return deviation_form, energy_form


def scm_landscape(image, cfg, kind="sCM-normalized"):
    """Surrogate-center-of-mass landscape over the search grid.

    ``sCM-normalized`` holds sum_l (1 - u_p[l] / E_max); ``sCM`` the same cost times E_max.
    """
    if kind not in ("sCM", "sCM-normalized"):
        raise ConfigurationError(f"scm_landscape computes sCM or sCM-normalized, not {kind!r}")
    image = normalize_nonneg(image) if cfg.normalize else as_image(image)
    _check_mass(image)
    R = cfg.radius
    domain = search_grid(image.shape, R)
    u_maps = np.cumsum(ring_sum_maps(image, R, cfg.backend, threads=cfg.threads), axis=0)
    e_max_value = float(u_maps[R].max())
    if not e_max_value > 0:
        raise NoMassError(f"no mass inside any radius-{R} disk of the search grid")
    deviation_form, cost = scm_cost_forms(u_maps, e_max_value)
    if cfg.check_forms:
        np.testing.assert_allclose(deviation_form, cost, rtol=1e-9, atol=1e-9 * (R + 1))
    if kind == "sCM":
        cost = cost * e_max_value
    return Landscape(kind, cost, domain, select_argmin(cost, domain, cfg.tie_break, cfg.tie_tol), e_max_value)


def scm_center(image, cfg, initial_center=None):
    """Robust translational centering.

    With ``initial_center`` the search runs in the (4R+1)x(4R+1) window around it, clipped to
    the image; the returned center is in the coordinates of the full image.
    """
    image = as_image(image)
    origin = (0, 0)
    if initial_center is not None:
        row_start, row_stop, col_start, col_stop = crop_window(image.shape, initial_center, 2 * cfg.radius)
        if row_stop <= row_start or col_stop <= col_start:
            raise ConfigurationError(f"initial center {tuple(initial_center)} lies outside the {image.shape[0]}x{image.shape[1]} image")
        image = image[row_start:row_stop, col_start:col_stop]
        origin = (row_start, col_start)
    landscape = scm_landscape(image, cfg).translated(origin)
    return CenteringResult(landscape.argmin, landscape.cost_min, landscape.e_max, landscape, origin)


def is_local_minimum(landscape, p):
    """True when no 8-neighbor of ``p`` inside the domain has strictly smaller cost."""
    value = landscape.cost_at(p)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            q = (p[0] + dr, p[1] + dc)
            if (dr or dc) and q in landscape.domain and landscape.cost_at(q) < value:
                return False
    return True


def theorem2_condition(image, R, mu=None):
    """Check the sufficient condition under which the sCM minimizer is the grid GM.

    For every search-grid pixel x other than the GM mu, compares
    sum_s d(mu, s) I(s) against sum_{B_R(x)} d(x, s) I(s) + (R + 1) * (mass outside B_R(x)).
    Returns (holds, per-candidate boolean map over the search grid).
    """
    image = as_image(image)
    total = _check_mass(image)
    if mu is None:
        mu = geometric_median(image)
    lhs = gm_landscape(image).cost[mu]
    local = local_gm_landscape(image, R)
    rhs = local.cost + (R + 1) * (total - disk_mass_map(image, R))
    satisfied = lhs < rhs
    if mu in local.domain:
        satisfied[local.domain.to_local(mu)] = True
    holds = bool(satisfied.all()) and mu in local.domain
    return holds, satisfied
