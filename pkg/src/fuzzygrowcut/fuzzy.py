"""Fuzzy GrowCut: object-seeds-only segmentation with a Gaussian gate.

Instead of requiring background seeds, a separable Gaussian membership
model is fitted to the object seeds (center of mass + per-axis spread).
Only the cell nearest the center of mass starts with strength 1; during
evolution, cells whose background membership exceeds their object
membership act as an implicit, full-strength background frontier that
confines the growing region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .growcut import (
    OBJECT,
    UNLABELED,
    CellGrid,
    SeedSet,
    SegmentationResult,
    _as_intensities,
    attenuation_shifts,
    default_max_iter,
    evolve_once,
    neighbor_offsets,
)
from .imaging import BinaryMask

S_MIN = 1.0  # spread floor (pixels) for seeds degenerate along an axis


@dataclass(frozen=True)
class GaussianModel:
    """Separable Gaussian foreground membership model.

    ``floored`` names axes whose seed spread was degenerate (zero) and was
    replaced by the ``S_MIN`` floor.
    """

    x_m: float
    y_m: float
    s_x: float
    s_y: float
    alpha_x: float = 2.0
    alpha_y: float = 2.0
    floored: tuple[str, ...] = ()

    def __post_init__(self):
        if self.s_x <= 0 or self.s_y <= 0:
            raise ValueError("seed spreads s_x, s_y must be positive")
        if self.alpha_x <= 0 or self.alpha_y <= 0:
            raise ValueError("tuning weights alpha_x, alpha_y must be positive")

    def to_json(self) -> dict:
        return {
            "x_m": self.x_m, "y_m": self.y_m,
            "s_x": self.s_x, "s_y": self.s_y,
            "alpha_x": self.alpha_x, "alpha_y": self.alpha_y,
            "floored": list(self.floored),
        }


@dataclass(frozen=True)
class FuzzyParams:
    """Run parameters: membership tuning, iteration cap, neighborhood."""

    alpha_x: float = 2.0
    alpha_y: float = 2.0
    max_iter: int | None = None
    neighborhood: str = "moore"

    def __post_init__(self):
        if self.alpha_x <= 0 or self.alpha_y <= 0:
            raise ValueError("alpha_x and alpha_y must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        neighbor_offsets(self.neighborhood)


def _object_coords(seeds: SeedSet) -> np.ndarray:
    if not seeds.object_only():
        raise ValueError(
            "fuzzy growcut takes object seeds only; background seeds are "
            "replaced by the Gaussian model"
        )
    return seeds.coords().astype(np.float64)


def center_of_mass(seeds: SeedSet) -> tuple[float, float]:
    """Unweighted mean coordinate of the (object-only) seeds."""
    coords = _object_coords(seeds)
    return float(coords[:, 0].mean()), float(coords[:, 1].mean())


def fit_gaussian(seeds: SeedSet, alpha_x: float = 2.0, alpha_y: float = 2.0) -> GaussianModel:
    """Fit the membership model: center of mass + population spread per axis.

    An axis where all seeds share one coordinate gets the ``S_MIN`` floor
    instead of a zero spread, reported through ``model.floored``.
    """
    coords = _object_coords(seeds)
    x_m, y_m = center_of_mass(seeds)
    s_x = float(coords[:, 0].std())
    s_y = float(coords[:, 1].std())
    floored = []
    if s_x == 0.0:
        s_x, floored = S_MIN, floored + ["x"]
    if s_y == 0.0:
        s_y, floored = S_MIN, floored + ["y"]
    return GaussianModel(x_m, y_m, s_x, s_y, alpha_x, alpha_y, tuple(floored))


def membership(model: GaussianModel, x, y):
    """Object/background membership degrees at (x, y); accepts arrays.

    Returns (mu_obj, mu_bkg) with mu_bkg = 1 - mu_obj exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    mu_obj = np.exp(-((x - model.x_m) ** 2) / (2.0 * model.alpha_x * model.s_x ** 2)) \
        * np.exp(-((y - model.y_m) ** 2) / (2.0 * model.alpha_y * model.s_y ** 2))
    mu_bkg = 1.0 - mu_obj
    if mu_obj.ndim == 0:
        return float(mu_obj), float(mu_bkg)
    return mu_obj, mu_bkg


def membership_grid(model: GaussianModel, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Membership degrees evaluated at every pixel center of a width x height grid."""
    yy, xx = np.mgrid[0:height, 0:width]
    return membership(model, xx, yy)


def model_strength(theta: float, mu_obj: float, mu_bkg: float) -> float:
    """Effective cell strength under the model: 1 inside the background
    zone (mu_bkg > mu_obj), the cell's own strength otherwise."""
    if not math.isclose(mu_obj + mu_bkg, 1.0, rel_tol=0.0, abs_tol=1e-9):
        raise ValueError("memberships must sum to 1")
    return 1.0 if mu_bkg > mu_obj else theta


def alpha_for_halfwidth(halfwidth: float, spread: float) -> float:
    """Tuning weight that puts the mu = 1/2 contour ``halfwidth`` pixels
    from the center along an axis with seed spread ``spread``."""
    if halfwidth <= 0 or spread <= 0:
        raise ValueError("halfwidth and spread must be positive")
    return halfwidth ** 2 / (2.0 * math.log(2.0) * spread ** 2)


def _brightest_seed(seeds: SeedSet, c: np.ndarray):
    best = max(seeds, key=lambda s: (c[s.y, s.x], -s.y, -s.x))
    return best.x, best.y


def _snap_axis(value: float, toward: int) -> int:
    """Nearest integer; an exact .5 tie rounds toward ``toward``."""
    lo = math.floor(value)
    if value - lo == 0.5:
        hi = lo + 1
        if abs(toward - hi) == abs(toward - lo):
            return lo
        return hi if abs(toward - hi) < abs(toward - lo) else lo
    return int(round(value))


def center_cell(image, seeds: SeedSet) -> tuple[int, int]:
    """Pixel nearest the seeds' center of mass; half-way ties round toward
    the brightest seed (then to the lower coordinate)."""
    c = _as_intensities(image)
    seeds.check_bounds(c.shape[1], c.shape[0])
    x_m, y_m = center_of_mass(seeds)
    bx, by = _brightest_seed(seeds, c)
    return _snap_axis(x_m, bx), _snap_axis(y_m, by)


def init_fuzzy(image, seeds: SeedSet) -> CellGrid:
    """All cells unlabeled at zero strength except the center-of-mass cell,
    which starts as the sole object seed at strength 1."""
    c = _as_intensities(image)
    h, w = c.shape
    cx, cy = center_cell(image, seeds)
    labels = np.full((h, w), UNLABELED, dtype=np.int8)
    theta = np.zeros((h, w), dtype=np.float64)
    labels[cy, cx] = OBJECT
    theta[cy, cx] = 1.0
    return CellGrid(labels, theta, c)


def fuzzy_step(grid: CellGrid, model: GaussianModel, neighborhood: str = "moore") -> tuple[CellGrid, int]:
    """One synchronous step of the fuzzy automaton.

    Attack and defense use the model strength (1 in the background zone,
    the cell's own strength elsewhere). A conquering attacker from the
    background zone re-asserts the defender's current label; one from the
    object zone transfers its own. Equal attacks prefer the object-zone
    attacker, then the first neighbor in row-major order.
    """
    offsets = neighbor_offsets(neighborhood)
    g_shifts = attenuation_shifts(grid.intensities, offsets)
    h, w = grid.shape
    mu_obj, mu_bkg = membership_grid(model, w, h)
    bg_zone = mu_bkg > mu_obj
    theta_m = np.where(bg_zone, 1.0, grid.strengths)
    labels, theta, changed = evolve_once(
        grid.labels, grid.strengths, theta_m, g_shifts, offsets, bg_zone=bg_zone
    )
    return CellGrid(labels, theta, grid.intensities), changed


def fuzzy_run(
    image,
    seeds: SeedSet | list,
    params: FuzzyParams | None = None,
) -> SegmentationResult:
    """Segment with object-only seeds: fit the Gaussian model, initialize
    from the center of mass, and evolve to a fixed point (or the cap).

    ``seeds`` may be a SeedSet or a plain list of (x, y) pairs.
    """
    if not isinstance(seeds, SeedSet):
        seeds = SeedSet.from_points(seeds)
    params = params or FuzzyParams()
    c = _as_intensities(image)
    h, w = c.shape
    seeds.check_bounds(w, h)
    model = fit_gaussian(seeds, params.alpha_x, params.alpha_y)
    grid = init_fuzzy(c, seeds)
    max_iter = params.max_iter if params.max_iter is not None else default_max_iter((h, w))

    offsets = neighbor_offsets(params.neighborhood)
    g_shifts = attenuation_shifts(c, offsets)
    mu_obj, mu_bkg = membership_grid(model, w, h)
    bg_zone = mu_bkg > mu_obj
    labels, theta = grid.labels, grid.strengths
    iterations = 0
    converged = False
    while iterations < max_iter:
        theta_m = np.where(bg_zone, 1.0, theta)
        labels, theta, changed = evolve_once(
            labels, theta, theta_m, g_shifts, offsets, bg_zone=bg_zone
        )
        iterations += 1
        if changed == 0:
            converged = True
            break
    return SegmentationResult(
        mask=BinaryMask(labels == OBJECT),
        iterations=iterations,
        converged=converged,
        model=model,
    )
