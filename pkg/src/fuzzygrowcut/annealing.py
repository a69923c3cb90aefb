"""Automatic object-seed selection by simulated annealing.

Candidate seed sets are scored by ``alpha * sum_j d(seed_j, seed_n) -
beta * sum_j I_j`` (distances taken to the last seed), so minimization
drives the seeds toward bright pixels while pulling them together. The
move operator displaces one seed inside a temperature-scaled square;
acceptance is classic Metropolis under geometric cooling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .growcut import OBJECT, SeedSet, _as_intensities


@dataclass(frozen=True)
class SAConfig:
    """Annealing schedule and fitness weights.

    ``alpha`` and ``beta`` weight seed distance and intensity; values
    between 1 and 2 work well. ``move_scale`` is the displacement square
    half-width at the initial temperature; it shrinks proportionally to
    the temperature and never drops below one pixel.
    """

    n_seeds: int = 8
    alpha: float = 1.0
    beta: float = 1.5
    t0: float = 1.0
    cooling: float = 0.95
    iters_per_temp: int = 50
    t_min: float = 1e-3
    rng_seed: int = 0
    move_scale: float = 4.0
    pairwise_distance: bool = False

    def __post_init__(self):
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")
        if self.t0 <= 0 or self.t_min <= 0:
            raise ValueError("temperatures must be positive")
        if not (0.0 < self.cooling < 1.0):
            raise ValueError("cooling factor must lie in (0, 1)")
        if self.iters_per_temp < 1:
            raise ValueError("iters_per_temp must be >= 1")
        if self.move_scale < 1:
            raise ValueError("move_scale must be >= 1")

    def to_json(self) -> dict:
        return {
            "n_seeds": self.n_seeds, "alpha": self.alpha, "beta": self.beta,
            "t0": self.t0, "cooling": self.cooling,
            "iters_per_temp": self.iters_per_temp, "t_min": self.t_min,
            "rng_seed": self.rng_seed, "move_scale": self.move_scale,
            "pairwise_distance": self.pairwise_distance,
        }


@dataclass(frozen=True)
class SeedCandidate:
    coords: tuple[tuple[int, int], ...]
    fitness: float


def fitness(
    seeds,
    image,
    alpha: float = 1.0,
    beta: float = 1.5,
    pairwise: bool = False,
) -> float:
    """Score a seed set: alpha * (distance sum) - beta * (intensity sum).

    The distance sum is every seed's Euclidean distance to the last seed;
    ``pairwise=True`` switches to the sum over all unordered pairs.
    ``seeds`` is a sequence of (x, y) pairs; out-of-bounds coordinates
    raise ValueError.
    """
    c = _as_intensities(image)
    h, w = c.shape
    coords = [(int(x), int(y)) for x, y in seeds]
    if not coords:
        raise ValueError("need at least one seed")
    for x, y in coords:
        if not (0 <= x < w and 0 <= y < h):
            raise ValueError(f"seed ({x}, {y}) outside {w}x{h} image")
    if pairwise:
        dist = sum(
            math.hypot(coords[j][0] - coords[k][0], coords[j][1] - coords[k][1])
            for j in range(len(coords))
            for k in range(j + 1, len(coords))
        )
    else:
        xn, yn = coords[-1]
        dist = sum(math.hypot(x - xn, y - yn) for x, y in coords[:-1])
    inten = sum(c[y, x] for x, y in coords)
    return alpha * dist - beta * inten


def move_radius(temperature: float, t0: float, move_scale: float) -> int:
    """Displacement half-width at a given temperature: shrinks linearly
    with temperature, floored at one pixel."""
    return max(1, round(temperature / t0 * move_scale))


def _draw_offset(rng: np.random.Generator, radius: int) -> tuple[int, int]:
    dx = int(rng.integers(-radius, radius + 1))
    dy = int(rng.integers(-radius, radius + 1))
    return dx, dy


def sa_neighbor(
    seeds,
    temperature: float,
    bounds: tuple[int, int],
    rng: np.random.Generator,
    t0: float = 1.0,
    move_scale: float = 4.0,
):
    """Propose a neighboring candidate: one uniformly chosen seed moves by
    a uniform offset in a temperature-scaled square, clamped in-bounds.
    A move that would collide with another seed leaves the set unchanged.
    """
    w, h = bounds
    coords = [(int(x), int(y)) for x, y in seeds]
    i = int(rng.integers(0, len(coords)))
    radius = move_radius(temperature, t0, move_scale)
    dx, dy = _draw_offset(rng, radius)
    x = min(max(coords[i][0] + dx, 0), w - 1)
    y = min(max(coords[i][1] + dy, 0), h - 1)
    if (x, y) != coords[i] and (x, y) in set(coords):
        return list(coords)
    coords[i] = (x, y)
    return coords


def metropolis_accept(delta: float, temperature: float, rng: np.random.Generator) -> bool:
    """Accept improvements always; accept a worsening of ``delta`` with
    probability exp(-delta / temperature)."""
    if delta <= 0:
        return True
    return float(rng.random()) < math.exp(-delta / temperature)


def anneal(image, config: SAConfig, history: list | None = None) -> SeedSet:
    """Select object seeds on an image by simulated annealing.

    Runs the geometric schedule from ``t0`` down to ``t_min`` and returns
    the best candidate visited, as an object-labeled SeedSet. Fully
    deterministic given ``config.rng_seed``. When ``history`` is a list,
    the best-so-far fitness is appended after every proposal.
    """
    c = _as_intensities(image)
    h, w = c.shape
    n = config.n_seeds
    if n > w * h:
        raise ValueError(f"cannot place {n} distinct seeds on a {w}x{h} image")
    rng = np.random.default_rng(config.rng_seed)

    taken: set[tuple[int, int]] = set()
    coords: list[tuple[int, int]] = []
    while len(coords) < n:
        p = (int(rng.integers(0, w)), int(rng.integers(0, h)))
        if p not in taken:
            taken.add(p)
            coords.append(p)

    alpha, beta = config.alpha, config.beta
    pairwise = config.pairwise_distance
    inten = [float(c[y, x]) for x, y in coords]

    def dist_sum(pts) -> float:
        if pairwise:
            return sum(
                math.hypot(pts[j][0] - pts[k][0], pts[j][1] - pts[k][1])
                for j in range(len(pts)) for k in range(j + 1, len(pts))
            )
        xn, yn = pts[-1]
        return sum(math.hypot(x - xn, y - yn) for x, y in pts[:-1])

    cur_dist = dist_sum(coords)
    cur_fit = alpha * cur_dist - beta * sum(inten)
    best = SeedCandidate(tuple(coords), cur_fit)

    temperature = config.t0
    while temperature >= config.t_min:
        radius = move_radius(temperature, config.t0, config.move_scale)
        for _ in range(config.iters_per_temp):
            i = int(rng.integers(0, n))
            dx, dy = _draw_offset(rng, radius)
            x = min(max(coords[i][0] + dx, 0), w - 1)
            y = min(max(coords[i][1] + dy, 0), h - 1)
            new_pos = (x, y)
            if new_pos != coords[i] and new_pos in taken:
                if history is not None:
                    history.append(best.fitness)
                continue
            old_pos = coords[i]
            old_int = inten[i]
            new_int = float(c[y, x])
            # Incremental fitness delta: only seed i's terms change unless
            # the anchor (last seed) moved.
            if pairwise or i == n - 1:
                coords[i] = new_pos
                new_dist = dist_sum(coords)
                coords[i] = old_pos
                d_dist = new_dist - cur_dist
            else:
                xn, yn = coords[-1]
                d_dist = (math.hypot(x - xn, y - yn)
                          - math.hypot(old_pos[0] - xn, old_pos[1] - yn))
            delta = alpha * d_dist - beta * (new_int - old_int)
            if metropolis_accept(delta, temperature, rng):
                coords[i] = new_pos
                inten[i] = new_int
                taken.discard(old_pos)
                taken.add(new_pos)
                cur_dist += d_dist
                cur_fit += delta
                if cur_fit < best.fitness:
                    best = SeedCandidate(tuple(coords), cur_fit)
            if history is not None:
                history.append(best.fitness)
        temperature *= config.cooling

    return SeedSet.from_points(best.coords, label=OBJECT)
