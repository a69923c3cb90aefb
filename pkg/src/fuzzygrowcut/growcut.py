"""Classical GrowCut: two-class seeded cellular-automaton segmentation.

Each pixel is a cell carrying a label and a strength in [0, 1]. At every
synchronous step each neighbor q "attacks" cell p with strength
``g(|C_p - C_q|) * theta_q``; the strongest attack wins if it strictly
exceeds the defender's strength. Seeds start at strength 1, everything
else at 0, and the fronts grow until no cell changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .imaging import BinaryMask

UNLABELED = 0
OBJECT = 1
BACKGROUND = 2

LABEL_NAMES = {UNLABELED: "unlabeled", OBJECT: "object", BACKGROUND: "background"}

# Neighbor offsets in row-major (dy, dx) order; ties between equally strong
# attackers resolve to the first offset in this order.
MOORE_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
VON_NEUMANN_OFFSETS = ((-1, 0), (0, -1), (0, 1), (1, 0))

NEIGHBORHOODS = {"moore": MOORE_OFFSETS, "von_neumann": VON_NEUMANN_OFFSETS}


def attenuation_g(diff: float, max_norm: float = 1.0) -> float:
    """Attenuation g(x) = 1 - x / max_norm, the decreasing ramp on [0, max_norm].

    Raises ValueError outside the domain: diff must satisfy
    0 <= diff <= max_norm and max_norm must be positive.
    """
    if max_norm <= 0:
        raise ValueError(f"max_norm must be > 0, got {max_norm}")
    if diff < 0:
        raise ValueError(f"diff must be >= 0, got {diff}")
    if diff > max_norm:
        raise ValueError(f"diff {diff} exceeds max_norm {max_norm}")
    return 1.0 - diff / max_norm


def neighbor_offsets(neighborhood: str) -> tuple[tuple[int, int], ...]:
    try:
        return NEIGHBORHOODS[neighborhood]
    except KeyError:
        raise ValueError(
            f"unknown neighborhood {neighborhood!r}; expected one of "
            f"{sorted(NEIGHBORHOODS)}"
        ) from None


def _as_intensities(image) -> np.ndarray:
    """Accept a GrayImage or a bare 2-D array of intensities in [0, 1]."""
    pixels = getattr(image, "pixels", image)
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D intensity grid, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("intensity grid is empty")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("intensities must lie in [0, 1]")
    return arr


@dataclass(frozen=True)
class Seed:
    x: int
    y: int
    label: int = OBJECT


@dataclass(frozen=True)
class SeedSet:
    """Labeled seed coordinates; nonempty, duplicate-free, non-negative."""

    seeds: tuple[Seed, ...]

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seed set must be nonempty")
        coords = set()
        for s in self.seeds:
            if s.label not in LABEL_NAMES or s.label == UNLABELED:
                raise ValueError(f"invalid seed label {s.label}")
            if s.x < 0 or s.y < 0:
                raise ValueError(f"seed coordinates must be non-negative: {s}")
            if (s.x, s.y) in coords:
                raise ValueError(f"duplicate seed coordinate ({s.x}, {s.y})")
            coords.add((s.x, s.y))

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]], label: int = OBJECT) -> "SeedSet":
        return cls(tuple(Seed(int(x), int(y), label) for x, y in points))

    @classmethod
    def from_labeled(cls, entries: Iterable[Sequence]) -> "SeedSet":
        """Build from (x, y, label) triples; label may be an int or a name."""
        by_name = {v: k for k, v in LABEL_NAMES.items()}
        seeds = []
        for x, y, lab in entries:
            if isinstance(lab, str):
                lab = by_name[lab]
            seeds.append(Seed(int(x), int(y), int(lab)))
        return cls(tuple(seeds))

    def __len__(self) -> int:
        return len(self.seeds)

    def __iter__(self):
        return iter(self.seeds)

    def coords(self) -> np.ndarray:
        """(n, 2) integer array of (x, y) pairs in seed order."""
        return np.array([(s.x, s.y) for s in self.seeds], dtype=np.int64)

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.seeds], dtype=np.int8)

    def object_only(self) -> bool:
        return all(s.label == OBJECT for s in self.seeds)

    def check_bounds(self, width: int, height: int) -> None:
        for s in self.seeds:
            if not (0 <= s.x < width and 0 <= s.y < height):
                raise ValueError(
                    f"seed ({s.x}, {s.y}) outside {width}x{height} image"
                )


@dataclass(frozen=True)
class CellGrid:
    """Automaton state: per-pixel label, strength, and the intensity grid."""

    labels: np.ndarray
    strengths: np.ndarray
    intensities: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int8)
        th = np.asarray(self.strengths, dtype=np.float64)
        c = _as_intensities(self.intensities)
        if not (lab.shape == th.shape == c.shape):
            raise ValueError(
                f"shape mismatch: labels {lab.shape}, strengths {th.shape}, "
                f"intensities {c.shape}"
            )
        if th.min() < 0.0 or th.max() > 1.0:
            raise ValueError("strengths must lie in [0, 1]")
        for name, arr in (("labels", lab), ("strengths", th), ("intensities", c)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def object_mask(self) -> np.ndarray:
        return self.labels == OBJECT


@dataclass(frozen=True)
class SegmentationResult:
    mask: BinaryMask
    iterations: int
    converged: bool
    model: object | None = None


def init_grid(image, seeds: SeedSet) -> CellGrid:
    """Classical initialization: seeds get strength 1 and their label."""
    c = _as_intensities(image)
    h, w = c.shape
    seeds.check_bounds(w, h)
    labels = np.full((h, w), UNLABELED, dtype=np.int8)
    theta = np.zeros((h, w), dtype=np.float64)
    for s in seeds:
        labels[s.y, s.x] = s.label
        theta[s.y, s.x] = 1.0
    return CellGrid(labels, theta, c)


def attenuation_shifts(c: np.ndarray, offsets) -> list[np.ndarray]:
    """Per-offset attenuation arrays g(|C_p - C_q|), zero where q is off-grid."""
    h, w = c.shape
    cp = np.pad(c, 1, constant_values=np.nan)
    out = []
    for dy, dx in offsets:
        cq = cp[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        g = 1.0 - np.abs(c - cq)
        g[np.isnan(cq)] = 0.0
        out.append(g)
    return out


def _shift(padded: np.ndarray, dy: int, dx: int, h: int, w: int) -> np.ndarray:
    return padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]


def evolve_once(
    labels: np.ndarray,
    theta: np.ndarray,
    theta_m: np.ndarray,
    g_shifts: list[np.ndarray],
    offsets,
    bg_zone: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """One synchronous evolution step over all cells.

    ``theta_m`` is the table used for both attack and defense (equal to
    ``theta`` in the classical automaton). When ``bg_zone`` is given,
    attackers inside it propagate the defender's own label instead of
    their own, and ties between equally strong attackers prefer attackers
    outside the zone; remaining ties go to the first neighbor in
    row-major order.
    """
    h, w = labels.shape
    pad_t = np.pad(theta_m, 1, constant_values=0.0)
    pad_l = np.pad(labels, 1, constant_values=UNLABELED)
    pad_b = None if bg_zone is None else np.pad(bg_zone, 1, constant_values=False)
    best = theta_m.copy()
    best_lab = labels.copy()
    if bg_zone is not None:
        # Sentinel True: a tie can never displace the defender itself.
        best_transfers = np.ones((h, w), dtype=bool)
    for k, (dy, dx) in enumerate(offsets):
        att = g_shifts[k] * _shift(pad_t, dy, dx, h, w)
        lq = _shift(pad_l, dy, dx, h, w)
        if bg_zone is None:
            lab_src = lq
            win = att > best
        else:
            bq = _shift(pad_b, dy, dx, h, w)
            lab_src = np.where(bq, labels, lq)
            transfers = ~bq
            win = (att > best) | ((att == best) & transfers & ~best_transfers)
            best_transfers = np.where(win, transfers, best_transfers)
        best = np.where(win, att, best)
        best_lab = np.where(win, lab_src, best_lab)
    conquered = best > theta_m
    new_theta = np.where(conquered, best, theta)
    new_labels = np.where(conquered, best_lab, labels).astype(np.int8)
    return new_labels, new_theta, int(conquered.sum())


def growcut_step(grid: CellGrid, neighborhood: str = "moore") -> tuple[CellGrid, int]:
    """One synchronous step of the classical automaton.

    All attacks are evaluated against the input grid; the strongest
    attacker conquers a cell iff its attack strictly exceeds the cell's
    strength. Returns the new grid and the number of changed cells.
    """
    offsets = neighbor_offsets(neighborhood)
    g_shifts = attenuation_shifts(grid.intensities, offsets)
    labels, theta, changed = evolve_once(
        grid.labels, grid.strengths, grid.strengths, g_shifts, offsets
    )
    return CellGrid(labels, theta, grid.intensities), changed


def default_max_iter(shape: tuple[int, int]) -> int:
    return 4 * max(shape)


def growcut_run(
    image,
    seeds: SeedSet,
    max_iter: int | None = None,
    neighborhood: str = "moore",
) -> SegmentationResult:
    """Run the classical automaton to a fixed point (or the iteration cap).

    Seeds must contain at least one object and one background entry.
    ``converged`` is True iff a zero-change step occurred within the cap.
    """
    present = set(seeds.labels().tolist())
    if OBJECT not in present or BACKGROUND not in present:
        raise ValueError("classical growcut needs both object and background seeds")
    grid = init_grid(image, seeds)
    if max_iter is None:
        max_iter = default_max_iter(grid.shape)
    offsets = neighbor_offsets(neighborhood)
    g_shifts = attenuation_shifts(grid.intensities, offsets)
    labels, theta = grid.labels, grid.strengths
    iterations = 0
    converged = False
    while iterations < max_iter:
        labels, theta, changed = evolve_once(
            labels, theta, theta, g_shifts, offsets
        )
        iterations += 1
        if changed == 0:
            converged = True
            break
    return SegmentationResult(
        mask=BinaryMask(labels == OBJECT),
        iterations=iterations,
        converged=converged,
    )
