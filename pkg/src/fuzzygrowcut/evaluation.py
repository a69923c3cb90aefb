"""Quality metrics: stratified k-fold CV, contour-based segmentation
screening, Dice overlap, and Welch's two-sample t-test.

The t-test p-value is computed from the regularized incomplete beta
function via a continued fraction, so no statistics package is needed
at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import mlp
from .imaging import BinaryMask, mask_contour


@dataclass(frozen=True)
class CVReport:
    """Per-fold accuracies with their mean and standard deviation."""

    fold_accuracies: tuple[float, ...]
    mean: float
    std: float

    @classmethod
    def from_folds(cls, accuracies: Sequence[float]) -> "CVReport":
        acc = np.asarray(accuracies, dtype=np.float64)
        return cls(tuple(float(a) for a in acc), float(acc.mean()), float(acc.std()))

    def format(self) -> str:
        return f"{100 * self.mean:.2f}%±{100 * self.std:.2f}%"

    def to_json(self) -> dict:
        return {
            "fold_accuracies": list(self.fold_accuracies),
            "mean": self.mean,
            "std": self.std,
        }


@dataclass(frozen=True)
class SelectionReport:
    """Which masks passed the well-segmented screen."""

    flags: tuple[bool, ...]

    @property
    def selected(self) -> int:
        return sum(self.flags)

    @property
    def total(self) -> int:
        return len(self.flags)

    def format(self) -> str:
        return f"{self.selected}/{self.total}"

    def to_json(self) -> dict:
        return {"selected": self.selected, "total": self.total,
                "flags": list(self.flags)}


def stratified_folds(y: np.ndarray, k: int, rng_seed: int = 0) -> list[np.ndarray]:
    """Deterministic stratified fold assignment.

    Each class is shuffled and dealt round-robin; the folds receiving a
    class's remainder rotate across classes so fold sizes differ by at
    most one overall while class ratios stay within one sample.
    """
    y = np.asarray(y)
    rng = np.random.default_rng(rng_seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if len(idx) < k:
            raise ValueError(
                f"class {cls!r} has {len(idx)} samples; need at least k={k}"
            )
        idx = idx[rng.permutation(len(idx))]
        for j, sample in enumerate(idx):
            folds[(j + offset) % k].append(int(sample))
        offset += len(idx) % k
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


TrainFn = Callable[[np.ndarray, np.ndarray], Callable[[np.ndarray], np.ndarray]]


def _default_train_fn(train_config: mlp.TrainConfig | None, rng_seed: int) -> TrainFn:
    base = train_config or mlp.TrainConfig()

    def fit(x: np.ndarray, y: np.ndarray):
        cfg = mlp.TrainConfig(
            learning_rate=base.learning_rate,
            epochs=base.epochs,
            batch_size=base.batch_size,
            rng_seed=rng_seed,
        )
        model = mlp.train(x, y, cfg)
        return lambda xt: mlp.predict(model, xt)

    return fit


def kfold_cv(
    x: np.ndarray,
    y: np.ndarray,
    k: int = 10,
    rng_seed: int = 0,
    train_config: mlp.TrainConfig | None = None,
    train_fn: TrainFn | None = None,
) -> CVReport:
    """Stratified k-fold cross-validation accuracy.

    ``train_fn(x_train, y_train)`` must return a predictor; the default
    trains the package MLP. Deterministic given ``rng_seed``, which drives
    both the fold assignment and the per-fold model initialization.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(x) != len(y):
        raise ValueError("features and labels must be aligned")
    folds = stratified_folds(y, k, rng_seed)
    fit = train_fn or _default_train_fn(train_config, rng_seed)
    accuracies = []
    for held_out in folds:
        train_idx = np.setdiff1d(np.arange(len(y)), held_out)
        predictor = fit(x[train_idx], y[train_idx])
        pred = np.asarray(predictor(x[held_out]))
        accuracies.append(float(np.mean(pred == y[held_out])))
    return CVReport.from_folds(accuracies)


def well_segmented(mask: BinaryMask, touch_radius: int = 1) -> bool:
    """Screen a segmentation by its contour: True iff more than half of
    the mask's 8-connected contour stays off the image border.

    A contour pixel "touches" when it lies within ``touch_radius`` pixels
    of the border. An empty mask is degenerate and returns False.
    """
    values = mask.values if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool)
    if not values.any():
        return False
    contour = mask_contour(values)
    h, w = values.shape
    ys, xs = np.nonzero(contour)
    touching = ((xs < touch_radius) | (xs >= w - touch_radius)
                | (ys < touch_radius) | (ys >= h - touch_radius))
    return float(np.mean(~touching)) > 0.5


def dice(a: BinaryMask | np.ndarray, b: BinaryMask | np.ndarray) -> float:
    """Overlap 2|A∩B| / (|A| + |B|); two empty masks count as identical."""
    va = a.values if isinstance(a, BinaryMask) else np.asarray(a, dtype=bool)
    vb = b.values if isinstance(b, BinaryMask) else np.asarray(b, dtype=bool)
    if va.shape != vb.shape:
        raise ValueError(f"mask shapes differ: {va.shape} vs {vb.shape}")
    total = int(va.sum()) + int(vb.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(va, vb).sum()) / total


def _betacf(a: float, b: float, x: float, tol: float = 1e-12, max_iter: int = 500) -> float:
    """Continued fraction for the incomplete beta function (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) to ~1e-12."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> tuple[float, float]:
    """Welch's two-sample two-tailed t-test: returns (t, p).

    Identical samples give (0.0, 1.0) exactly. Each sample needs at least
    two values; zero variance in both samples with different means is
    rejected as undefined.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each sample needs at least 2 values")
    if len(a) == len(b) and np.array_equal(a, b):
        return 0.0, 1.0
    va = a.var(ddof=1)
    vb = b.var(ddof=1)
    sa, sb = va / len(a), vb / len(b)
    if sa + sb == 0.0:
        if a.mean() == b.mean():
            return 0.0, 1.0
        raise ValueError("zero variance in both samples with differing means")
    t = (a.mean() - b.mean()) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa ** 2 / (len(a) - 1) + sb ** 2 / (len(b) - 1))
    p = betainc_reg(df / 2.0, 0.5, df / (df + t * t))
    return float(t), float(min(max(p, 0.0), 1.0))
