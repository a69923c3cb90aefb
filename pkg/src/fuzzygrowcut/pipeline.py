"""End-to-end batch pipeline: ROI images -> seeds -> segmentation ->
shape features -> classification -> report.

Every stage writes its artifacts under the output directory and the run
manifest records one entry per input, so partial reruns and audits are
cheap. A single ``rng_seed`` fans out deterministically to seed
selection, model initialization, and fold shuffling.
"""

from __future__ import annotations

import csv
import io
import json
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import mlp
from .annealing import SAConfig, anneal
from .evaluation import CVReport, SelectionReport, dice, kfold_cv, well_segmented
from .fuzzy import FuzzyParams, alpha_for_halfwidth, fit_gaussian, fuzzy_run
from .growcut import BACKGROUND, OBJECT, SeedSet, growcut_run
from .imaging import (
    GrayImage,
    contour_overlay,
    load_image,
    load_mask,
    save_mask,
    save_overlay,
)
from .mlp import TrainConfig
from .zernike import descriptor, feature_names

MANIFEST_FORMAT = "fuzzygrowcut-manifest/1"

# Seed-selection settings calibrated for 128x128 ROI patches whose mass
# occupies the central region: many small moves and slow cooling so seeds
# collect on the bright lesion before the distance term packs them.
ROI_SA_DEFAULTS = dict(
    n_seeds=16, alpha=1.0, beta=1.5, t0=1.0, cooling=0.99,
    iters_per_temp=100, t_min=1e-3, move_scale=1.0,
)


def roi_sa_config(rng_seed: int = 0, **overrides) -> SAConfig:
    """SAConfig with the ROI-patch calibration applied."""
    params = dict(ROI_SA_DEFAULTS)
    params.update(overrides)
    return SAConfig(rng_seed=rng_seed, **params)


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved configuration for a batch run.

    ``alpha_x``/``alpha_y`` override the membership tuning directly; when
    left unset they are derived per image so the mu = 1/2 contour sits
    ``halfwidth_frac * min(width, height)`` pixels from the seed center
    of mass, the empirical scale for ROI patches framing their mass.
    """

    inputs: tuple[str, ...] = ()
    out_dir: str = "out"
    method: str = "fuzzy"
    seeds_file: str | None = None
    truth_dir: str | None = None
    sa: SAConfig = field(default_factory=lambda: roi_sa_config())
    alpha_x: float | None = None
    alpha_y: float | None = None
    halfwidth_frac: float = 0.5
    max_iter: int | None = None
    neighborhood: str = "moore"
    descriptor_source: str = "mask"
    train: TrainConfig = field(default_factory=TrainConfig)
    k_folds: int = 10
    touch_radius: int = 1
    rng_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.method not in ("fuzzy", "growcut"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "growcut" and not self.seeds_file:
            raise ValueError("growcut needs a labeled seeds file")
        if self.descriptor_source not in ("mask", "grayscale"):
            raise ValueError(f"unknown descriptor source {self.descriptor_source!r}")
        if not (0.0 < self.halfwidth_frac <= 1.0):
            raise ValueError("halfwidth_frac must lie in (0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.k_folds < 2:
            raise ValueError("k_folds must be >= 2")

    def to_json(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "out_dir": self.out_dir,
            "method": self.method,
            "seeds_file": self.seeds_file,
            "truth_dir": self.truth_dir,
            "sa": self.sa.to_json(),
            "alpha_x": self.alpha_x,
            "alpha_y": self.alpha_y,
            "halfwidth_frac": self.halfwidth_frac,
            "max_iter": self.max_iter,
            "neighborhood": self.neighborhood,
            "descriptor_source": self.descriptor_source,
            "train": self.train.to_json(),
            "k_folds": self.k_folds,
            "touch_radius": self.touch_radius,
            "rng_seed": self.rng_seed,
            "workers": self.workers,
        }

    @classmethod
    def from_json(cls, data: dict) -> "PipelineConfig":
        data = dict(data)
        if "inputs" in data:
            data["inputs"] = tuple(data["inputs"])
        if isinstance(data.get("sa"), dict):
            data["sa"] = SAConfig(**data["sa"])
        if isinstance(data.get("train"), dict):
            data["train"] = TrainConfig(**data["train"])
        return cls(**data)


@dataclass
class RunManifest:
    config: dict
    records: list[dict]
    features_csv: str | None = None
    version: str = MANIFEST_FORMAT

    def to_json(self) -> dict:
        return {
            "format": self.version,
            "config": self.config,
            "records": self.records,
            "features_csv": self.features_csv,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        doc = json.loads(Path(path).read_text())
        return cls(
            config=doc["config"],
            records=doc["records"],
            features_csv=doc.get("features_csv"),
            version=doc.get("format", MANIFEST_FORMAT),
        )


def infer_label(path: str | Path) -> str:
    """benign/malignant inferred from the file name, else empty."""
    stem = Path(path).stem.lower()
    if "malignant" in stem:
        return "malignant"
    if "benign" in stem:
        return "benign"
    return ""


def per_image_seed(rng_seed: int, index: int) -> int:
    """Stable child seed for the index-th image of a run."""
    return int(np.random.SeedSequence([rng_seed, index]).generate_state(1)[0])


def resolve_inputs(patterns) -> list[Path]:
    """Expand globs/paths into a sorted, de-duplicated list of files."""
    out: list[Path] = []
    for pattern in patterns:
        p = Path(pattern)
        if p.exists():
            out.append(p)
            continue
        matches = sorted(p.parent.glob(p.name)) if p.parent else []
        out.extend(m for m in matches if m.is_file())
    unique = sorted(set(out), key=str)
    return unique


def derive_fuzzy_params(
    seeds: SeedSet,
    image_shape: tuple[int, int],
    config: PipelineConfig,
) -> FuzzyParams:
    """Fuzzy parameters for one image under the config's tuning policy."""
    if config.alpha_x is not None and config.alpha_y is not None:
        return FuzzyParams(config.alpha_x, config.alpha_y,
                           config.max_iter, config.neighborhood)
    h, w = image_shape
    target = config.halfwidth_frac * min(w, h)
    probe = fit_gaussian(seeds, 1.0, 1.0)
    alpha_x = config.alpha_x if config.alpha_x is not None \
        else alpha_for_halfwidth(target, probe.s_x)
    alpha_y = config.alpha_y if config.alpha_y is not None \
        else alpha_for_halfwidth(target, probe.s_y)
    return FuzzyParams(alpha_x, alpha_y, config.max_iter, config.neighborhood)


def _load_manual_seeds(path: str) -> dict:
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, list):  # bare list of [x, y] pairs = object seeds
        doc = {"object": doc}
    return doc


def segment_one(
    image: GrayImage,
    config: PipelineConfig,
    rng_seed: int,
    manual_seeds: dict | None = None,
):
    """Segment a single ROI; returns (result, seed_set)."""
    if config.method == "growcut":
        entries = [(x, y, OBJECT) for x, y in manual_seeds.get("object", [])]
        entries += [(x, y, BACKGROUND) for x, y in manual_seeds.get("background", [])]
        seeds = SeedSet.from_labeled(entries)
        result = growcut_run(image, seeds, config.max_iter, config.neighborhood)
        return result, seeds
    if manual_seeds is not None:
        seeds = SeedSet.from_points(manual_seeds.get("object", []))
    else:
        seeds = anneal(image, replace(config.sa, rng_seed=rng_seed))
    params = derive_fuzzy_params(seeds, (image.height, image.width), config)
    result = fuzzy_run(image, seeds, params)
    return result, seeds


def _feature_row(path: Path, label: str, vector: np.ndarray) -> list[str]:
    return [str(path), label] + [repr(float(v)) for v in vector]


def _process_image(index: int, path: Path, config: PipelineConfig,
                   manual_seeds: dict | None, out_dir: Path):
    record: dict = {"input": str(path)}
    try:
        image = load_image(path)
        child_seed = per_image_seed(config.rng_seed, index)
        result, seeds = segment_one(image, config, child_seed, manual_seeds)
        mask = result.mask

        stem = path.stem
        mask_name = f"{stem}_mask.png"
        overlay_name = f"{stem}_overlay.png"
        save_mask(mask, out_dir / mask_name)
        save_overlay(contour_overlay(image, mask), out_dir / overlay_name)

        label = infer_label(path)
        vector = None
        if mask.area() > 0:
            source = image.pixels if config.descriptor_source == "grayscale" else None
            vector = descriptor(mask, source)

        record.update({
            "status": "ok",
            "label": label,
            "seeds": [[int(s.x), int(s.y)] for s in seeds],
            "mask": mask_name,
            "overlay": overlay_name,
            "iterations": result.iterations,
            "converged": result.converged,
            "well_segmented": well_segmented(mask, config.touch_radius),
            "model": result.model.to_json() if result.model is not None else None,
        })
        if config.truth_dir:
            truth_path = Path(config.truth_dir) / f"{stem}_truth.png"
            if truth_path.exists():
                record["dice"] = dice(mask, load_mask(truth_path))
        return record, vector
    except Exception as exc:  # per-image failures must not abort the batch
        record.update({
            "status": "error",
            "error": f"{type(exc).__name__}: {exc}",
            "trace": traceback.format_exc(limit=3),
        })
        return record, None


def run_pipeline(config: PipelineConfig) -> RunManifest:
    """Run the full batch; artifacts and manifest land in ``config.out_dir``.

    Per-image failures are recorded in the manifest without aborting the
    batch. Bit-identical outputs are produced for identical configs.
    """
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs = resolve_inputs(config.inputs)
    manual_seeds = _load_manual_seeds(config.seeds_file) if config.seeds_file else None

    tasks = list(enumerate(inputs))
    if config.workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(
                lambda t: _process_image(t[0], t[1], config, manual_seeds, out_dir),
                tasks,
            ))
    else:
        outcomes = [_process_image(i, p, config, manual_seeds, out_dir)
                    for i, p in tasks]

    records = [rec for rec, _ in outcomes]
    rows = [
        _feature_row(Path(rec["input"]), rec.get("label", ""), vec)
        for rec, vec in outcomes
        if rec["status"] == "ok" and vec is not None
    ]

    features_csv = None
    if rows:
        features_csv = "features.csv"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["input", "label"] + feature_names())
        writer.writerows(rows)
        (out_dir / features_csv).write_text(buf.getvalue())

    manifest = RunManifest(
        config=config.to_json(),
        records=sorted(records, key=lambda r: r["input"]),
        features_csv=features_csv,
    )
    manifest.save(out_dir / "manifest.json")
    return manifest


def load_feature_csv(path: str | Path):
    """Read a features CSV -> (paths, labels, X). Unlabeled rows keep ''."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = ["input", "label"] + feature_names()
        if header != expected:
            raise ValueError(f"{path}: unexpected feature CSV header")
        paths, labels, rows = [], [], []
        for row in reader:
            paths.append(row[0])
            labels.append(row[1])
            rows.append([float(v) for v in row[2:]])
    x = np.array(rows, dtype=np.float64) if rows else np.empty((0, 64))
    return paths, labels, x


def _labeled_xy(labels: list[str], x: np.ndarray):
    name_to_class = {"benign": mlp.BENIGN, "malignant": mlp.MALIGNANT}
    keep = [i for i, lab in enumerate(labels) if lab in name_to_class]
    y = np.array([name_to_class[labels[i]] for i in keep], dtype=np.int64)
    return x[keep], y, keep


def _cv_or_reason(x: np.ndarray, y: np.ndarray, config: PipelineConfig):
    """CVReport, or the string reason it cannot be computed."""
    if len(y) == 0:
        return "no labeled samples"
    counts = np.bincount(y, minlength=2)
    if counts.min() < config.k_folds:
        return (f"too few samples per class for {config.k_folds}-fold CV "
                f"(benign={counts[mlp.BENIGN]}, malignant={counts[mlp.MALIGNANT]})")
    return kfold_cv(x, y, config.k_folds, config.rng_seed, config.train)


def report(manifest: RunManifest, out_dir: str | Path | None = None) -> dict:
    """Summarize a run: selection ratio, CV accuracy (overall and on the
    well-segmented subset), and Dice statistics when ground truth was
    available. Returns a JSON-ready dict; see ``format_report`` for text.
    """
    config = PipelineConfig.from_json(manifest.config)
    ok = [r for r in manifest.records if r["status"] == "ok"]
    flags = tuple(bool(r.get("well_segmented")) for r in ok)
    selection = SelectionReport(flags)

    summary: dict = {
        "inputs": len(manifest.records),
        "failures": sum(r["status"] != "ok" for r in manifest.records),
        "selection": selection.to_json(),
    }

    dices = [r["dice"] for r in ok if "dice" in r]
    if dices:
        arr = np.asarray(dices, dtype=np.float64)
        summary["dice"] = {
            "mean": float(arr.mean()), "std": float(arr.std()),
            "min": float(arr.min()), "count": len(dices),
        }

    base = Path(out_dir) if out_dir is not None else Path(config.out_dir)
    if manifest.features_csv and (base / manifest.features_csv).exists():
        paths, labels, x = load_feature_csv(base / manifest.features_csv)
        by_path = {r["input"]: r for r in ok}
        xl, yl, keep = _labeled_xy(labels, x)
        overall = _cv_or_reason(xl, yl, config)
        summary["cv_overall"] = overall.to_json() if isinstance(overall, CVReport) \
            else {"unavailable": overall}

        sel_idx = [i for i in keep
                   if by_path.get(paths[i], {}).get("well_segmented")]
        labels_sel = [labels[i] for i in sel_idx]
        xs, ys, _ = _labeled_xy(labels_sel, x[sel_idx])
        selected_cv = _cv_or_reason(xs, ys, config)
        summary["cv_selected"] = selected_cv.to_json() if isinstance(selected_cv, CVReport) \
            else {"unavailable": selected_cv}
    return summary


def format_report(summary: dict, color: bool = False) -> str:
    """Aligned-text rendering of a report summary ('mean±std%' style)."""
    def cv_cell(entry) -> str:
        if entry is None:
            return "-"
        if "unavailable" in entry:
            return "-"
        return f"{100 * entry['mean']:.2f}±{100 * entry['std']:.2f}%"

    bold = "\033[1m" if color else ""
    reset = "\033[0m" if color else ""
    sel = summary["selection"]
    sel_cell = "{}/{}".format(sel["selected"], sel["total"])
    lines = [
        f"{bold}{'Metric':<28}{'Value':>18}{reset}",
        f"{'inputs':<28}{summary['inputs']:>18}",
        f"{'failures':<28}{summary['failures']:>18}",
        f"{'selection (well-segmented)':<28}{sel_cell:>18}",
    ]
    if "cv_overall" in summary:
        lines.append(f"{'classification rate':<28}{cv_cell(summary['cv_overall']):>18}")
        if "cv_selected" in summary:
            lines.append(f"{'rate on selected':<28}{cv_cell(summary['cv_selected']):>18}")
    if "dice" in summary:
        d = summary["dice"]
        dice_cell = "{:.4f}±{:.4f}".format(d["mean"], d["std"])
        lines.append(f"{'dice mean±std':<28}{dice_cell:>18}")
        lines.append(f"{'dice min':<28}{d['min']:>18.4f}")
    return "\n".join(lines)
