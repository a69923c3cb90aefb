import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import fuzzygrowcut as fg
from fuzzygrowcut.pipeline import PipelineConfig, derive_fuzzy_params


def make_disk_phantom(r=24.0, size=128, fg_val=0.8, bg_val=0.2, sigma=0.0, seed=0):
    spec = fg.PhantomSpec(kind="disk", width=size, height=size,
                          cx=(size - 1) / 2.0, cy=(size - 1) / 2.0,
                          rx=r, ry=r, fg=fg_val, bg=bg_val,
                          noise_sigma=sigma, rng_seed=seed)
    image, truth = fg.synth_phantom(spec)
    return spec, image, truth


def ring_seeds(cx, cy, radius, n=8):
    """n points on a circle, rounded to the pixel grid."""
    pts = []
    for k in range(n):
        ang = 2.0 * math.pi * k / n
        pts.append((int(round(cx + radius * math.cos(ang))),
                    int(round(cy + radius * math.sin(ang)))))
    return pts


def displace_outside(seeds, spec, fraction, rng):
    """Fault injection: move a fraction of the seeds to just outside the
    lesion (1.1x to 1.5x its extent), keeping coordinates distinct."""
    coords = [(s.x, s.y) for s in seeds]
    n_move = max(1, round(fraction * len(coords)))
    ex, ey = spec.extent()
    taken = set(coords)
    for i in rng.choice(len(coords), n_move, replace=False):
        for _ in range(100):
            ang = rng.uniform(0.0, 2.0 * math.pi)
            factor = rng.uniform(1.1, 1.5)
            x = min(max(int(round(spec.cx + factor * ex * math.cos(ang))), 0),
                    spec.width - 1)
            y = min(max(int(round(spec.cy + factor * ey * math.sin(ang))), 0),
                    spec.height - 1)
            if (x, y) not in taken:
                break
        taken.discard(coords[i])
        taken.add((x, y))
        coords[i] = (x, y)
    return fg.SeedSet.from_points(coords)


def segment_with_policy(image, seeds):
    """fuzzy_run under the pipeline's half-width tuning policy."""
    params = derive_fuzzy_params(seeds, (image.height, image.width),
                                 PipelineConfig())
    return fg.fuzzy_run(image, seeds, params)


def run_phantom_experiment(n_runs=20, kinds=("disk", "ellipse"),
                           sigmas=(0.0, 0.05), fault_fraction=0.25):
    """The automatic segmentation experiment: phantoms, annealed seeds,
    fuzzy segmentation, plus a displaced-seeds fault arm. Returns a
    JSON-ready dict of per-run Dice scores keyed by combo."""
    out = {}
    for kind in kinds:
        for sigma in sigmas:
            plain, fault = [], []
            for i in range(n_runs):
                spec = fg.sample_phantom_spec(kind, 10_000 + i, noise_sigma=sigma)
                image, truth = fg.synth_phantom(spec)
                seeds = fg.anneal(image, fg.roi_sa_config(rng_seed=i))
                res = segment_with_policy(image, seeds)
                plain.append(fg.dice(res.mask, truth))
                rng = np.random.default_rng(777 + i)
                fseeds = displace_outside(seeds, spec, fault_fraction, rng)
                fres = segment_with_policy(image, fseeds)
                fault.append(fg.dice(fres.mask, truth))
            key = f"{kind}/sigma={sigma}"
            out[key] = {"dice": plain, "fault_dice": fault}
    return out


@pytest.fixture(scope="session")
def phantom_experiment():
    import time

    start = time.perf_counter()
    results = run_phantom_experiment()
    return results, time.perf_counter() - start


def build_phantom_batch(images_dir: Path, truth_dir: Path, n_per_class=50,
                        noise_sigma=0.03, base_seed=40_000):
    """Write a benign (ellipse) / malignant (star) phantom batch to disk."""
    images_dir.mkdir(parents=True, exist_ok=True)
    truth_dir.mkdir(parents=True, exist_ok=True)
    for i in range(n_per_class):
        for kind, label in (("ellipse", "benign"), ("star", "malignant")):
            spec = fg.sample_phantom_spec(kind, base_seed + 2 * i + (kind == "star"),
                                          noise_sigma=noise_sigma)
            image, truth = fg.synth_phantom(spec)
            stem = f"{label}_{i:03d}"
            fg.save_image(image, images_dir / f"{stem}.png")
            fg.save_mask(truth, truth_dir / f"{stem}_truth.png")


def pipeline_batch_config(images_dir: Path, truth_dir: Path, out_dir: Path,
                          rng_seed=4242):
    return PipelineConfig(
        inputs=(str(images_dir / "*.png"),),
        out_dir=str(out_dir),
        truth_dir=str(truth_dir),
        train=fg.TrainConfig(epochs=300, rng_seed=rng_seed),
        rng_seed=rng_seed,
    )


@pytest.fixture(scope="session")
def phantom_batch_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("batch")
    images, truth = root / "images", root / "truth"
    build_phantom_batch(images, truth)
    return images, truth


@pytest.fixture(scope="session")
def pipeline_batch_run(phantom_batch_dirs, tmp_path_factory):
    import time

    images, truth = phantom_batch_dirs
    out = tmp_path_factory.mktemp("run") / "out"
    config = pipeline_batch_config(images, truth, out)
    start = time.perf_counter()
    manifest = fg.run_pipeline(config)
    summary = fg.report(manifest)
    elapsed = time.perf_counter() - start
    return config, manifest, summary, out, elapsed
