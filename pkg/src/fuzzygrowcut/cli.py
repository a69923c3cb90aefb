"""Command-line interface: one subcommand per pipeline stage.

Stages consume the previous stage's files, so partial reruns are cheap:

    synth -> seeds -> segment -> features -> train/classify -> eval

`pipeline` runs everything end to end from a JSON config (every flag
overrides its JSON counterpart). Exit codes: 0 success, 1 per-image
failures occurred, 2 configuration error. Set NO_COLOR (or PLAIN=1) to
suppress ANSI styling.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import mlp
from .annealing import anneal
from .evaluation import kfold_cv, t_test, well_segmented
from .fuzzy import FuzzyParams, fuzzy_run
from .growcut import BACKGROUND, OBJECT, SeedSet, growcut_run
from .imaging import (
    contour_overlay,
    load_image,
    load_mask,
    load_phantom_specs,
    save_image,
    save_mask,
    save_overlay,
    synth_phantom,
)
from .pipeline import (
    PipelineConfig,
    RunManifest,
    derive_fuzzy_params,
    format_report,
    infer_label,
    load_feature_csv,
    report,
    resolve_inputs,
    roi_sa_config,
    run_pipeline,
)
from .zernike import descriptor, feature_names

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


def _color_enabled() -> bool:
    return not (os.environ.get("NO_COLOR") or os.environ.get("PLAIN"))


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))


def cmd_synth(args) -> int:
    specs = load_phantom_specs(args.spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, spec in enumerate(specs):
        if args.prefix:
            stem = args.prefix if len(specs) == 1 else f"{args.prefix}_{i:03d}"
        else:
            stem = f"phantom_{i:03d}"
        image, mask = synth_phantom(spec)
        save_image(image, out / f"{stem}.png")
        save_mask(mask, out / f"{stem}_truth.png")
        print(f"{out / (stem + '.png')}  ({spec.kind}, area {mask.area()})")
    return EXIT_OK


def cmd_seeds(args) -> int:
    image = load_image(args.image)
    config = roi_sa_config(
        rng_seed=args.rng_seed, n_seeds=args.n,
        alpha=args.alpha, beta=args.beta,
    )
    seeds = anneal(image, config)
    payload = [[int(s.x), int(s.y)] for s in seeds]
    if args.out:
        _write_json(Path(args.out), payload)
    print(json.dumps(payload))
    return EXIT_OK


def _read_seed_file(path: str) -> dict:
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, list):
        return {"object": doc}
    return doc


def cmd_segment(args) -> int:
    image = load_image(args.image)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed_doc = _read_seed_file(args.seeds)

    if args.method == "growcut":
        entries = [(x, y, OBJECT) for x, y in seed_doc.get("object", [])]
        entries += [(x, y, BACKGROUND) for x, y in seed_doc.get("background", [])]
        seeds = SeedSet.from_labeled(entries)
        result = growcut_run(image, seeds, args.max_iter)
    else:
        seeds = SeedSet.from_points(seed_doc.get("object", []))
        if args.alpha_x is not None and args.alpha_y is not None:
            params = FuzzyParams(args.alpha_x, args.alpha_y, args.max_iter)
        else:
            base = PipelineConfig(alpha_x=args.alpha_x, alpha_y=args.alpha_y,
                                  max_iter=args.max_iter)
            params = derive_fuzzy_params(seeds, (image.height, image.width), base)
        result = fuzzy_run(image, seeds, params)

    stem = Path(args.image).stem
    save_mask(result.mask, out / f"{stem}_mask.png")
    save_overlay(contour_overlay(image, result.mask), out / f"{stem}_overlay.png")
    info = {
        "input": str(args.image),
        "method": args.method,
        "iterations": result.iterations,
        "converged": result.converged,
        "mask_area": result.mask.area(),
        "well_segmented": well_segmented(result.mask, args.touch_radius),
        "model": result.model.to_json() if result.model is not None else None,
    }
    _write_json(out / f"{stem}_result.json", info)
    print(json.dumps(info))
    return EXIT_OK


def cmd_features(args) -> int:
    rows = []
    for pattern in args.masks:
        p = Path(pattern)
        paths = [p] if p.exists() else sorted(p.parent.glob(p.name))
        for mask_path in paths:
            mask = load_mask(mask_path)
            label = args.label if args.label is not None else infer_label(mask_path)
            vec = descriptor(mask)
            rows.append([str(mask_path), label] + [repr(float(v)) for v in vec])
    if not rows:
        print("warning: no masks matched", file=sys.stderr)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["input", "label"] + feature_names())
    writer.writerows(rows)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(buf.getvalue())
    print(f"{args.out}: {len(rows)} rows")
    return EXIT_OK


def _labeled_dataset(path: str):
    _, labels, x = load_feature_csv(path)
    names = {"benign": mlp.BENIGN, "malignant": mlp.MALIGNANT}
    keep = [i for i, lab in enumerate(labels) if lab in names]
    if not keep:
        raise ValueError(f"{path}: no benign/malignant labels present")
    return x[keep], np.array([names[labels[i]] for i in keep], dtype=np.int64)


def cmd_train(args) -> int:
    x, y = _labeled_dataset(args.features)
    config = mlp.TrainConfig(
        learning_rate=args.learning_rate, epochs=args.epochs,
        batch_size=args.batch_size, rng_seed=args.rng_seed,
    )
    model = mlp.train(x, y, config)
    mlp.save_model(model, args.out)
    acc = float(np.mean(mlp.predict(model, x) == y))
    print(f"{args.out}: training accuracy {acc:.4f} on {len(y)} samples")
    return EXIT_OK


def cmd_classify(args) -> int:
    model = mlp.load_model(args.model)
    paths, _, x = load_feature_csv(args.features)
    probs = mlp.forward_batch(model, x)
    rows = []
    for path, p in zip(paths, probs):
        label = "malignant" if p[mlp.MALIGNANT] >= p[mlp.BENIGN] else "benign"
        rows.append([path, label, repr(float(p[mlp.BENIGN])), repr(float(p[mlp.MALIGNANT]))])
        print(f"{path}\t{label}\tp_malignant={p[mlp.MALIGNANT]:.4f}")
    if args.out:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["input", "prediction", "p_benign", "p_malignant"])
        writer.writerows(rows)
        Path(args.out).write_text(buf.getvalue())
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.manifest:
        manifest = RunManifest.load(args.manifest)
        summary = report(manifest, Path(args.manifest).parent)
    else:
        x, y = _labeled_dataset(args.features)
        cv = kfold_cv(x, y, args.k, args.rng_seed)
        summary = {"cv_overall": cv.to_json(),
                   "inputs": len(y), "failures": 0,
                   "selection": {"selected": len(y), "total": len(y), "flags": []}}
    if args.out:
        _write_json(Path(args.out), summary)
    print(format_report(summary, color=_color_enabled()))
    return EXIT_OK


def cmd_ttest(args) -> int:
    a = [float(v) for v in args.a.split(",")]
    b = [float(v) for v in args.b.split(",")]
    t, p = t_test(a, b)
    print(json.dumps({"t": t, "p": p}))
    return EXIT_OK


def cmd_pipeline(args) -> int:
    if args.config:
        config = PipelineConfig.from_json(json.loads(Path(args.config).read_text()))
    else:
        config = PipelineConfig(inputs=tuple(args.inputs or ()))
    overrides = {}
    if args.inputs:
        overrides["inputs"] = tuple(args.inputs)
    for name in ("method", "out", "alpha_x", "alpha_y", "max_iter",
                 "touch_radius", "rng_seed", "workers", "truth_dir",
                 "seeds_file"):
        value = getattr(args, name)
        if value is not None:
            overrides["out_dir" if name == "out" else name] = value
    sa_overrides = {}
    if args.n_seeds is not None:
        sa_overrides["n_seeds"] = args.n_seeds
    if args.alpha is not None:
        sa_overrides["alpha"] = args.alpha
    if args.beta is not None:
        sa_overrides["beta"] = args.beta
    if sa_overrides or "rng_seed" in overrides:
        sa = replace(config.sa, **sa_overrides,
                     rng_seed=overrides.get("rng_seed", config.rng_seed))
        overrides["sa"] = sa
    config = replace(config, **overrides)

    if not resolve_inputs(config.inputs):
        print("warning: no inputs matched; writing an empty manifest",
              file=sys.stderr)
    manifest = run_pipeline(config)
    summary = report(manifest)
    _write_json(Path(config.out_dir) / "report.json", summary)
    print(format_report(summary, color=_color_enabled()))
    failures = sum(r["status"] != "ok" for r in manifest.records)
    return EXIT_PARTIAL if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzygrowcut",
        description="Mass segmentation on ROI patches with shape-based validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render phantom images + ground truth")
    p.add_argument("--spec", required=True, help="phantom spec JSON (one or a list)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--prefix", default=None, help="output file stem")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("seeds", help="automatic seed selection")
    p.add_argument("--image", required=True)
    p.add_argument("--n", type=int, default=16, help="number of seeds")
    p.add_argument("--alpha", type=float, default=1.0, help="distance weight")
    p.add_argument("--beta", type=float, default=1.5, help="intensity weight")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--out", default=None, help="optional seeds JSON path")
    p.set_defaults(fn=cmd_seeds)

    p = sub.add_parser("segment", help="segment one ROI from a seeds file")
    p.add_argument("--image", required=True)
    p.add_argument("--seeds", required=True, help="seeds JSON")
    p.add_argument("--method", choices=("fuzzy", "growcut"), default="fuzzy")
    p.add_argument("--alpha-x", type=float, default=None)
    p.add_argument("--alpha-y", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--touch-radius", type=int, default=1)
    p.add_argument("--out", default="out")
    p.set_defaults(fn=cmd_segment)

    p = sub.add_parser("features", help="Zernike descriptors for mask files")
    p.add_argument("--masks", nargs="+", required=True, help="mask paths or globs")
    p.add_argument("--label", default=None, help="fixed label for all rows")
    p.add_argument("--out", default="features.csv")
    p.set_defaults(fn=cmd_features)

    p = sub.add_parser("train", help="train the classifier on a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--out", default="model.json")
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--rng-seed", type=int, default=0)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("classify", help="score feature rows with a model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("eval", help="cross-validation / manifest report")
    p.add_argument("--features", default=None)
    p.add_argument("--manifest", default=None)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--out", default=None, help="optional report JSON path")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ttest", help="Welch t-test on two comma-separated samples")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(fn=cmd_ttest)

    p = sub.add_parser("pipeline", help="full batch run from a config")
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.add_argument("inputs", nargs="*", help="input images or globs")
    p.add_argument("--method", choices=("fuzzy", "growcut"), default=None)
    p.add_argument("--seeds-file", dest="seeds_file", default=None)
    p.add_argument("--truth-dir", dest="truth_dir", default=None)
    p.add_argument("--n-seeds", dest="n_seeds", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None, help="SA distance weight")
    p.add_argument("--beta", type=float, default=None, help="SA intensity weight")
    p.add_argument("--alpha-x", dest="alpha_x", type=float, default=None)
    p.add_argument("--alpha-y", dest="alpha_y", type=float, default=None)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    p.add_argument("--touch-radius", dest="touch_radius", type=int, default=None)
    p.add_argument("--rng-seed", dest="rng_seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(fn=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
