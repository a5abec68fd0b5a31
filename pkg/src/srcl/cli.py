"""Command-line front end: grade / evaluate / synth / bow.

Exit codes: 0 on success, 1 for validation or parse problems (message on
stderr), 2 when a solver fails on a sample (the sample is named).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .core import Dictionary, FeatureVector, Hyperparameters
from .data import (
    generate_synthetic,
    load_gray_image,
    load_manifest,
    load_samples,
    save_samples,
)
from .distances import (
    chi_square_distances,
    custom_distances,
    euclidean_distances,
    gaussian_locality,
)
from .errors import GradingError
from .features import bow_histogram, build_codebook, extract_patches
from .grading import (
    VARIANT_NAMES,
    MethodKind,
    MethodVariant,
    default_hyperparameters,
    grade_bin_partition,
    solve_variant,
)
from .metrics import (
    integral_agreement,
    mean_absolute_error,
    pearson_correlation,
    tolerance_ratio,
)

_WORKER: dict = {}


def _init_worker(payload: dict) -> None:
    _WORKER.clear()
    _WORKER.update(payload)
    _WORKER["dictionary"] = Dictionary(
        payload["atoms"], payload["ref_grades"]
    )
    if payload["kind"].requires_partition:
        _WORKER["partition"] = grade_bin_partition(
            payload["ref_grades"], payload["n_groups"]
        )
    else:
        _WORKER["partition"] = None


def _sample_distances(y: FeatureVector, dictionary: Dictionary):
    kind: MethodKind = _WORKER["kind"]
    if kind is MethodKind.LLC:
        return gaussian_locality(y, dictionary, _WORKER["sigma"])
    if not kind.requires_distances:
        return None
    how = _WORKER["distance"]
    if how == "chi2":
        return chi_square_distances(y, dictionary)
    d = euclidean_distances(y, dictionary)
    if how == "euclidean-normalized":
        top = float(np.max(d.values))
        if top > 0:
            return custom_distances(d.values / top)
    return d


def _grade_one(index: int) -> dict:
    dictionary: Dictionary = _WORKER["dictionary"]
    y = FeatureVector(_WORKER["tests"][index])
    try:
        variant = MethodVariant(
            _WORKER["kind"],
            _WORKER["hyper"],
            distances=_sample_distances(y, dictionary),
            partition=_WORKER["partition"],
        )
        result = solve_variant(
            y,
            dictionary,
            variant,
            stop_on_tolerance=_WORKER["stop_on_tolerance"],
        )
    except GradingError as exc:
        return {"sample_id": index, "error": f"{type(exc).__name__}: {exc}"}
    return {
        "sample_id": index,
        "grade": float(result.grade),
        "support_size": int(result.coefficients.support_size),
        "iterations": len(result.trace.iterations),
        "converged": bool(result.trace.converged),
    }


def _print_metrics(pairs, as_csv: bool) -> None:
    if as_csv:
        print("metric,value")
        for name, value in pairs:
            print(f"{name},{value!r}")
    else:
        for name, value in pairs:
            print(f"{name}: {value:.4f}")


def _task_metrics(task: str, truth, pred):
    pairs = [("mae", mean_absolute_error(truth, pred))]
    if task == "cdr":
        try:
            pairs.append(("pearson", pearson_correlation(truth, pred)))
        except GradingError:
            pairs.append(("pearson", float("nan")))
    else:
        pairs.extend(
            [
                ("r0", integral_agreement(truth, pred)),
                ("r0.5", tolerance_ratio(truth, pred, 0.5)),
                ("r1", tolerance_ratio(truth, pred, 1.0)),
                ("r0.5_raw", tolerance_ratio(truth, pred, 0.5, ceil_first=False)),
                ("r1_raw", tolerance_ratio(truth, pred, 1.0, ceil_first=False)),
            ]
        )
    return pairs


def cmd_grade(args) -> int:
    name = args.variant.lower().replace("_", "+")
    try:
        kind = MethodKind(name)
    except ValueError:
        print(
            f"unknown variant {args.variant!r}; valid names: "
            + ", ".join(VARIANT_NAMES),
            file=sys.stderr,
        )
        return 1

    refs, tests, grade_column = args.refs, args.tests, args.grade_column
    if args.manifest:
        manifest = load_manifest(args.manifest)
        refs = refs or manifest.reference_path
        tests = tests or manifest.test_path
        grade_column = manifest.grade_column
    if not refs or not tests:
        print("need --refs and --tests (or a --manifest)", file=sys.stderr)
        return 1

    from .data import load_dictionary

    dictionary = load_dictionary(refs, grade_column)
    test_features, test_grades = load_samples(tests, grade_column)
    if test_features.shape[1] != dictionary.n_features:
        print(
            f"test samples have {test_features.shape[1]} features, "
            f"references have {dictionary.n_features}",
            file=sys.stderr,
        )
        return 1

    hyper = default_hyperparameters(kind, args.task)
    overrides = {}
    for field in ("lambda1", "lambda2", "lambda3", "gamma", "lars_steps"):
        value = getattr(args, field)
        if value is not None:
            overrides[field] = value
    if args.fixed_iters is not None:
        overrides["max_outer_iterations"] = args.fixed_iters
    if args.tol is not None:
        overrides["convergence_tolerance"] = args.tol
    if overrides:
        hyper = dataclasses.replace(hyper, **overrides)

    payload = {
        "atoms": dictionary.atoms,
        "ref_grades": dictionary.grades,
        "tests": test_features,
        "kind": kind,
        "hyper": hyper,
        "distance": args.distance,
        "sigma": args.sigma,
        "n_groups": args.groups,
        "stop_on_tolerance": args.tol is not None,
    }
    n = test_features.shape[0]
    if args.jobs > 1:
        with ProcessPoolExecutor(
            max_workers=args.jobs, initializer=_init_worker, initargs=(payload,)
        ) as pool:
            rows = list(pool.map(_grade_one, range(n)))
    else:
        _init_worker(payload)
        rows = [_grade_one(i) for i in range(n)]

    for row in rows:
        if "error" in row:
            print(
                f"solver failed on sample {row['sample_id']}: {row['error']}",
                file=sys.stderr,
            )
            return 2

    with open(args.report, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")

    predictions = np.array([row["grade"] for row in rows])
    _print_metrics(_task_metrics(args.task, test_grades, predictions), args.csv)
    return 0


def _read_grades_flexible(path, grade_column: str = "grade") -> np.ndarray:
    lines = [l for l in Path(path).read_text().splitlines() if l.strip()]
    if not lines:
        from .errors import ParseError

        raise ParseError(f"{path}: file is empty")
    first = lines[0].strip()
    if first.startswith("{"):
        return np.array([float(json.loads(l)["grade"]) for l in lines])
    try:
        float(first.split(",")[0])
    except ValueError:
        return load_samples(path, grade_column)[1]
    return np.array([float(l.split(",")[0]) for l in lines])


def cmd_evaluate(args) -> int:
    truth = _read_grades_flexible(args.truth)
    pred = _read_grades_flexible(args.predictions)
    _print_metrics(_task_metrics(args.task, truth, pred), args.csv)
    return 0


def _default_seed(value):
    if value is not None:
        return value
    return int(os.environ.get("SRCL_SEED", "0"))


def cmd_synth(args) -> int:
    seed = _default_seed(args.seed)
    data = generate_synthetic(
        args.n_ref,
        args.n_test,
        args.dim,
        args.noise,
        seed,
        nuisance_scale=args.nuisance,
    )
    save_samples(args.out_refs, data.dictionary.atoms.T, data.dictionary.grades)
    save_samples(args.out_tests, data.test_features, data.test_grades)
    print(
        f"wrote {data.dictionary.n_atoms} references to {args.out_refs} and "
        f"{len(data.test_grades)} test samples to {args.out_tests} (seed {seed})"
    )
    return 0


def cmd_bow(args) -> int:
    seed = _default_seed(args.seed)
    region_dirs = [Path(d) for d in args.images]
    region_files = []
    for d in region_dirs:
        files = sorted(
            p for p in d.iterdir() if p.suffix.lower() in (".pgm", ".csv")
        )
        if not files:
            print(f"no .pgm/.csv images in {d}", file=sys.stderr)
            return 1
        region_files.append(files)
    names = [tuple(p.name for p in files) for files in region_files]
    if len(set(names)) != 1:
        print("image regions must contain the same file names", file=sys.stderr)
        return 1

    grade_map = {}
    if args.grades:
        import csv as _csv

        with open(args.grades, newline="") as fh:
            for row in _csv.reader(fh):
                if len(row) >= 2 and row[0].strip().lower() != "filename":
                    grade_map[row[0].strip()] = float(row[1])

    rng = np.random.default_rng(seed)
    histograms = []
    codebooks = []
    for files in region_files:
        images = [load_gray_image(p) for p in files]
        patches = np.vstack(
            [extract_patches(img, args.patch_size) for img in images]
        )
        if patches.shape[0] > args.max_patches:
            pick = rng.choice(patches.shape[0], args.max_patches, replace=False)
            patches = patches[np.sort(pick)]
        codebook = build_codebook(patches, args.k, seed)
        codebooks.append(codebook)
        histograms.append(
            np.vstack([bow_histogram(img, codebook).values for img in images])
        )

    features = np.hstack(histograms)
    grades = np.array(
        [grade_map.get(name, 0.0) for name in names[0]], dtype=float
    )
    save_samples(args.out, features, grades)
    payload = {
        "k": args.k,
        "patch_size": args.patch_size,
        "seed": seed,
        "regions": [
            {"dir": str(d), "centroids": cb.centroids.tolist()}
            for d, cb in zip(region_dirs, codebooks)
        ],
    }
    Path(args.out_codebook).write_text(json.dumps(payload) + "\n")
    print(
        f"wrote {features.shape[0]} histograms ({features.shape[1]} bins) to "
        f"{args.out} and the codebook to {args.out_codebook}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srcl",
        description="Grade samples by sparse reconstruction over a "
        "reference dictionary.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grade", help="grade test samples against references")
    p.add_argument("--variant", required=True,
                   help="one of: " + ", ".join(VARIANT_NAMES))
    p.add_argument("--refs", help="reference CSV (grade,f0,...)")
    p.add_argument("--tests", help="test CSV (grade,f0,...)")
    p.add_argument("--manifest", help="JSON manifest supplying paths")
    p.add_argument("--grade-column", default="grade")
    p.add_argument("--task", choices=("cdr", "cataract"), default="cdr",
                   help="hyperparameter preset / metric family")
    p.add_argument("--lambda1", type=float, default=None)
    p.add_argument("--lambda2", type=float, default=None)
    p.add_argument("--lambda3", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--lars-steps", type=int, default=None)
    p.add_argument("--fixed-iters", type=int, default=None,
                   help="outer iteration count for *+rc variants")
    p.add_argument("--tol", type=float, default=None,
                   help="stop outer loop early at this grade tolerance")
    p.add_argument("--distance",
                   choices=("euclidean", "euclidean-normalized", "chi2"),
                   default="euclidean")
    p.add_argument("--sigma", type=float, default=1.0,
                   help="gaussian locality width (llc)")
    p.add_argument("--groups", type=int, default=8,
                   help="grade bins for ssgl group structure")
    p.add_argument("--report", default="report.jsonl")
    p.add_argument("--csv", action="store_true",
                   help="print metrics as machine-parseable CSV")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_grade)

    p = sub.add_parser("evaluate", help="score predictions against truth")
    p.add_argument("truth", help="grades file (CSV / JSON-lines / plain)")
    p.add_argument("predictions", help="grades file (CSV / JSON-lines / plain)")
    p.add_argument("--task", choices=("cdr", "cataract"), default="cdr")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate the synthetic benchmark family")
    p.add_argument("--n-ref", type=int, default=120)
    p.add_argument("--n-test", type=int, default=200)
    p.add_argument("--dim", type=int, default=2500)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--nuisance", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=None,
                   help="defaults to $SRCL_SEED, then 0")
    p.add_argument("--out-refs", default="refs.csv")
    p.add_argument("--out-tests", default="tests.csv")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bow", help="bag-of-words histograms for gray images")
    p.add_argument("--images", nargs="+", required=True,
                   help="image directories; several = concatenated regions")
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--patch-size", type=int, default=3)
    p.add_argument("--max-patches", type=int, default=50_000)
    p.add_argument("--seed", type=int, default=None,
                   help="defaults to $SRCL_SEED, then 0")
    p.add_argument("--grades", help="optional filename,grade CSV")
    p.add_argument("--out", default="histograms.csv")
    p.add_argument("--out-codebook", default="codebook.json")
    p.set_defaults(func=cmd_bow)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GradingError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
