"""Command-line front end: ingest a CSV, run the merge pipeline, and emit
labels, a JSON report, the similarity matrix, and a clustered heatmap."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np
from scipy.cluster.hierarchy import leaves_list, linkage

from . import __version__
from .core import DataMatrix, Partition, adjusted_rand_index
from .consensus import SimilarityMatrix
from .datagen import gen_banana_spheres, gen_bullseye, gen_gaussian_blobs
from .pipeline import KmhConfig, KmhError, run_kmh

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2

FLOAT_FMT = "%.17g"


class InputError(Exception):
    """Bad input file or contradictory configuration (exit code 2)."""


def _atomic_write(path: str, payload: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def read_csv(path: str, truth_col: int | None = None):
    """Parse a numeric CSV with an optional single header line.

    Returns (DataMatrix, truth Partition or None). truth_col indexes the
    ground-truth column (0-based); it is excluded from the features.
    """
    if not os.path.isfile(path):
        raise InputError(f"input file not found: {path}")
    rows = []
    header_skipped = False
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            try:
                rows.append([float(f) for f in fields])
            except ValueError:
                if lineno == 1 and not header_skipped:
                    header_skipped = True
                    continue
                raise InputError(f"{path}: line {lineno}: non-numeric field")
            if len(rows) > 1 and len(rows[-1]) != len(rows[0]):
                raise InputError(
                    f"{path}: line {lineno}: expected {len(rows[0])} fields, got {len(rows[-1])}"
                )
    if len(rows) < 2:
        raise InputError(f"{path}: need at least 2 data rows")
    values = np.asarray(rows)

    truth = None
    if truth_col is not None:
        if not (0 <= truth_col < values.shape[1]):
            raise InputError(f"truth column {truth_col} out of range")
        raw = values[:, truth_col]
        if not np.allclose(raw, np.round(raw)) or raw.min() < 0:
            raise InputError("truth column must hold nonnegative integer labels")
        truth = Partition.from_labels(raw.astype(np.int64))
        values = np.delete(values, truth_col, axis=1)
    if values.shape[1] < 1:
        raise InputError("no feature columns remain")
    try:
        return DataMatrix(values), truth
    except ValueError as exc:
        raise InputError(f"{path}: {exc}")


def write_labels(path: str, partition: Partition) -> None:
    lines = ["index,label"]
    lines += [f"{i},{int(l)}" for i, l in enumerate(partition.labels)]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_similarity(path: str, sim: SimilarityMatrix) -> None:
    header = "obs," + ",".join(str(int(i)) for i in sim.indices)
    lines = [header]
    for i, row in zip(sim.indices, sim.psi):
        lines.append(f"{int(i)}," + ",".join(FLOAT_FMT % v for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def heatmap_order(sim: SimilarityMatrix) -> np.ndarray:
    """Leaf order of the single-linkage tree over 1 - psi."""
    m = sim.psi.shape[0]
    if m < 3:
        return np.arange(m)
    rows, cols = np.triu_indices(m, 1)
    return np.asarray(leaves_list(linkage(1.0 - sim.psi[rows, cols], method="single")))


def write_heatmap(sim: SimilarityMatrix, path: str, order_path: str | None = None) -> np.ndarray:
    """Grayscale plain-PGM heatmap of psi, rows/cols in dendrogram leaf
    order, plus a sidecar CSV mapping pixel position to observation."""
    order = heatmap_order(sim)
    psi = sim.psi[np.ix_(order, order)]
    pixels = np.round(255.0 * psi).astype(int)
    m = pixels.shape[0]
    lines = ["P2", f"{m} {m}", "255"]
    lines += [" ".join(str(v) for v in row) for row in pixels]
    _atomic_write(path, "\n".join(lines) + "\n")
    if order_path is not None:
        rows = ["position,observation"]
        rows += [f"{pos},{int(sim.indices[o])}" for pos, o in enumerate(order)]
        _atomic_write(order_path, "\n".join(rows) + "\n")
    return order


def _report_payload(report, truth: Partition | None) -> dict:
    krz = report.krz_trace
    payload = {
        "schema_version": 1,
        "config": report.config_resolved,
        "n": report.final_partition.n,
        "n_star": report.scatter.n_star,
        "scatter_indices": [int(i) for i in report.scatter.scatter_indices],
        "k0_candidates": [int(k) for k in report.k0_candidates],
        "krzanowski": None
        if krz is None
        else {
            "k": [int(k) for k in krz.k_values],
            "trace": [float(t) for t in krz.traces],
            "diff_k": [int(k) for k in krz.diff_k],
            "diff": [float(d) for d in krz.diffs],
            "ratio_k": [int(k) for k in krz.ratio_k],
            "ratio": [float(r) for r in krz.ratios],
        },
        "merge_heights": {
            str(k0): [float(h) for h in trace.heights]
            for k0, trace in report.merge_traces.items()
        },
        "change_points": {
            str(k0): {
                "cps": [float(c) for c in rep.cps],
                "kstars": [int(k) for k in rep.candidate_kstars],
            }
            for k0, rep in report.change_point_reports.items()
        },
        "kstar": {
            "chosen": int(report.chosen_kstar),
            "known": report.kstar_estimate is None,
            "per_replicate": None
            if report.kstar_estimate is None
            else [int(k) for k in report.kstar_estimate.per_replicate],
            "frequencies": None
            if report.kstar_estimate is None
            else {str(k): v for k, v in sorted(report.kstar_estimate.frequencies.items())},
            "median": None
            if report.kstar_estimate is None
            else int(report.kstar_estimate.median_kstar),
        },
        "candidates": [
            {"k0": int(c.k0), "kstar": int(c.kstar)} for c in report.candidate_partitions
        ],
        "selection": {
            "pool": [{"k0": int(c.k0), "kstar": int(c.kstar)} for c in report.selection_pool],
            "ari_matrix": [[float(v) for v in row] for row in report.ari_matrix],
            "mean_ari": [float(v) for v in report.mean_ari],
            "chosen_index": int(report.chosen_index),
        },
        "ari_vs_truth": None
        if truth is None
        else float(adjusted_rand_index(report.final_partition, truth)),
        "warnings": list(report.warnings),
    }
    return payload


def cmd_run(args) -> int:
    t_start = time.monotonic()
    data, truth = read_csv(args.input, truth_col=args.truth_col)

    config = KmhConfig(
        seed=args.seed,
        M=args.M,
        L=args.L,
        B=args.B,
        G=args.G,
        kstar_known=args.kstar,
        scatter_frac=args.scatter_frac,
        mean_cut=args.linkage_cutoffs[0],
        cv_cut=args.linkage_cutoffs[1],
        subsample=args.subsample,
        standardize=args.standardize,
        threads=args.threads,
    )
    resolved = config.resolve(data.n, data.p)
    if args.kstar is not None and args.kstar > resolved["G"]:
        raise InputError(f"kstar={args.kstar} exceeds G={resolved['G']}")

    os.makedirs(args.output_dir, exist_ok=True)
    report = run_kmh(data, config)

    paths = {
        name: os.path.join(args.output_dir, name + ext)
        for name, ext in [
            ("labels", ".csv"),
            ("report", ".json"),
            ("similarity", ".csv"),
            ("heatmap", ".pgm"),
            ("heatmap_order", ".csv"),
            ("manifest", ".json"),
        ]
    }
    write_labels(paths["labels"], report.final_partition)
    _atomic_write(
        paths["report"],
        json.dumps(_report_payload(report, truth), indent=1, sort_keys=True) + "\n",
    )
    write_similarity(paths["similarity"], report.similarity)
    write_heatmap(report.similarity, paths["heatmap"], paths["heatmap_order"])

    manifest = {
        "input": os.path.abspath(args.input),
        "seed": args.seed,
        "config": resolved,
        "versions": {
            "kmh": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
        },
        "outputs": {k: os.path.abspath(v) for k, v in paths.items()},
        "seed_substreams": ["scatter", "krzanowski", "consensus", "report_subsample"],
        "timings_sec": {**report.timings, "total": time.monotonic() - t_start},
    }
    _atomic_write(paths["manifest"], json.dumps(manifest, indent=1, sort_keys=True) + "\n")

    print(
        f"n={data.n} n*={report.scatter.n_star} K*={report.chosen_kstar} "
        f"pool={len(report.selection_pool)} chosen={report.chosen_index}"
    )
    if truth is not None:
        print(f"ARI vs truth: {_report_payload(report, truth)['ari_vs_truth']:.4f}")
    return EXIT_OK


def _write_dataset_csv(path: str, dataset) -> None:
    out = np.column_stack([dataset.data.values, dataset.truth.labels.astype(float)])
    lines = [",".join(FLOAT_FMT % v for v in row) for row in out]
    _atomic_write(path, "\n".join(lines) + "\n")


def cmd_gen(args) -> int:
    if args.shape == "bullseye":
        ds = gen_bullseye(
            n_core=args.n_core, n_ring=args.n_ring, noise_sd=args.noise_sd, seed=args.seed
        )
    elif args.shape == "banana-spheres":
        ds = gen_banana_spheres(
            n_banana=args.n_banana,
            n_ring=args.n_ring_outer,
            n_outliers=args.n_outliers,
            seed=args.seed,
        )
    elif args.shape == "blobs":
        centers = [[float(v) for v in c.split(",")] for c in args.centers.split(";")]
        sizes = [int(s) for s in args.sizes.split(",")]
        ds = gen_gaussian_blobs(centers, sizes, sigma=args.sigma, seed=args.seed)
    else:  # argparse choices make this unreachable
        raise InputError(f"unknown shape {args.shape!r}")
    _write_dataset_csv(args.out, ds)
    print(f"{ds.descriptor} -> {args.out} ({ds.data.n} rows, truth in last column)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kmh",
        description="Cluster general-shaped groups by merging K-means entities hierarchically.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="cluster a CSV dataset")
    run.add_argument("--input", required=True, help="input CSV (optional header line)")
    run.add_argument("--output-dir", default=".", help="directory for output artifacts")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--kstar", type=int, default=None, help="known number of clusters")
    run.add_argument("--M", type=int, default=None, help="number of K0 candidates")
    run.add_argument("--L", type=int, default=3, help="stopping candidates per K0")
    run.add_argument("--B", type=int, default=100, help="consensus replicates")
    run.add_argument("--G", type=int, default=None, help="largest candidate group size")
    run.add_argument("--standardize", action="store_true")
    run.add_argument("--scatter-frac", type=float, default=0.001)
    run.add_argument(
        "--linkage-cutoffs",
        type=lambda s: tuple(float(v) for v in s.split(",")),
        default=(0.3, 1.0),
        metavar="MEAN,CV",
        help="similarity mean / coefficient-of-variation cutoffs for linkage choice",
    )
    run.add_argument("--subsample", type=int, default=None)
    run.add_argument("--truth-col", type=int, default=None, help="0-based ground-truth column")
    run.add_argument("--threads", type=int, default=1)
    run.set_defaults(func=cmd_run)

    gen = sub.add_parser("gen", help="generate a benchmark dataset CSV")
    gen_sub = gen.add_subparsers(dest="shape", required=True)

    bull = gen_sub.add_parser("bullseye")
    bull.add_argument("--n-core", type=int, default=100)
    bull.add_argument("--n-ring", type=int, default=300)
    bull.add_argument("--noise-sd", type=float, default=0.9)
    bull.add_argument("--seed", type=int, default=0)
    bull.add_argument("--out", default="bullseye.csv")
    bull.set_defaults(func=cmd_gen)

    ban = gen_sub.add_parser("banana-spheres")
    ban.add_argument("--n-banana", type=int, default=735)
    ban.add_argument("--n-ring-outer", type=int, default=1500)
    ban.add_argument("--n-outliers", type=int, default=45)
    ban.add_argument("--seed", type=int, default=0)
    ban.add_argument("--out", default="banana_spheres.csv")
    ban.set_defaults(func=cmd_gen)

    blobs = gen_sub.add_parser("blobs")
    blobs.add_argument("--centers", default="0,0;10,0;5,8.66", help="x,y;x,y;...")
    blobs.add_argument("--sizes", default="100,100,100")
    blobs.add_argument("--sigma", type=float, default=1.0)
    blobs.add_argument("--seed", type=int, default=0)
    blobs.add_argument("--out", default="blobs.csv")
    blobs.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (KmhError, ValueError, OSError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
