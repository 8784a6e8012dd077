"""Command line interface.

Five subcommands: simulate draws synthetic mixture data, sample runs the
Gibbs sampler over a dataset, summarize turns a trace into reports and
figures, metric compares two clustering files, kmeans runs the baseline.
Every run writes a manifest next to its outputs recording the full flag
set, the seeds and the paths involved, so any output can be reproduced
byte for byte by replaying the manifest.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .data import feature_subset, generate_mixture_1d, load_dataset, save_dataset
from .figures import (
    plot_cluster_counts,
    plot_data_preview,
    plot_mode_curves,
    plot_trace_diagnostics,
)
from .kmeans import kmeans
from .manifest import RunManifest, write_manifest
from .metrics import approx_distance, distance_upper_bound, exact_distance
from .sampler import ModelConfig, run_chain
from .summaries import (
    cluster_count_distribution,
    credible_region,
    detect_modes,
    empirical_central_clustering,
    filter_trace_by_k,
    hpd_region,
    median_clustering,
    quantile_clustering,
    trace_distance_matrix,
)
from .trace import load_clustering_file, load_trace, save_clustering_file, save_trace

CommandResult = namedtuple("CommandResult", "outputs inputs seeds manifest_path")

DEFAULT_GRID = "0.05,0.1,0.15,0.2,0.3,0.4,0.5"


def _parse_floats(text, flag):
    try:
        values = [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"{flag} expects comma-separated numbers, got {text!r}") from None
    if not values:
        raise ValueError(f"{flag} expects at least one number")
    return values


def _parse_ints(text, flag):
    try:
        values = [int(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"{flag} expects comma-separated integers, got {text!r}") from None
    if not values:
        raise ValueError(f"{flag} expects at least one integer")
    return values


def _worker_cap(requested: int) -> int:
    env = os.environ.get("CC_THREADS", "").strip()
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(requested, cap))


# ---------------------------------------------------------------------- commands


def cmd_simulate(args) -> CommandResult:
    out = Path(args["out"])
    means = np.array(_parse_floats(args["means"], "--means"))
    data, truth = generate_mixture_1d(args["n"], means, args["sigma"], args["seed"])
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(data, out)
    truth_path = out.with_name(out.stem + ".truth.csv")
    save_clustering_file(truth, truth_path)
    outputs = [str(out), str(truth_path)]
    if args.get("preview"):
        fig_path = out.with_name(out.stem + ".preview.png")
        plot_data_preview(data, fig_path, thin_rows=args.get("thin_rows", 1))
        outputs.append(str(fig_path))
    return CommandResult(outputs, [], [args["seed"]], str(out) + ".manifest.json")


def _chain_job(job):
    cfg, rows, iters, burnin, thin, seed = job
    return run_chain(cfg, rows, iters, burnin, thin, seed)


def cmd_sample(args) -> CommandResult:
    data_path = Path(args["data"])
    dataset = load_dataset(data_path)
    iters, burnin = args["iters"], args["burnin"]
    thin = args.get("thin", 1)
    seed = args["seed"]
    chains = args.get("chains", 1)
    if chains < 1:
        raise ValueError(f"need at least one chain, got {chains}")

    overrides = {}
    for key, name in (("m_slots", "M"), ("s_df", "s"), ("psi", "psi"),
                      ("alpha_shape", "alpha_shape"), ("alpha_rate", "alpha_rate")):
        if args.get(key) is not None:
            overrides[name] = args[key]
    cfg = ModelConfig.from_data(dataset.rows, **overrides)

    out = Path(args["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    seeds = [seed + i for i in range(chains)]
    if chains == 1:
        paths = [out]
        traces = [run_chain(cfg, dataset.rows, iters, burnin, thin, seed)]
    else:
        paths = [out.with_name(f"{out.stem}.chain{i}{out.suffix}") for i in range(chains)]
        workers = _worker_cap(chains)
        jobs = [(cfg, dataset.rows, iters, burnin, thin, s) for s in seeds]
        if workers == 1:
            traces = [_chain_job(job) for job in jobs]
        else:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                traces = list(ex.map(_chain_job, jobs))
    for trace, path in zip(traces, paths):
        save_trace(trace, path)

    config_path = Path(str(out) + ".config.json")
    payload = {
        "M": cfg.M,
        "s": cfg.s,
        "S": cfg.S_mat.tolist(),
        "mu0": cfg.mu0.tolist(),
        "psi": cfg.psi,
        "alpha_shape": cfg.alpha_shape,
        "alpha_rate": cfg.alpha_rate,
        "digest": cfg.digest(),
    }
    config_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    outputs = [str(p) for p in paths] + [str(config_path)]
    return CommandResult(outputs, [str(data_path)], seeds, str(out) + ".manifest.json")


def _region_dict(region) -> dict:
    return {
        "center_indices": [int(i) for i in region.center_indices],
        "radius_steps": [int(s) for s in region.radius_steps],
        "radii": [float(r) for r in region.radii],
        "zeta": float(region.zeta),
        "target_prob": float(region.target_prob),
        "achieved_prob": float(region.achieved_prob),
        "members": [int(m) for m in region.members],
    }


def _mode_list(report, indices=None) -> list:
    out = []
    for j, idx in enumerate(report.mode_indices):
        orig = int(idx) if indices is None else int(indices[idx])
        out.append({
            "index": orig,
            "epsilon": float(report.epsilons[j]),
            "prob": float(report.neighborhood_probs[j]),
        })
    return out


def cmd_summarize(args) -> CommandResult:
    trace_path = Path(args["trace"])
    trace = load_trace(trace_path)
    outdir = Path(args["outdir"])
    grid = np.array(sorted(_parse_floats(args.get("grid", DEFAULT_GRID), "--grid")))
    target = args.get("target", 0.95)
    zeta = args.get("zeta", 1e-3)
    kind = args.get("kind", "approx")
    grow = args.get("grow", "nearest")

    dmat = trace_distance_matrix(trace, kind=kind)
    modes = detect_modes(trace, grid, kind=kind, dmat=dmat)
    if modes.mode_indices:
        central = int(modes.mode_indices[0])
    else:
        central = empirical_central_clustering(trace, float(grid[-1]), kind=kind, dmat=dmat)[0]
    centers = [int(i) for i in modes.mode_indices] or [central]
    cred = credible_region(trace, central, target, zeta, kind=kind, dmat=dmat)
    hpd = hpd_region(trace, centers, target, zeta, kind=kind, grow=grow, dmat=dmat)
    med = median_clustering(trace, kind=kind, dmat=dmat)
    counts = cluster_count_distribution(trace)

    report = {
        "trace": str(trace_path),
        "entries": len(trace),
        "kind": kind,
        "grid": [float(g) for g in grid],
        "modes": _mode_list(modes),
        "central": {"index": central, "k": trace[central].k},
        "credible": _region_dict(cred),
        "hpd": _region_dict(hpd),
        "median": {"index": med, "k": trace[med].k},
        "cluster_counts": {str(k): float(v) for k, v in sorted(counts.items())},
    }
    if args.get("quantiles"):
        qmap = {}
        for tok in str(args["quantiles"]).split(","):
            tok = tok.strip()
            if tok:
                qmap[tok] = quantile_clustering(trace, central, float(tok), kind=kind, dmat=dmat)
        report["quantiles"] = qmap
    if args.get("condition_k") is not None:
        k = args["condition_k"]
        sub, indices = filter_trace_by_k(trace, k)
        sub_dmat = dmat[np.ix_(indices, indices)]
        cmodes = detect_modes(sub, grid, kind=kind, dmat=sub_dmat)
        if cmodes.mode_indices:
            sub_central = int(cmodes.mode_indices[0])
        else:
            sub_central = empirical_central_clustering(sub, float(grid[-1]), kind=kind,
                                                       dmat=sub_dmat)[0]
        ccred = credible_region(sub, sub_central, target, zeta, kind=kind, dmat=sub_dmat)
        cdict = _region_dict(ccred)
        cdict["center_indices"] = [int(indices[i]) for i in ccred.center_indices]
        cdict["members"] = [int(indices[m]) for m in ccred.members]
        report["conditional"] = {
            "k": int(k),
            "entries": len(sub),
            "modes": _mode_list(cmodes, indices),
            "central": {"index": int(indices[sub_central])},
            "credible": cdict,
        }

    outdir.mkdir(parents=True, exist_ok=True)
    report_path = outdir / "report.json"
    report_path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")

    counts_path = outdir / "cluster_counts.csv"
    lines = ["k,probability"] + [f"{k},{v:.17g}" for k, v in sorted(counts.items())]
    counts_path.write_text("\n".join(lines) + "\n")

    curves_path = outdir / "mode_curves.csv"
    header = "epsilon" + "".join(f",mode_{int(i)}" for i in modes.mode_indices)
    rows = [header]
    for gi, eps in enumerate(modes.grid):
        cells = [f"{eps:.17g}"] + [f"{modes.curves[j][gi]:.17g}"
                                   for j in range(len(modes.mode_indices))]
        rows.append(",".join(cells))
    curves_path.write_text("\n".join(rows) + "\n")

    central_path = outdir / "central.clustering"
    save_clustering_file([trace[central].clustering], central_path,
                         iterations=[trace[central].iteration])

    figure_paths = [outdir / "cluster_counts.png", outdir / "mode_curves.png",
                    outdir / "trace_diagnostics.png"]
    plot_cluster_counts(counts, figure_paths[0])
    plot_mode_curves(modes, figure_paths[1])
    plot_trace_diagnostics(trace, figure_paths[2])

    outputs = [str(p) for p in
               (report_path, counts_path, curves_path, central_path, *figure_paths)]
    return CommandResult(outputs, [str(trace_path)], [], str(outdir / "manifest.json"))


def cmd_metric(args) -> CommandResult:
    a_path, b_path = Path(args["a"]), Path(args["b"])
    a = load_clustering_file(a_path)[0]
    b = load_clustering_file(b_path)[0]
    if a.n != b.n:
        raise ValueError(f"clusterings cover different unit counts, {a.n} and {b.n}")
    ex = exact_distance(a, b)
    ap = approx_distance(a, b)
    rows = [
        ("exact", f"{ex.value:.17g}"),
        ("approx", f"{ap.value:.17g}"),
        ("directed_ab", f"{ap.directed_pair[0]:.17g}"),
        ("directed_ba", f"{ap.directed_pair[1]:.17g}"),
        ("bound", f"{distance_upper_bound(a.n, max(a.k, b.k)):.17g}"),
        ("approx_le_exact", "true" if ap.value <= ex.value else "false"),
    ]
    out = Path(args["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("quantity,value\n" + "\n".join(f"{k},{v}" for k, v in rows) + "\n")
    return CommandResult([str(out)], [str(a_path), str(b_path)], [],
                         str(out) + ".manifest.json")


def cmd_kmeans(args) -> CommandResult:
    data_path = Path(args["data"])
    dataset = load_dataset(data_path)
    if args.get("columns"):
        dataset = feature_subset(dataset, _parse_ints(args["columns"], "--columns"))
    labels = kmeans(dataset, args["k"], args["seed"],
                    max_iters=args.get("max_iters", 100),
                    plusplus=bool(args.get("plusplus", False)))
    out = Path(args["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    save_clustering_file([labels], out, iterations=[0])
    return CommandResult([str(out)], [str(data_path)], [args["seed"]],
                         str(out) + ".manifest.json")


# ---------------------------------------------------------------------- plumbing


COMMANDS = {
    "simulate": cmd_simulate,
    "sample": cmd_sample,
    "summarize": cmd_summarize,
    "metric": cmd_metric,
    "kmeans": cmd_kmeans,
}


def dispatch(subcommand: str, args: dict) -> CommandResult:
    """Run one subcommand from a plain argument dict and write its manifest.

    This is the entry point manifests replay through, so everything a
    command does must be a function of the args dict alone.
    """
    if subcommand not in COMMANDS:
        raise ValueError(f"unknown subcommand {subcommand!r}")
    t0 = time.perf_counter()
    result = COMMANDS[subcommand](dict(args))
    manifest = RunManifest(
        subcommand=subcommand,
        args=dict(args),
        seeds=[int(s) for s in result.seeds],
        inputs=list(result.inputs),
        outputs=list(result.outputs),
        wall_clock_seconds=time.perf_counter() - t0,
    )
    write_manifest(manifest, result.manifest_path)
    return result


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="centclust",
        description="Sample and summarize posterior distributions over clusterings.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sim = sub.add_parser("simulate", help="draw a one-dimensional Gaussian mixture dataset")
    sim.add_argument("--n", type=int, required=True, help="number of rows")
    sim.add_argument("--means", required=True, help="comma-separated component means")
    sim.add_argument("--sigma", type=float, required=True, help="shared component sd")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--out", required=True, help="dataset CSV path")
    sim.add_argument("--preview", action="store_true", help="also render a preview figure")
    sim.add_argument("--thin-rows", type=int, default=1, dest="thin_rows",
                     help="keep every k-th row in the preview figure")

    sam = sub.add_parser("sample", help="run the Gibbs sampler over a dataset")
    sam.add_argument("--data", required=True, help="dataset CSV path")
    sam.add_argument("--out", required=True, help="trace output path")
    sam.add_argument("--iters", type=int, required=True)
    sam.add_argument("--burnin", type=int, required=True)
    sam.add_argument("--thin", type=int, default=1)
    sam.add_argument("--seed", type=int, required=True)
    sam.add_argument("--chains", type=int, default=1,
                     help="independent chains, seeded seed..seed+chains-1")
    sam.add_argument("--m-slots", type=int, default=None, dest="m_slots",
                     help="number of mixture slots")
    sam.add_argument("--s-df", type=float, default=None, dest="s_df",
                     help="precision prior degrees of freedom")
    sam.add_argument("--psi", type=float, default=None,
                     help="prior dispersion of component means")
    sam.add_argument("--alpha-shape", type=float, default=None, dest="alpha_shape")
    sam.add_argument("--alpha-rate", type=float, default=None, dest="alpha_rate")

    smz = sub.add_parser("summarize", help="summarize a clustering trace")
    smz.add_argument("--trace", required=True)
    smz.add_argument("--outdir", required=True)
    smz.add_argument("--grid", default=DEFAULT_GRID,
                     help="comma-separated ball radii for the mode scan")
    smz.add_argument("--target", type=float, default=0.95, help="region probability target")
    smz.add_argument("--zeta", type=float, default=1e-3, help="region radius resolution")
    smz.add_argument("--kind", choices=("approx", "exact"), default="approx")
    smz.add_argument("--grow", choices=("nearest", "all"), default="nearest",
                     help="how the multi-ball region grows toward the target")
    smz.add_argument("--condition-k", type=int, default=None, dest="condition_k",
                     help="also summarize entries with exactly this many clusters")
    smz.add_argument("--quantiles", default=None,
                     help="comma-separated distance quantiles from the central clustering")

    met = sub.add_parser("metric", help="compare two clustering files")
    met.add_argument("--a", required=True)
    met.add_argument("--b", required=True)
    met.add_argument("--out", required=True)

    km = sub.add_parser("kmeans", help="k-means baseline over a dataset")
    km.add_argument("--data", required=True)
    km.add_argument("--k", type=int, required=True)
    km.add_argument("--seed", type=int, required=True)
    km.add_argument("--max-iters", type=int, default=100, dest="max_iters")
    km.add_argument("--plusplus", action="store_true",
                    help="distance-weighted center initialization")
    km.add_argument("--columns", default=None,
                    help="comma-separated column indices to cluster on")
    km.add_argument("--out", required=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    args = vars(ns)
    subcommand = args.pop("subcommand")
    try:
        dispatch(subcommand, args)
    except Exception as err:
        message = " ".join(str(err).split()) or err.__class__.__name__
        print(f"error: {message}", file=sys.stderr)
        return 2
    return 0


def cli() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    cli()
