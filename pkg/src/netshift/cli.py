"""Command-line interface: ``netshift compare | simulate | mirror | embed``.

Exit codes: 0 success, 2 invalid input, 1 any other failure. All outputs are
written only after the computation has finished.
"""
from __future__ import annotations

import argparse
import glob
import os
import sys
from pathlib import Path

from . import __version__
from .align import DegenerateSeedError
from .embed import EmbeddingError, embed, scree, select_dimension
from .graph import (
    GRDPG_B,
    SBM_B,
    make_rank_mismatch_scenario,
    make_rdpg_scenario,
    make_sbm_scenario,
    sample_pair,
)
from .io import InputError, atomic_write, csv_bytes, dumps, file_digest, graph_bytes, read_graph
from .mirror import build_mirror
from .seedfree import SeedFreeConfig, run_seedfree
from .shift import SingularEmbeddingError, _signature, run_seeded

# parameters that change how, not what, is computed; kept out of the manifest
EXECUTION_ONLY = {"out", "threads", "func"}

BAD_INPUT = (InputError, EmbeddingError, DegenerateSeedError, SingularEmbeddingError, ValueError)


def parse_dim(text: str):
    """``"3"`` -> 3, ``"2,1"`` -> (2, 1)."""
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension {text!r}; use D or D_PLUS,D_MINUS") from None
    if len(parts) == 1 and parts[0] >= 1:
        return parts[0]
    if len(parts) == 2 and min(parts) >= 0 and sum(parts) >= 1:
        return (parts[0], parts[1]) if parts[1] else parts[0]
    raise argparse.ArgumentTypeError(f"bad dimension {text!r}")


def parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("seed list is empty")
    return seeds


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        threads = flag
    elif os.environ.get("NETSHIFT_THREADS"):
        try:
            threads = int(os.environ["NETSHIFT_THREADS"])
        except ValueError:
            raise InputError(f"NETSHIFT_THREADS must be an integer, got {os.environ['NETSHIFT_THREADS']!r}") from None
    else:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise InputError(f"thread count must be positive, got {threads}")
    return threads


def manifest(args, inputs=()) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in EXECUTION_ONLY}
    return {
        "command": args.command,
        "params": params,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "rng_seed": getattr(args, "rng_seed", None),
        "version": __version__,
    }


def _config(args, dim2=None) -> SeedFreeConfig:
    return SeedFreeConfig(
        dim=args.dim,
        dim2=dim2,
        L=args.seed_size,
        M=args.candidates,
        alpha=args.alpha,
        alpha_tilde=args.filter_alpha,
        rng_seed=args.rng_seed,
        sampling_mode=args.sampling,
        threads=args.threads,
    )


def _report_body(report, trace=None) -> dict:
    body = {
        "n": report.n,
        "dof": report.dof,
        "alpha": report.alpha,
        "T": report.T,
        "p": report.p,
        "unshifted": report.unshifted,
        "shifted": report.shifted,
        "Yhat": report.Yhat,
        "W": report.alignment.W,
        "alignment": report.alignment.kind,
        "seeds": list(report.alignment.seeds),
    }
    if trace is not None:
        body["trace"] = {
            "candidates": len(trace.candidates),
            "passed_filter": trace.n_passed,
            "chosen_index": trace.chosen,
            "chosen_seeds": list(trace.chosen_seeds),
            "chosen_h": trace.candidates[trace.chosen].h,
            "expanded_size": int(trace.expanded_seeds.size),
            "fell_back": trace.fell_back,
        }
    return body


def cmd_compare(args) -> dict[Path, bytes]:
    g1 = read_graph(args.a1, args.n)
    g2 = read_graph(args.a2, args.n)
    if g1.n != g2.n:
        raise InputError(f"graphs have different vertex counts ({g1.n} vs {g2.n})")
    if args.seeds is not None:
        bad = [s for s in args.seeds if not 0 <= s < g1.n]
        if bad:
            raise InputError(f"seed vertices out of range: {bad}")
        report = run_seeded(g1, g2, args.dim, args.seeds, args.alpha, dim2=args.dim2)
        trace = None
    else:
        report, trace = run_seedfree(g1, g2, _config(args, args.dim2))
    body = _report_body(report, trace)
    body.update(schema=1, manifest=manifest(args, [args.a1, args.a2]))
    out = Path(args.out)
    files = {out / "report.json": dumps(body).encode()}
    if args.shifts_csv:
        d = report.Yhat.shape[1]
        mask = report.unshifted_mask
        rows = [
            [k, float(report.T[k]), float(report.p[k]), int(not mask[k])] + [float(x) for x in report.Yhat[k]]
            for k in range(report.n)
        ]
        files[out / "shifts.csv"] = csv_bytes(["vertex", "T", "p", "shifted"] + [f"y{j}" for j in range(d)], rows)
    return files


def cmd_simulate(args) -> dict[Path, bytes]:
    if not 0 <= args.shift_frac <= 1:
        raise InputError(f"--shift-frac must lie in [0, 1], got {args.shift_frac}")
    if args.n is None:
        args.n = 200
    if args.n < 2:
        raise InputError("--n must be at least 2")
    if args.model == "rdpg":
        sc = make_rdpg_scenario(args.n, args.d, args.shift_frac, args.rng_seed)
    elif args.model == "sbm":
        sc = make_sbm_scenario(args.n, SBM_B, args.shift_frac, args.rng_seed)
    elif args.model == "grdpg":
        sc = make_sbm_scenario(args.n, GRDPG_B, args.shift_frac, args.rng_seed)
    else:
        sc = make_rank_mismatch_scenario(args.n, SBM_B, args.shift_frac, args.rng_seed)
    g1, g2 = sample_pair(sc, args.rng_seed)
    out = Path(args.out)
    ext = ".mtx" if args.format == "mtx" else ".tsv"
    files = {}
    for name, g in (("g1", g1), ("g2", g2)):
        files[out / f"{name}{ext}"] = graph_bytes(g, ext)
    truth = {
        "schema": 1,
        "model": args.model,
        "n": sc.n,
        "unshifted": sc.unshifted,
        "shifted": sc.shifted,
        "signature1": list(sc.model1.signature),
        "signature2": list(sc.model2.signature),
        "X1": sc.model1.X,
        "X2": sc.model2.X,
        "W_true": sc.W_true,
        "Y_true": sc.Y_true,
        "blocks1": sc.blocks1,
        "blocks2": sc.blocks2,
        "manifest": manifest(args),
    }
    files[out / "truth.json"] = dumps(truth).encode()
    return files


def _mirror_inputs(args) -> list[str]:
    paths = list(args.graphs)
    if args.glob:
        paths += sorted(glob.glob(args.glob))
    if len(paths) < 2:
        raise InputError("mirror needs at least two graph files")
    return paths


def cmd_mirror(args) -> dict[Path, bytes]:
    paths = _mirror_inputs(args)
    graphs = [read_graph(p, args.n) for p in paths]
    n = graphs[0].n
    for p, g in zip(paths, graphs):
        if g.n != n:
            raise InputError(f"{p} has {g.n} vertices, {paths[0]} has {n}")
    if args.vertex is not None and not 0 <= args.vertex < n:
        raise InputError(f"--vertex {args.vertex} out of range for n={n}")
    labels = [Path(p).stem for p in paths]
    curve = build_mirror(graphs, _config(args), r=args.r, vertex=args.vertex, labels=labels)
    body = {
        "schema": 1,
        "mode": "network" if args.vertex is None else "vertex",
        "vertex": args.vertex,
        "labels": list(curve.labels),
        "D": curve.D,
        "points": curve.points,
        "iso": curve.iso,
        "manifest": manifest(args, paths),
    }
    return {Path(args.out) / "mirror.json": dumps(body).encode()}


def cmd_embed(args) -> dict[Path, bytes]:
    g = read_graph(args.graph, args.n)
    values = scree(g)
    selected = None
    if args.dim == "auto":
        selected = select_dimension(values, max_d=min(args.max_dim, g.n - 1))
        sig = (selected, 0)
    else:
        sig = _signature(parse_dim(args.dim))
    e = embed(g, *sig)
    out = Path(args.out)
    files = {
        out / "eigenvalues.csv": csv_bytes(["index", "eigenvalue"], [[i, float(v)] for i, v in enumerate(values)]),
        out / "embedding.csv": csv_bytes([f"x{j}" for j in range(e.d)], [[float(x) for x in row] for row in e.Xhat]),
    }
    files[out / "embedding.json"] = dumps(
        {
            "schema": 1,
            "n": g.n,
            "signature": list(e.signature),
            "selected_dim": selected,
            "eigvals": e.eigvals,
            "manifest": manifest(args, [args.graph]),
        }
    ).encode()
    return files


def _add_seedfree_args(p):
    p.add_argument("--dim", type=parse_dim, default=3, help="embedding dimension D or signature D_PLUS,D_MINUS")
    p.add_argument("--alpha", type=float, default=0.05, help="FDR level")
    p.add_argument("--candidates", type=int, default=1000, help="number of candidate seed sets M")
    p.add_argument("--seed-size", type=int, default=None, help="candidate seed set size L (default: dimension)")
    p.add_argument("--filter-alpha", type=float, default=0.3, help="pairwise filter level")
    p.add_argument("--sampling", choices=["uniform_random", "feasible_direct"], default="uniform_random")
    p.add_argument("--rng-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netshift", description="Vertex-wise shift detection between networks.")
    parser.add_argument("--version", action="version", version=f"netshift {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker threads (env NETSHIFT_THREADS)")
        p.add_argument("--n", type=int, default=None, help="vertex count for edge-list inputs")

    p = sub.add_parser("compare", help="compare two networks on the same vertex set")
    p.add_argument("--a1", required=True, help="network 1 (.mtx or TSV edge list)")
    p.add_argument("--a2", required=True, help="network 2")
    p.add_argument("--dim2", type=parse_dim, default=None, help="dimension of network 2 if different")
    p.add_argument("--seeds", type=parse_seeds, default=None, help="comma-separated known unshifted vertices")
    p.add_argument("--shifts-csv", action="store_true", help="also write shifts.csv")
    _add_seedfree_args(p)
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="sample a pair of networks with planted shifts")
    p.add_argument("--model", choices=["rdpg", "sbm", "grdpg", "rankmix"], required=True)
    p.add_argument("--d", type=int, default=3, help="latent dimension for rdpg")
    p.add_argument("--shift-frac", type=float, default=0.5)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--format", choices=["mtx", "tsv"], default="mtx")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mirror", help="mirror curve of a sequence of networks")
    p.add_argument("graphs", nargs="*", help="graph files in time order")
    p.add_argument("--glob", default=None, help="glob pattern for graph files (sorted)")
    p.add_argument("--vertex", type=int, default=None, help="per-vertex distances for this vertex")
    p.add_argument("--r", type=int, default=2, help="CMDS dimension")
    _add_seedfree_args(p)
    common(p)
    p.set_defaults(func=cmd_mirror)

    p = sub.add_parser("embed", help="adjacency spectral embedding of one network")
    p.add_argument("--graph", required=True)
    p.add_argument("--dim", default="auto", help="D, D_PLUS,D_MINUS, or auto")
    p.add_argument("--max-dim", type=int, default=20, help="largest dimension considered by auto")
    common(p)
    p.set_defaults(func=cmd_embed)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        args.threads = resolve_threads(args.threads)
        if args.command == "embed" and args.dim != "auto":
            parse_dim(args.dim)
        files = args.func(args)
    except argparse.ArgumentTypeError as exc:
        print(f"netshift: error: {exc}", file=sys.stderr)
        return 2
    except BAD_INPUT as exc:
        print(f"netshift: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"netshift: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for path, data in files.items():
        atomic_write(path, data)
    return 0


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
