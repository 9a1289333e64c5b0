"""Command-line front end.

Exit codes: 0 success, 1 runtime error, 2 input error.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys

import numpy as np

from .criteria import (
    Criterion,
    DisconnectedGraphError,
    algebraic_connectivity,
    edge_weights,
    kirchhoff_index,
    largest_laplacian_eigenvalue,
    spanning_trees_log,
)
from .fim import FRAMES, edge_informations
from .graph import (
    PoseGraphError,
    average_degree,
    component_count,
    laplacian,
    read_pose_graph,
    write_pose_graph,
)
from .replay import ReplayConfig, complexity_probe, replay, summarize
from .report import markdown_row, write_records_csv, write_summary_json, write_summary_text
from .synth import INFO_MODELS, SynthSpec, synthesize

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("spectral_pgo")


class InputError(Exception):
    pass


def _load(args):
    try:
        return read_pose_graph(args.file, jitter=args.jitter)
    except OSError as exc:
        raise InputError(str(exc)) from None
    except PoseGraphError as exc:
        raise InputError(f"{args.file}: {exc}") from None


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def cmd_validate(args, out) -> int:
    g = _load(args)
    comps = component_count(g)
    out.write(f"n={g.n} m={g.m} {'connected' if comps == 1 else 'disconnected'} "
              f"d̄={round(average_degree(g), 3)}\n")
    out.write(f"components={comps}\n")
    out.write(f"duplicate_pairs={g.duplicate_pair_count()}\n")
    skipped = getattr(g, "skipped_tags", {})
    if skipped:
        out.write(f"skipped_records={sum(skipped.values())} {skipped}\n")
    if g.m == 0:
        return EXIT_OK
    ev = np.linalg.eigvalsh(g.infos)
    out.write(f"info_eigenvalues min={_fmt(ev.min())} max={_fmt(ev.max())}\n")
    norms = ev[:, -1]
    med = float(np.median(norms))
    anomalous = np.flatnonzero(norms > args.anomaly_factor * med)
    out.write(f"anomalous_edges={anomalous.size} (largest eigenvalue > {args.anomaly_factor:g} x median {_fmt(med)})\n")
    for j in anomalous:
        e = g.edges[j]
        out.write(f"  edge {j} ({g.ids[e.i]}-{g.ids[e.k]}, line {e.line}): {_fmt(norms[j])}\n")
    return EXIT_OK


def cmd_indices(args, out) -> int:
    g = _load(args)
    comps = component_count(g)
    if comps != 1:
        raise InputError(f"graph is disconnected ({comps} components)")
    if args.weighting == "unit":
        lap = laplacian(g)
    else:
        scheme = "infinity" if args.weighting == "inf" else Criterion.parse(args.weighting)
        lap = laplacian(g, edge_weights(edge_informations(g, args.frame), scheme))
    out.write(f"n={g.n} m={g.m} d̄={_fmt(average_degree(g))} weighting={args.weighting}\n")
    out.write(f"log_spanning_trees={_fmt(spanning_trees_log(lap))}\n")
    out.write(f"algebraic_connectivity={_fmt(algebraic_connectivity(lap))}\n")
    kirchhoff = _fmt(kirchhoff_index(lap)) if lap.is_unit else "n/a (weighted)"
    out.write(f"kirchhoff_index={kirchhoff}\n")
    out.write(f"largest_eigenvalue={_fmt(largest_laplacian_eigenvalue(lap))}\n")
    return EXIT_OK


def _parse_constant(text: str) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"--constant-fim: malformed value list {text!r}") from None
    sizes = {6: 3, 21: 6}
    if len(vals) not in sizes:
        raise InputError("--constant-fim needs 6 (2D) or 21 (3D) upper-triangular values")
    ell = sizes[len(vals)]
    mat = np.zeros((ell, ell))
    mat[np.triu_indices(ell)] = vals
    mat = mat + np.triu(mat, 1).T
    if np.linalg.eigvalsh(mat)[0] <= 0:
        raise InputError("--constant-fim matrix is not positive definite")
    return mat


def cmd_replay(args, out) -> int:
    g = _load(args)
    try:
        criteria = tuple(Criterion.parse(c) for c in args.criteria.split(",") if c.strip())
    except ValueError as exc:
        raise InputError(f"--criteria: {exc}") from None
    if args.constant_fim is not None:
        info = _parse_constant(args.constant_fim)
        if info.shape[0] != g.ell:
            raise InputError(f"--constant-fim is {info.shape[0]}x{info.shape[0]}, graph needs {g.ell}")
        kw = dict(weighting="constant", constant_info=info)
    else:
        kw = dict(weighting=args.weighting)
    try:
        config = ReplayConfig(criteria=criteria, frame=args.frame, stride=args.stride,
                              start=args.start, repetitions=args.repetitions, **kw)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    records = replay(g, config)
    if not records:
        raise RuntimeError("no step could be evaluated")
    summary = summarize(records)

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_records_csv(records, fh)
        sink = out
    else:
        write_records_csv(records, out)
        sink = sys.stderr
    if args.json:
        write_summary_json(summary, sink, config)
    else:
        write_summary_text(summary, sink, config)
    if args.markdown:
        sink.write(markdown_row(summary, os.path.basename(args.file)) + "\n")
    return EXIT_OK


def cmd_synth(args, out) -> int:
    try:
        spec = SynthSpec(nodes=args.nodes, dim=args.dim, loop_prob=args.loop_prob, span=args.span,
                         info=args.info, eta=args.eta, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    g = synthesize(spec)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            write_pose_graph(g, fh)
        out.write(f"wrote {args.out}: n={g.n} m={g.m}\n")
    else:
        write_pose_graph(g, out)
    return EXIT_OK


def cmd_probe(args, out) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",")]
    except ValueError:
        raise InputError(f"--sizes: malformed list {args.sizes!r}") from None
    if any(s < 2 for s in sizes):
        raise InputError("--sizes must all be >= 2")
    out.write("n,fim_time_ns,graph_time_ns,ratio\n")
    for row in complexity_probe(sorted(sizes), dim=args.dim, repetitions=args.repetitions):
        out.write(f"{row.n},{row.fim_time_ns},{row.graph_time_ns},{row.ratio:.3f}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spectral-pgo",
        description="Optimality criteria of pose-graph FIMs via graph connectivity indices.",
    )
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def with_file(sp):
        sp.add_argument("file")
        sp.add_argument("--jitter", action="store_true",
                        help="repair marginally indefinite edge information with a tiny diagonal")
        return sp

    v = with_file(sub.add_parser("validate", help="check a pose-graph file and report statistics"))
    v.add_argument("--anomaly-factor", type=float, default=1e3)
    v.set_defaults(func=cmd_validate)

    ix = with_file(sub.add_parser("indices", help="connectivity indices of the (weighted) graph"))
    ix.add_argument("--weighting", choices=["t", "d", "e", "emax", "inf", "unit"], default="unit")
    ix.add_argument("--frame", choices=FRAMES, default="world")
    ix.set_defaults(func=cmd_indices)

    r = with_file(sub.add_parser("replay", help="incremental FIM vs graph comparison"))
    r.add_argument("--criteria", default="emax,t,d,e")
    r.add_argument("--weighting", choices=["criterion", "infinity"], default="criterion")
    r.add_argument("--constant-fim", metavar="VALUES",
                   help="comma-separated upper-triangular entries of one FIM used for every edge")
    r.add_argument("--frame", choices=FRAMES, default="world")
    r.add_argument("--stride", type=int, default=1)
    r.add_argument("--start", type=int, default=3)
    r.add_argument("--repetitions", type=int, default=1)
    r.add_argument("--out", help="CSV output path (default: stdout, summary to stderr)")
    r.add_argument("--json", action="store_true", help="summary as JSON")
    r.add_argument("--markdown", action="store_true", help="append a one-row Markdown results table")
    r.set_defaults(func=cmd_replay)

    s = sub.add_parser("synth", help="generate a synthetic pose graph")
    s.add_argument("--nodes", type=int, default=100)
    s.add_argument("--dim", type=int, choices=[2, 3], default=2)
    s.add_argument("--loop-prob", type=float, default=0.0)
    s.add_argument("--span", type=int, default=None)
    s.add_argument("--info", choices=INFO_MODELS, default="diag")
    s.add_argument("--eta", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth)

    pr = sub.add_parser("probe", help="time both routes on synthetic chains")
    pr.add_argument("--sizes", default="100,200,400,800")
    pr.add_argument("--dim", type=int, choices=[2, 3], default=2)
    pr.add_argument("--repetitions", type=int, default=1)
    pr.set_defaults(func=cmd_probe)
    return p


def _thread_limit():
    value = os.environ.get("SPECTRAL_PGO_THREADS")
    if not value:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(int(value), 1))


def main(argv=None, out=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    out = out or sys.stdout
    try:
        with _thread_limit():
            return args.func(args, out)
    except (InputError, DisconnectedGraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - stable exit-code contract
        log.debug("unhandled error", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
