"""Command-line driver: generate graphs, run subdivisions, report curvature.

Subdivision runs are persisted as directories of per-step graph files plus
metrics.csv; the report path also renders energy/Hausdorff figures next to
the delimited output.

Exit codes: 0 success, 2 validation failure, 3 resource cap, 4 I/O.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .flow import StepMode, VertexCapError, iterate, restrict_embedding
from .generators import FIXTURES, fixture, generate_c60, generate_hex_patch
from .graph import LeafExtractionError, StructuralError, extract_leaf, validate
from .graphio import GraphFileError, export_metrics_csv, load_graph, save_graph
from .metrics import curvature_report, energy_bound, hausdorff_error_bound
from .subdivide import BranchedGraphError

FIXTURE_ENV = "GCSURF_FIXTURES"


def _resolve_input(spec: str):
    """Load a graph file path, or build a fixture via ``fixture:<id>``."""
    if spec.startswith("fixture:"):
        return _fixture_embedding(spec.split(":", 1)[1])
    _, emb = load_graph(spec)
    return emb


def _fixture_embedding(name: str):
    override = os.environ.get(FIXTURE_ENV)
    if override:
        candidate = Path(override) / f"{name}.graph.txt"
        if candidate.exists():
            return load_graph(candidate)[1]
    return fixture(name)


def cmd_generate(args) -> int:
    name = args.name
    if name == "c60":
        emb = generate_c60(args.radius)
    elif name == "hexpatch":
        emb = generate_hex_patch(args.rings, args.edge_length)
    elif name.startswith("fixture:"):
        emb = _fixture_embedding(name.split(":", 1)[1])
    else:
        raise ValueError(f"unknown generator {name!r}; use c60, hexpatch or fixture:<id> "
                         f"with ids {sorted(FIXTURES)}")
    out = args.out or f"{name.replace(':', '-')}.graph.txt"
    save_graph(out, emb)
    print(f"wrote {out}: V={len(emb.graph.vertices)} E={len(emb.graph.edges)} F={len(emb.graph.faces)}")
    return 0


def cmd_subdivide(args) -> int:
    emb = _resolve_input(args.input)
    report = validate(emb.graph)
    if report.branched_edges:
        worst = report.branched_edges[0]
        raise BranchedGraphError(
            f"input is branched ({len(report.branched_edges)} edges in more than 2 faces, "
            f"e.g. edge {worst[0]} in {worst[1]}); subdivide a leaf instead (--leaf or a leaf fixture)"
        )
    if not report.trivalent:
        raise StructuralError("input is not trivalent")
    if args.leaf is not None:
        leaf = extract_leaf(emb.graph, args.leaf)
        emb = restrict_embedding(emb, leaf.subgraph)
    run = iterate(
        emb,
        steps=args.steps,
        mode=StepMode(args.mode),
        vertex_cap=args.vertex_cap,
        hausdorff_sampling=args.sampling,
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for i, step_emb in enumerate(run.embeddings):
        if len(step_emb.graph.vertices) <= args.elide_above:
            save_graph(outdir / f"step_{i:03d}.graph.txt", step_emb)
    export_metrics_csv(run, outdir / "metrics.csv")
    if not args.no_figures:
        _render_figures(run, outdir)
    energies = run.energies()
    print(f"# mode={run.mode.value} lambda1={run.lambda1:.6g} "
          f"cauchy_E={run.cauchy_E:.6g} cauchy_Lambda={run.cauchy_Lambda:.6g}")
    if args.steps >= 1:
        bound = hausdorff_error_bound(run.embeddings[0], run.embeddings[-1], args.sampling)
        print(f"# hausdorff sampling error bound: {bound:.6g}")
    print("step vertices energy hausdorff")
    for i, emb_i in enumerate(run.embeddings):
        d_h = "-" if i == 0 else f"{run.metrics[i - 1].hausdorff_to_parent:.9g}"
        print(f"{i} {len(emb_i.graph.vertices)} {energies[i]:.9g} {d_h}")
    return 0


def _render_figures(run, outdir: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    steps = list(range(len(run.embeddings)))
    energies = run.energies()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(steps, energies, "o-", label="measured $E_D$")
    census = run.embeddings[0].graph.face_size_census()
    if any(n != 6 for n in census):
        ax.plot(steps, energy_bound(run), "s--", label="census bound")
    ax.set_xlabel("subdivision step")
    ax.set_ylabel("Dirichlet energy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(outdir / "energy.png", dpi=150)
    plt.close(fig)

    d_h = [m.hausdorff_to_parent for m in run.metrics]
    if d_h and all(x == x for x in d_h):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.semilogy(range(1, len(d_h) + 1), d_h, "o-", label="$d_H(M_i, M_{i+1})$")
        if not math.isnan(run.cauchy_E):
            envelope = [run.cauchy_E * run.lambda1 ** ((i + 1) / 2) for i in range(len(d_h))]
            ax.semilogy(range(1, len(d_h) + 1), envelope, "--", label="geometric envelope")
        ax.set_xlabel("subdivision step")
        ax.set_ylabel("Hausdorff step distance")
        ax.legend()
        fig.tight_layout()
        fig.savefig(outdir / "hausdorff.png", dpi=150)
        plt.close(fig)


def cmd_curvature(args) -> int:
    emb = _resolve_input(args.input)
    validate(emb.graph)
    report = curvature_report(emb)
    if args.csv:
        import csv as _csv

        with open(args.csv, "w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(
                ["vertex", "K", "H", "abs_H", "balancing", "minimality", "defined", "boundary"]
            )
            for i, v in enumerate(report.vertex_ids):
                writer.writerow(
                    [
                        v,
                        f"{report.gauss[i]:.12g}",
                        f"{report.mean[i]:.12g}",
                        f"{abs(report.mean[i]):.12g}",
                        f"{report.balancing[i]:.12g}",
                        f"{report.minimality[i]:.12g}",
                        int(report.defined[i]),
                        int(report.boundary[i]),
                    ]
                )
    k_min, k_max = report.gauss_range()
    h_min, h_max = report.mean_abs_range()
    bal = report.balancing[~np.isnan(report.balancing) & ~report.boundary]
    print("quantity min max")
    if report.defined.any():
        print(f"K {k_min:+.12f} {k_max:+.12f}")
        print(f"|H| {h_min:+.12f} {h_max:+.12f}")
    if bal.size:
        print(f"balancing_median {np.median(bal):.3e}")
        print(f"balancing_max {bal.max():.3e}")
    print(f"defined_vertices {int(report.defined.sum())} of {len(report.vertex_ids)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcsurf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a built-in graph or fixture to a file")
    p.add_argument("name", help="c60 | hexpatch | fixture:<id>")
    p.add_argument("--radius", type=float, default=1.0, help="c60 circumradius")
    p.add_argument("--rings", type=int, default=2, help="hexpatch ring count")
    p.add_argument("--edge-length", type=float, default=1.0, help="hexpatch edge length")
    p.add_argument("--out", default=None, help="output path (default <name>.graph.txt)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("subdivide", help="run GC subdivision steps and persist the run")
    p.add_argument("input", help="graph file path or fixture:<id>")
    p.add_argument("--steps", type=int, default=3)
    p.add_argument("--mode", choices=["original", "modified"], default="modified")
    p.add_argument("--vertex-cap", type=int, default=2_000_000)
    p.add_argument("--sampling", type=int, default=8, help="Hausdorff points per edge")
    p.add_argument("--out", required=True, help="run directory")
    p.add_argument("--leaf", type=int, default=None, help="subdivide the leaf of this face id")
    p.add_argument("--elide-above", type=int, default=500_000,
                   help="skip writing graph files for steps with more vertices than this")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_subdivide)

    p = sub.add_parser("curvature", help="per-vertex curvature and residual report")
    p.add_argument("input", help="graph file path or fixture:<id>")
    p.add_argument("--csv", default=None, help="write per-vertex table to this path")
    p.set_defaults(func=cmd_curvature)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VertexCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (GraphFileError, StructuralError, BranchedGraphError, LeafExtractionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
