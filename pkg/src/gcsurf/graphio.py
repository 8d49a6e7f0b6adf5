"""Text graph format, OBJ export and CSV metrics export.

The graph format is line oriented and diff friendly:

    gcsurf-graph 1
    LATTICE ax ay az          (optional, exactly three lines when present)
    VERT id x y z [B]         (B marks a boundary vertex)
    EDGE u v [ox oy oz]       (integer lattice offsets, omitted when zero)
    FACE v0 v1 ... v(n-1)     (cyclic circuit)

Floats are written with repr, so positions round-trip exactly.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .flow import Embedding, SubdivisionRun
from .graph import SurfaceGraph, undirected
from .metrics import curvature_report

FORMAT_HEADER = "gcsurf-graph 1"


class GraphFileError(ValueError):
    """Parse failure, reported with its line number."""


def save_graph(path, emb: Embedding) -> None:
    """Write an embedding in canonical order (deterministic bytes)."""
    graph = emb.graph
    lines = [FORMAT_HEADER]
    if emb.lattice is not None:
        for row in np.asarray(emb.lattice, dtype=float):
            lines.append("LATTICE " + " ".join(repr(float(x)) for x in row))
    for i, v in enumerate(graph.vertices):
        x, y, z = (repr(float(c)) for c in emb.coords[i])
        flag = " B" if v in graph.boundary else ""
        lines.append(f"VERT {v} {x} {y} {z}{flag}")
    for u, v in sorted(graph.edges):
        off = emb.edge_offsets.get((u, v)) if emb.edge_offsets else None
        if off and any(off):
            lines.append(f"EDGE {u} {v} {off[0]} {off[1]} {off[2]}")
        else:
            lines.append(f"EDGE {u} {v}")
    for f in graph.faces:
        lines.append("FACE " + " ".join(str(v) for v in f))
    Path(path).write_text("\n".join(lines) + "\n")


def load_graph(path) -> tuple[SurfaceGraph, Embedding]:
    """Parse a graph file; raises GraphFileError with line numbers on bad input."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != FORMAT_HEADER:
        raise GraphFileError(f"line 1: expected header {FORMAT_HEADER!r}")
    lattice_rows: list[list[float]] = []
    positions: dict[int, np.ndarray] = {}
    boundary: set[int] = set()
    edges: list[tuple[int, int]] = []
    offsets: dict[tuple[int, int], tuple[int, int, int]] = {}
    faces: list[list[int]] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        kind, args = tok[0], tok[1:]
        try:
            if kind == "LATTICE":
                if len(args) != 3:
                    raise ValueError("expected 3 components")
                lattice_rows.append([float(x) for x in args])
            elif kind == "VERT":
                if len(args) not in (4, 5):
                    raise ValueError("expected id x y z [B]")
                vid = int(args[0])
                if vid in positions:
                    raise ValueError(f"duplicate vertex {vid}")
                positions[vid] = np.array([float(x) for x in args[1:4]])
                if len(args) == 5:
                    if args[4] != "B":
                        raise ValueError(f"unknown vertex flag {args[4]!r}")
                    boundary.add(vid)
            elif kind == "EDGE":
                if len(args) not in (2, 5):
                    raise ValueError("expected u v [ox oy oz]")
                u, v = int(args[0]), int(args[1])
                e = undirected(u, v)
                edges.append(e)
                if len(args) == 5:
                    off = tuple(int(x) for x in args[2:])
                    offsets[e] = off if (u, v) == e else tuple(-x for x in off)
            elif kind == "FACE":
                if len(args) < 3:
                    raise ValueError("face needs at least 3 vertices")
                faces.append([int(x) for x in args])
            else:
                raise ValueError(f"unknown record {kind!r}")
        except ValueError as exc:
            raise GraphFileError(f"line {lineno}: {exc}") from None
    if lattice_rows and len(lattice_rows) != 3:
        raise GraphFileError(f"expected 3 LATTICE lines, found {len(lattice_rows)}")
    edge_set = set(edges)
    for i, f in enumerate(faces):
        n = len(f)
        for k in range(n):
            e = undirected(f[k], f[(k + 1) % n])
            if e not in edge_set:
                raise GraphFileError(f"face {f} references missing edge {e}")
    missing = [v for f in faces for v in f if v not in positions] + [
        v for e in edges for v in e if v not in positions
    ]
    if missing:
        raise GraphFileError(f"records reference vertices without VERT lines: {sorted(set(missing))[:5]}")
    graph = SurfaceGraph.make(
        faces=faces,
        edges=edge_set,
        vertices=positions.keys(),
        boundary=boundary,
    )
    lattice = np.array(lattice_rows) if lattice_rows else None
    emb = Embedding.from_positions(graph, positions, lattice, offsets or None)
    return graph, emb


def export_obj(target: Embedding | SubdivisionRun, path) -> None:
    """Write OBJ files: polygonal faces (not triangulated) plus line records.

    For a run, one file per step is written with a ``_step{i}`` suffix.
    """
    if isinstance(target, SubdivisionRun):
        p = Path(path)
        for i, emb in enumerate(target.embeddings):
            export_obj(emb, p.with_name(f"{p.stem}_step{i}{p.suffix or '.obj'}"))
        return
    emb = target
    graph = emb.graph
    row = {v: i + 1 for i, v in enumerate(graph.vertices)}
    lines = ["# gcsurf OBJ export"]
    for i in range(len(graph.vertices)):
        x, y, z = emb.coords[i]
        lines.append(f"v {x!r} {y!r} {z!r}")
    for f in graph.faces:
        lines.append("f " + " ".join(str(row[v]) for v in f))
    for u, v in sorted(graph.edges):
        lines.append(f"l {row[u]} {row[v]}")
    Path(path).write_text("\n".join(lines) + "\n")


CSV_COLUMNS = ["step", "vertex_count", "energy", "hausdorff", "K_min", "K_max", "H_min_abs", "H_max_abs"]


def export_metrics_csv(run: SubdivisionRun, path) -> None:
    """Per-step metrics table: energies, Hausdorff steps and curvature ranges."""
    energies = run.energies()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for i, emb in enumerate(run.embeddings):
            report = curvature_report(emb)
            k_min, k_max = report.gauss_range()
            h_min, h_max = report.mean_abs_range()
            d_h = "" if i == 0 else _fmt(run.metrics[i - 1].hausdorff_to_parent)
            writer.writerow(
                [
                    i,
                    len(emb.graph.vertices),
                    _fmt(energies[i]),
                    d_h,
                    _fmt(k_min),
                    _fmt(k_max),
                    _fmt(h_min),
                    _fmt(h_max),
                ]
            )


def _fmt(x: float) -> str:
    return "" if x != x else f"{x:.12g}"
