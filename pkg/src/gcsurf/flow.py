"""Dirichlet-energy placement of subdivided vertices and subdivision stepping.

Inner vertices of each refined n-gon solve the cyclic tridiagonal system

        (3 I - T - T^t) q = b,        T = cyclic shift,

coordinatewise, where b holds the parent circuit positions.  The solver
below runs the Thomas algorithm on a Sherman-Morrison splitting of the
cyclic matrix; factorizations are cached per n and applied to whole
batches of faces at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Mapping

import numpy as np

from .graph import Edge, SurfaceGraph, undirected
from .metrics import StepMetrics, dirichlet_energy, hausdorff_distance
from .subdivide import Provenance, gc_subdivide


class VertexCapError(RuntimeError):
    """Predicted vertex count of a run exceeds the configured cap."""


class StepMode(str, Enum):
    ORIGINAL = "original"
    MODIFIED = "modified"


def gc_eigenvalues(n: int) -> np.ndarray:
    """Eigenvalues 1 / (1 + 4 sin^2(k pi / n)) of A(n), k = 0..n-1."""
    if n < 3:
        raise ValueError(f"face size must be at least 3, got {n}")
    k = np.arange(n)
    return 1.0 / (1.0 + 4.0 * np.sin(k * np.pi / n) ** 2)


@lru_cache(maxsize=None)
def _cyclic_factorization(n: int):
    """Thomas factorization data for the Sherman-Morrison split of 3I - T - T^t.

    The cyclic matrix A (diag 3, off-diagonal and corners -1) is written as
    M + u v^t with M = tridiag(-1, [2,3,...,3,2], -1), u = v = e_0 - e_{n-1}.
    Returns (w, z, denom): modified pivots w, the cached solve z = M^-1 u and
    the Sherman-Morrison denominator 1 + v.z .
    """
    if n < 3:
        raise ValueError(f"face size must be at least 3, got {n}")
    d = np.full(n, 3.0)
    d[0] = d[-1] = 2.0
    w = np.empty(n)
    w[0] = d[0]
    for i in range(1, n):
        w[i] = d[i] - 1.0 / w[i - 1]
    u = np.zeros(n)
    u[0] = 1.0
    u[-1] = -1.0
    z = _thomas_apply(w, u)
    denom = 1.0 + (z[0] - z[-1])
    return w, z, denom


def _thomas_apply(w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve tridiag(-1, d, -1) x = b given the modified pivots w (systems on the last axis)."""
    n = w.shape[0]
    y = np.empty_like(b, dtype=float)
    y[..., 0] = b[..., 0]
    for i in range(1, n):
        y[..., i] = b[..., i] + y[..., i - 1] / w[i - 1]
    x = np.empty_like(y)
    x[..., n - 1] = y[..., n - 1] / w[n - 1]
    for i in range(n - 2, -1, -1):
        x[..., i] = (y[..., i] + x[..., i + 1]) / w[i]
    return x


def solve_cyclic(rhs: np.ndarray) -> np.ndarray:
    """Solve (3I - T - T^t) q = rhs with the system running along the last axis."""
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[-1]
    w, z, denom = _cyclic_factorization(n)
    y = _thomas_apply(w, rhs)
    correction = (y[..., 0] - y[..., -1]) / denom
    return y - correction[..., None] * z


@dataclass(frozen=True)
class FaceSystem:
    """Boundary data of one face-local Dirichlet problem: n parent positions in circuit order."""

    n: int
    rhs: np.ndarray

    def __post_init__(self):
        rhs = np.asarray(self.rhs, dtype=float)
        if self.n < 3:
            raise ValueError(f"face size must be at least 3, got {self.n}")
        if rhs.shape[0] != self.n:
            raise ValueError(f"rhs has {rhs.shape[0]} rows, expected {self.n}")
        object.__setattr__(self, "rhs", rhs)


def solve_face(system: FaceSystem | np.ndarray) -> np.ndarray:
    """Energy-minimizing inner polygon for one face's boundary positions.

    Input is the parent circuit as an (n, d) array (or a FaceSystem); the
    result solves -q_{i-1} + 3 q_i - q_{i+1} = b_i coordinatewise, i.e.
    q = A(n) b.
    """
    rhs = system.rhs if isinstance(system, FaceSystem) else np.asarray(system, dtype=float)
    if rhs.ndim != 2 or rhs.shape[0] < 3:
        raise ValueError("expected an (n >= 3, d) array of circuit positions")
    return solve_cyclic(rhs.T).T


@dataclass(frozen=True)
class Embedding:
    """Vertex positions realizing a SurfaceGraph in R^3.

    ``coords`` rows follow ``graph.vertices`` order.  For periodic graphs,
    ``lattice`` rows are the translation vectors and ``edge_offsets`` holds
    integer lattice coefficients per (normalized) edge, oriented from the
    smaller to the larger vertex id.
    """

    graph: SurfaceGraph
    coords: np.ndarray
    lattice: np.ndarray | None = None
    edge_offsets: dict[Edge, tuple[int, int, int]] | None = None

    @classmethod
    def from_positions(
        cls,
        graph: SurfaceGraph,
        positions: Mapping[int, np.ndarray],
        lattice: np.ndarray | None = None,
        edge_offsets: Mapping[Edge, tuple[int, int, int]] | None = None,
    ) -> "Embedding":
        missing = [v for v in graph.vertices if v not in positions]
        if missing:
            raise ValueError(f"positions missing for vertices {missing[:5]}")
        coords = np.array([positions[v] for v in graph.vertices], dtype=float)
        return cls(graph, coords, lattice, dict(edge_offsets) if edge_offsets else None).validated()

    def validated(self) -> "Embedding":
        if self.coords.shape != (len(self.graph.vertices), 3):
            raise ValueError(f"coords shape {self.coords.shape} does not match vertex count")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("positions must be finite")
        if self.lattice is not None and np.asarray(self.lattice).shape != (3, 3):
            raise ValueError("lattice must be three 3-vectors")
        return self

    @property
    def vertex_index(self) -> dict[int, int]:
        idx = self.__dict__.get("_vertex_index")
        if idx is None:
            idx = {v: i for i, v in enumerate(self.graph.vertices)}
            self.__dict__["_vertex_index"] = idx
        return idx

    def position(self, v: int) -> np.ndarray:
        return self.coords[self.vertex_index[v]]

    @property
    def positions(self) -> dict[int, np.ndarray]:
        return {v: self.coords[i] for i, v in enumerate(self.graph.vertices)}

    def edge_list(self) -> list[Edge]:
        return sorted(self.graph.edges)

    def edge_vectors(self, edges: list[Edge] | None = None) -> np.ndarray:
        """Resolved edge vectors (periodic offsets applied), one row per edge."""
        edges = self.edge_list() if edges is None else edges
        idx = self.vertex_index
        a = np.array([idx[e[0]] for e in edges], dtype=int)
        b = np.array([idx[e[1]] for e in edges], dtype=int)
        vec = self.coords[b] - self.coords[a]
        if self.lattice is not None and self.edge_offsets:
            off = np.array([self.edge_offsets.get(e, (0, 0, 0)) for e in edges], dtype=float)
            vec = vec + off @ np.asarray(self.lattice, dtype=float)
        return vec

    def neighbor_position(self, v: int, u: int) -> np.ndarray:
        """Position of neighbor u as seen from v's representative (periodic-aware)."""
        p = self.position(u).copy()
        if self.lattice is not None and self.edge_offsets:
            e = undirected(v, u)
            off = np.asarray(self.edge_offsets.get(e, (0, 0, 0)), dtype=float)
            if e[0] == v:
                p = p + off @ np.asarray(self.lattice, dtype=float)
            else:
                p = p - off @ np.asarray(self.lattice, dtype=float)
        return p

    def bbox_diagonal(self) -> float:
        return float(np.linalg.norm(self.coords.max(axis=0) - self.coords.min(axis=0)))


def restrict_embedding(emb: Embedding, subgraph: SurfaceGraph) -> Embedding:
    """Restrict an embedding to a subgraph (used for leaf patches)."""
    coords = np.array([emb.position(v) for v in subgraph.vertices])
    offsets = None
    if emb.edge_offsets:
        offsets = {e: emb.edge_offsets[e] for e in subgraph.edges if e in emb.edge_offsets}
    return Embedding(subgraph, coords, emb.lattice, offsets)


def _unrolled_rhs(emb: Embedding, circuit: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Circuit positions unrolled into one affine frame; returns (rhs, cumulative offsets)."""
    L = np.asarray(emb.lattice, dtype=float)
    idx = emb.vertex_index
    n = len(circuit)
    cum = np.zeros((n, 3))
    for j in range(1, n):
        u, v = circuit[j - 1], circuit[j]
        e = undirected(u, v)
        off = np.asarray(emb.edge_offsets.get(e, (0, 0, 0)) if emb.edge_offsets else (0, 0, 0), dtype=float)
        step = off if e[0] == u else -off
        cum[j] = cum[j - 1] + step
    rhs = emb.coords[[idx[v] for v in circuit]] + cum @ L
    return rhs, cum


def subdivide_step(
    emb: Embedding,
    mode: StepMode | str = StepMode.MODIFIED,
    hausdorff_sampling: int | None = 8,
) -> tuple[Embedding, Provenance, StepMetrics]:
    """One full Goldberg-Coxeter subdivision step of an embedded surface.

    Topology is refined first; inner vertices are then placed by the
    face-local Dirichlet solves with the parent circuit fixed.  In modified
    mode every interior parent vertex is afterwards replaced by the
    barycenter of its three inner-copy neighbors; boundary vertices never
    move in either mode.
    """
    mode = StepMode(mode)
    graph = emb.graph
    child, prov = gc_subdivide(graph)
    n_parent = len(graph.vertices)
    child_coords = np.empty((len(child.vertices), 3))
    child_coords[:n_parent] = emb.coords
    # inner ids are consecutive above all parent ids, so child row = offset + order
    first_inner_id = graph.vertices[-1] + 1

    def inner_row(inner_id):
        return n_parent + inner_id - first_inner_id

    child_offsets: dict[Edge, tuple[int, int, int]] = {}
    periodic = emb.lattice is not None
    energy_before = dirichlet_energy(emb)
    per_face_contraction: dict[int, float] = {}

    if not periodic:
        idx = emb.vertex_index
        by_size: dict[int, list[int]] = {}
        for fid, f in enumerate(graph.faces):
            by_size.setdefault(len(f), []).append(fid)
        for n, fids in sorted(by_size.items()):
            rows = np.array([[idx[v] for v in graph.faces[fid]] for fid in fids], dtype=int)
            rhs = emb.coords[rows]  # (m, n, 3)
            sol = solve_cyclic(np.swapaxes(rhs, 1, 2))
            sol = np.swapaxes(sol, 1, 2)
            inner_rows = np.array(
                [[inner_row(prov.inner_vertex_of[(fid, i)]) for i in range(n)] for fid in fids],
                dtype=int,
            )
            child_coords[inner_rows] = sol
            ring_e = np.square(np.linalg.norm(np.roll(sol, -1, axis=1) - sol, axis=2)).sum(axis=1)
            spoke_e = np.square(np.linalg.norm(rhs - sol, axis=2)).sum(axis=1)
            face_e = np.square(np.linalg.norm(np.roll(rhs, -1, axis=1) - rhs, axis=2)).sum(axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(face_e > 0, (ring_e + spoke_e) / face_e, np.nan)
            for fid, r in zip(fids, ratios):
                per_face_contraction[fid] = float(r)
    else:
        L = np.asarray(emb.lattice, dtype=float)
        Linv = np.linalg.inv(L)
        for fid, f in enumerate(graph.faces):
            n = len(f)
            rhs, cum = _unrolled_rhs(emb, f)
            sol = solve_face(rhs)
            frac = sol @ Linv
            shift = np.floor(frac)
            stored = (frac - shift) @ L
            inner_ids = [prov.inner_vertex_of[(fid, i)] for i in range(n)]
            child_coords[[inner_row(i) for i in inner_ids]] = stored
            for i in range(n):
                w, wn = inner_ids[i], inner_ids[(i + 1) % n]
                off = shift[(i + 1) % n] - shift[i]
                e = undirected(w, wn)
                o = off if e[0] == w else -off
                if np.any(o):
                    child_offsets[e] = tuple(int(x) for x in o)
                spoke = undirected(f[i], inner_ids[i])
                so = shift[i] - cum[i]
                so = so if spoke[0] == f[i] else -so
                if np.any(so):
                    child_offsets[spoke] = tuple(int(x) for x in so)
            ring_e = float(np.square(np.linalg.norm(np.roll(sol, -1, axis=0) - sol, axis=1)).sum())
            spoke_e = float(np.square(np.linalg.norm(rhs - sol, axis=1)).sum())
            face_e = float(np.square(np.linalg.norm(np.roll(rhs, -1, axis=0) - rhs, axis=1)).sum())
            per_face_contraction[fid] = (ring_e + spoke_e) / face_e if face_e else float("nan")

    child_emb = Embedding(child, child_coords, emb.lattice, child_offsets or None)

    if mode is StepMode.MODIFIED:
        slots: dict[int, list[int]] = {}
        for (fid, i), w in prov.inner_vertex_of.items():
            v = graph.faces[fid][i]
            slots.setdefault(v, []).append(w)
        vidx = emb.vertex_index
        for v in graph.interior:
            ws = slots.get(v, [])
            if len(ws) != 3:
                continue
            pts = np.array([child_emb.neighbor_position(v, w) for w in ws])
            child_coords[vidx[v]] = pts.mean(axis=0)

    energy_after = dirichlet_energy(child_emb)
    d_h = float("nan")
    if hausdorff_sampling is not None and not periodic:
        d_h = hausdorff_distance(emb, child_emb, sampling=hausdorff_sampling)
    census = graph.face_size_census()
    max_l1 = max(float(gc_eigenvalues(n)[1]) for n in census) if census else float("nan")
    metrics = StepMetrics(
        energy_before=energy_before,
        energy_after=energy_after,
        hausdorff_to_parent=d_h,
        per_face_contraction=per_face_contraction,
        max_lambda1=max_l1,
    )
    return child_emb, prov, metrics


@dataclass
class SubdivisionRun:
    """A sequence of subdivided embeddings M_0..M_k with per-step metrics."""

    embeddings: list[Embedding]
    provenances: list[Provenance]
    metrics: list[StepMetrics]
    mode: StepMode
    lambda1: float = field(default=float("nan"))
    cauchy_E: float = field(default=float("nan"))
    cauchy_Lambda: float = field(default=float("nan"))

    def energies(self) -> list[float]:
        if not self.metrics:
            return [dirichlet_energy(self.embeddings[0])]
        return [self.metrics[0].energy_before] + [m.energy_after for m in self.metrics]

    def hausdorff_steps(self) -> list[float]:
        return [m.hausdorff_to_parent for m in self.metrics]

    def vertex_counts(self) -> list[int]:
        return [len(e.graph.vertices) for e in self.embeddings]


def _cauchy_constants(emb: Embedding) -> tuple[float, float, float]:
    """Constants lambda1 = max lambda_1(n), E = max sqrt(2 n E_D(f)), Lambda = (1+sqrt l)/(1-l)."""
    graph = emb.graph
    if not graph.faces:
        return float("nan"), float("nan"), float("nan")
    lam = max(float(gc_eigenvalues(len(f))[1]) for f in graph.faces)
    e_max = 0.0
    for f in graph.faces:
        rhs, _ = (_unrolled_rhs(emb, f) if emb.lattice is not None else (emb.coords[[emb.vertex_index[v] for v in f]], None))
        fe = float(np.square(np.linalg.norm(np.roll(rhs, -1, axis=0) - rhs, axis=1)).sum())
        e_max = max(e_max, math.sqrt(2 * len(f) * fe))
    return lam, e_max, (1 + math.sqrt(lam)) / (1 - lam) if lam < 1 else float("inf")


def iterate(
    emb: Embedding,
    steps: int,
    mode: StepMode | str = StepMode.MODIFIED,
    vertex_cap: int = 2_000_000,
    hausdorff_sampling: int | None = 8,
) -> SubdivisionRun:
    """Run ``steps`` subdivision steps, guarding predicted vertex counts."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    mode = StepMode(mode)
    lam, e_max, lam_factor = _cauchy_constants(emb)
    run = SubdivisionRun([emb], [], [], mode, lam, e_max, lam_factor)
    cur = emb
    for _ in range(steps):
        predicted = len(cur.graph.vertices) + sum(len(f) for f in cur.graph.faces)
        if predicted > vertex_cap:
            raise VertexCapError(
                f"next step needs {predicted} vertices, above the cap of {vertex_cap}"
            )
        cur, prov, m = subdivide_step(cur, mode, hausdorff_sampling)
        run.embeddings.append(cur)
        run.provenances.append(prov)
        run.metrics.append(m)
    return run
