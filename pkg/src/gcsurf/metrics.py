"""Discrete curvature, energy, residuals, Hausdorff distances and run diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np
from scipy.spatial import cKDTree

from .graph import Edge

if TYPE_CHECKING:
    from .flow import Embedding, SubdivisionRun


@dataclass(frozen=True)
class StepMetrics:
    """Energies, per-face contraction ratios and Hausdorff distance of one step."""

    energy_before: float
    energy_after: float
    hausdorff_to_parent: float
    per_face_contraction: dict[int, float]
    max_lambda1: float


@dataclass(frozen=True)
class CurvatureReport:
    """Per-vertex normals, fundamental forms, curvatures and residuals.

    ``normal_defined`` marks vertices with a usable normal; ``defined`` marks
    vertices where the curvature formulas apply (interior, interior
    neighbors with defined normals, invertible first form).  The second
    fundamental form is kept as computed, without symmetrization.
    """

    vertex_ids: tuple[int, ...]
    normals: np.ndarray
    first_forms: np.ndarray
    second_forms: np.ndarray
    gauss: np.ndarray
    mean: np.ndarray
    balancing: np.ndarray
    minimality: np.ndarray
    boundary: np.ndarray
    normal_defined: np.ndarray
    defined: np.ndarray

    def gauss_range(self) -> tuple[float, float]:
        vals = self.gauss[self.defined]
        return (float(vals.min()), float(vals.max())) if vals.size else (math.nan, math.nan)

    def mean_abs_range(self) -> tuple[float, float]:
        vals = np.abs(self.mean[self.defined])
        return (float(vals.min()), float(vals.max())) if vals.size else (math.nan, math.nan)


def dirichlet_energy(emb: "Embedding", edges: Iterable[Edge] | None = None) -> float:
    """Sum of squared resolved edge lengths (unit weights), default all edges."""
    edge_list = emb.edge_list() if edges is None else [tuple(sorted(e)) for e in edges]
    if not edge_list:
        return 0.0
    vec = emb.edge_vectors(edge_list)
    return float(np.square(vec).sum())


def _edge_frame(emb: "Embedding"):
    """Rotation-ordered neighbor rows and resolved edge vectors for degree-3 vertices."""
    graph = emb.graph
    V = len(graph.vertices)
    idx = emb.vertex_index
    nb_rows = np.full((V, 3), -1, dtype=int)
    deg3 = np.zeros(V, dtype=bool)
    rot = graph.rotations
    for i, v in enumerate(graph.vertices):
        order = rot.get(v, ())
        if len(order) == 3:
            deg3[i] = True
            nb_rows[i] = [idx[u] for u in order]
    evecs = np.zeros((V, 3, 3))
    if emb.lattice is None or not emb.edge_offsets:
        evecs[deg3] = emb.coords[nb_rows[deg3]] - emb.coords[deg3][:, None, :]
    else:
        for i, v in enumerate(graph.vertices):
            if deg3[i]:
                for k, u in enumerate(rot[v]):
                    evecs[i, k] = emb.neighbor_position(v, u) - emb.coords[i]
    return deg3, nb_rows, evecs


def curvature_report(emb: "Embedding") -> CurvatureReport:
    """Vectorized curvature sweep over all vertices of an embedding."""
    graph = emb.graph
    V = len(graph.vertices)
    boundary = np.array([v in graph.boundary for v in graph.vertices], dtype=bool)
    deg3, nb_rows, e = _edge_frame(emb)

    cross = np.cross(e[:, 0], e[:, 1]) + np.cross(e[:, 1], e[:, 2]) + np.cross(e[:, 2], e[:, 0])
    norms = np.linalg.norm(cross, axis=1)
    scale = (
        np.linalg.norm(e[:, 0], axis=1) * np.linalg.norm(e[:, 1], axis=1)
        + np.linalg.norm(e[:, 1], axis=1) * np.linalg.norm(e[:, 2], axis=1)
        + np.linalg.norm(e[:, 2], axis=1) * np.linalg.norm(e[:, 0], axis=1)
    )
    normal_defined = deg3 & (norms > 1e-12 * np.maximum(scale, 1e-300))
    normals = np.zeros((V, 3))
    normals[normal_defined] = cross[normal_defined] / norms[normal_defined, None]

    balancing = np.full(V, np.nan)
    minimality = np.full(V, np.nan)
    balancing[deg3] = np.linalg.norm(e[deg3].sum(axis=1), axis=1)
    dots = (
        (e[:, 0] * e[:, 1]).sum(axis=1)
        + (e[:, 1] * e[:, 2]).sum(axis=1)
        + (e[:, 2] * e[:, 0]).sum(axis=1)
    )
    minimality[deg3] = np.abs(dots[deg3])

    interior = ~boundary
    ok = interior & deg3 & normal_defined
    nb_ok = np.zeros(V, dtype=bool)
    rows = np.where(deg3)[0]
    nb_interior = interior[nb_rows[rows]].all(axis=1)
    nb_normal = normal_defined[nb_rows[rows]].all(axis=1)
    nb_ok[rows] = nb_interior & nb_normal
    candidate = ok & nb_ok

    first = np.zeros((V, 2, 2))
    second = np.zeros((V, 2, 2))
    gauss = np.full(V, np.nan)
    mean = np.full(V, np.nan)
    defined = np.zeros(V, dtype=bool)
    if candidate.any():
        c = np.where(candidate)[0]
        a = e[c, 1] - e[c, 0]
        b = e[c, 2] - e[c, 0]
        n1 = normals[nb_rows[c, 0]]
        p = normals[nb_rows[c, 1]] - n1
        q = normals[nb_rows[c, 2]] - n1
        I = np.empty((len(c), 2, 2))
        I[:, 0, 0] = (a * a).sum(1)
        I[:, 0, 1] = I[:, 1, 0] = (a * b).sum(1)
        I[:, 1, 1] = (b * b).sum(1)
        II = np.empty((len(c), 2, 2))
        II[:, 0, 0] = -(a * p).sum(1)
        II[:, 0, 1] = -(a * q).sum(1)
        II[:, 1, 0] = -(b * p).sum(1)
        II[:, 1, 1] = -(b * q).sum(1)
        detI = I[:, 0, 0] * I[:, 1, 1] - I[:, 0, 1] ** 2
        trI = I[:, 0, 0] + I[:, 1, 1]
        nonsing = detI > 1e-16 * np.maximum(trI, 1e-300) ** 2
        detII = II[:, 0, 0] * II[:, 1, 1] - II[:, 0, 1] * II[:, 1, 0]
        trace = (
            I[:, 1, 1] * II[:, 0, 0]
            - I[:, 0, 1] * (II[:, 1, 0] + II[:, 0, 1])
            + I[:, 0, 0] * II[:, 1, 1]
        )
        k = np.where(nonsing, detII / np.where(nonsing, detI, 1.0), np.nan)
        h = np.where(nonsing, 0.5 * trace / np.where(nonsing, detI, 1.0), np.nan)
        first[c] = I
        second[c] = II
        gauss[c] = k
        mean[c] = h
        defined[c] = nonsing
    return CurvatureReport(
        vertex_ids=graph.vertices,
        normals=normals,
        first_forms=first,
        second_forms=second,
        gauss=gauss,
        mean=mean,
        balancing=balancing,
        minimality=minimality,
        boundary=boundary,
        normal_defined=normal_defined,
        defined=defined,
    )


def vertex_normal(emb: "Embedding", v: int) -> np.ndarray | None:
    """Unit normal at one vertex, or None when the cross-product sum degenerates."""
    report = _single_vertex_frame(emb, v)
    if report is None:
        return None
    e1, e2, e3 = report
    cross = np.cross(e1, e2) + np.cross(e2, e3) + np.cross(e3, e1)
    n = np.linalg.norm(cross)
    scale = (
        np.linalg.norm(e1) * np.linalg.norm(e2)
        + np.linalg.norm(e2) * np.linalg.norm(e3)
        + np.linalg.norm(e3) * np.linalg.norm(e1)
    )
    if n <= 1e-12 * max(scale, 1e-300):
        return None
    return cross / n


def _single_vertex_frame(emb: "Embedding", v: int):
    order = emb.graph.rotations.get(v, ())
    if len(order) != 3:
        return None
    p = emb.position(v)
    return tuple(emb.neighbor_position(v, u) - p for u in order)


def curvature(emb: "Embedding", v: int) -> tuple[float, float]:
    """(Gauss, mean) curvature at one vertex; (nan, nan) where undefined."""
    report = curvature_report(emb)
    i = emb.vertex_index[v]
    if not report.defined[i]:
        return (math.nan, math.nan)
    return float(report.gauss[i]), float(report.mean[i])


def balancing_residual(emb: "Embedding", v: int) -> float:
    """Norm of the outgoing edge-vector sum at a degree-3 vertex."""
    frame = _single_vertex_frame(emb, v)
    if frame is None:
        raise ValueError(f"vertex {v} does not have exactly 3 incident edges")
    return float(np.linalg.norm(frame[0] + frame[1] + frame[2]))


def minimality_residual(emb: "Embedding", v: int) -> float:
    """Absolute sum of pairwise edge inner products at a degree-3 vertex."""
    frame = _single_vertex_frame(emb, v)
    if frame is None:
        raise ValueError(f"vertex {v} does not have exactly 3 incident edges")
    e1, e2, e3 = frame
    return float(abs(e1 @ e2 + e2 @ e3 + e3 @ e1))


def _skeleton(emb: "Embedding", sampling: int):
    """Sample points of the embedded 1-skeleton plus its segment list.

    Every vertex position is included (isolated vertices count as degenerate
    segments), and each edge contributes ``sampling`` evenly spaced points.
    """
    coords = emb.coords
    segs_p = [coords]
    segs_q = [coords]
    seg_owner = [np.arange(len(coords))]
    samples = [coords]
    owners = [np.arange(len(coords))]
    edges = emb.edge_list()
    if edges:
        vec = emb.edge_vectors(edges)
        idx = emb.vertex_index
        a = np.array([idx[e[0]] for e in edges])
        p = coords[a]
        q = p + vec
        base = len(coords)
        segs_p.append(p)
        segs_q.append(q)
        seg_owner.append(np.arange(base, base + len(edges)))
        t = np.linspace(0.0, 1.0, sampling)[1:-1]
        if t.size:
            pts = p[:, None, :] + t[None, :, None] * vec[:, None, :]
            samples.append(pts.reshape(-1, 3))
            owners.append(np.repeat(np.arange(base, base + len(edges)), t.size))
    return (
        np.concatenate(samples),
        np.concatenate(owners),
        np.concatenate(segs_p),
        np.concatenate(segs_q),
    )


def _point_segment_distance(pts: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    d = q - p
    denom = np.maximum((d * d).sum(-1), 1e-300)
    t = np.clip(((pts - p) * d).sum(-1) / denom, 0.0, 1.0)
    closest = p + t[..., None] * d
    return np.linalg.norm(pts - closest, axis=-1)


def _directed_hausdorff(samples_a, samples_b, owner_b, seg_p, seg_q, k: int) -> float:
    tree = cKDTree(samples_b)
    kk = min(k, len(samples_b))
    _, j = tree.query(samples_a, k=kk)
    if kk == 1:
        j = j[:, None]
    segs = owner_b[j]
    d = _point_segment_distance(samples_a[:, None, :], seg_p[segs], seg_q[segs])
    return float(d.min(axis=1).max())


def hausdorff_distance(a: "Embedding", b: "Embedding", sampling: int = 8) -> float:
    """Symmetric Hausdorff distance between two embedded 1-skeletons.

    Edge samples on one side are measured against exact point-to-segment
    distances on the other; the sampling error is bounded by half the
    largest inter-sample spacing (see hausdorff_error_bound).
    """
    if sampling < 2:
        raise ValueError("sampling must be at least 2 points per edge")
    sa, oa, pa, qa = _skeleton(a, sampling)
    sb, ob, pb, qb = _skeleton(b, sampling)
    d_ab = _directed_hausdorff(sa, sb, ob, pb, qb, k=4)
    d_ba = _directed_hausdorff(sb, sa, oa, pa, qa, k=4)
    return max(d_ab, d_ba)


def hausdorff_error_bound(a: "Embedding", b: "Embedding", sampling: int = 8) -> float:
    """Largest inter-sample spacing: the reported distance is exact up to this."""
    worst = 0.0
    for emb in (a, b):
        edges = emb.edge_list()
        if edges:
            worst = max(worst, float(np.linalg.norm(emb.edge_vectors(edges), axis=1).max()) / (sampling - 1))
    return worst


def energy_bound(run: "SubdivisionRun") -> np.ndarray:
    """Per-step upper bounds on E_D from the initial face census.

    Evaluates E_D(M_0) + sum_n C_n (1 - lambda_1(n)^{2i}) / (1 - lambda_1(n)^2)
    with C_n = (lambda_1(n) - 1/2) N_n E_n over the non-hexagonal sizes n of
    M_0.  This is the telescoped per-step estimate; it is a certified upper
    bound whenever all non-hexagonal faces are larger than hexagons (all
    C_n >= 0), which covers the hexagon+octagon surfaces it is used on.
    For censuses with faces below size 6 the negative C_n terms make the
    formula an extrapolated trend rather than a guarantee.
    """
    from .flow import gc_eigenvalues

    m0 = run.embeddings[0]
    graph = m0.graph
    idx = m0.vertex_index
    per_size: dict[int, list[float]] = {}
    for f in graph.faces:
        rhs = m0.coords[[idx[v] for v in f]]
        if m0.lattice is not None:
            from .flow import _unrolled_rhs

            rhs, _ = _unrolled_rhs(m0, f)
        fe = float(np.square(np.linalg.norm(np.roll(rhs, -1, axis=0) - rhs, axis=1)).sum())
        per_size.setdefault(len(f), []).append(fe)
    e0 = dirichlet_energy(m0)
    terms = []
    for n, fes in per_size.items():
        if n == 6:
            continue
        lam = float(gc_eigenvalues(n)[1])
        c_n = (lam - 0.5) * len(fes) * max(fes)
        terms.append((lam, c_n))
    steps = len(run.embeddings)
    bounds = np.empty(steps)
    for i in range(steps):
        total = e0
        for lam, c_n in terms:
            total += c_n * (1 - lam ** (2 * i)) / (1 - lam**2)
        bounds[i] = total
    return bounds


@dataclass(frozen=True)
class LimitReport:
    """Face-lineage barycenters, vertex-cloud growth and diameter decay."""

    face_limits: dict[tuple[int, int], np.ndarray]
    vertex_cloud_sizes: tuple[int, ...]
    face_diameter_decay: dict[int, float]
    barycenter_drift: dict[int, float]


def limit_report(run: "SubdivisionRun", rtol: float = 1e-10) -> LimitReport:
    """Track every M_0 face lineage through the run.

    Barycenters along each lineage must agree (the face-limit point equals
    the original barycenter); a violation beyond ``rtol`` of the bounding
    box diagonal raises ValueError.
    """
    if len(run.embeddings) < 2:
        raise ValueError("limit_report needs a run of length at least 2")
    m0 = run.embeddings[0]
    scale = max(m0.bbox_diagonal(), 1e-300)
    face_limits: dict[tuple[int, int], np.ndarray] = {}
    diam_log: dict[int, list[float]] = {}
    drift: dict[int, float] = {}
    for root in range(len(m0.graph.faces)):
        fid = root
        base = None
        for level, emb in enumerate(run.embeddings):
            circuit = emb.graph.faces[fid]
            pts = emb.coords[[emb.vertex_index[v] for v in circuit]]
            bary = pts.mean(axis=0)
            face_limits[(level, root)] = bary
            diffs = pts[:, None, :] - pts[None, :, :]
            diam = float(np.linalg.norm(diffs, axis=-1).max())
            diam_log.setdefault(root, []).append(diam)
            if base is None:
                base = bary
                drift[root] = 0.0
            else:
                drift[root] = max(drift[root], float(np.linalg.norm(bary - base)))
            if level < len(run.provenances):
                fid = run.provenances[level].inner_face_of[fid]
        if drift[root] > rtol * scale:
            raise ValueError(
                f"face {root} lineage barycenter drifted by {drift[root]:.3e} "
                f"(tolerance {rtol * scale:.3e})"
            )
    decay: dict[int, float] = {}
    for root, diams in diam_log.items():
        d = np.array(diams)
        if np.all(d > 0):
            slope = np.polyfit(np.arange(len(d)), np.log(d), 1)[0]
            decay[root] = float(math.exp(slope))
        else:
            decay[root] = 0.0
    return LimitReport(
        face_limits=face_limits,
        vertex_cloud_sizes=tuple(len(e.graph.vertices) for e in run.embeddings),
        face_diameter_decay=decay,
        barycenter_drift=drift,
    )
