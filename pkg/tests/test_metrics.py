import math

import numpy as np
import pytest

import gcsurf as g


def _segment_graph(p, q):
    graph = g.SurfaceGraph.make(faces=[], edges=[(0, 1)], vertices=[0, 1])
    return g.Embedding(graph, np.array([p, q], dtype=float))


def _point_graph(p):
    graph = g.SurfaceGraph.make(faces=[], edges=[], vertices=[0])
    return g.Embedding(graph, np.array([p], dtype=float))


# -- normals ------------------------------------------------------------------


def test_normal_coplanar_star():
    graph = g.SurfaceGraph.make(faces=[], edges=[(0, 1), (0, 2), (0, 3)], vertices=range(4))
    coords = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [-1, -1, 0]], dtype=float)
    n = g.vertex_normal(g.Embedding(graph, coords), 0)
    assert abs(abs(n[2]) - 1.0) < 1e-14
    assert abs(n[0]) < 1e-14 and abs(n[1]) < 1e-14


def test_normal_c60_radial(c60):
    report = g.curvature_report(c60)
    dots = (report.normals * c60.coords).sum(axis=1)
    assert np.abs(dots - 1.0).max() < 1e-12


def test_normal_collinear_undefined():
    graph = g.SurfaceGraph.make(faces=[], edges=[(0, 1), (0, 2), (0, 3)], vertices=range(4))
    coords = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [-1, 0, 0]], dtype=float)
    assert g.vertex_normal(g.Embedding(graph, coords), 0) is None


# -- curvature ----------------------------------------------------------------


def test_c60_curvature_exact(c60):
    report = g.curvature_report(c60)
    assert report.defined.all()
    assert np.abs(report.gauss - 1.0).max() < 1e-9
    assert np.abs(np.abs(report.mean) - 1.0).max() < 1e-9


def test_hexpatch_interior_flat(hexpatch2):
    report = g.curvature_report(hexpatch2)
    assert report.defined.any()
    assert np.abs(report.gauss[report.defined]).max() < 1e-12
    assert np.abs(report.mean[report.defined]).max() < 1e-12


def _curvature_oracle(emb, v):
    """Plain re-computation of the curvature formulas at one vertex."""
    graph = emb.graph
    order = graph.rotations[v]

    def normal(u):
        e = [emb.position(w) - emb.position(u) for w in graph.rotations[u]]
        s = np.cross(e[0], e[1]) + np.cross(e[1], e[2]) + np.cross(e[2], e[0])
        return s / np.linalg.norm(s)

    e = [emb.position(u) - emb.position(v) for u in order]
    nb_normals = [normal(u) for u in order]
    a, b = e[1] - e[0], e[2] - e[0]
    p = nb_normals[1] - nb_normals[0]
    q = nb_normals[2] - nb_normals[0]
    I = np.array([[a @ a, a @ b], [b @ a, b @ b]])
    II = -np.array([[a @ p, a @ q], [b @ p, b @ q]])
    A = np.linalg.solve(I, II)
    return float(np.linalg.det(A)), float(0.5 * np.trace(A))


def test_curvature_matches_independent_oracle():
    emb = g.generate_hex_patch(3)
    rng = np.random.default_rng(42)
    coords = emb.coords.copy()
    coords[:, 2] += 0.05 * rng.standard_normal(len(coords))
    emb = g.Embedding(emb.graph, coords)
    report = g.curvature_report(emb)
    checked = 0
    for i, v in enumerate(emb.graph.vertices):
        if not report.defined[i]:
            continue
        k, h = _curvature_oracle(emb, v)
        assert abs(report.gauss[i] - k) < 1e-10 * max(1, abs(k))
        assert abs(report.mean[i] - h) < 1e-10 * max(1, abs(h))
        checked += 1
    assert checked > 10


def test_second_form_not_symmetrized():
    emb = g.generate_hex_patch(3)
    rng = np.random.default_rng(1)
    coords = emb.coords.copy()
    coords[:, 2] += 0.1 * rng.standard_normal(len(coords))
    report = g.curvature_report(g.Embedding(emb.graph, coords))
    off = report.second_forms[report.defined]
    assert np.abs(off[:, 0, 1] - off[:, 1, 0]).max() > 1e-6


def test_curvature_rigid_motion_and_scaling_laws(c60):
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    t = np.array([0.3, -1.2, 2.0])
    base = g.generate_hex_patch(3)
    coords = base.coords.copy()
    coords[:, 2] += 0.08 * rng.standard_normal(len(coords))
    emb = g.Embedding(base.graph, coords)
    ref = g.curvature_report(emb)
    moved = g.Embedding(base.graph, coords @ q.T + t)
    rep2 = g.curvature_report(moved)
    sel = ref.defined
    assert np.abs(rep2.gauss[sel] - ref.gauss[sel]).max() < 1e-8
    assert np.abs(rep2.mean[sel] - ref.mean[sel]).max() < 1e-8
    s = 2.0
    rep3 = g.curvature_report(g.Embedding(base.graph, coords * s))
    assert np.abs(rep3.gauss[sel] - ref.gauss[sel] / s**2).max() < 1e-8
    assert np.abs(rep3.mean[sel] - ref.mean[sel] / s).max() < 1e-8


def test_curvature_single_vertex_wrapper(c60):
    k, h = g.curvature(c60, c60.graph.vertices[0])
    assert abs(k - 1.0) < 1e-9 and abs(abs(h) - 1.0) < 1e-9


def test_curvature_undefined_at_boundary(hexpatch1):
    report = g.curvature_report(hexpatch1)
    for i, v in enumerate(hexpatch1.graph.vertices):
        if v in hexpatch1.graph.boundary:
            assert not report.defined[i]


# -- energy and residuals ------------------------------------------------------


def test_energy_single_edge():
    emb = _segment_graph([0, 0, 0], [1, 0, 0])
    assert g.dirichlet_energy(emb) == 1.0


def test_energy_regular_hexagon():
    ang = np.linspace(0, 2 * np.pi, 6, endpoint=False)
    s = 2.5
    pts = s * np.stack([np.cos(ang), np.sin(ang), np.zeros(6)], axis=1)
    graph = g.SurfaceGraph.make(faces=[[0, 1, 2, 3, 4, 5]])
    emb = g.Embedding(graph, pts)
    assert g.dirichlet_energy(emb) == pytest.approx(6 * s**2)


def test_energy_c60_closed_form(c60):
    v0 = c60.graph.vertices[0]
    s = float(np.linalg.norm(c60.position(v0) - c60.position(c60.graph.neighbors(v0)[0])))
    assert g.dirichlet_energy(c60) == pytest.approx(90 * s**2, abs=1e-12)


def test_energy_subgraph(c60):
    edges = list(sorted(c60.graph.edges))[:10]
    total = g.dirichlet_energy(c60, edges)
    vecs = c60.edge_vectors(edges)
    assert total == pytest.approx(float(np.square(vecs).sum()))


def test_energy_equals_half_face_sum_closed(c60):
    by_face = 0.0
    for f in c60.graph.faces:
        pts = np.array([c60.position(v) for v in f])
        by_face += float(np.square(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)).sum())
    assert g.dirichlet_energy(c60) == pytest.approx(0.5 * by_face, rel=1e-12)


def test_balancing_residual_barycentric():
    graph = g.SurfaceGraph.make(faces=[], edges=[(0, 1), (0, 2), (0, 3)], vertices=range(4))
    nbrs = np.array([[1.0, 0, 0], [0, 1.0, 0], [-1.0, -1.0, 0]])
    coords = np.vstack([nbrs.mean(axis=0), nbrs])
    emb = g.Embedding(graph, coords)
    assert g.balancing_residual(emb, 0) < 1e-15


def test_balancing_residual_c60_positive(c60):
    assert g.balancing_residual(c60, c60.graph.vertices[0]) > 0.1


def test_balancing_residual_mackay(mackay):
    report = g.curvature_report(mackay)
    interior = ~report.boundary & ~np.isnan(report.balancing)
    vals = report.balancing[interior]
    assert np.median(vals) < 1e-6
    assert vals.max() < 1e-9  # solved harmonically, so machine precision


def test_minimality_orthogonal_edges():
    graph = g.SurfaceGraph.make(faces=[], edges=[(0, 1), (0, 2), (0, 3)], vertices=range(4))
    coords = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    assert g.minimality_residual(g.Embedding(graph, coords), 0) == 0.0


def test_minimality_equilateral_star():
    ell = 1.7
    graph = g.SurfaceGraph.make(faces=[], edges=[(0, 1), (0, 2), (0, 3)], vertices=range(4))
    ang = [0, 2 * np.pi / 3, 4 * np.pi / 3]
    coords = np.vstack([[0, 0, 0], [[ell * np.cos(a), ell * np.sin(a), 0] for a in ang]])
    emb = g.Embedding(graph, coords)
    # three equal pairwise inner products ell^2 cos 120 sum to -(3/2) ell^2
    assert g.minimality_residual(emb, 0) == pytest.approx(1.5 * ell**2)
    # the same value marks any balanced vertex with equal edge lengths
    assert g.balancing_residual(emb, 0) < 1e-14


# -- Hausdorff ------------------------------------------------------------------


def test_hausdorff_identical(c60):
    assert g.hausdorff_distance(c60, c60) < 1e-12


def test_hausdorff_two_points():
    a = _point_graph([0, 0, 0])
    b = _point_graph([0, 3, 4])
    assert g.hausdorff_distance(a, b) == pytest.approx(5.0)


def test_hausdorff_segments_exact():
    a = _segment_graph([0, 0, 0], [1, 0, 0])
    b = _segment_graph([0.5, 1, 0], [1.5, 1, 0])
    assert g.hausdorff_distance(a, b) == pytest.approx(math.sqrt(1.25))


def test_hausdorff_symmetry_and_triangle(c60, hexpatch1):
    third = g.Embedding(c60.graph, c60.coords + np.array([0.1, 0.0, 0.0]))
    d_ab = g.hausdorff_distance(c60, hexpatch1)
    d_ba = g.hausdorff_distance(hexpatch1, c60)
    assert d_ab == pytest.approx(d_ba)
    d_ac = g.hausdorff_distance(c60, third)
    d_cb = g.hausdorff_distance(third, hexpatch1)
    assert d_ab <= d_ac + d_cb + 1e-12


def test_hausdorff_error_bound_monotone(c60):
    child, _, _ = g.subdivide_step(c60, "modified")
    b4 = g.hausdorff_error_bound(c60, child, 4)
    b8 = g.hausdorff_error_bound(c60, child, 8)
    assert b8 < b4
    with pytest.raises(ValueError):
        g.hausdorff_distance(c60, child, sampling=1)


# -- bounds and limit reports ----------------------------------------------------


def test_energy_bound_all_hex_constant(hexpatch1):
    run = g.iterate(hexpatch1, 2, hausdorff_sampling=None)
    bounds = g.energy_bound(run)
    assert np.allclose(bounds, bounds[0])
    assert bounds[0] == pytest.approx(g.dirichlet_energy(hexpatch1))


def test_energy_bound_c60_decreasing_trend(c60):
    run = g.iterate(c60, 2, hausdorff_sampling=None)
    bounds = g.energy_bound(run)
    assert bounds[1] < bounds[0]
    assert bounds[2] < bounds[1]


def test_energy_bound_covers_mackay(mackay):
    run = g.iterate(mackay, 2, hausdorff_sampling=None)
    bounds = g.energy_bound(run)
    for e, b in zip(run.energies(), bounds):
        assert e <= b + 1e-9


def test_limit_report_minimum_length(c60):
    run = g.iterate(c60, 0)
    with pytest.raises(ValueError):
        g.limit_report(run)


def test_limit_report_two_levels(c60):
    run = g.iterate(c60, 1, hausdorff_sampling=None)
    rep = g.limit_report(run)
    assert rep.vertex_cloud_sizes == (60, 240)
    assert max(rep.barycenter_drift.values()) < 1e-12


def test_limit_report_isolated_face_ratio():
    ang = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    pts = np.stack([np.cos(ang), np.sin(ang), np.zeros(8)], axis=1)
    graph = g.SurfaceGraph.make(faces=[list(range(8))])
    emb = g.Embedding(graph, pts)
    run = g.iterate(emb, 3, "modified", hausdorff_sampling=None)
    rep = g.limit_report(run)
    lam1 = float(g.gc_eigenvalues(8)[1])
    assert rep.face_diameter_decay[0] == pytest.approx(lam1, rel=1e-9)
