import hashlib

import numpy as np
import pytest

import gcsurf as g
from gcsurf.graphio import GraphFileError, export_metrics_csv, export_obj, load_graph, save_graph


def test_c60_counts_and_radius(c60):
    graph = c60.graph
    assert (len(graph.vertices), len(graph.edges), len(graph.faces)) == (60, 90, 32)
    assert graph.face_size_census() == {5: 12, 6: 20}
    radii = np.linalg.norm(c60.coords, axis=1)
    assert np.abs(radii - 1.0).max() < 1e-12
    lengths = np.linalg.norm(c60.edge_vectors(), axis=1)
    assert np.ptp(lengths) < 1e-12


def test_c60_scaling_law():
    big = g.generate_c60(2.0)
    report = g.curvature_report(big)
    assert np.abs(report.gauss[report.defined] - 0.25).max() < 1e-9


def test_c60_deterministic():
    a = g.generate_c60(1.0)
    b = g.generate_c60(1.0)
    assert a.graph == b.graph
    assert np.array_equal(a.coords, b.coords)


def test_c60_rejects_bad_radius():
    with pytest.raises(ValueError):
        g.generate_c60(0.0)


def test_hexpatch_shape(hexpatch1):
    assert len(hexpatch1.graph.faces) == 7
    assert np.abs(hexpatch1.coords[:, 2]).max() == 0.0
    assert g.dirichlet_energy(hexpatch1) == pytest.approx(len(hexpatch1.graph.edges) * 1.0)


def test_hexpatch_edge_length_scales():
    emb = g.generate_hex_patch(1, edge_length=0.5)
    assert g.dirichlet_energy(emb) == pytest.approx(len(emb.graph.edges) * 0.25)
    with pytest.raises(ValueError):
        g.generate_hex_patch(0)


def test_hexpatch_subdivided_stays_planar(hexpatch2):
    child, _, _ = g.subdivide_step(hexpatch2, "modified")
    assert np.abs(child.coords[:, 2]).max() < 1e-12


def test_roundtrip_c60(tmp_path, c60):
    path = tmp_path / "c60.graph.txt"
    save_graph(path, c60)
    graph, emb = load_graph(path)
    assert graph == c60.graph
    assert np.abs(emb.coords - c60.coords).max() < 1e-15


def test_roundtrip_boundary_tags(tmp_path, hexpatch1):
    path = tmp_path / "patch.graph.txt"
    save_graph(path, hexpatch1)
    graph, emb = load_graph(path)
    assert graph.boundary == hexpatch1.graph.boundary


def test_roundtrip_periodic(tmp_path):
    torus = g.hex_torus(3, 4)
    path = tmp_path / "torus.graph.txt"
    save_graph(path, torus)
    graph, emb = load_graph(path)
    assert graph == torus.graph
    assert np.allclose(emb.lattice, torus.lattice)
    assert g.dirichlet_energy(emb) == pytest.approx(g.dirichlet_energy(torus))


def test_save_is_byte_deterministic(tmp_path, c60):
    p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
    save_graph(p1, c60)
    save_graph(p2, c60)
    assert p1.read_bytes() == p2.read_bytes()


def test_loader_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("not a graph\n")
    with pytest.raises(GraphFileError, match="line 1"):
        load_graph(path)


def test_loader_rejects_missing_edge(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text(
        "gcsurf-graph 1\n"
        "VERT 0 0.0 0.0 0.0\nVERT 1 1.0 0.0 0.0\nVERT 2 0.0 1.0 0.0\n"
        "EDGE 0 1\nEDGE 1 2\n"
        "FACE 0 1 2\n"
    )
    with pytest.raises(GraphFileError, match="missing edge"):
        load_graph(path)


def test_loader_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("gcsurf-graph 1\nVERT 0 0.0 zero 0.0\n")
    with pytest.raises(GraphFileError, match="line 2"):
        load_graph(path)


def test_obj_single_hexagon(tmp_path):
    graph = g.SurfaceGraph.make(faces=[[0, 1, 2, 3, 4, 5]])
    ang = np.linspace(0, 2 * np.pi, 6, endpoint=False)
    emb = g.Embedding(graph, np.stack([np.cos(ang), np.sin(ang), np.zeros(6)], axis=1))
    path = tmp_path / "hex.obj"
    export_obj(emb, path)
    lines = path.read_text().splitlines()
    assert sum(1 for l in lines if l.startswith("v ")) == 6
    assert sum(1 for l in lines if l.startswith("f ")) == 1
    assert sum(1 for l in lines if l.startswith("l ")) == 6


def test_obj_run_writes_per_step(tmp_path, hexpatch1):
    run = g.iterate(hexpatch1, 2, hausdorff_sampling=None)
    export_obj(run, tmp_path / "run.obj")
    for i in range(3):
        assert (tmp_path / f"run_step{i}.obj").exists()


def test_metrics_csv_rows(tmp_path, hexpatch1):
    run = g.iterate(hexpatch1, 3)
    path = tmp_path / "metrics.csv"
    export_metrics_csv(run, path)
    rows = path.read_text().strip().splitlines()
    assert rows[0].split(",")[:4] == ["step", "vertex_count", "energy", "hausdorff"]
    assert len(rows) == 5  # header + 4 data rows
    assert rows[1].split(",")[3] == ""  # no parent for M_0


def test_metrics_csv_c60_energies_decreasing(tmp_path, c60):
    run = g.iterate(c60, 2, "modified")
    path = tmp_path / "metrics.csv"
    export_metrics_csv(run, path)
    rows = path.read_text().strip().splitlines()[1:]
    energies = [float(r.split(",")[2]) for r in rows]
    assert energies[0] > energies[1] > energies[2]


# -- fixtures -----------------------------------------------------------------


def test_mackay_fixture(mackay):
    rep = g.validate(mackay.graph)
    assert rep.trivalent and rep.unbranched
    census = mackay.graph.face_size_census()
    assert set(census) == {6, 8}
    assert census[8] >= 12


def test_k4_leaf_fixture_shape():
    leaf = g.fixture("k4-leaf-a")
    census = leaf.graph.face_size_census()
    assert census == {10: 11}  # core plus ten petals
    rep = g.validate(leaf.graph)
    assert rep.trivalent and rep.unbranched and rep.oriented
    lengths = np.linalg.norm(leaf.edge_vectors(), axis=1)
    assert np.abs(lengths - 1.0).max() < 1e-12


def test_k4_leaves_differ_in_one_petal():
    a = g.fixture("k4-leaf-a")
    b = g.fixture("k4-leaf-b")
    assert a.graph != b.graph
    # the two leaves share the core and nine petals; count shared circuits
    def undirected_faces(graph, emb):
        out = set()
        for f in graph.faces:
            pts = tuple(sorted(map(tuple, np.round([emb.position(v) for v in f], 9))))
            out.add(pts)
        return out

    fa = undirected_faces(a.graph, a)
    fb = undirected_faces(b.graph, b)
    assert len(fa & fb) == 10
    assert len(fa - fb) == 1 and len(fb - fa) == 1


def test_k4_chunk_edge_incidences(k4_chunk_emb):
    counts = [len(f) for f in k4_chunk_emb.graph.edge_face_ids.values()]
    assert max(counts) == 10
    assert all(len(f) == 10 for f in k4_chunk_emb.graph.faces)


def test_unknown_fixture():
    with pytest.raises(ValueError, match="unknown fixture"):
        g.fixture("nope")


def _checksum(emb):
    h = hashlib.sha256()
    graph = emb.graph
    h.update(repr(graph.vertices).encode())
    h.update(repr(sorted(graph.edges)).encode())
    h.update(repr(graph.faces).encode())
    h.update(repr(sorted(graph.boundary)).encode())
    h.update(np.round(emb.coords, 9).tobytes())
    return h.hexdigest()[:16]


PINNED = {
    "mackay-patch": "ab0310aa7da41058",
    "k4-chunk": "d098a4b82e042c22",
    "k4-leaf-a": "f77a7b31094733d6",
    "k4-leaf-b": "efe7db655119b2a9",
}


@pytest.mark.parametrize("name", sorted(PINNED))
def test_fixture_checksums_pinned(name):
    assert _checksum(g.fixture(name)) == PINNED[name]


def test_mackay_roundtrip_keeps_balance(tmp_path, mackay):
    path = tmp_path / "mackay.graph.txt"
    save_graph(path, mackay)
    graph, emb = load_graph(path)
    rep = g.validate(graph)
    assert rep.trivalent and rep.unbranched
    report = g.curvature_report(emb)
    vals = report.balancing[~report.boundary & ~np.isnan(report.balancing)]
    assert np.median(vals) < 1e-6
