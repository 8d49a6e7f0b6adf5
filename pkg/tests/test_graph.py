import pytest

import gcsurf as g
from gcsurf.graph import canonical_circuit, circuit_edges, orient_faces

from conftest import central_face


def test_canonical_circuit_rotates_to_smallest():
    assert canonical_circuit((4, 2, 7, 3)) == (2, 7, 3, 4)
    assert canonical_circuit((1, 2, 3)) == (1, 2, 3)


def test_make_rejects_short_and_repeating_faces():
    with pytest.raises(g.StructuralError):
        g.SurfaceGraph.make(faces=[[0, 1]])
    with pytest.raises(g.StructuralError):
        g.SurfaceGraph.make(faces=[[0, 1, 2, 1]])


def test_make_rejects_faces_outside_edge_set():
    with pytest.raises(g.StructuralError):
        g.SurfaceGraph.make(faces=[[0, 1, 2]], edges=[(0, 1), (1, 2)])


def test_validate_c60(c60):
    rep = g.validate(c60.graph)
    assert rep.trivalent
    assert rep.oriented
    assert rep.branched_edges == ()
    assert rep.euler_characteristic == 2
    assert rep.boundary_edge_count == 0
    assert rep.unbranched


def test_validate_is_pure(c60):
    first = g.validate(c60.graph)
    second = g.validate(c60.graph)
    assert first == second


def test_single_hexagon_patch_boundary():
    graph = g.SurfaceGraph.make(faces=[[0, 1, 2, 3, 4, 5]])
    rep = g.validate(graph)
    assert rep.boundary_edge_count == 6
    assert set(graph.boundary) == {0, 1, 2, 3, 4, 5}
    # every edge is open, so the not-2-faces report lists all six with count 1
    assert g.branched_edges(graph) == [(e, 1) for e in sorted(graph.edges)]


def test_branched_edges_c60_empty(c60):
    assert g.branched_edges(c60.graph) == []


def test_k4_chunk_is_branched(k4_chunk_emb):
    rep = g.validate(k4_chunk_emb.graph)
    assert rep.branched_edges
    counts = {cnt for _, cnt in rep.branched_edges}
    assert 10 in counts  # central edges carry all ten 10-gons
    assert not rep.oriented


def test_closed_trivalent_sum_rules(c60):
    graph = c60.graph
    assert sum(len(f) for f in graph.faces) == 2 * len(graph.edges)
    assert 3 * len(graph.vertices) == 2 * len(graph.edges)


def test_extract_leaf_hexpatch(hexpatch1):
    fid = central_face(hexpatch1.graph)
    leaf = g.extract_leaf(hexpatch1.graph, fid)
    assert len(leaf.petals) == 6
    assert leaf.core_face == fid
    rep = g.validate(leaf.subgraph)
    assert rep.trivalent and rep.unbranched
    # petal count equals core circuit length for un-branched graphs
    assert len(leaf.petals) == len(hexpatch1.graph.faces[fid])


def test_extract_leaf_c60_pentagon(c60):
    pentagons = [fid for fid, f in enumerate(c60.graph.faces) if len(f) == 5]
    leaf = g.extract_leaf(c60.graph, pentagons[0])
    assert len(leaf.petals) == 5
    assert all(len(c60.graph.faces[p]) == 6 for p in leaf.petals)


def test_extract_leaf_dangling_edge_errors():
    graph = g.SurfaceGraph.make(faces=[[0, 1, 2, 3, 4, 5]])
    with pytest.raises(g.LeafExtractionError, match="dangling"):
        g.extract_leaf(graph, 0)


def test_extract_leaf_branched_requires_selection(k4_chunk_emb):
    graph = k4_chunk_emb.graph
    # pick a face whose edges all carry several faces
    target = None
    for fid, f in enumerate(graph.faces):
        if all(len(graph.edge_face_ids[e]) > 2 for e in circuit_edges(f)):
            target = fid
            break
    assert target is not None
    with pytest.raises(g.LeafExtractionError, match="selection"):
        g.extract_leaf(graph, target)
    selection = {}
    for e in circuit_edges(graph.faces[target]):
        others = [x for x in graph.edge_face_ids[e] if x != target]
        selection[e] = sorted(others)[0]
    leaf = g.extract_leaf(graph, target, selection)
    assert len(leaf.petals) == len(graph.faces[target])


def test_orient_faces_fixes_flipped_circuit():
    hexes = g.generate_hex_patch(1).graph.faces
    flipped = [list(reversed(hexes[0]))] + [list(f) for f in hexes[1:]]
    fixed = orient_faces(flipped)
    graph = g.SurfaceGraph.make(faces=fixed)
    assert g.validate(graph).oriented


def test_rotations_cover_neighbors(c60):
    for v in c60.graph.vertices:
        rot = c60.graph.rotations[v]
        assert sorted(rot) == sorted(c60.graph.neighbors(v))


def test_leaf_boundary_tags(hexpatch1):
    fid = central_face(hexpatch1.graph)
    leaf = g.extract_leaf(hexpatch1.graph, fid)
    sub = leaf.subgraph
    # exactly the core circuit stays interior; the petal rim is tagged
    core_circuit = set(hexpatch1.graph.faces[fid])
    assert set(sub.interior) == core_circuit


def test_supplied_local_orientation_checked():
    faces = [[0, 1, 2, 3, 4, 5]]
    good = g.SurfaceGraph.make(faces=faces, local_orientation={
        0: (1, 5), 1: (0, 2), 2: (1, 3), 3: (2, 4), 4: (3, 5), 5: (4, 0),
    })
    assert g.validate(good).trivalent is True
    bad = g.SurfaceGraph.make(faces=faces, local_orientation={0: (1, 5)})
    with pytest.raises(g.StructuralError, match="orientation"):
        g.validate(bad)
