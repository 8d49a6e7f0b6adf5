"""Topological Goldberg-Coxeter (2,0) refinement with lineage bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .graph import Edge, Leaf, StructuralError, SurfaceGraph, undirected


class BranchedGraphError(ValueError):
    """Whole-graph subdivision is refused for branched graphs."""


@dataclass(frozen=True)
class Provenance:
    """Maps from a subdivided graph back to its parent.

    ``inner_vertex_of[(face, i)]`` is the child vertex sitting inside the
    parent face at circuit position ``i``; ``inner_face_of`` and
    ``connector_face_of`` locate the child faces; ``parent_vertex`` is the
    identity on surviving parent vertices.
    """

    inner_vertex_of: dict[tuple[int, int], int]
    inner_face_of: dict[int, int]
    connector_face_of: dict[Edge, int]
    parent_vertex: dict[int, int]


def gc_subdivide(graph: SurfaceGraph, gc_type: tuple[int, int] = (2, 0)) -> tuple[SurfaceGraph, Provenance]:
    """One (2,0) Goldberg-Coxeter step on an un-branched graph or patch.

    Every parent n-gon grows an inner n-gon joined by spokes to the parent
    circuit; every parent vertex survives with spokes to the inner copies of
    its incident faces; parent edges themselves disappear.  A hexagonal
    connector face is created for each parent edge whose endpoints are both
    interior, which is exactly when both flanking faces exist; edges touching
    the boundary stay open so the rim carries the fixed boundary data.
    """
    if gc_type != (2, 0):
        raise ValueError(f"only Goldberg-Coxeter type (2,0) is supported, got {gc_type}")
    bad = [(e, len(f)) for e, f in graph.edge_face_ids.items() if len(f) > 2]
    if bad:
        raise BranchedGraphError(
            f"graph is branched ({len(bad)} edges lie in more than 2 faces); "
            "subdivide leafwise via gc_subdivide_leafwise"
        )

    next_id = max(graph.vertices) + 1 if graph.vertices else 0
    inner_vertex: dict[tuple[int, int], int] = {}
    for fid, f in enumerate(graph.faces):
        for i in range(len(f)):
            inner_vertex[(fid, i)] = next_id
            next_id += 1

    child_edges: set[Edge] = set()
    child_faces: list[tuple[int, ...]] = []
    inner_circuits: dict[int, tuple[int, ...]] = {}
    for fid, f in enumerate(graph.faces):
        n = len(f)
        ring = tuple(inner_vertex[(fid, i)] for i in range(n))
        inner_circuits[fid] = ring
        for i in range(n):
            child_edges.add(undirected(ring[i], ring[(i + 1) % n]))
            child_edges.add(undirected(f[i], ring[i]))
        child_faces.append(ring)

    # directed traversal position of each edge in each face
    position_in: dict[int, dict[int, int]] = {fid: {v: i for i, v in enumerate(f)} for fid, f in enumerate(graph.faces)}

    def traverses(fid: int, u: int, v: int) -> bool:
        f = graph.faces[fid]
        i = position_in[fid][u]
        return f[(i + 1) % len(f)] == v

    connector_circuits: dict[Edge, tuple[int, ...]] = {}
    interior = graph.interior
    for e, fids in graph.edge_face_ids.items():
        u, v = e
        if len(fids) != 2 or u not in interior or v not in interior:
            continue
        fa, fb = fids
        if traverses(fa, u, v):
            f_uv, f_vu = fa, fb
        else:
            f_uv, f_vu = fb, fa
        if not traverses(f_vu, v, u):
            raise StructuralError(f"faces around edge {e} are not coherently traversed")
        wf = inner_circuits[f_uv]
        wg = inner_circuits[f_vu]
        pf = position_in[f_uv]
        pg = position_in[f_vu]
        circuit = (u, wg[pg[u]], wg[pg[v]], v, wf[pf[v]], wf[pf[u]])
        connector_circuits[e] = circuit
        child_faces.append(circuit)

    parent_tags = frozenset(graph.boundary)
    child_vertices = list(graph.vertices) + sorted(inner_vertex.values())
    child = SurfaceGraph.make(
        faces=child_faces,
        edges=child_edges,
        vertices=child_vertices,
        boundary=None,  # derive, then widen with inherited tags below
    )
    if parent_tags - child.boundary:
        child = SurfaceGraph.make(
            faces=child_faces,
            edges=child_edges,
            vertices=child_vertices,
            boundary=child.boundary | parent_tags,
        )

    from .graph import canonical_circuit

    fid_of = child.face_index
    prov = Provenance(
        inner_vertex_of=dict(inner_vertex),
        inner_face_of={fid: fid_of[canonical_circuit(ring)] for fid, ring in inner_circuits.items()},
        connector_face_of={e: fid_of[canonical_circuit(c)] for e, c in connector_circuits.items()},
        parent_vertex={v: v for v in graph.vertices},
    )
    return child, prov


def gc_subdivide_leafwise(
    graph: SurfaceGraph, leaves: Iterable[Leaf]
) -> list[tuple[SurfaceGraph, Provenance]]:
    """Apply gc_subdivide independently to each leaf's patch subgraph."""
    return [gc_subdivide(leaf.subgraph) for leaf in leaves]
