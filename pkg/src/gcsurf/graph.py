"""Combinatorial trivalent surface graphs with explicit face circuits."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

Edge = tuple[int, int]


class StructuralError(ValueError):
    """Raised when face/edge data does not describe a surface graph."""


def undirected(u: int, v: int) -> Edge:
    """Normalize an edge to (min, max) form."""
    return (u, v) if u < v else (v, u)


def canonical_circuit(circuit: Sequence[int]) -> tuple[int, ...]:
    """Rotate a circuit so the smallest vertex id comes first.

    Traversal direction is preserved; only the starting point changes, so
    oriented face data stays oriented while serialization is deterministic.
    """
    k = min(range(len(circuit)), key=lambda i: circuit[i])
    return tuple(circuit[k:]) + tuple(circuit[:k])


def circuit_edges(circuit: Sequence[int]) -> list[Edge]:
    n = len(circuit)
    return [undirected(circuit[i], circuit[(i + 1) % n]) for i in range(n)]


def derive_boundary(vertices, edges, faces) -> frozenset[int]:
    """Vertices that are not fully surrounded (degree 3 with 3 incident faces)."""
    deg = {v: 0 for v in vertices}
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    nfaces = {v: 0 for v in vertices}
    for f in faces:
        for v in f:
            nfaces[v] += 1
    return frozenset(v for v in vertices if not (deg[v] == 3 and nfaces[v] == 3))


@dataclass(frozen=True)
class SurfaceGraph:
    """Trivalent graph with explicit faces, realized purely combinatorially.

    Faces are given data, never inferred: face circuits are stored in
    canonical rotation and sorted, so face ids (indices into ``faces``) are
    deterministic. Edges may exist outside any face (frozen rim stubs left
    behind by patch subdivision).
    """

    vertices: tuple[int, ...]
    edges: frozenset[Edge]
    faces: tuple[tuple[int, ...], ...]
    boundary: frozenset[int]
    local_orientation: Mapping[int, tuple[int, ...]] | None = None

    @classmethod
    def make(
        cls,
        faces: Iterable[Sequence[int]],
        edges: Iterable[Sequence[int]] | None = None,
        vertices: Iterable[int] | None = None,
        boundary: Iterable[int] | None = None,
        local_orientation: Mapping[int, Sequence[int]] | None = None,
    ) -> "SurfaceGraph":
        """Canonicalize and build a graph; edges/vertices/boundary default to derived."""
        canon_faces = []
        for f in faces:
            c = canonical_circuit(tuple(int(v) for v in f))
            if len(c) < 3:
                raise StructuralError(f"face {c} has fewer than 3 vertices")
            if len(set(c)) != len(c):
                raise StructuralError(f"face {c} repeats a vertex")
            canon_faces.append(c)
        canon_faces.sort()
        face_edge_set = {e for f in canon_faces for e in circuit_edges(f)}
        if edges is None:
            edge_set = frozenset(face_edge_set)
        else:
            edge_set = frozenset(undirected(int(u), int(v)) for u, v in edges)
            missing = face_edge_set - edge_set
            if missing:
                raise StructuralError(f"faces use edges not in edge set: {sorted(missing)[:5]}")
        if vertices is None:
            vset = {v for e in edge_set for v in e} | {v for f in canon_faces for v in f}
        else:
            vset = {int(v) for v in vertices}
            used = {v for e in edge_set for v in e}
            if not used <= vset:
                raise StructuralError(f"edges use vertices not in vertex set: {sorted(used - vset)[:5]}")
        vtuple = tuple(sorted(vset))
        if boundary is None:
            btag = derive_boundary(vtuple, edge_set, canon_faces)
        else:
            btag = frozenset(int(v) for v in boundary)
        orient = None
        if local_orientation is not None:
            orient = {int(v): tuple(int(u) for u in order) for v, order in local_orientation.items()}
        return cls(vtuple, edge_set, tuple(canon_faces), btag, orient)

    # -- derived structure -------------------------------------------------

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        nbrs: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return {v: tuple(sorted(ns)) for v, ns in nbrs.items()}

    @cached_property
    def edge_face_ids(self) -> dict[Edge, tuple[int, ...]]:
        inc: dict[Edge, list[int]] = {e: [] for e in self.edges}
        for fid, f in enumerate(self.faces):
            for e in circuit_edges(f):
                inc[e].append(fid)
        return {e: tuple(fids) for e, fids in inc.items()}

    @cached_property
    def face_index(self) -> dict[tuple[int, ...], int]:
        return {f: i for i, f in enumerate(self.faces)}

    @cached_property
    def interior(self) -> frozenset[int]:
        return frozenset(self.vertices) - self.boundary

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def face_size_census(self) -> dict[int, int]:
        census: dict[int, int] = {}
        for f in self.faces:
            census[len(f)] = census.get(len(f), 0) + 1
        return census

    @cached_property
    def _corner_maps(self) -> tuple[dict[int, dict[int, int]], bool]:
        """Per-vertex corner map successor -> predecessor, plus conflict flag.

        For a circuit ... p, v, s ... the corner at v links s back to p.
        Chasing that map orders the incident edges so that, for faces
        wound counterclockwise seen from outside, normals point outward.
        """
        prev: dict[int, dict[int, int]] = {v: {} for v in self.vertices}
        ok = True
        for f in self.faces:
            n = len(f)
            for k in range(n):
                p, v, s = f[k - 1], f[k], f[(k + 1) % n]
                if s in prev[v]:
                    ok = False
                else:
                    prev[v][s] = p
        return prev, ok

    @cached_property
    def rotations(self) -> dict[int, tuple[int, ...]]:
        """Cyclic order of neighbors at each vertex.

        Derived from face corners unless ``local_orientation`` was supplied.
        Interior vertices of a coherently oriented graph get a true cyclic
        order; boundary vertices get the corner chain, padded with any
        unchained neighbors in sorted order.
        """
        if self.local_orientation is not None:
            return {v: tuple(order) for v, order in self.local_orientation.items()}
        prev, ok = self._corner_maps
        out: dict[int, tuple[int, ...]] = {}
        for v in self.vertices:
            nbrs = self.adjacency[v]
            chain_map = prev[v] if ok else {}
            if not chain_map:
                out[v] = nbrs
                continue
            targets = set(chain_map.values())
            starts = [u for u in nbrs if u in chain_map and u not in targets]
            if not starts:
                # closed cycle: start deterministically at the smallest neighbor
                start = min(chain_map)
                order = [start]
                while len(order) < len(nbrs):
                    nxt = chain_map.get(order[-1])
                    if nxt is None or nxt in order:
                        break
                    order.append(nxt)
            else:
                order = []
                for start in sorted(starts):
                    cur = start
                    while cur is not None and cur not in order:
                        order.append(cur)
                        cur = chain_map.get(cur)
            for u in nbrs:
                if u not in order:
                    order.append(u)
            out[v] = tuple(order)
        return out

    @cached_property
    def orientation_coherent(self) -> bool:
        """True when faces induce a consistent rotation system.

        Every interior vertex must close into a 3-cycle of corners and every
        edge shared by two faces must be traversed once in each direction.
        """
        prev, ok = self._corner_maps
        if not ok:
            return False
        directed: dict[tuple[int, int], int] = {}
        for f in self.faces:
            n = len(f)
            for k in range(n):
                d = (f[k], f[(k + 1) % n])
                directed[d] = directed.get(d, 0) + 1
        for (u, v), cnt in directed.items():
            if cnt > 1 or (cnt + directed.get((v, u), 0)) > 2:
                return False
        for v in self.interior:
            chain_map = prev[v]
            if len(chain_map) != 3:
                return False
            start = min(chain_map)
            cur = start
            seen = set()
            for _ in range(3):
                seen.add(cur)
                cur = chain_map[cur]
            if cur != start or seen != set(self.adjacency[v]):
                return False
        return True


@dataclass(frozen=True)
class ValidationReport:
    trivalent: bool
    oriented: bool
    branched_edges: tuple[tuple[Edge, int], ...]
    euler_characteristic: int
    boundary_edge_count: int

    @property
    def unbranched(self) -> bool:
        return not self.branched_edges


@dataclass(frozen=True)
class Leaf:
    """A core face together with one petal face per core edge."""

    core_face: int
    petals: tuple[int, ...]
    subgraph: SurfaceGraph


def validate(graph: SurfaceGraph) -> ValidationReport:
    """Check structural invariants; raises StructuralError on malformed faces.

    Degree rules: interior vertices must have degree exactly 3.  Boundary
    vertices may have degree up to 3 (patch subdivision leaves behind frozen
    rim vertices of low degree, so degrees 0..3 are tolerated there).
    """
    for f in graph.faces:
        if len(f) < 3 or len(set(f)) != len(f):
            raise StructuralError(f"face {f} is not a simple circuit")
        for e in circuit_edges(f):
            if e not in graph.edges:
                raise StructuralError(f"face {f} uses missing edge {e}")
    if graph.local_orientation is not None:
        for v in graph.vertices:
            order = graph.local_orientation.get(v)
            if order is None or sorted(order) != sorted(graph.adjacency[v]):
                raise StructuralError(f"local orientation at vertex {v} does not list its incident edges")
    trivalent = all(graph.degree(v) == 3 for v in graph.interior) and all(
        graph.degree(v) <= 3 for v in graph.boundary
    )
    counts = graph.edge_face_ids
    branched = tuple((e, len(fids)) for e, fids in sorted(counts.items()) if len(fids) > 2)
    boundary_edge_count = sum(1 for fids in counts.values() if len(fids) == 1)
    return ValidationReport(
        trivalent=trivalent,
        oriented=graph.orientation_coherent,
        branched_edges=branched,
        euler_characteristic=graph.euler_characteristic(),
        boundary_edge_count=boundary_edge_count,
    )


def branched_edges(graph: SurfaceGraph) -> list[tuple[Edge, int]]:
    """All edges whose face-incidence count differs from 2, with their counts.

    Covers both branched edges (count > 2) and open edges (count < 2,
    i.e. patch rims and frozen stubs).
    """
    return [(e, len(fids)) for e, fids in sorted(graph.edge_face_ids.items()) if len(fids) != 2]


def orient_faces(faces: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Flip face circuits so every edge shared by two faces is traversed both ways.

    Works on un-branched face sets (each edge in at most two faces); raises
    StructuralError when the faces describe a non-orientable configuration.
    """
    faces = [tuple(f) for f in faces]
    by_edge: dict[Edge, list[int]] = {}
    for fid, f in enumerate(faces):
        for e in circuit_edges(f):
            by_edge.setdefault(e, []).append(fid)
    if any(len(fids) > 2 for fids in by_edge.values()):
        raise StructuralError("cannot orient a branched face set")
    flipped: dict[int, bool] = {}

    def direction(fid: int, e: Edge) -> bool:
        f = faces[fid]
        n = len(f)
        for k in range(n):
            if (f[k], f[(k + 1) % n]) == e:
                return not flipped[fid]
            if (f[(k + 1) % n], f[k]) == e:
                return flipped[fid]
        raise KeyError(e)

    for seed in range(len(faces)):
        if seed in flipped:
            continue
        flipped[seed] = False
        stack = [seed]
        while stack:
            fid = stack.pop()
            for e in circuit_edges(faces[fid]):
                for gid in by_edge[e]:
                    if gid == fid:
                        continue
                    want = not direction(fid, e)
                    if gid not in flipped:
                        flipped[gid] = False
                        if direction(gid, e) != want:
                            flipped[gid] = True
                        stack.append(gid)
                    elif direction(gid, e) != want:
                        raise StructuralError("face set is not orientable")
    return [tuple(reversed(f)) if flipped[i] else f for i, f in enumerate(faces)]


class LeafExtractionError(ValueError):
    pass


def extract_leaf(
    graph: SurfaceGraph,
    face: int,
    selection: Mapping[Edge, int] | None = None,
) -> Leaf:
    """Core face plus the faces sharing an edge with it, as a standalone patch.

    In branched graphs each core edge can have several neighboring faces;
    ``selection`` must then pick one petal per ambiguous edge (keyed by the
    normalized edge). Boundary tags of the subgraph are re-derived, so the
    petal rim comes out tagged and the core circuit interior.
    """
    if not 0 <= face < len(graph.faces):
        raise LeafExtractionError(f"face id {face} out of range")
    core = graph.faces[face]
    petals: list[int] = []
    for e in circuit_edges(core):
        others = [fid for fid in graph.edge_face_ids[e] if fid != face]
        if not others:
            raise LeafExtractionError(f"core face {face} has dangling boundary edge {e}")
        if len(others) == 1:
            petals.append(others[0])
            continue
        if selection is None or e not in selection:
            raise LeafExtractionError(
                f"edge {e} of face {face} is shared by several faces {sorted(others)}; "
                "a petal selection is required"
            )
        pick = selection[e]
        if pick not in others:
            raise LeafExtractionError(f"selected petal {pick} does not contain edge {e}")
        petals.append(pick)
    face_ids = [face] + petals
    seen: set[int] = set()
    sub_faces = []
    for fid in face_ids:
        if fid not in seen:
            seen.add(fid)
            sub_faces.append(graph.faces[fid])
    sub = SurfaceGraph.make(faces=sub_faces)
    return Leaf(core_face=face, petals=tuple(petals), subgraph=sub)
