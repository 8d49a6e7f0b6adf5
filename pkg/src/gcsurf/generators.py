"""Built-in graph generators and bundled fixture constructions.

Everything here is deterministic: fixtures are generated by code rather
than shipped as opaque data, and their serialized checksums are pinned in
the test suite.
"""
from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations, product

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .flow import Embedding
from .graph import SurfaceGraph, canonical_circuit, orient_faces, undirected

GOLDEN = (1 + math.sqrt(5)) / 2


def _icosahedron():
    verts = []
    for a in (-1.0, 1.0):
        for b in (-GOLDEN, GOLDEN):
            verts += [(0.0, a, b), (a, b, 0.0), (b, 0.0, a)]
    verts = np.array(verts)
    d2 = np.square(verts[:, None] - verts[None]).sum(-1)
    edges = [(i, j) for i in range(12) for j in range(i + 1, 12) if abs(d2[i, j] - 4.0) < 1e-9]
    adj = {i: set() for i in range(12)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    tris = [
        t
        for t in combinations(range(12), 3)
        if t[1] in adj[t[0]] and t[2] in adj[t[0]] and t[2] in adj[t[1]]
    ]
    return verts, edges, tris


def _ccw(ids, pts):
    """Order point ids counterclockwise around their center, seen from outside the origin."""
    c = pts[ids].mean(axis=0)
    ch = c / np.linalg.norm(c)
    u = pts[ids[0]] - c
    u -= (u @ ch) * ch
    u /= np.linalg.norm(u)
    w = np.cross(ch, u)
    ang = np.arctan2((pts[ids] - c) @ w, (pts[ids] - c) @ u)
    return [ids[k] for k in np.argsort(ang)]


def generate_c60(circumradius: float = 1.0) -> Embedding:
    """The 60-vertex truncated-icosahedron graph on a sphere.

    Vertices sit at the 1/3 points of icosahedron edges, which makes all 90
    edges equal; faces (12 pentagons, 20 hexagons) are wound counterclockwise
    seen from outside, so derived vertex normals point outward.
    """
    if circumradius <= 0:
        raise ValueError("circumradius must be positive")
    ico, edges, tris = _icosahedron()
    pts = {}
    for (i, j) in edges:
        pts[(i, (i, j))] = (2 * ico[i] + ico[j]) / 3
        pts[(j, (i, j))] = (ico[i] + 2 * ico[j]) / 3
    keys = sorted(pts)
    index = {k: n for n, k in enumerate(keys)}
    coords = np.array([pts[k] for k in keys])
    coords *= circumradius / np.linalg.norm(coords[0])
    faces = []
    for v in range(12):
        ids = [index[(v, e)] for e in edges if v in e]
        faces.append(_ccw(ids, coords))
    for t in tris:
        ids = [index[(v, tuple(sorted((v, w))))] for v in t for w in t if v != w]
        faces.append(_ccw(ids, coords))
    graph = SurfaceGraph.make(faces=faces)
    return Embedding(graph, coords)


def generate_hex_patch(rings: int, edge_length: float = 1.0) -> Embedding:
    """Planar honeycomb patch: a center hexagon surrounded by ``rings`` rings."""
    if rings < 1:
        raise ValueError("rings must be at least 1")
    if edge_length <= 0:
        raise ValueError("edge_length must be positive")
    s = edge_length
    centers = [
        (q, r)
        for q in range(-rings, rings + 1)
        for r in range(-rings, rings + 1)
        if max(abs(q), abs(r), abs(q + r)) <= rings
    ]
    corner_keys: dict[tuple[int, int], int] = {}
    corner_pos: dict[tuple[int, int], np.ndarray] = {}
    faces = []
    for q, r in centers:
        cx = 1.5 * q * s
        cy = math.sqrt(3) * (r + q / 2) * s
        circuit = []
        for k in range(6):
            x = cx + s * math.cos(k * math.pi / 3)
            y = cy + s * math.sin(k * math.pi / 3)
            key = (round(2 * x / s), round(2 * y / (s * math.sqrt(3))))
            if key not in corner_keys:
                corner_keys[key] = 0
                corner_pos[key] = np.array([x, y, 0.0])
            circuit.append(key)
        faces.append(circuit)
    ids = {key: i for i, key in enumerate(sorted(corner_keys))}
    graph = SurfaceGraph.make(faces=[[ids[k] for k in f] for f in faces])
    coords = np.empty((len(ids), 3))
    for key, i in ids.items():
        coords[i] = corner_pos[key]
    return Embedding(graph, coords)


def hex_torus(w: int, h: int, edge_length: float = 1.0) -> Embedding:
    """Periodic honeycomb quotient on a torus (w x h cells, lattice + edge offsets)."""
    if w < 2 or h < 2:
        raise ValueError("torus needs at least 2x2 cells")
    s = edge_length
    a1 = np.array([1.5 * s, math.sqrt(3) / 2 * s, 0.0])
    a2 = np.array([1.5 * s, -math.sqrt(3) / 2 * s, 0.0])
    span = float(np.linalg.norm(w * a1) + np.linalg.norm(h * a2))
    lattice = np.array([w * a1, h * a2, [0.0, 0.0, 10.0 * max(span, s)]])

    def vid(i, j, c):
        return ((i % w) * h + (j % h)) * 2 + c

    coords = np.empty((2 * w * h, 3))
    for i in range(w):
        for j in range(h):
            base = i * a1 + j * a2
            coords[vid(i, j, 0)] = base
            coords[vid(i, j, 1)] = base + np.array([s, 0.0, 0.0])

    offsets: dict[tuple[int, int], tuple[int, int, int]] = {}
    edges = set()

    def add_edge(a, b, off):
        e = undirected(a, b)
        o = tuple(off) if e[0] == a else tuple(-x for x in off)
        edges.add(e)
        if any(o):
            offsets[e] = o

    for i in range(w):
        for j in range(h):
            a = vid(i, j, 0)
            add_edge(a, vid(i, j, 1), (0, 0, 0))
            # neighbor B(i-1, j): offset -1 cell in the first lattice direction when wrapping
            add_edge(a, vid(i - 1, j, 1), ((i - 1) // w if i - 1 < 0 else 0, 0, 0))
            add_edge(a, vid(i, j - 1, 1), (0, (j - 1) // h if j - 1 < 0 else 0, 0))
    faces = []
    for i in range(w):
        for j in range(h):
            faces.append(
                [
                    vid(i, j, 1),
                    vid(i, j + 1, 0),
                    vid(i, j + 1, 1),
                    vid(i + 1, j + 1, 0),
                    vid(i + 1, j, 1),
                    vid(i + 1, j, 0),
                ]
            )
    graph = SurfaceGraph.make(faces=faces, edges=edges)
    return Embedding(graph, coords, lattice, offsets or None)


# -- hyperbolic hex/oct disk (the bundled "mackay-patch" stand-in) ----------


def _grow_disk(center_size: int, annuli: list[int]):
    """Concentric trivalent disk: a center face plus rings of faces of given sizes.

    Each annulus entry is the face size used for that ring of faces.  The
    construction keeps bottom-arc gaps at 1 or 2 edges, which supports
    hexagons and octagons.
    """
    next_id = 0

    def fresh(k):
        nonlocal next_id
        ids = list(range(next_id, next_id + k))
        next_id += k
        return ids

    ring = fresh(center_size)
    faces = [list(ring)]
    down = set()  # positions on the current ring already linked inward
    for size in annuli:
        L = len(ring)
        ups = [p for p in range(L) if p not in down]
        segments = []
        for i, u in enumerate(ups):
            nxt = ups[(i + 1) % len(ups)]
            gap = (nxt - u) % L
            b = size - gap - 2
            if b < 1:
                raise ValueError(f"face size {size} too small for bottom arc of {gap} edges")
            segments.append((u, nxt, gap, b))
        top_len = sum(b for *_, b in segments)
        top = fresh(top_len)
        new_down = set()
        faces_this = []
        t = 0
        tops = []
        for (u, nxt, gap, b) in segments:
            tops.append((t, b))
            new_down.add(t % top_len)
            t += b
        for k, (u, nxt, gap, b) in enumerate(segments):
            t0 = tops[k][0]
            bottom = [ring[(nxt - j) % L] for j in range(gap + 1)]  # reversed bottom arc
            toparc = [top[(t0 + j) % top_len] for j in range(b + 1)]
            faces_this.append(bottom + toparc)
        faces.extend(faces_this)
        ring = top
        down = new_down
    return faces, ring, next_id


def mackay_patch(saddle: float = 0.3) -> Embedding:
    """Finite fixed-boundary stand-in for a Mackay-type hexagon+octagon surface.

    A trivalent disk with three concentric layers of octagons padded by two
    hexagon rings, rim pinned to a saddle-lifted circle, interior relaxed to
    the harmonic (balanced) position.  The octagon-rich core makes the
    Dirichlet energy grow under subdivision while the padded rim keeps the
    frozen-boundary losses small.  Construction and embedding are
    deterministic; checksums of the serialized form are pinned in tests.
    """
    faces, rim, nverts = _grow_disk(8, [8, 8, 8, 6, 6])
    graph = SurfaceGraph.make(faces=faces)
    m = len(rim)
    rim_pos = {}
    for k, v in enumerate(rim):
        th = 2 * math.pi * k / m
        rim_pos[v] = np.array([math.cos(th), math.sin(th), saddle * math.cos(2 * th)])
    coords = _harmonic_fill(graph, rim_pos)
    return Embedding(graph, coords)


def _harmonic_fill(graph: SurfaceGraph, pinned: dict[int, np.ndarray]) -> np.ndarray:
    """Solve the balancing equations with the pinned vertices as boundary data."""
    verts = graph.vertices
    index = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    rows, cols, vals = [], [], []
    rhs = np.zeros((n, 3))
    for v in verts:
        i = index[v]
        if v in pinned:
            rows.append(i)
            cols.append(i)
            vals.append(1.0)
            rhs[i] = pinned[v]
        else:
            nbrs = graph.neighbors(v)
            rows.append(i)
            cols.append(i)
            vals.append(float(len(nbrs)))
            for u in nbrs:
                rows.append(i)
                cols.append(index[u])
                vals.append(-1.0)
    mat = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return scipy.sparse.linalg.spsolve(mat, rhs)


# -- K4 lattice (Laves graph) fixtures --------------------------------------

# Harmonic integer-coordinate realization of the maximal abelian cover of K4:
# cell vertices x0..x3, translations L1..L3; all edges have squared length 98,
# all angles 120 degrees, every vertex balanced.
_K4_X = {
    0: np.array([0.0, 0.0, 0.0]),
    1: np.array([3.0, 5.0, -8.0]),
    2: np.array([-8.0, 3.0, 5.0]),
    3: np.array([5.0, -8.0, 3.0]),
}
_K4_LAT = np.array([[10.0, -2.0, -22.0], [-22.0, 10.0, -2.0], [-2.0, -22.0, 10.0]])
# edges as (tail vertex, head vertex, cell voltage)
_K4_EDGES = [
    (0, 1, (0, 0, 0)),
    (0, 2, (0, 0, 0)),
    (0, 3, (0, 0, 0)),
    (1, 2, (1, 0, 0)),
    (2, 3, (0, 1, 0)),
    (3, 1, (0, 0, 1)),
]
_K4_SCALE = 1.0 / math.sqrt(98.0)


def _k4_box(radius: int):
    """Adjacency of the K4 cover restricted to cells in [-radius, radius]^3."""
    cells = list(product(range(-radius, radius + 1), repeat=3))
    keys = [(g, v) for g in cells for v in range(4)]
    adj: dict[tuple, list[tuple]] = {k: [] for k in keys}
    inside = set(keys)
    for g in cells:
        for (v, w, gam) in _K4_EDGES:
            a = (g, v)
            b = ((g[0] + gam[0], g[1] + gam[1], g[2] + gam[2]), w)
            if b in inside:
                adj[a].append(b)
                adj[b].append(a)
    return keys, adj


def _k4_position(key) -> np.ndarray:
    g, v = key
    return (_K4_X[v] + np.array(g, dtype=float) @ _K4_LAT) * _K4_SCALE


def _cycles_through(adj, a, b, length=10):
    """All simple cycles of the given length containing edge a-b, as canonical tuples."""
    out = set()

    def canon(path):
        best = None
        m = len(path)
        for s in range(m):
            for d in (1, -1):
                cand = tuple(path[(s + d * i) % m] for i in range(m))
                if best is None or cand < best:
                    best = cand
        return best

    def dfs(path, members):
        cur = path[-1]
        if len(path) == length:
            if a in adj[cur]:
                out.add(canon(path))
            return
        for nxt in adj[cur]:
            if nxt in members:
                continue
            members.add(nxt)
            path.append(nxt)
            dfs(path, members)
            path.pop()
            members.remove(nxt)

    dfs([a, b], {a, b})
    return sorted(out)


@lru_cache(maxsize=None)
def _k4_chunk_data(radius: int):
    keys, adj = _k4_box(radius)
    order = sorted(keys)
    index = {k: i for i, k in enumerate(order)}
    seen = set()
    faces = []
    for a in order:
        for b in adj[a]:
            if (a, b) in seen or (b, a) in seen:
                continue
            seen.add((a, b))
            for cyc in _cycles_through(adj, a, b):
                face = tuple(index[k] for k in cyc)
                faces.append(face)
    uniq = {}
    for f in faces:
        c = canonical_circuit(f)
        cr = canonical_circuit(tuple(reversed(f)))
        uniq[min(c, cr)] = True
    coords = np.array([_k4_position(k) for k in order])
    return order, index, adj, sorted(uniq), coords


def k4_chunk(radius: int = 1) -> Embedding:
    """A branched chunk of the K4 lattice with all contained 10-gon faces.

    Interior edges far enough from the chunk boundary carry their full ten
    faces, exhibiting the branched structure of the lattice.
    """
    order, _, _, faces, coords = _k4_chunk_data(radius)
    graph = SurfaceGraph.make(
        faces=faces,
        edges=None,
        vertices=range(len(order)),
    )
    # faces only cover edges they use; the chunk also has edges outside any face
    keys, adj = _k4_box(radius)
    index = {k: i for i, k in enumerate(sorted(keys))}
    edges = set()
    for a in adj:
        for b in adj[a]:
            edges.add(undirected(index[a], index[b]))
    graph = SurfaceGraph.make(faces=faces, edges=edges, vertices=range(len(order)))
    return Embedding(graph, coords)


def _k4_core(adj):
    center = ((0, 0, 0), 0)
    b = sorted(adj[center])[0]
    return _cycles_through(adj, center, b)[0]


def _coherent_petals(adj, core):
    """Per core edge, the sorted petal candidates that use the outgoing edges at both ends."""
    n = len(core)
    members = set(core)

    def out_edge(i):
        v = core[i]
        others = [u for u in adj[v] if u != core[i - 1] and u != core[(i + 1) % n]]
        return others[0]

    def has_edge(cyc, a, b):
        m = len(cyc)
        return any(
            (cyc[k] == a and cyc[(k + 1) % m] == b) or (cyc[k] == b and cyc[(k + 1) % m] == a)
            for k in range(m)
        )

    core_edges = {tuple(sorted((core[i], core[(i + 1) % n]))) for i in range(n)}
    options = []
    for i in range(n):
        u, v = core[i], core[(i + 1) % n]
        ou, ov = out_edge(i), out_edge((i + 1) % n)
        cands = []
        for cyc in _cycles_through(adj, u, v):
            if cyc == canonical_circuit(core) or set(cyc) == members:
                continue
            edges = {tuple(sorted((cyc[k], cyc[(k + 1) % len(cyc)]))) for k in range(len(cyc))}
            own = tuple(sorted((u, v)))
            if (edges & core_edges) != {own}:
                continue
            if has_edge(cyc, u, ou) and has_edge(cyc, v, ov):
                cands.append(cyc)
        options.append(sorted(cands))
    return options


def _select_leaf(core, options, forced: dict[int, int]):
    """Backtracking petal selection keeping every edge in at most two faces."""
    n = len(core)
    core_edges = {}
    for i in range(n):
        e = tuple(sorted((core[i], core[(i + 1) % n])))
        core_edges[e] = 1

    def edges_of(cyc):
        return [tuple(sorted((cyc[k], cyc[(k + 1) % len(cyc)]))) for k in range(len(cyc))]

    chosen: list = []
    counts: dict = dict(core_edges)

    def bt(i):
        if i == n:
            return True
        cands = options[i]
        if i in forced:
            cands = [options[i][forced[i]]]
        for cyc in cands:
            if cyc in chosen:
                continue
            es = edges_of(cyc)
            if any(counts.get(e, 0) + 1 > 2 for e in es):
                continue
            chosen.append(cyc)
            for e in es:
                counts[e] = counts.get(e, 0) + 1
            if bt(i + 1):
                return True
            chosen.pop()
            for e in es:
                counts[e] -= 1
        return False

    if not bt(0):
        raise RuntimeError("no consistent petal selection found")
    return list(chosen)


@lru_cache(maxsize=None)
def _k4_leaves():
    keys, adj = _k4_box(3)
    core = _k4_core(adj)
    options = _coherent_petals(adj, core)
    leaf_a = _select_leaf(core, options, {})
    leaf_b = None
    for slot in range(len(core)):
        if len(options[slot]) < 2:
            continue
        base_idx = options[slot].index(leaf_a[slot])
        alt = (base_idx + 1) % len(options[slot])
        try:
            cand = _select_leaf(core, options, {slot: alt})
        except RuntimeError:
            continue
        if sum(1 for x, y in zip(cand, leaf_a) if x != y) == 1:
            leaf_b = cand
            break
    if leaf_b is None:
        raise RuntimeError("could not build a second leaf differing in one petal")
    return core, leaf_a, leaf_b


def k4_leaf(which: str = "a") -> Embedding:
    """One leaf of the K4 lattice as a standalone patch.

    Leaves 'a' and 'b' share the core 10-gon and nine petals and differ in
    exactly one petal, reproducing the two-leaf divergence setup.
    """
    if which not in ("a", "b"):
        raise ValueError("which must be 'a' or 'b'")
    core, leaf_a, leaf_b = _k4_leaves()
    petals = leaf_a if which == "a" else leaf_b
    circuits = [core] + list(petals)
    used = sorted({k for c in circuits for k in c})
    index = {k: i for i, k in enumerate(used)}
    faces = orient_faces([[index[k] for k in c] for c in circuits])
    graph = SurfaceGraph.make(faces=faces)
    coords = np.array([_k4_position(k) for k in used])
    return Embedding(graph, coords)


FIXTURES = {
    "mackay-patch": mackay_patch,
    "k4-chunk": k4_chunk,
    "k4-leaf-a": lambda: k4_leaf("a"),
    "k4-leaf-b": lambda: k4_leaf("b"),
}


def fixture(name: str) -> Embedding:
    """Bundled fixture by id; see FIXTURES for the catalogue."""
    try:
        builder = FIXTURES[name]
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; available: {sorted(FIXTURES)}") from None
    return builder()
