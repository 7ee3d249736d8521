"""Breadth-first development of the reflection tiling by copies of a tetrahedron.

Tiles are enumerated without hashing floating-point matrices: a child
g R_i of tile g is kept only when i is the smallest face whose wall
separates the child from the base point x0 (its first descent). This
visits every group element once, from its lexicographically least
reduced word, using sign tests that stay well away from zero.
Planes, vertices, and edges are then deduplicated by quantized keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .mink import EPS, Motion, Plane, QuantizedIndex, group_by_first_appearance, inner, quantize
from .tetgen import EDGE_FACES, EDGE_NAMES, VERTICES, GeneralizedTetrahedron, VertexClass

MAX_DEPTH = 12
DEFAULT_TILE_CAP = 10**6

_SIG = np.array([1.0, 1.0, 1.0, -1.0])
# base edges as pairs of vertex indices, in EDGE_NAMES order
EDGE_VERTS = np.array([[VERTICES.index(e[0]), VERTICES.index(e[1])] for e in EDGE_NAMES])
EDGE_FACE_IDX = np.array([EDGE_FACES[e] for e in EDGE_NAMES])


class DepthExceeded(ValueError):
    pass


class BlowUp(RuntimeError):
    pass


class PlaneNotInState(KeyError):
    pass


class EdgeNotCoplanar(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Tile:
    motion: Motion
    word: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class EdgeRef:
    id: int
    tile: int
    edge: str
    walls: tuple[int, int]
    label: int
    endpoints: tuple[int, int]
    duals: tuple[np.ndarray, np.ndarray]
    classes: tuple[VertexClass, VertexClass]

    @property
    def key(self) -> tuple[int, int]:
        """Geodesic key: the unordered pair of endpoint vertex ids."""
        return self.endpoints


# _EDGE_HAS_VERTEX[i, e]: edge e has vertex i as an endpoint
_EDGE_HAS_VERTEX = np.any(EDGE_VERTS[None, :, :] == np.arange(4)[:, None, None], axis=2)


def _normalize_duals(V, x0):
    """Scale vertex duals to a canonical representative of each point.

    Time-like and space-like duals get |<v,v>| = 1; light-like ones are
    scaled so that <v, x0> = -1, which keeps distinct ideal points far apart.
    """
    q = inner(V, V)
    mag = np.abs(V).max(axis=1)
    light = np.abs(q) <= EPS * mag**2
    out = np.empty_like(V)
    nl = ~light
    out[nl] = V[nl] / np.sqrt(np.abs(q[nl]))[:, None]
    if light.any():
        s = -inner(V[light], x0[None, :])
        out[light] = V[light] / s[:, None]
    return out


def _inherit(table, fresh, parent, level):
    """Fill non-fresh entries of a (tiles, 4) table from the parent tile, level by level."""
    for lv in range(1, int(level.max(initial=0)) + 1):
        k = np.flatnonzero(level == lv)
        table[k] = np.where(fresh[k], table[k], table[parent[k]])
    return table


class DevelopmentState:
    """Immutable result of develop(); arrays are indexed by tile, wall, vertex, edge."""

    def __init__(self, tet, depth, motions, parent, gen, level):
        self.tet = tet
        self.depth = depth
        self.motions = motions
        self.parent = parent
        self.gen = gen
        self.level = level
        T = len(motions)
        N = tet.normals
        # A child h = g R_i shares face plane i with its parent (h n_i = -g n_i),
        # and face j as well when n_j is orthogonal to n_i. Every vertex other
        # than v_i lies on face i and is fixed by R_i. Only the remaining
        # entries need numerical deduplication.
        G = np.asarray(tet.gram, dtype=float)
        same_wall = (np.abs(G) < 1e-12) | np.eye(4, dtype=bool)
        kid = np.arange(1, T)
        fresh_wall = np.ones((T, 4), dtype=bool)
        fresh_wall[kid] = ~same_wall[gen[kid]]
        fresh_vert = np.ones((T, 4), dtype=bool)
        fresh_vert[kid] = np.arange(4)[None, :] == gen[kid][:, None]
        # face walls: g n_j
        rt, rj = np.nonzero(fresh_wall)
        # one flat product (T*4, 4) @ (4, 4): column j of tile t is g_t n_j
        raw = (motions.reshape(-1, 4) @ N.T).reshape(T, 4, 4)[rt, :, rj]
        raw = raw / np.sqrt(inner(raw, raw))[:, None]
        self._wall_index = QuantizedIndex(projective=True)
        face_wall = np.full((T, 4), -1, dtype=np.int64)
        face_wall[rt, rj] = self._wall_index.add_many(raw)
        self.face_wall = _inherit(face_wall, fresh_wall, parent, level)
        self.walls = self._wall_index.array()
        # generalized vertices: g v_j
        duals = np.array([v.dual for v in tet.vertices])
        rt, rj = np.nonzero(fresh_vert)
        rawv = (motions.reshape(-1, 4) @ duals.T).reshape(T, 4, 4)[rt, :, rj]
        rawv = _normalize_duals(rawv, tet.interior)
        self._vertex_index = QuantizedIndex(projective=True)
        ids = self._vertex_index.add_many(rawv)
        tile_vertex = np.full((T, 4), -1, dtype=np.int64)
        tile_vertex[rt, rj] = ids
        self.tile_vertex = _inherit(tile_vertex, fresh_vert, parent, level)
        nv = len(self._vertex_index)
        first = np.full(nv, -1, dtype=np.int64)
        order = np.arange(ids.size)[::-1]
        first[ids[order]] = order
        self.vertex_rep = rawv[first]
        self.vertex_base = rj[first]
        self.vertex_class = np.array([v.cls for v in tet.vertices], dtype=object)[self.vertex_base].tolist()
        # edges: unordered endpoint pairs; an edge avoiding v_i is fixed by R_i
        fresh_edge = np.ones((T, 6), dtype=bool)
        fresh_edge[kid] = _EDGE_HAS_VERTEX[gen[kid]]
        rt, re = np.nonzero(fresh_edge)
        va = self.tile_vertex[rt, EDGE_VERTS[re, 0]]
        vb = self.tile_vertex[rt, EDGE_VERTS[re, 1]]
        ends = np.stack([np.minimum(va, vb), np.maximum(va, vb)], axis=1)
        # pack each endpoint pair into one integer for a flat unique
        first_e, inv, _, _ = group_by_first_appearance(ends[:, 0] * nv + ends[:, 1])
        tile_edge = np.full((T, 6), -1, dtype=np.int64)
        tile_edge[rt, re] = inv
        self.tile_edge = _inherit(tile_edge, fresh_edge, parent, level)
        self.edge_ends = ends[first_e]
        self.edge_tile = rt[first_e]
        self.edge_base = re[first_e]
        labels = np.array(tet.spec.as_tuple() if tet.spec else _labels_from_gram(tet.gram))
        self.edge_label = labels[self.edge_base]
        # edge-wall incidences collected from every tile around each edge;
        # an inherited edge in an inherited wall repeats a parent's incidence
        fw = self.face_wall[:, EDGE_FACE_IDX]  # (T, 6, 2)
        new_pair = fresh_edge[:, :, None] | fresh_wall[:, EDGE_FACE_IDX]
        nw = len(self.walls)
        code = (self.tile_edge[:, :, None] * nw + fw)[new_pair]
        code = np.unique(code)
        pairs = np.stack([code // nw, code % nw], axis=1)
        self._ew_ptr = np.searchsorted(pairs[:, 0], np.arange(len(self.edge_ends) + 1))
        self._ew_wall = pairs[:, 1]
        w0 = fw[self.edge_tile, self.edge_base]
        self.edge_walls0 = np.stack([w0.min(axis=1), w0.max(axis=1)], axis=1)

    # -- sizes -------------------------------------------------------------
    def __len__(self) -> int:
        return len(self.motions)

    @property
    def n_tiles(self) -> int:
        return len(self.motions)

    @property
    def n_walls(self) -> int:
        return len(self.walls)

    @property
    def n_edges(self) -> int:
        return len(self.edge_ends)

    # -- words and tiles ---------------------------------------------------
    @cached_property
    def words(self) -> list[tuple[int, ...]]:
        out: list[tuple[int, ...]] = [()]
        for k in range(1, len(self.motions)):
            out.append(out[self.parent[k]] + (int(self.gen[k]),))
        return out

    def tile(self, k: int) -> Tile:
        return Tile(Motion(self.motions[k]), self.words[k])

    @property
    def tiles(self) -> list[Tile]:
        return [self.tile(k) for k in range(len(self.motions))]

    # -- planes ------------------------------------------------------------
    def wall_plane(self, w: int) -> Plane:
        return Plane(self.walls[w], normalize=True)

    def find_wall(self, plane) -> int | None:
        n = plane.normal if isinstance(plane, Plane) else np.asarray(plane, dtype=float)
        return self._wall_index.find(n)

    def wall_id(self, plane) -> int:
        w = self.find_wall(plane)
        if w is None:
            raise PlaneNotInState(f"{plane!r} is not a developed face plane")
        return w

    @cached_property
    def truncation_vertices(self) -> np.ndarray:
        trunc = [k for k, v in enumerate(self.tet.vertices) if v.cls is VertexClass.TRUNCATED]
        return np.flatnonzero(np.isin(self.vertex_base, trunc)).astype(np.int64)

    @cached_property
    def truncation_normals(self) -> np.ndarray:
        """Unit normals of developed truncation planes (one per truncated vertex)."""
        if len(self.truncation_vertices) == 0:
            return np.zeros((0, 4))
        return self.vertex_rep[self.truncation_vertices]

    @property
    def planes(self) -> list[tuple[Plane, str]]:
        out = [(self.wall_plane(w), "face") for w in range(self.n_walls)]
        out += [(Plane(t, normalize=True), "truncation") for t in self.truncation_normals]
        return out

    # -- edges -------------------------------------------------------------
    def walls_through(self, e: int) -> np.ndarray:
        return self._ew_wall[self._ew_ptr[e] : self._ew_ptr[e + 1]]

    def edge(self, e: int) -> EdgeRef:
        a, b = (int(x) for x in self.edge_ends[e])
        return EdgeRef(
            id=e,
            tile=int(self.edge_tile[e]),
            edge=EDGE_NAMES[self.edge_base[e]],
            walls=(int(self.edge_walls0[e, 0]), int(self.edge_walls0[e, 1])),
            label=int(self.edge_label[e]),
            endpoints=(a, b),
            duals=(self.vertex_rep[a], self.vertex_rep[b]),
            classes=(self.vertex_class[a], self.vertex_class[b]),
        )

    @property
    def edges(self) -> list[EdgeRef]:
        return [self.edge(e) for e in range(self.n_edges)]

    def edge_sort_key(self, e: int):
        w = self.words[self.edge_tile[e]]
        return (len(w), w, int(self.edge_base[e]))

    def coplanar_edge_ids(self, w: int, tol: float = 1e-8) -> list[int]:
        """Edges lying in wall w, by incidence or by endpoint orthogonality."""
        hit = np.zeros(self.n_edges, dtype=bool)
        hit[np.repeat(np.arange(self.n_edges), np.diff(self._ew_ptr))[self._ew_wall == w]] = True
        n = self.walls[w]
        on = np.abs(inner(self.vertex_rep, n[None, :])) <= tol * self._rep_scale * max(1.0, float(np.abs(n).max()))
        hit |= on[self.edge_ends[:, 0]] & on[self.edge_ends[:, 1]]
        # tiles are in shortlex word order and edges are numbered by first
        # appearance, so ascending ids already follow edge_sort_key
        return np.flatnonzero(hit).tolist()

    @cached_property
    def _rep_scale(self) -> np.ndarray:
        return np.maximum(1.0, np.abs(self.vertex_rep).max(axis=1))

    def side_walls(self, e: int, w: int) -> np.ndarray:
        ws = self.walls_through(e)
        return ws[ws != w]


def _labels_from_gram(g) -> tuple[int, ...]:
    out = []
    for e in EDGE_NAMES:
        i, j = EDGE_FACES[e]
        out.append(int(round(math.pi / math.acos(-g[i, j]))))
    return tuple(out)


def develop(tet: GeneralizedTetrahedron, depth: int, tile_cap: int = DEFAULT_TILE_CAP) -> DevelopmentState:
    """Develop all tiles whose reduced reflection word has length <= depth."""
    if depth < 0 or depth > MAX_DEPTH:
        raise DepthExceeded(f"depth {depth} outside [0, {MAX_DEPTH}]")
    N = np.asarray(tet.normals, dtype=float)
    x0 = np.asarray(tet.interior, dtype=float)
    U = x0[None, :].copy()
    M = np.eye(4)[None, :, :].copy()
    Us, Ms, parents, gens, levels = [U], [M], [np.array([-1])], [np.array([-1])], [np.array([0])]
    offset = 0
    total = 1
    for d in range(depth):
        U2, M2, par, gen = kernels.expand_level(U, M, N, 0.0)
        if len(U2) == 0:
            break
        total += len(U2)
        if total > tile_cap:
            raise BlowUp(f"tile count exceeds cap {tile_cap} at depth {d + 1}")
        parents.append(par + offset)
        offset += len(U)
        gens.append(gen)
        levels.append(np.full(len(U2), d + 1))
        Us.append(U2)
        Ms.append(M2)
        U, M = U2, M2
    motions = np.concatenate(Ms)
    parent = np.concatenate(parents).astype(np.int64)
    gen = np.concatenate(gens).astype(np.int64)
    level = np.concatenate(levels).astype(np.int64)
    motions.setflags(write=False)
    return DevelopmentState(tet, depth, motions, parent, gen, level)


def develop_around_edge(tet: GeneralizedTetrahedron, edge: str) -> list[Tile]:
    """The 2k tiles around a base edge of label k, in cyclic order.

    Consecutive tiles share a face; the last is the reflection of the first
    through the second face containing the edge.
    """
    edge = "".join(sorted(edge))
    a, b = EDGE_FACES[edge]
    k = tet.spec.label(edge) if tet.spec else _labels_from_gram(tet.gram)[EDGE_NAMES.index(edge)]
    R = {a: tet_reflection(tet, a), b: tet_reflection(tet, b)}
    tiles = []
    m = np.eye(4)
    for t in range(2 * k):
        if t <= k:
            word = tuple(a if s % 2 == 0 else b for s in range(t))
        else:
            word = tuple(b if s % 2 == 0 else a for s in range(2 * k - t))
        m = np.eye(4)
        for f in word:
            m = m @ R[f]
        tiles.append(Tile(Motion(m), word))
    return tiles


def tet_reflection(tet: GeneralizedTetrahedron, face: int) -> np.ndarray:
    n = tet.normals[face]
    return np.eye(4) - 2.0 * np.outer(n, n * _SIG)


def coplanar_edges(state: DevelopmentState, pi_f: Plane) -> list[EdgeRef]:
    w = state.wall_id(pi_f)
    return [state.edge(e) for e in state.coplanar_edge_ids(w)]


def _rotation_angles(normals, n_f):
    """Angles in (0, pi) from the plane n_f to planes through a common line."""
    e1 = n_f / math.sqrt(float(inner(n_f, n_f)))
    out = []
    e2 = None
    for n in normals:
        if e2 is None:
            r = n - inner(n, e1) * e1
            e2 = r / math.sqrt(float(inner(r, r)))
        phi = math.atan2(float(inner(n, e2)), float(inner(n, e1))) % math.pi
        out.append(phi)
    return out


def side_planes(state: DevelopmentState, edge: EdgeRef, pi_f: Plane) -> list[tuple[Plane, float]]:
    """Developed face planes through the edge other than pi_f, with rotation angles."""
    w = state.wall_id(pi_f)
    if edge.id not in state.coplanar_edge_ids(w):
        raise EdgeNotCoplanar(f"edge {edge.id} does not lie in {pi_f!r}")
    ws = state.side_walls(edge.id, w)
    normals = [state.walls[x] for x in ws]
    angles = _rotation_angles(normals, state.walls[w])
    out = [(state.wall_plane(int(x)), ang) for x, ang in zip(ws, angles)]
    out.sort(key=lambda t: t[1])
    return out


# ---------------------------------------------------------------------------
# disjointness observations for all-non-finite tetrahedra


@dataclass(frozen=True)
class Violation:
    rule: str
    where: tuple
    detail: str


def truncation_planes_disjoint(state: DevelopmentState, eps: float = EPS) -> list[Violation]:
    """Distinct truncation planes are ultraparallel (never meet or touch)."""
    T = state.truncation_normals
    if len(T) < 2:
        return []
    C = (T * _SIG) @ T.T
    mag = np.abs(T).max(axis=1)
    tol = eps * np.outer(mag, mag)
    iu, ju = np.triu_indices(len(T), 1)
    c = np.abs(C[iu, ju])
    bad = c <= 1.0 + tol[iu, ju]
    out = []
    for i, j in zip(iu[bad], ju[bad]):
        if np.abs(T[i] - T[j]).max() <= 1e-6 * max(mag[i], 1) or np.abs(T[i] + T[j]).max() <= 1e-6 * max(mag[i], 1):
            continue  # same plane reached twice
        out.append(Violation("truncations-disjoint", (int(i), int(j)), f"|<t,t'>| = {abs(C[i, j]):.6g}"))
    return out


def face_vs_opposite_truncation(state: DevelopmentState, eps: float = EPS) -> list[Violation]:
    """Each developed face is ultraparallel to the truncation plane of its opposite vertex."""
    out = []
    tet = state.tet
    for i, v in enumerate(tet.vertices):
        if v.cls is not VertexClass.TRUNCATED:
            continue
        n = np.einsum("tab,b->ta", state.motions, tet.normals[i])
        t = np.einsum("tab,b->ta", state.motions, v.truncation_normal)
        c = np.abs(inner(n, t))
        bad = np.flatnonzero(c <= 1.0 + eps)
        for k in bad:
            out.append(Violation("face-opposite-truncation", (int(k), i), f"|<n,t>| = {c[k]:.6g}"))
    return out


def _plucker(u, v):
    idx = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    return np.stack([u[:, a] * v[:, b] - u[:, b] * v[:, a] for a, b in idx], axis=1)


def edge_lines_disjoint(state: DevelopmentState, tol: float = 1e-9) -> list[Violation]:
    """Distinct developed edge geodesics have no common point in H^3.

    Lines are spans of their endpoint duals. Two spans meet nontrivially iff
    the Pluecker pairing det[u1, v1, u2, v2] vanishes; such pairs are then
    checked for a time-like common vector.
    """
    E = state.edge_ends
    if len(E) < 2:
        return []
    reps = state.vertex_rep / np.abs(state.vertex_rep).max(axis=1)[:, None]
    u, v = reps[E[:, 0]], reps[E[:, 1]]
    P = _plucker(u, v)
    P /= np.linalg.norm(P, axis=1)[:, None]
    # det[u1,v1,u2,v2] = p01 q23 - p02 q13 + p03 q12 + p12 q03 - p13 q02 + p23 q01
    Q = P[:, ::-1] * np.array([1.0, -1.0, 1.0, 1.0, -1.0, 1.0])
    D = P @ Q.T
    iu, ju = np.nonzero(np.triu(np.abs(D) <= tol, 1))
    out = []
    for i, j in zip(iu, ju):
        if set(E[i]) & set(E[j]):
            continue  # common endpoint is ideal or hyper-ideal here
        A = np.array([u[i], v[i], u[j], v[j]])
        _, s, vt = np.linalg.svd(A.T)
        # common vector z = a u1 + b v1 = -(c u2 + d v2)
        coeff = vt[-1]
        z = coeff[0] * u[i] + coeff[1] * v[i]
        if np.abs(z).max() < 1e-12:
            continue
        if float(inner(z, z)) < -1e-9 * float(np.abs(z).max()) ** 2:
            out.append(Violation("edges-disjoint", (int(i), int(j)), "edge geodesics cross in H^3"))
    return out
