"""Search for immersed hyperbolic turnovers in a tetrahedral reflection orbifold.

For each base face plane Pi_F, the developed face planes Pi_1, Pi_2 that
pass through edges lying in Pi_F are paired up. When the three lines cut
out in their common perpendicular plane bound a triangle with angles
pi/a, pi/b, pi/c, the rotations about the triangle's vertices generate an
(a,b,c) triangle subgroup. Hits whose invariant plane is a truncation plane
(the link of a hyper-ideal vertex) are discarded.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .develop import DEFAULT_TILE_CAP, DevelopmentState, EdgeRef, develop
from .lattice import TriangleType, direct_inclusions, is_maximal, subgroup_closure
from .mink import EPS, Plane, QuantizedIndex, inner, plane_relation, same_up_to_sign
from .summary import Expectation, ExpectationKind, expectation
from .tetgen import GeneralizedTetrahedron, TetSpec, VertexClass, realize

_SIG = np.array([1.0, 1.0, 1.0, -1.0])
# barycentric weights of the probe point used to locate a triangle
_PROBE = np.array([0.31, 0.33, 0.36])


class RankDeficient(ValueError):
    pass


class NonSpacelike(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    depth: int = 8
    eps: float = EPS
    cmax: int = 100
    tile_cap: int = DEFAULT_TILE_CAP
    threads: int = 1

    def __post_init__(self):
        if self.depth < 2:
            raise ValueError("search depth must be >= 2")
        if self.cmax < 2:
            raise ValueError("cmax must be >= 2")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


def turnover_type(a: int, b: int, c: int) -> TriangleType:
    t = TriangleType.of(a, b, c)
    if not t.hyperbolic:
        raise ValueError(f"{t} is not hyperbolic")
    return t


def angle_as_submultiple(theta: float, cmax: int = 100, eps: float = EPS) -> int | None:
    """Smallest c in [2, cmax] with |theta - pi/c| < eps * max(1, pi/theta)."""
    if not 0.0 < theta < math.pi:
        return None
    tol = eps * max(1.0, math.pi / theta)
    # pi/c is monotone in c, so only the two nearest integers can qualify
    r = math.pi / theta
    for c in sorted({math.floor(r), math.ceil(r)}):
        if 2 <= c <= cmax and abs(theta - math.pi / c) < tol:
            return c
    return None


def _normal(p) -> np.ndarray:
    return p.normal if isinstance(p, Plane) else np.asarray(p, dtype=float)


def perpendicular_vector(n1, n2, n3) -> np.ndarray:
    """Vector Lorentz-orthogonal to three vectors (generalized cross product)."""
    A = np.array([n1, n2, n3], dtype=float)
    c = np.array([(-1) ** k * np.linalg.det(np.delete(A, k, axis=1)) for k in range(4)])
    return c * _SIG


def common_perpendicular(p1, p2, p3, eps: float = EPS) -> Plane:
    """The plane orthogonal to three pairwise-intersecting planes."""
    n = [_normal(p) for p in (p1, p2, p3)]
    w = perpendicular_vector(*n)
    scale = np.prod([np.linalg.norm(x) for x in n])
    wn = float(np.linalg.norm(w))
    if wn <= eps * scale:
        raise RankDeficient("the normals do not span a 3-space")
    q = float(inner(w, w)) / wn**2
    if q <= eps:
        raise NonSpacelike("no hyperbolic plane is orthogonal to all three (spherical or Euclidean triple)")
    return Plane(w / math.sqrt(float(inner(w, w))))


@dataclass(frozen=True, eq=False)
class TurnoverWitness:
    type: TriangleType
    pi_f: Plane
    pi_1: Plane
    pi_2: Plane
    e1: EdgeRef
    e2: EdgeRef
    invariant_plane: Plane
    # reflection words: tile of e1, tile of e2, first tile carrying pi_1 / pi_2 (with face index)
    words: dict
    # interior angles as submultiples: at pi_f & pi_1, at pi_f & pi_2, at pi_1 & pi_2
    angles: tuple[int, int, int]
    vertices: np.ndarray  # unit time-like triangle vertices
    oblique_crossings: int
    perpendicular_crossings: int
    maximal: bool
    supergroups: tuple[TriangleType, ...] = ()
    face: int = 0

    @property
    def sort_key(self):
        return (self.type, self.invariant_plane.key)


@dataclass
class SearchStats:
    tiles: int = 0
    walls: int = 0
    edges: int = 0
    candidates: int = 0
    non_submultiple: int = 0
    vertex_parallel: int = 0
    no_oblique: int = 0
    shared_vertex: int = 0
    duplicates: int = 0


def _triangle(nf, n1, n2):
    """Unit future vertices of the triangle cut out by three planes, and the
    oriented signs used for the interior angles."""
    n3 = np.array([nf, n1, n2])
    M = (n3 * _SIG) @ n3.T
    V = np.linalg.solve(M, n3)
    e = np.where(-V[:, 3] > 0, 1.0, -1.0)
    P = -(e[:, None] * V)
    P /= np.sqrt(-inner(P, P))[:, None]
    return P


def reduce_to_base(tet: GeneralizedTetrahedron, x, max_steps: int = 100000):
    """Reflect a time-like point into the base cone; returns (point, motion)."""
    N = tet.normals
    h = np.eye(4)
    x = np.array(x, dtype=float)
    JN = N * _SIG
    for _ in range(max_steps):
        s = JN @ x
        j = int(np.argmax(s))
        if s[j] <= 1e-12 * max(1.0, abs(x[3])):
            return x, h
        n = N[j]
        R = np.eye(4) - 2.0 * np.outer(n, JN[j])
        x = R @ x
        h = R @ h
    raise RuntimeError("reduction to the fundamental domain did not terminate")


def is_vertex_link(tet: GeneralizedTetrahedron, w: np.ndarray, point: np.ndarray, tol: float = 1e-7) -> bool:
    """True if the plane w through `point` is a translate of a truncation plane."""
    _, h = reduce_to_base(tet, point)
    w2 = h @ w
    w2 = w2 / math.sqrt(float(inner(w2, w2)))
    for v in tet.vertices:
        if v.truncation_normal is not None and same_up_to_sign(w2, v.truncation_normal, tol):
            return True
    return False


def _edge_crossings(state: DevelopmentState, w: np.ndarray, tol: float = 1e-9):
    """Developed edges crossing the plane w: (edge ids, crossing points, perpendicular flags)."""
    E = state.edge_ends
    u = state.vertex_rep[E[:, 0]]
    v = state.vertex_rep[E[:, 1]]
    su = inner(u, w[None, :])
    sv = inner(v, w[None, :])
    mu = np.abs(u).max(axis=1)
    mv = np.abs(v).max(axis=1)
    wm = float(np.abs(w).max())
    on_u = np.abs(su) <= tol * mu * wm
    on_v = np.abs(sv) <= tol * mv * wm
    cross = ~on_u & ~on_v & (np.sign(su) != np.sign(sv))
    # an edge can also meet the plane at a finite endpoint lying on it
    finite = np.array([c is VertexClass.FINITE for c in state.vertex_class], dtype=bool)
    touch = (on_u ^ on_v) & np.where(on_u, finite[E[:, 0]], finite[E[:, 1]])
    idx = np.flatnonzero(cross | touch)
    if idx.size == 0:
        return idx, np.zeros((0, 4)), np.zeros(0, dtype=bool)
    z = np.abs(sv[idx])[:, None] * u[idx] + np.abs(su[idx])[:, None] * v[idx]
    z = np.where(on_u[idx][:, None], u[idx], np.where(on_v[idx][:, None], v[idx], z))
    z /= np.abs(z).max(axis=1)[:, None]
    timelike = inner(z, z) < 0
    # inside the truncation of each hyper-ideal endpoint: <z, u> <= 0
    ok = timelike.copy()
    for col, ends in ((0, u[idx]), (1, v[idx])):
        vid = E[idx, col]
        trunc = np.array([state.vertex_class[x] is VertexClass.TRUNCATED for x in vid], dtype=bool)
        if trunc.any():
            ok &= ~trunc | (inner(z, ends) <= 0)
    idx, z = idx[ok], z[ok]
    z /= np.sqrt(-inner(z, z))[:, None]
    wall = state.walls[state.edge_walls0[idx]]  # (k, 2, 4)
    wn = w / math.sqrt(float(inner(w, w)))
    d = np.abs(inner(wall, wn[None, None, :]))
    wmag = np.abs(wall).max(axis=2)
    perp = np.all(d <= 1e-8 * np.maximum(1.0, wmag), axis=1)
    return idx, z, perp


def _inside_triangle(P: np.ndarray, z: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Points z (rows) in the closed triangle with vertices P, excluding the vertices."""
    if len(z) == 0:
        return np.zeros(0, dtype=bool)
    coef, *_ = np.linalg.lstsq(P.T, z.T, rcond=None)
    coef = coef.T
    inside = np.all(coef >= -tol, axis=1)
    at_vertex = np.zeros(len(z), dtype=bool)
    for k in range(3):
        at_vertex |= -inner(z, P[k][None, :]) < 1.0 + 1e-9
    return inside & ~at_vertex


def filter_vertex_parallel(w, tet: GeneralizedTetrahedron, state: DevelopmentState, eps: float = EPS) -> bool:
    """Keep (True) unless the invariant plane re-detects a vertex link.

    `w` may be a TurnoverWitness or a candidate Plane; a bare plane is probed
    at its point closest to the base tile.
    """
    if isinstance(w, TurnoverWitness):
        plane, point = w.invariant_plane, w.vertices.T @ _PROBE
    else:
        plane = w if isinstance(w, Plane) else Plane(w, normalize=True)
        x0 = tet.interior
        n = plane.normal
        point = x0 - float(inner(x0, n)) / float(inner(n, n)) * n
        if float(inner(point, point)) >= 0:
            point = None
    n = plane.normal
    if _matches_any(n, state.truncation_normals):
        return False
    if point is not None:
        point = point / math.sqrt(-float(inner(point, point)))
        if point[3] < 0:
            point = -point
        if is_vertex_link(tet, n, point):
            return False
    idx, _, perp = _edge_crossings(state, n)
    return bool(np.count_nonzero(~perp))


def _matches_any(w: np.ndarray, T: np.ndarray, tol: float = 1e-7) -> bool:
    """True if w equals some row of T up to sign (vectorized same_up_to_sign)."""
    if len(T) == 0:
        return False
    scale = np.maximum(np.maximum(np.abs(T).max(axis=1), float(np.abs(w).max())), 1.0)
    d = np.minimum(np.abs(T - w).max(axis=1), np.abs(T + w).max(axis=1))
    return bool(np.any(d <= tol * scale))


def _wall_word(state: DevelopmentState, w: int):
    flat = np.flatnonzero(state.face_wall.reshape(-1) == w)[0]
    return state.words[flat // 4], int(flat % 4)


def _search_face(tet, state: DevelopmentState, f: int, cfg: SearchConfig):
    stats = SearchStats()
    wF = int(state.face_wall[0, f])
    nF = state.walls[wF]
    side: dict[int, list[int]] = {}
    for e in state.coplanar_edge_ids(wF):
        for x in state.side_walls(e, wF):
            side.setdefault(int(x), []).append(e)
    S = list(side)
    if len(S) < 2:
        return [], stats
    walls = state.walls[S]
    ii, jj, aa, bb, cc, nonsub = kernels.triangle_pairs(nF, walls, cfg.cmax, cfg.eps)
    stats.non_submultiple = int(nonsub)
    stats.candidates = len(ii)
    out = []
    T = np.asarray(state.truncation_normals, dtype=float).reshape(-1, 4)
    for i, j, a, b, c in zip(ii.tolist(), jj.tolist(), aa.tolist(), bb.tolist(), cc.tolist()):
        w1, w2 = S[i], S[j]
        pair = None
        for e1 in side[w1]:
            s1 = set(state.edge_ends[e1].tolist())
            for e2 in side[w2]:
                if not s1 & set(state.edge_ends[e2].tolist()):
                    pair = (e1, e2)
                    break
            if pair:
                break
        if pair is None:
            stats.shared_vertex += 1
            continue
        n1, n2 = state.walls[w1], state.walls[w2]
        P = _triangle(nF, n1, n2)
        wv = perpendicular_vector(nF, n1, n2)
        wv = wv / math.sqrt(float(inner(wv, wv)))
        probe = P.T @ _PROBE
        probe /= math.sqrt(-float(inner(probe, probe)))
        if _matches_any(wv, T) or is_vertex_link(tet, wv, probe):
            stats.vertex_parallel += 1
            continue
        idx, z, perp = _edge_crossings(state, wv)
        n_obl = int(np.count_nonzero(~perp))
        if n_obl == 0:
            stats.no_oblique += 1
            continue
        inside = _inside_triangle(P, z[perp])
        n_perp = int(np.count_nonzero(inside))
        typ = TriangleType.of(a, b, c)
        sup = tuple(sorted({inc.sup for inc in direct_inclusions(typ, cfg.cmax)}))
        words = {
            "e1": state.words[state.edge_tile[pair[0]]],
            "e2": state.words[state.edge_tile[pair[1]]],
            "pi_1": _wall_word(state, w1),
            "pi_2": _wall_word(state, w2),
        }
        out.append(
            TurnoverWitness(
                type=typ,
                pi_f=state.wall_plane(wF),
                pi_1=state.wall_plane(w1),
                pi_2=state.wall_plane(w2),
                e1=state.edge(pair[0]),
                e2=state.edge(pair[1]),
                invariant_plane=Plane(wv),
                words=words,
                angles=(a, b, c),
                vertices=P,
                oblique_crossings=n_obl,
                perpendicular_crossings=n_perp,
                maximal=n_perp == 0,
                supergroups=sup,
                face=f,
            )
        )
    return out, stats


def search(
    tet: GeneralizedTetrahedron,
    cfg: SearchConfig = SearchConfig(),
    state: DevelopmentState | None = None,
    stats: SearchStats | None = None,
) -> list[TurnoverWitness]:
    """All turnover witnesses found in the development to cfg.depth."""
    if state is None:
        state = develop(tet, cfg.depth, cfg.tile_cap)
    faces = range(4)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=min(cfg.threads, 4)) as pool:
            results = list(pool.map(lambda f: _search_face(tet, state, f, cfg), faces))
    else:
        results = [_search_face(tet, state, f, cfg) for f in faces]
    seen: dict[TriangleType, QuantizedIndex] = {}
    found = []
    total = SearchStats(tiles=state.n_tiles, walls=state.n_walls, edges=state.n_edges)
    for wits, st in results:
        for k in ("candidates", "non_submultiple", "vertex_parallel", "no_oblique", "shared_vertex"):
            setattr(total, k, getattr(total, k) + getattr(st, k))
        for wt in wits:
            idx = seen.setdefault(wt.type, QuantizedIndex(projective=True))
            _, new = idx.add(wt.invariant_plane.normal)
            if new:
                found.append(wt)
            else:
                total.duplicates += 1
    found.sort(key=lambda w: w.sort_key)
    if stats is not None:
        for k, v in vars(total).items():
            setattr(stats, k, v)
    return found


class Verdict(enum.Enum):
    MATCH = "Match"
    MISMATCH = "Mismatch"
    INCONCLUSIVE = "Inconclusive(depth-limited)"


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    spec: TetSpec
    found: list[TurnoverWitness]
    expected: Expectation
    verdict: Verdict
    depth: int
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def found_types(self) -> list[TriangleType]:
        return sorted(w.type for w in self.found)

    @property
    def maximal_types(self) -> set[TriangleType]:
        return {w.type for w in self.found if w.maximal}

    @property
    def present_types(self) -> set[TriangleType]:
        """Found types closed under table subgroups."""
        return subgroup_closure({w.type for w in self.found})

    @property
    def missing(self) -> set[TriangleType]:
        if self.expected.kind is ExpectationKind.ITEM:
            return set(self.expected.types) - self.maximal_types
        if self.expected.kind is ExpectationKind.CONJECTURAL:
            return set(self.expected.types) - self.present_types
        return set()


def judge(expected: Expectation, found: list[TurnoverWitness]) -> Verdict:
    if expected.kind is ExpectationKind.ITEM:
        maximal = {w.type for w in found if w.maximal}
        return Verdict.MATCH if maximal == set(expected.types) else Verdict.MISMATCH
    if expected.kind is ExpectationKind.CONJECTURAL:
        present = subgroup_closure({w.type for w in found})
        return Verdict.MATCH if set(expected.types) <= present else Verdict.MISMATCH
    if expected.kind is ExpectationKind.NONE_EXPECTED:
        return Verdict.INCONCLUSIVE if not found else Verdict.MISMATCH
    return Verdict.INCONCLUSIVE


def classify_spec(spec: TetSpec, cfg: SearchConfig = SearchConfig()) -> ClassificationReport:
    exp = expectation(spec)
    tet = realize(spec)
    stats = SearchStats()
    found = search(tet, cfg, stats=stats)
    return ClassificationReport(spec, found, exp, judge(exp, found), cfg.depth, stats)


def witness_relations(w: TurnoverWitness, eps: float = EPS):
    """Pairwise relations among (pi_f, pi_1, pi_2) and with the invariant plane."""
    rel = [
        plane_relation(w.pi_f, w.pi_1, eps),
        plane_relation(w.pi_f, w.pi_2, eps),
        plane_relation(w.pi_1, w.pi_2, eps),
    ]
    perp = [plane_relation(w.invariant_plane, p, eps) for p in (w.pi_f, w.pi_1, w.pi_2)]
    return rel, perp
