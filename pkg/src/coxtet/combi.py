"""Combinatorial layer: marked planar graphs of Coxeter polyhedra.

A polyhedron is given by its 1-skeleton with dihedral-angle marks (edge
label k means angle pi/k) and a planar embedding listed as face cycles of
edge indices. Only the vertex conditions are checked here, so a Valid
verdict is a necessary condition for realizability, not a certificate.
"""

from __future__ import annotations

import enum
import itertools
import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .tetgen import EDGE_NAMES, VERTICES, TetSpec, VertexClass, classify_vertex


class NotValidated(ValueError):
    pass


class HyperIdealVertex(ValueError):
    """A trivalent vertex whose marks have reciprocal sum below one."""


class GraphParseError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    ends: tuple[int, int]
    label: int


@dataclass(frozen=True)
class MarkedGraph:
    edges: tuple[Edge, ...]
    faces: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, edges, faces) -> "MarkedGraph":
        """Build from [(i, j, label), ...] and [[edge indices], ...]."""
        es = tuple(Edge((int(a), int(b)), int(k)) for a, b, k in edges)
        return cls(es, tuple(tuple(int(x) for x in f) for f in faces))

    @property
    def n_vertices(self) -> int:
        return 1 + max((max(e.ends) for e in self.edges), default=-1)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def incident(self, v: int) -> list[int]:
        return [i for i, e in enumerate(self.edges) if v in e.ends]

    def labels_at(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(self.edges[i].label for i in self.incident(v)))

    def face_vertices(self, f: int) -> list[int]:
        """Vertices of a face in the order of its edge cycle."""
        cyc = self.faces[f]
        out = []
        for k, ei in enumerate(cyc):
            nxt = self.edges[cyc[(k + 1) % len(cyc)]].ends
            a, b = self.edges[ei].ends
            out.append(b if b in nxt else a)
        # out[k] is the vertex between edge k and edge k+1; rotate so the
        # list starts with the first vertex of edge 0
        return out[-1:] + out[:-1]


# ---------------------------------------------------------------------------
# file format


def to_json(g: MarkedGraph) -> str:
    """Canonical text form: one edge and one face per line."""
    lines = ["{", '  "edges": [']
    for k, e in enumerate(g.edges):
        sep = "," if k + 1 < len(g.edges) else ""
        lines.append(f'    {{"ends": [{e.ends[0]}, {e.ends[1]}], "label": {e.label}}}{sep}')
    lines += ["  ],", '  "faces": [']
    for k, f in enumerate(g.faces):
        sep = "," if k + 1 < len(g.faces) else ""
        lines.append("    [" + ", ".join(str(x) for x in f) + "]" + sep)
    lines += ["  ]", "}"]
    return "\n".join(lines) + "\n"


def from_json(text: str) -> MarkedGraph:
    try:
        obj = json.loads(text)
        edges = [(e["ends"][0], e["ends"][1], e["label"]) for e in obj["edges"]]
        if any(len(e["ends"]) != 2 for e in obj["edges"]):
            raise GraphParseError("every edge needs exactly two ends")
        faces = obj["faces"]
        for x in [v for e in edges for v in e] + [i for f in faces for i in f]:
            if not isinstance(x, int) or isinstance(x, bool):
                raise GraphParseError(f"expected an integer, got {x!r}")
        return MarkedGraph.of(edges, faces)
    except GraphParseError:
        raise
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise GraphParseError(f"cannot parse polyhedron file: {exc}") from exc


def load(path) -> MarkedGraph:
    with open(path, encoding="utf-8") as fh:
        return from_json(fh.read())


def dump(g: MarkedGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_json(g))


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class GraphViolation:
    rule: str
    where: str
    detail: str

    def __str__(self) -> str:
        return f"{self.where}: {self.rule} ({self.detail})"


def _face_is_cycle(g: MarkedGraph, cyc) -> bool:
    if len(cyc) < 3 or len(set(cyc)) != len(cyc):
        return False
    ends = [g.edges[i].ends for i in cyc]
    # walk: each consecutive pair shares exactly the vertex we arrive at
    start = set(ends[0])
    for v0 in start:
        v = v0
        ok = True
        seen = []
        for a, b in ends:
            if v == a:
                v = b
            elif v == b:
                v = a
            else:
                ok = False
                break
            seen.append(v)
        if ok and v == v0 and len(set(seen)) == len(seen):
            return True
    return False


def validate(g: MarkedGraph) -> list[GraphViolation]:
    out: list[GraphViolation] = []
    V, E, F = g.n_vertices, g.n_edges, g.n_faces
    pairs = {}
    for i, e in enumerate(g.edges):
        a, b = e.ends
        if e.label < 2:
            out.append(GraphViolation("label >= 2", f"edge {i}", f"label {e.label}"))
        if a < 0 or b < 0:
            out.append(GraphViolation("vertex index >= 0", f"edge {i}", f"ends {a},{b}"))
        if a == b:
            out.append(GraphViolation("no loops", f"edge {i}", f"ends {a},{b}"))
        key = (min(a, b), max(a, b))
        if key in pairs:
            out.append(GraphViolation("no parallel edges", f"edge {i}", f"duplicates edge {pairs[key]}"))
        pairs.setdefault(key, i)
    if out:
        return out
    count = [0] * E
    for f, cyc in enumerate(g.faces):
        bad = [x for x in cyc if not 0 <= x < E]
        if bad:
            out.append(GraphViolation("face edges exist", f"face {f}", f"unknown edges {bad}"))
            continue
        for x in cyc:
            count[x] += 1
        if not _face_is_cycle(g, cyc):
            out.append(GraphViolation("face is a simple cycle", f"face {f}", f"edges {list(cyc)}"))
    for i, c in enumerate(count):
        if c != 2:
            out.append(GraphViolation("edge in exactly 2 faces", f"edge {i}", f"in {c} faces"))
    if V - E + F != 2:
        out.append(GraphViolation("Euler relation V-E+F=2", "graph", f"{V}-{E}+{F}={V - E + F}"))
    for v in range(V):
        labels = g.labels_at(v)
        s = sum(Fraction(1, k) for k in labels if k >= 1)
        if len(labels) == 4:
            if s != 2:
                out.append(GraphViolation("quadrivalent reciprocal sum = 2", f"vertex {v}", f"labels {labels}, sum {s}"))
        elif len(labels) != 3:
            out.append(GraphViolation("valence 3 or 4", f"vertex {v}", f"valence {len(labels)}"))
    if not out and not _orient(g):
        out.append(GraphViolation("orientable embedding", "graph", "face cycles cannot be oriented coherently"))
    return out


def _require_valid(g: MarkedGraph) -> None:
    errs = validate(g)
    if errs:
        raise NotValidated("; ".join(str(e) for e in errs))


def vertex_class_combinatorial(g: MarkedGraph, v: int) -> VertexClass:
    _require_valid(g)
    labels = g.labels_at(v)
    if len(labels) == 4:
        return VertexClass.IDEAL
    s = sum(Fraction(1, k) for k in labels)
    if s == 1:
        return VertexClass.IDEAL
    if s > 1:
        return VertexClass.FINITE
    raise HyperIdealVertex(f"vertex {v} has labels {labels} with reciprocal sum {s} < 1; truncate it first")


# ---------------------------------------------------------------------------
# 3-circuits


class CircuitKind(enum.Enum):
    HYPERBOLIC = "Hyperbolic"
    EUCLIDEAN = "Euclidean"
    SPHERICAL = "Spherical"


@dataclass(frozen=True)
class Circuit:
    faces: tuple[int, int, int]
    edges: tuple[int, int, int]
    labels: tuple[int, int, int]
    kind: CircuitKind
    vertex_parallel: bool

    @property
    def reciprocal_sum(self) -> Fraction:
        return sum((Fraction(1, k) for k in self.labels), Fraction(0))


def kind_of(labels) -> CircuitKind:
    s = sum((Fraction(1, k) for k in labels), Fraction(0))
    if s < 1:
        return CircuitKind.HYPERBOLIC
    if s == 1:
        return CircuitKind.EUCLIDEAN
    return CircuitKind.SPHERICAL


@dataclass(frozen=True)
class CircuitReport:
    circuits: tuple[Circuit, ...]

    @property
    def essential(self) -> tuple[Circuit, ...]:
        """Hyperbolic circuits that are not vertex links: embedded turnovers."""
        return tuple(c for c in self.circuits if c.kind is CircuitKind.HYPERBOLIC and not c.vertex_parallel)

    def __len__(self) -> int:
        return len(self.circuits)

    def __iter__(self):
        return iter(self.circuits)


def _shared_edges(g: MarkedGraph) -> dict[tuple[int, int], list[int]]:
    faces_of: dict[int, list[int]] = {}
    for f, cyc in enumerate(g.faces):
        for x in cyc:
            faces_of.setdefault(x, []).append(f)
    shared: dict[tuple[int, int], list[int]] = {}
    for x, fs in faces_of.items():
        if len(fs) == 2:
            shared.setdefault((min(fs), max(fs)), []).append(x)
    return shared


def turnover_circuits(g: MarkedGraph) -> CircuitReport:
    """All triples of pairwise-adjacent faces, one entry per choice of crossed edges."""
    _require_valid(g)
    shared = _shared_edges(g)
    out = []
    for f1, f2, f3 in itertools.combinations(range(g.n_faces), 3):
        a, b, c = shared.get((f1, f2)), shared.get((f2, f3)), shared.get((f1, f3))
        if not (a and b and c):
            continue
        for e12, e23, e13 in itertools.product(a, b, c):
            es = (e12, e23, e13)
            if len(set(es)) < 3:
                continue
            common = set(g.edges[e12].ends) & set(g.edges[e23].ends) & set(g.edges[e13].ends)
            labels = tuple(g.edges[x].label for x in es)
            out.append(Circuit((f1, f2, f3), es, labels, kind_of(labels), bool(common)))
    return CircuitReport(tuple(out))


# ---------------------------------------------------------------------------
# truncation triangles


def _rebuild(g: MarkedGraph, edges, faces) -> MarkedGraph:
    """Drop unused vertex ids, keeping the relative order of the rest."""
    used = sorted({v for a, b, _ in edges for v in (a, b)})
    ren = {v: i for i, v in enumerate(used)}
    return MarkedGraph.of([(ren[a], ren[b], k) for a, b, k in edges], faces)


def contract_face(g: MarkedGraph, f: int) -> MarkedGraph:
    """Contract a triangular face to a single vertex."""
    cyc = g.faces[f]
    if len(cyc) != 3:
        raise ValueError(f"face {f} is not a triangle")
    tri_v = sorted({v for x in cyc for v in g.edges[x].ends})
    keep_v = tri_v[0]
    drop = set(cyc)
    ren_e = {}
    edges = []
    for i, e in enumerate(g.edges):
        if i in drop:
            continue
        a, b = (keep_v if v in tri_v else v for v in e.ends)
        ren_e[i] = len(edges)
        edges.append((a, b, e.label))
    faces = []
    for k, c in enumerate(g.faces):
        if k == f:
            continue
        faces.append([ren_e[x] for x in c if x not in drop])
    return _rebuild(g, edges, faces)


def _is_simple_polyhedral(g: MarkedGraph) -> bool:
    seen = set()
    for e in g.edges:
        a, b = e.ends
        if a == b or (min(a, b), max(a, b)) in seen:
            return False
        seen.add((min(a, b), max(a, b)))
    return all(len(f) >= 3 for f in g.faces)


def collapse_truncations(g: MarkedGraph) -> MarkedGraph:
    """Contract triangular faces with all marks 2 until none can be contracted.

    A contraction is skipped when it would leave fewer than four faces or a
    non-simple graph; triangles are tried in face order so the result is
    deterministic.
    """
    _require_valid(g)
    while g.n_faces > 4:
        for f, cyc in enumerate(g.faces):
            if len(cyc) == 3 and all(g.edges[x].label == 2 for x in cyc):
                h = contract_face(g, f)
                if _is_simple_polyhedral(h):
                    g = h
                    break
        else:
            break
    return g


def truncate_vertex(g: MarkedGraph, v: int) -> MarkedGraph:
    """Replace a trivalent vertex by a triangular face with all marks 2."""
    inc = g.incident(v)
    if len(inc) != 3:
        raise ValueError(f"vertex {v} is not trivalent")
    nv = g.n_vertices
    new_of = {inc[0]: v, inc[1]: nv, inc[2]: nv + 1}
    edges = []
    for i, e in enumerate(g.edges):
        a, b = e.ends
        if i in new_of:
            a, b = (new_of[i] if x == v else x for x in (a, b))
        edges.append((a, b, e.label))
    tri = {}
    faces = []
    for cyc in g.faces:
        cyc = list(cyc)
        out = []
        for k, x in enumerate(cyc):
            out.append(x)
            y = cyc[(k + 1) % len(cyc)]
            if x in new_of and y in new_of:
                key = frozenset((x, y))
                if key not in tri:
                    tri[key] = len(edges)
                    edges.append((new_of[x], new_of[y], 2))
                out.append(tri[key])
        faces.append(out)
    # triangle face: walk the three new edges
    t01, t12, t02 = (tri[frozenset(p)] for p in ((inc[0], inc[1]), (inc[1], inc[2]), (inc[0], inc[2])))
    faces.append([t01, t12, t02])
    return MarkedGraph.of(edges, faces)


# ---------------------------------------------------------------------------
# canonical form over rotation systems


def _orient(g: MarkedGraph) -> list[list[int]] | None:
    """Vertex cycles of the faces, oriented coherently (None if impossible)."""
    cycles = [g.face_vertices(f) for f in range(g.n_faces)]
    darts_of = []
    for cyc in cycles:
        darts_of.append({(cyc[k], cyc[(k + 1) % len(cyc)]) for k in range(len(cyc))})
    shared = _shared_edges(g)
    nbrs: dict[int, list[tuple[int, int]]] = {}
    for (f1, f2), es in shared.items():
        for x in es:
            nbrs.setdefault(f1, []).append((f2, x))
            nbrs.setdefault(f2, []).append((f1, x))
    flip = [None] * len(cycles)
    for root in range(len(cycles)):
        if flip[root] is not None:
            continue
        flip[root] = False
        queue = deque([root])
        while queue:
            f = queue.popleft()
            for h, x in nbrs.get(f, []):
                a, b = g.edges[x].ends
                df = ((a, b) in darts_of[f]) != flip[f]
                dh = (a, b) in darts_of[h]
                # coherent: the shared edge is traversed in opposite directions
                want = dh == df
                if flip[h] is None:
                    flip[h] = want
                    queue.append(h)
                elif flip[h] != want:
                    return None
    return [list(reversed(c)) if fl else c for c, fl in zip(cycles, flip)]


def rotation_system(g: MarkedGraph) -> dict[int, list[int]]:
    """Cyclic neighbour order at each vertex, derived from the oriented faces."""
    faces = _orient(g)
    if faces is None:
        raise NotValidated("face cycles cannot be oriented coherently")
    nxt: dict[tuple[int, int], int] = {}
    for cyc in faces:
        n = len(cyc)
        for k in range(n):
            u, v, w = cyc[k - 1], cyc[k], cyc[(k + 1) % n]
            # around v, turning from the edge to w reaches the edge to u
            nxt[(v, w)] = u
    rot = {}
    for v in range(g.n_vertices):
        nb = [e.ends[1] if e.ends[0] == v else e.ends[0] for e in g.edges if v in e.ends]
        order = [nb[0]]
        while len(order) < len(nb):
            order.append(nxt[(v, order[-1])])
        rot[v] = order
    return rot


def canonical_form(g: MarkedGraph, with_labels: bool = True) -> tuple:
    """Isomorphism-invariant code of the embedded graph (mirror images identified).

    Minimum over all starting darts and both orientations of the
    breadth-first numbering code.
    """
    rot = rotation_system(g)
    label = {}
    for e in g.edges:
        a, b = e.ends
        label[(a, b)] = label[(b, a)] = e.label if with_labels else 0
    best = None
    for mirror in (False, True):
        r = {v: (list(reversed(o)) if mirror else o) for v, o in rot.items()}
        for v0, order in r.items():
            for w0 in order:
                code = _bfs_code(r, label, v0, w0)
                if best is None or code < best:
                    best = code
    return (g.n_vertices, g.n_edges, g.n_faces) + tuple(best or ())


def _bfs_code(rot, label, v0, w0) -> tuple:
    num = {v0: 0}
    start = {v0: w0}
    queue = deque([v0])
    code = []
    while queue:
        v = queue.popleft()
        order = rot[v]
        k = order.index(start[v])
        for w in order[k:] + order[:k]:
            if w not in num:
                num[w] = len(num)
                start[w] = v
                queue.append(w)
            code.append(num[w])
            code.append(label[(v, w)])
        code.append(-1)
    return tuple(code)


def isomorphic(g: MarkedGraph, h: MarkedGraph, with_labels: bool = True) -> bool:
    return canonical_form(g, with_labels) == canonical_form(h, with_labels)


# ---------------------------------------------------------------------------
# smallness


class Smallness(enum.Enum):
    SMALL = "Small"
    NOT_SMALL = "NotSmall"
    INVALID = "Invalid"


# reminder attached to every verdict: only the vertex conditions were checked
SMALLNESS_SCOPE = "vertex conditions only; not an Andreev realizability certificate"


def tetrahedral_graph(labels=(2, 2, 2, 2, 2, 2)) -> MarkedGraph:
    """Tetrahedron with vertices A..D = 0..3 and edges in AB,BC,AC,CD,AD,BD order."""
    edges = [(VERTICES.index(n[0]), VERTICES.index(n[1]), k) for n, k in zip(EDGE_NAMES, labels)]
    idx = {n: i for i, n in enumerate(EDGE_NAMES)}
    faces = [
        [idx["BC"], idx["CD"], idx["BD"]],  # opposite A
        [idx["AC"], idx["CD"], idx["AD"]],  # opposite B
        [idx["AB"], idx["BD"], idx["AD"]],  # opposite C
        [idx["AB"], idx["BC"], idx["AC"]],  # opposite D
    ]
    return MarkedGraph.of(edges, faces)


_TETRA_SHAPE = None


def is_small(g: MarkedGraph) -> Smallness:
    global _TETRA_SHAPE
    if validate(g):
        return Smallness.INVALID
    if _TETRA_SHAPE is None:
        _TETRA_SHAPE = canonical_form(tetrahedral_graph(), with_labels=False)
    h = collapse_truncations(g)
    return Smallness.SMALL if canonical_form(h, with_labels=False) == _TETRA_SHAPE else Smallness.NOT_SMALL


def from_tetspec(spec: TetSpec) -> MarkedGraph:
    """Marked graph of a generalized tetrahedron, truncation triangles included."""
    g = tetrahedral_graph(spec.as_tuple())
    for v in range(3, -1, -1):
        if classify_vertex(spec, VERTICES[v]) is VertexClass.TRUNCATED:
            g = truncate_vertex(g, v)
    return g


# ---------------------------------------------------------------------------
# standard shapes


def prism(n: int, lateral=2, top=2, bottom=2) -> MarkedGraph:
    """n-gonal prism: bottom ring 0..n-1, top ring n..2n-1."""
    edges, faces = [], []
    for i in range(n):
        edges.append((i, (i + 1) % n, bottom))
    for i in range(n):
        edges.append((n + i, n + (i + 1) % n, top))
    for i in range(n):
        edges.append((i, n + i, lateral))
    faces.append(list(range(n)))
    faces.append(list(range(n, 2 * n)))
    for i in range(n):
        faces.append([i, 2 * n + (i + 1) % n, n + i, 2 * n + i])
    return MarkedGraph.of(edges, faces)


def cube(label=2) -> MarkedGraph:
    return prism(4, label, label, label)


def bipyramid(n: int, label=2) -> MarkedGraph:
    """n-gonal bipyramid: ring 0..n-1, apexes n and n+1."""
    edges = [(i, (i + 1) % n, label) for i in range(n)]
    edges += [(i, n, label) for i in range(n)]
    edges += [(i, n + 1, label) for i in range(n)]
    faces = []
    for i in range(n):
        j = (i + 1) % n
        faces.append([i, n + j, n + i])
        faces.append([i, 2 * n + j, 2 * n + i])
    return MarkedGraph.of(edges, faces)


def pyramid(n: int, label=2) -> MarkedGraph:
    """n-gonal pyramid: base ring 0..n-1, apex n."""
    edges = [(i, (i + 1) % n, label) for i in range(n)]
    edges += [(i, n, label) for i in range(n)]
    faces = [list(range(n))]
    for i in range(n):
        faces.append([i, n + (i + 1) % n, n + i])
    return MarkedGraph.of(edges, faces)


def relabel(g: MarkedGraph, vperm=None, eperm=None, fperm=None, rotate: int = 0) -> MarkedGraph:
    """Same polyhedron with vertices, edges and faces renumbered.

    vperm[v] is the new id of vertex v (likewise for edges and faces); every
    face cycle is also rotated by `rotate` positions.
    """
    V, E, F = g.n_vertices, g.n_edges, g.n_faces
    vperm = list(vperm) if vperm is not None else list(range(V))
    eperm = list(eperm) if eperm is not None else list(range(E))
    fperm = list(fperm) if fperm is not None else list(range(F))
    edges = [None] * E
    for i, e in enumerate(g.edges):
        edges[eperm[i]] = (vperm[e.ends[0]], vperm[e.ends[1]], e.label)
    faces = [None] * F
    for k, cyc in enumerate(g.faces):
        c = [eperm[x] for x in cyc]
        r = rotate % len(c)
        faces[fperm[k]] = c[r:] + c[:r]
    return MarkedGraph.of(edges, faces)
