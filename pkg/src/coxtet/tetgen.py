"""Coxeter tetrahedra T[l,m,q;n,p,r]: Gram matrix, existence, realization.

Edge labels: AB=l, BC=m, AC=q, CD=n, AD=p, BD=r. Faces are indexed by the
opposite vertex: F_A=BCD (0), F_B=ACD (1), F_C=ABD (2), F_D=ABC (3).
"""

from __future__ import annotations

import enum
import itertools
from functools import lru_cache
import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .mink import EPS, Plane, PointClass, inner, point_class


class SpecParseError(ValueError):
    pass


class Degenerate(ValueError):
    """The Gram matrix has a (numerically) zero eigenvalue."""


class NotRealizable(ValueError):
    pass


class IllConditioned(ValueError):
    pass


VERTICES = "ABCD"
EDGE_NAMES = ("AB", "BC", "AC", "CD", "AD", "BD")
FIELDS = ("l", "m", "q", "n", "p", "r")
# edge name -> the two faces containing it (faces opposite the other two vertices)
EDGE_FACES = {
    e: tuple(sorted(VERTICES.index(v) for v in VERTICES if v not in e)) for e in EDGE_NAMES
}
FACE_PAIR_EDGE = {EDGE_FACES[e]: e for e in EDGE_NAMES}
# incident edges at each vertex, in the documented order
VERTEX_EDGES = {"A": ("AB", "AC", "AD"), "B": ("AB", "BC", "BD"), "C": ("BC", "AC", "CD"), "D": ("CD", "AD", "BD")}


@dataclass(frozen=True, order=True)
class TetSpec:
    l: int
    m: int
    q: int
    n: int
    p: int
    r: int

    def __post_init__(self):
        for name in FIELDS:
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 2:
                raise ValueError(f"label {name}={v!r} must be an integer >= 2")

    @classmethod
    def of(cls, labels) -> "TetSpec":
        return cls(*(int(x) for x in labels))

    def as_tuple(self) -> tuple[int, ...]:
        return (self.l, self.m, self.q, self.n, self.p, self.r)

    def label(self, edge: str) -> int:
        edge = "".join(sorted(edge))
        return self.as_tuple()[EDGE_NAMES.index(edge)]

    def __str__(self) -> str:
        return "{},{},{};{},{},{}".format(*self.as_tuple())

    def __repr__(self) -> str:
        return "T[{},{},{};{},{},{}]".format(*self.as_tuple())


_SPEC_RE = re.compile(r"^(?:T\[)?(\d+),(\d+),(\d+);(\d+),(\d+),(\d+)\]?$")


def parse_spec(text: str) -> TetSpec:
    """Parse "l,m,q;n,p,r" (whitespace-insensitive, optional T[...] wrapper)."""
    s = re.sub(r"\s+", "", text)
    m = _SPEC_RE.match(s)
    if not m:
        raise SpecParseError(f"cannot parse tetrahedron spec {text!r}; expected 'l,m,q;n,p,r'")
    try:
        return TetSpec.of(m.groups())
    except ValueError as exc:
        raise SpecParseError(str(exc)) from exc


def gram_from_spec(spec: TetSpec) -> np.ndarray:
    g = np.eye(4)
    for e in EDGE_NAMES:
        i, j = EDGE_FACES[e]
        k = spec.label(e)
        # right angles are exact so orthogonal faces are recognized without tolerance
        g[i, j] = g[j, i] = 0.0 if k == 2 else -math.cos(math.pi / k)
    g.setflags(write=False)
    return g


def exists_hyperbolic(g, eps: float = EPS) -> bool:
    """True iff g has signature (3,1). Raises Degenerate on a zero eigenvalue."""
    lam = np.linalg.eigvalsh(np.asarray(g, dtype=float))
    if np.any(np.abs(lam) <= eps):
        raise Degenerate(f"Gram matrix has a zero eigenvalue: {lam.tolist()}")
    return int(np.sum(lam < 0)) == 1


def off_diagonal_cofactors(g) -> np.ndarray:
    """Cofactors c_ij (i != j) of g, flattened in row-major order."""
    g = np.asarray(g, dtype=float)
    adj = np.linalg.inv(g) * np.linalg.det(g)
    return adj.T[~np.eye(4, dtype=bool)]


def nondegenerate(g, eps: float = EPS) -> bool:
    """All off-diagonal cofactors positive.

    With signature (3,1) this rules out a truncation plane that coincides
    with the opposite face (three right angles around a hyper-ideal vertex),
    where the truncated solid collapses to zero volume.
    """
    return bool(np.all(off_diagonal_cofactors(g) > eps))


class VertexClass(enum.Enum):
    FINITE = "Finite"
    IDEAL = "Ideal"
    TRUNCATED = "Truncated"


def reciprocal_sum(labels) -> Fraction:
    return sum((Fraction(1, int(k)) for k in labels), Fraction(0))


def class_of_sum(s: Fraction) -> VertexClass:
    if s > 1:
        return VertexClass.FINITE
    if s == 1:
        return VertexClass.IDEAL
    return VertexClass.TRUNCATED


def vertex_labels(spec: TetSpec, v) -> tuple[int, int, int]:
    name = VERTICES[v] if isinstance(v, (int, np.integer)) else v
    return tuple(spec.label(e) for e in VERTEX_EDGES[name])


def classify_vertex(spec: TetSpec, v) -> VertexClass:
    """Exact angle-sum rule: sum of reciprocals of the three incident labels vs 1."""
    return class_of_sum(reciprocal_sum(vertex_labels(spec, v)))


def vertex_classes(spec: TetSpec) -> tuple[VertexClass, ...]:
    return tuple(classify_vertex(spec, v) for v in VERTICES)


def all_non_finite(spec: TetSpec) -> bool:
    return all(c is not VertexClass.FINITE for c in vertex_classes(spec))


def permute(spec: TetSpec, perm) -> TetSpec:
    """Relabel vertices by v -> perm[v] and read off the new 6-tuple."""
    labels = {}
    for e in EDGE_NAMES:
        a, b = (VERTICES[perm[VERTICES.index(x)]] for x in e)
        labels["".join(sorted(a + b))] = spec.label(e)
    return TetSpec.of(labels[e] for e in EDGE_NAMES)


@lru_cache(maxsize=65536)
def symmetry_orbit(spec: TetSpec) -> frozenset[TetSpec]:
    return frozenset(permute(spec, p) for p in itertools.permutations(range(4)))


def canonical_spec(spec: TetSpec) -> TetSpec:
    """Smallest member of the symmetry orbit (lexicographic on the 6-tuple)."""
    return min(symmetry_orbit(spec))


@dataclass(frozen=True, eq=False)
class Vertex:
    name: str
    dual: np.ndarray
    cls: VertexClass
    truncation: Plane | None
    # oriented unit normal of the truncation plane, kept side <x, t> <= 0
    truncation_normal: np.ndarray | None


@dataclass(frozen=True, eq=False)
class GeneralizedTetrahedron:
    spec: TetSpec | None
    gram: np.ndarray
    normals: np.ndarray  # oriented outward normals, rows indexed by face
    faces: tuple[Plane, ...]
    vertices: tuple[Vertex, ...]
    interior: np.ndarray  # unit time-like point inside the truncated tetrahedron

    @property
    def duals(self) -> np.ndarray:
        return np.array([v.dual for v in self.vertices])

    def residual(self) -> float:
        N = self.normals
        return float(np.abs(inner(N[:, None, :], N[None, :, :]) - self.gram).max())


def _factor(g: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(g)
    order = np.argsort(-lam, kind="stable")
    lam, vec = lam[order], vec[:, order]
    # rows of N are face normals; N J N^T = g because the last eigenvalue is negative
    return vec * np.sqrt(np.abs(lam))


def _interior_point(normals: np.ndarray, duals: np.ndarray, tnormals) -> np.ndarray:
    """A time-like point strictly inside every face and truncation half-space."""
    x = duals.sum(axis=0)
    cons = [n for n in normals] + [t for t in tnormals if t is not None]

    def ok(y):
        return inner(y, y) < -EPS and all(inner(y, c) < -1e-12 for c in cons)

    if ok(x) or ok(-x):
        return x if ok(x) else -x
    # fall back to a small linear program over the cone of the duals
    from scipy.optimize import linprog

    A = np.array(cons)
    S = A * np.array([1.0, 1.0, 1.0, -1.0])  # rows give <y, c> = (S @ y)
    # maximize slack s subject to S y + s <= 0, sum-of-coordinates normalization on x4
    c_obj = np.zeros(5)
    c_obj[4] = -1.0
    A_ub = np.hstack([S, np.ones((len(S), 1))])
    b_ub = np.zeros(len(S))
    for sign in (1.0, -1.0):
        res = linprog(
            c_obj,
            A_ub=A_ub,
            b_ub=b_ub,
            A_eq=[[0, 0, 0, sign, 0]],
            b_eq=[1.0],
            bounds=[(None, None)] * 4 + [(None, 1.0)],
        )
        if res.success and res.x[4] > 1e-12 and ok(res.x[:4]):
            return res.x[:4]
    raise NotRealizable("no interior time-like point found for the face configuration")


def realize(g, spec: TetSpec | None = None, eps: float = EPS) -> GeneralizedTetrahedron:
    """Realize face normals, vertex duals, and truncation planes in R^{3,1}.

    `g` may be a Gram matrix or a TetSpec.
    """
    if isinstance(g, TetSpec):
        spec, g = g, gram_from_spec(g)
    g = np.asarray(g, dtype=float)
    try:
        ok = exists_hyperbolic(g, eps)
    except Degenerate as exc:
        raise NotRealizable(str(exc)) from exc
    if not ok:
        raise NotRealizable("Gram matrix does not have signature (3,1)")
    if not nondegenerate(g, eps):
        raise NotRealizable("a truncation plane coincides with a face: the truncated solid is degenerate")
    N = _factor(g)
    gi = np.linalg.inv(g)
    duals = -(gi @ N)  # <v_i, n_k> = -delta_ik
    tn = []
    for i in range(4):
        d = gi[i, i]
        tn.append(duals[i] / math.sqrt(d) if d > eps else None)
    x0 = _interior_point(N, duals, tn)
    if x0[3] < 0:
        # move everything to the upper sheet by flipping the time coordinate
        flip = np.array([1.0, 1.0, 1.0, -1.0])
        N, duals, x0 = N * flip, duals * flip, x0 * flip
        tn = [None if t is None else t * flip for t in tn]
    x0 = x0 / math.sqrt(-float(inner(x0, x0)))
    resid = float(np.abs(inner(N[:, None, :], N[None, :, :]) - g).max())
    if resid > 1e-7:
        raise IllConditioned(f"Gram reconstruction residual {resid:.3g}")
    verts = []
    for i in range(4):
        geo = point_class(duals[i] / np.abs(duals[i]).max(), eps)
        cls = {
            PointClass.TIMELIKE: VertexClass.FINITE,
            PointClass.LIGHTLIKE: VertexClass.IDEAL,
            PointClass.SPACELIKE: VertexClass.TRUNCATED,
        }[geo]
        if spec is not None:
            comb = classify_vertex(spec, i)
            if comb is not cls:
                raise IllConditioned(
                    f"vertex {VERTICES[i]}: dual is {geo.value} but angle sum says {comb.value}"
                )
        t = tn[i] if cls is VertexClass.TRUNCATED else None
        trunc = Plane(t, normalize=True) if t is not None else None
        d = duals[i].copy()
        d.setflags(write=False)
        if t is not None:
            t = t.copy()
            t.setflags(write=False)
        verts.append(Vertex(VERTICES[i], d, cls, trunc, t))
    N = N.copy()
    N.setflags(write=False)
    x0.setflags(write=False)
    faces = tuple(Plane(n, normalize=True) for n in N)
    gg = g.copy()
    gg.setflags(write=False)
    return GeneralizedTetrahedron(spec, gg, N, faces, tuple(verts), x0)


def realizable(spec: TetSpec, eps: float = EPS) -> bool:
    """Signature (3,1) and a nondegenerate truncated solid."""
    g = gram_from_spec(spec)
    try:
        return exists_hyperbolic(g, eps) and nondegenerate(g, eps)
    except Degenerate:
        return False
