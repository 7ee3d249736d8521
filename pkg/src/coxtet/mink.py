"""Lorentzian linear algebra in R^{3,1}.

Points of hyperbolic space live on the upper sheet of the hyperboloid
<x,x> = -1, geodesic planes are represented by space-like unit normals,
and isometries are 4x4 matrices preserving J = diag(1,1,1,-1).

Convention: a polyhedron is the intersection of half-spaces <x,n_i> <= 0,
so the dihedral angle between faces i and j satisfies cos = -<n_i,n_j>.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

J = np.diag([1.0, 1.0, 1.0, -1.0])
J.setflags(write=False)
_SIG = np.array([1.0, 1.0, 1.0, -1.0])
_SIG.setflags(write=False)

EPS = 1e-9
DIGITS = 6


class ZeroVector(ValueError):
    """Raised when a vector is too small to classify."""


class NonUnitNormal(ValueError):
    """Raised when a plane normal is not space-like of unit length."""


class NotAMotion(ValueError):
    """Raised when a matrix does not preserve the form or the upper sheet."""


def inner(u, v):
    """Lorentzian inner product; broadcasts over leading axes."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] + u[..., 2] * v[..., 2] - u[..., 3] * v[..., 3]


def lorentz_norm2(v):
    return inner(v, v)


class PointClass(enum.Enum):
    TIMELIKE = "TimeLike"
    LIGHTLIKE = "LightLike"
    SPACELIKE = "SpaceLike"


def point_class(v, eps: float = EPS) -> PointClass:
    v = np.asarray(v, dtype=float)
    if np.all(np.abs(v) < eps):
        raise ZeroVector(f"cannot classify near-zero vector {v.tolist()}")
    q = float(inner(v, v))
    if q < -eps:
        return PointClass.TIMELIKE
    if q > eps:
        return PointClass.SPACELIKE
    return PointClass.LIGHTLIKE


# ---------------------------------------------------------------------------
# quantized keys


def quantize(v, digits: int = DIGITS) -> np.ndarray:
    """Round coordinates to `digits` decimals as int64 (round half up)."""
    x = np.asarray(v, dtype=float) * 10.0**digits
    return np.floor(x + 0.5).astype(np.int64)


def canonical_sign(v, digits: int = DIGITS) -> np.ndarray:
    """Flip v so the first nonzero quantized coordinate is positive."""
    v = np.asarray(v, dtype=float)
    q = quantize(v, digits)
    nz = np.flatnonzero(q)
    if nz.size and q[nz[0]] < 0:
        return -v
    return v


def canonical_signs(V, digits: int = DIGITS) -> np.ndarray:
    """Row-wise canonical_sign for an (n, 4) array."""
    V = np.asarray(V, dtype=float)
    q = quantize(V, digits)
    lead = q[:, 0]
    for j in range(1, q.shape[1]):
        lead = np.where(lead == 0, q[:, j], lead)
    return np.where((lead < 0)[:, None], -V, V)


_HASH_MUL = np.array(
    [0x9E3779B97F4A7C15, 0xC2B2AE3D27D4EB4F, 0x165667B19E3779F9, 0xD6E8FEB86659FD93], dtype=np.uint64
)
_HASH_MIX = np.uint64(0xBF58476D1CE4E5B9)


def row_hash(K) -> np.ndarray:
    """64-bit hash of each row of an integer array (wrapping arithmetic)."""
    K = np.asarray(K, dtype=np.int64)
    h = np.zeros(len(K), dtype=np.uint64)
    with np.errstate(over="ignore"):
        for j in range(K.shape[1]):
            h ^= K[:, j].astype(np.uint64) * _HASH_MUL[j % 4]
            h = (h ^ (h >> np.uint64(29))) * _HASH_MIX
    return h


def group_by_first_appearance(h):
    """Group equal entries of a 1-D integer array, numbering groups by first appearance.

    Returns (first, inv, sorted_values, group_of_sorted): first[g] is the
    first index of group g, inv maps each entry to its group, and the last
    two list the distinct values in ascending order with their group ids.
    """
    h = np.asarray(h)
    n = len(h)
    if n == 0:
        z = np.zeros(0, dtype=np.int64)
        return z, z, h[:0], z
    # an unstable sort is several times faster on 64-bit keys; the smallest
    # index of each run is recovered with a segmented minimum
    order = np.argsort(h)
    hs = h[order]
    start = np.ones(n, dtype=bool)
    start[1:] = hs[1:] != hs[:-1]
    inv_sorted = np.empty(n, dtype=np.int64)
    inv_sorted[order] = np.cumsum(start) - 1
    first_sorted = np.minimum.reduceat(order, np.flatnonzero(start))
    is_first = np.zeros(n, dtype=bool)
    is_first[first_sorted] = True
    rank = (np.cumsum(is_first) - 1)[first_sorted]
    first = np.empty(len(rank), dtype=np.int64)
    first[rank] = first_sorted
    return first, rank[inv_sorted], hs[start], rank


def _unique_rows_hashed(K):
    K = np.asarray(K, dtype=np.int64)
    h = row_hash(K)
    first, inv, hs, hid = group_by_first_appearance(h)
    if len(K) and not np.array_equal(K, K[first][inv]):
        # hash collision between distinct rows: fall back to an exact sort
        _, f, i = np.unique(K, axis=0, return_index=True, return_inverse=True)
        f = np.asarray(f)
        first, inv, _, _ = group_by_first_appearance(np.asarray(i).reshape(-1))
        uniq = K[first]
        hu = row_hash(uniq)
        o = np.argsort(hu, kind="stable")
        return uniq, first, inv, hu[o], o.astype(np.int64)
    return K[first], first, inv, hs, hid


def unique_rows(K):
    """Distinct rows numbered by first appearance: (rows, first index, inverse)."""
    uniq, first, inv, _, _ = _unique_rows_hashed(K)
    return uniq, first, inv


class QuantizedIndex:
    """Deduplicate vectors by 6-decimal keys, tolerant at rounding boundaries.

    A vector whose scaled coordinate sits within `margin` of a half-integer
    could round either way under tiny perturbations; lookups for such vectors
    also try the neighbouring cells. With `projective=True` the vector and its
    negation are identified (sign fixed by canonical_sign).
    """

    def __init__(self, digits: int = DIGITS, projective: bool = True, margin: float = 1e-3):
        self.digits = digits
        self.scale = 10.0**digits
        self.projective = projective
        self.margin = margin
        self._keys = np.zeros((0, 4), dtype=np.int64)
        self._vecs = np.zeros((0, 4))
        self._hs = np.zeros(0, dtype=np.uint64)  # sorted key hashes
        self._hid = np.zeros(0, dtype=np.int64)  # id of each sorted hash

    def __len__(self) -> int:
        return len(self._keys)

    def _prepare(self, V):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        if self.projective:
            V = canonical_signs(V, self.digits)
        x = V * self.scale + 0.5
        base = np.floor(x)
        frac = x - base
        near = (frac < self.margin) | (frac > 1.0 - self.margin)
        return V, base.astype(np.int64), frac, near

    def _candidates(self, base, frac, near) -> np.ndarray:
        """Keys to try for one vector, in preference order."""
        opts = []
        for k in range(len(base)):
            b = int(base[k])
            if near[k]:
                opts.append((b, b - 1) if frac[k] < 0.5 else (b, b + 1))
            else:
                opts.append((b,))
        keys = list(itertools.product(*opts))
        if self.projective:
            # the sign decision itself may have been marginal
            neg = -base
            nfrac = 1.0 - frac
            opts = []
            for k in range(len(base)):
                b = int(neg[k])
                if near[k]:
                    opts.append((b, b - 1) if nfrac[k] < 0.5 else (b, b + 1))
                else:
                    opts.append((b,))
            keys += [k for k in itertools.product(*opts) if k not in keys]
        return np.array(keys, dtype=np.int64)

    def _candidates_many(self, base, frac, near):
        """Candidate keys for many vectors at once: (k, m, 4) keys and a (k, m) mask.

        Same preference order as _candidates; duplicated combinations are masked.
        """
        bits = (np.arange(16)[:, None] >> np.arange(3, -1, -1)[None, :]) & 1  # (16, 4)

        def block(b, f):
            step = np.where(f < 0.5, -1, 1)
            keys = b[:, None, :] + bits[None, :, :] * step[:, None, :]
            ok = ~np.any(bits[None, :, :].astype(bool) & ~near[:, None, :], axis=2)
            return keys, ok

        keys, ok = block(base, frac)
        if self.projective:
            k2, ok2 = block(-base, 1.0 - frac)
            keys = np.concatenate([keys, k2], axis=1)
            ok = np.concatenate([ok, ok2], axis=1)
        return keys.astype(np.int64), ok

    @staticmethod
    def _lookup_in(keys, hs, hid, stored) -> np.ndarray:
        """Ids of `keys` in a table with sorted hashes hs (-1 where absent)."""
        out = np.full(len(keys), -1, dtype=np.int64)
        if len(hs) == 0 or len(keys) == 0:
            return out
        h = row_hash(keys)
        pos = np.searchsorted(hs, h)
        inb = pos < len(hs)
        pos_c = np.where(inb, pos, 0)
        same_h = inb & (hs[pos_c] == h)
        cand = hid[pos_c]
        hit = same_h & np.all(stored[cand] == keys, axis=1)
        out[hit] = cand[hit]
        # distinct keys sharing a hash: scan the run of equal hashes
        for r in np.flatnonzero(same_h & ~hit):
            p = pos[r]
            while p < len(hs) and hs[p] == h[r]:
                if np.array_equal(stored[hid[p]], keys[r]):
                    out[r] = hid[p]
                    break
                p += 1
        return out

    def _lookup(self, keys) -> np.ndarray:
        return self._lookup_in(keys, self._hs, self._hid, self._keys)

    def find(self, v) -> int | None:
        V, base, frac, near = self._prepare(v)
        ids = self._lookup(self._candidates(base[0], frac[0], near[0]))
        hits = ids[ids >= 0]
        return int(hits[0]) if hits.size else None

    def add(self, v) -> tuple[int, bool]:
        n0 = len(self)
        idx = int(self.add_many(v)[0])
        return idx, idx >= n0

    def add_many(self, V) -> np.ndarray:
        """Insert rows of V in order; returns the id of each row."""
        V, base, frac, near = self._prepare(V)
        n = len(V)
        if n == 0:
            return np.zeros(0, dtype=np.int64)
        uniq, first, inv, ghs, ghid = _unique_rows_hashed(base)
        G = len(uniq)
        gid = self._lookup(uniq) if len(self) else np.full(G, -1, dtype=np.int64)
        # a group takes the slow path if any member sits near a rounding boundary
        flagged = near.any(axis=1)
        flagged_row = np.full(G, -1, dtype=np.int64)
        fr = np.flatnonzero(flagged)
        flagged_row[inv[fr[::-1]]] = fr[::-1]
        new = gid < 0
        owns = new.copy()
        target = np.full(G, -1, dtype=np.int64)  # batch group a merged group joins
        slow = np.flatnonzero(new & (flagged_row >= 0))
        if slow.size:
            rows = flagged_row[slow]
            cands, valid = self._candidates_many(base[rows], frac[rows], near[rows])
            k, m = valid.shape
            flat = cands.reshape(-1, 4)
            in_store = self._lookup(flat).reshape(k, m)
            in_batch = self._lookup_in(flat, ghs, ghid, uniq).reshape(k, m)
            in_batch = np.where(in_batch < slow[:, None], in_batch, -1)
            eligible = valid & ((in_store >= 0) | (in_batch >= 0))
            for r in np.flatnonzero(eligible.any(axis=1)):
                u = slow[r]
                for c in np.flatnonzero(eligible[r]):
                    if in_store[r, c] >= 0:
                        gid[u] = in_store[r, c]
                        owns[u] = False
                        break
                    g = in_batch[r, c]
                    if owns[g]:
                        target[u] = g
                        owns[u] = False
                        break
        n0 = len(self)
        owners = np.flatnonzero(owns)
        gid[owners] = n0 + np.arange(owners.size)
        merged = np.flatnonzero(target >= 0)
        gid[merged] = gid[target[merged]]
        if owners.size:
            if len(self) == 0:
                # the batch table is already sorted by hash; keep the owners
                keep = owns[ghid]
                self._hs = ghs[keep]
                self._hid = gid[ghid[keep]]
            self._keys = np.concatenate([self._keys, uniq[owners]])
            self._vecs = np.concatenate([self._vecs, V[first[owners]]])
            if n0:
                h = row_hash(self._keys)
                order = np.argsort(h)
                self._hs = h[order]
                self._hid = order.astype(np.int64)
        return gid[inv]

    @property
    def vectors(self) -> np.ndarray:
        return self._vecs

    def array(self) -> np.ndarray:
        return self._vecs.copy()


# ---------------------------------------------------------------------------
# planes and motions


class Plane:
    """Geodesic plane with a space-like unit normal in canonical sign."""

    __slots__ = ("normal", "_key")

    def __init__(self, normal, eps: float = EPS, normalize: bool = False):
        n = np.asarray(normal, dtype=float).copy()
        q = float(inner(n, n))
        if normalize:
            if q <= eps:
                raise NonUnitNormal(f"normal is not space-like: <n,n> = {q}")
            n /= math.sqrt(q)
        elif abs(q - 1.0) > eps * max(1.0, float(np.abs(n).max()) ** 2):
            raise NonUnitNormal(f"<n,n> = {q}, expected 1")
        n = canonical_sign(n)
        n.setflags(write=False)
        self.normal = n
        self._key = None

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = tuple(int(c) for c in quantize(self.normal))
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, Plane) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return "Plane(" + ", ".join(f"{x:.6g}" for x in self.normal) + ")"


class Motion:
    """Isometry of H^3 as a 4x4 matrix preserving J and the upper sheet."""

    __slots__ = ("m",)

    def __init__(self, m, check: bool = False, eps: float = 1e-8):
        a = np.array(m, dtype=float)
        if a.shape != (4, 4):
            raise NotAMotion(f"expected a 4x4 matrix, got shape {a.shape}")
        if check:
            scale = max(1.0, float(np.abs(a).max()) ** 2)
            if np.abs(a.T @ J @ a - J).max() > eps * scale:
                raise NotAMotion("matrix does not preserve the Lorentzian form")
            if a[3, 3] <= 0:
                raise NotAMotion("matrix swaps the sheets of the hyperboloid")
        a.setflags(write=False)
        self.m = a

    @classmethod
    def identity(cls) -> "Motion":
        return cls(np.eye(4))

    def inverse(self) -> "Motion":
        return Motion(J @ self.m.T @ J)

    def __matmul__(self, other):
        if isinstance(other, Motion):
            return compose(self, other)
        return apply(self, other)

    def __repr__(self) -> str:
        return f"Motion({self.m.tolist()})"


def reflection_matrix(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    return np.eye(4) - 2.0 * np.outer(n, n * _SIG)


def reflection(p: Plane | np.ndarray, eps: float = EPS) -> Motion:
    """x -> x - 2<x,n>n for the unit normal n of p."""
    n = p.normal if isinstance(p, Plane) else np.asarray(p, dtype=float)
    q = float(inner(n, n))
    if abs(q - 1.0) > eps:
        raise NonUnitNormal(f"<n,n> = {q}, expected 1")
    return Motion(reflection_matrix(n))


def compose(a: Motion, b: Motion) -> Motion:
    return Motion(a.m @ b.m)


def apply(a: Motion, v) -> np.ndarray:
    return a.m @ np.asarray(v, dtype=float)


def apply_plane(a: Motion, p: Plane) -> Plane:
    n = a.m @ p.normal
    # renormalize to absorb rounding growth at large coordinates
    return Plane(n / math.sqrt(float(inner(n, n))))


# ---------------------------------------------------------------------------
# pairwise plane relations


@dataclass(frozen=True)
class Equal:
    pass


@dataclass(frozen=True)
class Intersecting:
    angle: float


@dataclass(frozen=True)
class Parallel:
    pass


@dataclass(frozen=True)
class Ultraparallel:
    distance: float


PlaneRelation = Equal | Intersecting | Parallel | Ultraparallel


def same_up_to_sign(a, b, eps: float = EPS) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    tol = eps * max(1.0, float(np.abs(a).max()), float(np.abs(b).max()))
    return bool(np.abs(a - b).max() <= tol or np.abs(a + b).max() <= tol)


def plane_relation(p: Plane, q: Plane, eps: float = EPS) -> PlaneRelation:
    """Equal, Intersecting(angle), Parallel, or Ultraparallel(distance).

    The band around |<a,b>| = 1 scales with the coordinate sizes, since far
    planes have large normals and their inner product carries that much rounding.
    """
    a, b = p.normal, q.normal
    if same_up_to_sign(a, b, eps):
        return Equal()
    c = float(inner(a, b))
    tol = eps * max(1.0, float(np.abs(a).max()) * float(np.abs(b).max()))
    if abs(c) < 1.0 - tol:
        return Intersecting(math.acos(-c))
    if abs(c) <= 1.0 + tol:
        return Parallel()
    return Ultraparallel(math.acosh(abs(c)))


def to_ball(x) -> np.ndarray:
    """Projective (Klein) model coordinates of a point: divide by x4."""
    x = np.asarray(x, dtype=float)
    return x[..., :3] / x[..., 3:4]
