import math

import numpy as np
import pytest

from coxtet.develop import (
    EDGE_VERTS,
    DepthExceeded,
    BlowUp,
    EdgeNotCoplanar,
    PlaneNotInState,
    coplanar_edges,
    develop,
    develop_around_edge,
    edge_lines_disjoint,
    face_vs_opposite_truncation,
    side_planes,
    tet_reflection,
    truncation_planes_disjoint,
)
from coxtet.mink import Plane, inner
from coxtet.tetgen import EDGE_NAMES, parse_spec, realize

TET = realize(parse_spec("2,6,3;2,6,3"))


def _unit_max(V):
    V = np.asarray(V, dtype=float)
    V = V / np.abs(V).max(axis=-1, keepdims=True)
    lead = np.take_along_axis(V, np.argmax(np.abs(V) > 1e-6, axis=-1)[..., None], axis=-1)
    return V * np.sign(lead)


def brute_force_coplanar(tet, state, normal, tol=1e-7):
    """Count distinct developed edges with both endpoints on the plane.

    Independent of the development's own bookkeeping: every tile's six edges
    are rebuilt from its motion and the base vertex duals, then deduplicated
    as unordered pairs of projectively normalized endpoints.
    """
    D = tet.duals
    keys = set()
    n = normal / math.sqrt(float(inner(normal, normal)))
    for M in state.motions:
        P = _unit_max((M @ D.T).T)
        on = np.abs(inner(P, n[None, :])) < tol * max(1.0, float(np.abs(n).max()))
        for a, b in EDGE_VERTS:
            if on[a] and on[b]:
                ka, kb = (tuple(np.round(P[i], 6)) for i in (a, b))
                keys.add(tuple(sorted((ka, kb))))
    return len(keys)


def test_depth_small():
    s0 = develop(TET, 0)
    assert s0.n_tiles == 1 and s0.n_walls == 4
    assert develop(TET, 1).n_tiles == 5
    with pytest.raises(DepthExceeded):
        develop(TET, 13)
    with pytest.raises(BlowUp):
        develop(TET, 8, tile_cap=50)


def test_counts_monotone_and_deterministic():
    counts = [develop(TET, d).n_tiles for d in range(7)]
    assert counts == sorted(counts)
    assert counts == [develop(TET, d).n_tiles for d in range(7)]
    a, b = develop(TET, 5), develop(TET, 5)
    assert np.array_equal(a.motions, b.motions) and a.words == b.words


def test_words_are_shortlex_and_match_motions():
    st = develop(TET, 5)
    R = [tet_reflection(TET, f) for f in range(4)]
    words = st.words
    assert words == sorted(words, key=lambda w: (len(w), w))
    for k in range(0, st.n_tiles, 7):
        m = np.eye(4)
        for f in words[k]:
            m = m @ R[f]
        assert np.abs(m - st.motions[k]).max() < 1e-8 * max(1.0, np.abs(m).max())


def test_closed_under_reflection():
    depth = 4
    st = develop(TET, depth)
    R = [tet_reflection(TET, f) for f in range(4)]
    x0 = TET.interior
    centers = {tuple(np.round(M @ x0, 5)) for M in st.motions}
    for k, w in enumerate(st.words):
        if len(w) < depth:
            for f in range(4):
                y = st.motions[k] @ R[f] @ x0
                assert tuple(np.round(y, 5)) in centers


def test_develop_around_edge():
    for edge, k in (("AB", 2), ("BC", 6), ("AC", 3)):
        tiles = develop_around_edge(TET, edge)
        assert len(tiles) == 2 * k
        i, j = EDGE_VERTS[EDGE_NAMES.index(edge)]
        for t in tiles:
            for v in (i, j):
                d = TET.duals[v]
                assert np.abs(t.motion.m @ d - d).max() < 1e-8 * max(1.0, np.abs(d).max())
        keys = {tuple(np.round(t.motion.m @ TET.interior, 6)) for t in tiles}
        assert len(keys) == 2 * k
        # the last tile is the first one reflected through a face of the edge
        first, last = tiles[0].motion.m, tiles[-1].motion.m
        faces = [f for f in range(4) if f not in (i, j)]
        assert any(np.allclose(first @ tet_reflection(TET, f), last) for f in faces)


def test_coplanar_base_face():
    st = develop(TET, 1)
    face_abc = TET.faces[3]
    names = {e.edge for e in coplanar_edges(st, face_abc) if e.tile == 0}
    assert names == {"AB", "BC", "AC"}


def test_coplanar_triangle_across_right_angle():
    # AB has order 2, so the copy across face ABD lies beside ABC in the same plane
    st = develop(TET, 1)
    edges = coplanar_edges(st, TET.faces[3])
    tile_c = [e for e in edges if st.words[e.tile] == (2,)]
    assert {e.edge for e in tile_c} == {"AC", "BC"}


def test_coplanar_count_matches_full_scan():
    st = develop(TET, 6)
    # frozen from the full scan: 25 distinct edges in each base face plane
    assert brute_force_coplanar(TET, st, st.walls[3]) == 25
    for w in (0, 1, 2, 3, 7, 11):
        got = len(st.coplanar_edge_ids(w))
        assert got == brute_force_coplanar(TET, st, st.walls[w])


def test_coplanar_unknown_plane():
    st = develop(TET, 2)
    with pytest.raises(PlaneNotInState):
        coplanar_edges(st, Plane([0.6, 0.8, 0.0, 0.0]))


def test_side_planes():
    st = develop(TET, 8)
    pi_f = TET.faces[3]
    by_name = {e.edge: e for e in coplanar_edges(st, pi_f) if e.tile == 0}
    sides = side_planes(st, by_name["AB"], pi_f)
    assert len(sides) == 1 and sides[0][1] == pytest.approx(math.pi / 2)
    sides = side_planes(st, by_name["AC"], pi_f)
    assert [a for _, a in sides] == pytest.approx([math.pi / 3, 2 * math.pi / 3])
    sides = side_planes(st, by_name["BC"], pi_f)
    assert len(sides) == 5
    for e in by_name.values():
        for p, _ in side_planes(st, e, pi_f):
            for d in e.duals:
                assert abs(inner(p.normal, d)) < 1e-8 * max(1.0, np.abs(d).max())
    off = [e for e in st.edges if e.id not in set(st.coplanar_edge_ids(3))][0]
    with pytest.raises(EdgeNotCoplanar):
        side_planes(st, off, pi_f)


def test_edge_planes_meet_at_label_angle():
    st = develop(TET, 4)
    for e in st.edges[::13]:
        a, b = (st.walls[w] for w in e.walls)
        assert abs(abs(inner(a, b)) - math.cos(math.pi / e.label)) < 1e-8


@pytest.mark.parametrize("text", ["4,4,4;4,4,4", "2,6,3;2,6,3", "3,3,3;3,3,3", "2,4,5;2,5,4"])
def test_disjointness_observations(text):
    st = develop(realize(parse_spec(text)), 5)
    assert truncation_planes_disjoint(st) == []
    assert face_vs_opposite_truncation(st) == []
    assert edge_lines_disjoint(st) == []


def test_tiles_are_distinct():
    st = develop(TET, 7)
    centers = np.round(st.motions @ TET.interior, 5)
    assert len({tuple(c) for c in centers}) == st.n_tiles
