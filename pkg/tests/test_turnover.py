import math

import numpy as np
import pytest

from coxtet.develop import develop
from coxtet.lattice import TriangleType, is_maximal
from coxtet.mink import Intersecting, Plane, inner, plane_relation
from coxtet.summary import ExpectationKind
from coxtet.tetgen import parse_spec, realize
from coxtet.turnover import (
    NonSpacelike,
    RankDeficient,
    SearchConfig,
    SearchStats,
    Verdict,
    angle_as_submultiple,
    classify_spec,
    common_perpendicular,
    filter_vertex_parallel,
    search,
    witness_relations,
)

T = TriangleType.of


def triangle_normals(a, b, c, boost=0.7):
    """Unit normals in R^{3,1} whose planes meet pairwise at the angles a, b, c.

    Built from the 3x3 triangle Gram matrix by eigen-factorization into
    R^{2,1} (coordinates 1, 2, 4), then moved by a boost so the answer is
    not a coordinate vector.
    """
    g = np.array(
        [[1, -math.cos(a), -math.cos(b)], [-math.cos(a), 1, -math.cos(c)], [-math.cos(b), -math.cos(c), 1]]
    )
    lam, vec = np.linalg.eigh(g)
    order = np.argsort(-lam)
    lam, vec = lam[order], vec[:, order]
    assert lam[0] > 0 and lam[1] > 0 and lam[2] < 0
    F = vec * np.sqrt(np.abs(lam))  # rows: (x1, x2, x4) with form diag(1, 1, -1)
    N = np.zeros((3, 4))
    N[:, 0], N[:, 1], N[:, 3] = F[:, 0], F[:, 1], F[:, 2]
    ch, sh = math.cosh(boost), math.sinh(boost)
    B = np.eye(4)
    B[2, 2], B[2, 3], B[3, 2], B[3, 3] = ch, sh, sh, ch
    return N @ B.T, g


def test_angle_as_submultiple():
    assert angle_as_submultiple(math.pi / 7) == 7
    assert angle_as_submultiple(2 * math.pi / 7) is None
    assert angle_as_submultiple(math.pi / 6 + 1e-12) == 6
    assert angle_as_submultiple(math.pi / 101) is None
    assert angle_as_submultiple(math.pi / 101, cmax=200) == 101


def test_common_perpendicular_oracle():
    N, g = triangle_normals(math.pi / 3, math.pi / 6, math.pi / 6)
    # the construction reproduces the triangle Gram matrix
    assert np.abs(inner(N[:, None, :], N[None, :, :]) - g).max() < 1e-12
    w = common_perpendicular(*N)
    assert inner(w.normal, w.normal) > 0
    for n in N:
        assert abs(inner(w.normal, n)) < 1e-8
    # the coordinate answer moved by the same boost, up to sign
    expected = np.array([0.0, 0.0, math.cosh(0.7), math.sinh(0.7)])
    assert min(np.abs(w.normal - expected).max(), np.abs(w.normal + expected).max()) < 1e-9
    for p in N:
        rel = plane_relation(w, Plane(p))
        assert isinstance(rel, Intersecting) and abs(rel.angle - math.pi / 2) < 1e-8


def test_common_perpendicular_errors():
    e = np.eye(4)
    with pytest.raises(NonSpacelike):
        common_perpendicular(e[0], e[1], e[2])
    with pytest.raises(RankDeficient):
        common_perpendicular(e[0], e[0], e[1])


@pytest.mark.parametrize("text", ["2,6,3;2,6,3", "3,6,2;3,6,2"])
def test_search_finds_366(text):
    found = search(realize(parse_spec(text)))
    assert T(3, 6, 6) in {w.type for w in found}


def test_search_negative():
    assert search(realize(parse_spec("2,4,4;2,4,4"))) == []


def test_witness_invariants():
    tet = realize(parse_spec("2,6,3;2,6,3"))
    st = develop(tet, 8)
    found = search(tet, SearchConfig(depth=8), state=st)
    assert found
    for w in found:
        a, b, c = w.type
        assert 1 / a + 1 / b + 1 / c < 1
        rel, perp = witness_relations(w)
        # stored planes are unoriented: the relation may report the supplement
        assert all(isinstance(r, Intersecting) for r in rel)
        for r, k in zip(rel, w.angles):
            assert min(abs(r.angle - math.pi / k), abs(math.pi - r.angle - math.pi / k)) < 1e-8
        assert tuple(sorted(w.angles)) == tuple(w.type)
        for r in perp:
            assert isinstance(r, Intersecting) and abs(r.angle - math.pi / 2) < 1e-8
        for p in (w.pi_f, w.pi_1, w.pi_2):
            assert st.find_wall(p) is not None
        for t in st.truncation_normals:
            assert not isinstance(plane_relation(w.invariant_plane, Plane(t)), Intersecting)
        if not is_maximal(w.type):
            # annotated with its table supergroups, none of which is realized here
            assert w.supergroups and not (set(w.supergroups) & {x.type for x in found})
        assert filter_vertex_parallel(w, tet, st)


def test_search_deterministic_and_threaded():
    tet = realize(parse_spec("2,7,3;2,8,3"))
    a = search(tet, SearchConfig(depth=7))
    b = search(tet, SearchConfig(depth=7, threads=4))
    assert [w.sort_key for w in a] == [w.sort_key for w in b]
    assert [w.words for w in a] == [w.words for w in b]


def test_filter_vertex_parallel():
    tet = realize(parse_spec("4,4,4;4,4,4"))
    st = develop(tet, 4)
    for v in tet.vertices:
        assert filter_vertex_parallel(v.truncation, tet, st) is False
    # a plane far from the development crosses no edge at all
    far = Plane([math.cosh(8.0), 0.0, 0.0, math.sinh(8.0)])
    assert filter_vertex_parallel(far, tet, st) is False


def test_classify_examples():
    r = classify_spec(parse_spec("2,7,4;2,8,3"))
    assert r.expected.kind is ExpectationKind.ITEM and 1 in r.expected.items
    assert r.expected.types == {T(4, 7, 8)} and r.verdict is Verdict.MATCH
    r = classify_spec(parse_spec("4,4,4;4,4,4"))
    assert r.expected.kind is ExpectationKind.NONE_EXPECTED
    assert r.verdict is Verdict.INCONCLUSIVE and r.found == []
    r = classify_spec(parse_spec("4,3,4;2,2,2"))
    assert r.expected.kind is ExpectationKind.CONJECTURAL and 8 in r.expected.items
    assert T(3, 4, 4) in r.expected.types and r.verdict is Verdict.MATCH


def test_out_of_scope():
    # a finite vertex and no conjectural pattern
    r = classify_spec(parse_spec("2,2,3;2,4,5"), SearchConfig(depth=4))
    assert r.expected.kind is ExpectationKind.OUT_OF_SCOPE
    assert r.verdict is Verdict.INCONCLUSIVE


def test_stats_counts():
    stats = SearchStats()
    search(realize(parse_spec("2,6,3;2,6,3")), SearchConfig(depth=6), stats=stats)
    assert stats.tiles > 0 and stats.candidates >= 0 and stats.non_submultiple >= 0


def test_config_guards():
    with pytest.raises(ValueError):
        SearchConfig(depth=1)
    with pytest.raises(ValueError):
        SearchConfig(cmax=1)
