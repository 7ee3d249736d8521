import itertools
import random

import pytest

from coxtet.combi import (
    SMALLNESS_SCOPE,
    CircuitKind,
    GraphParseError,
    HyperIdealVertex,
    MarkedGraph,
    NotValidated,
    Smallness,
    bipyramid,
    canonical_form,
    collapse_truncations,
    cube,
    from_json,
    from_tetspec,
    is_small,
    isomorphic,
    prism,
    pyramid,
    relabel,
    tetrahedral_graph,
    to_json,
    truncate_vertex,
    turnover_circuits,
    validate,
    vertex_class_combinatorial,
)
from coxtet.tetgen import VertexClass, all_non_finite, canonical_spec, parse_spec, realizable


def _single_vertex_graph(labels):
    """Tetrahedron whose vertex A carries the given three labels on AB, AC, AD."""
    l, q, p = labels
    return tetrahedral_graph((l, 2, q, 2, p, 2))


def _shuffled(g, seed):
    rng = random.Random(seed)
    vp = list(range(g.n_vertices))
    ep = list(range(g.n_edges))
    fp = list(range(g.n_faces))
    rng.shuffle(vp), rng.shuffle(ep), rng.shuffle(fp)
    return relabel(g, vp, ep, fp, rotate=rng.randrange(3))


def test_validate_examples():
    assert validate(tetrahedral_graph(parse_spec("2,6,3;2,6,3").as_tuple())) == []
    # octahedron: every vertex quadrivalent; one vertex gets labels (2,2,2,3)
    g = bipyramid(4)
    assert validate(g) == []
    edges = [(e.ends[0], e.ends[1], e.label) for e in g.edges]
    a, b, _ = edges[4]
    edges[4] = (a, b, 3)
    errs = validate(MarkedGraph.of(edges, g.faces))
    assert any("quadrivalent" in v.rule for v in errs)
    assert any("11/6" in v.detail for v in errs)
    errs = validate(tetrahedral_graph((1, 2, 2, 2, 2, 2)))
    assert errs and errs[0].rule == "label >= 2" and errs[0].where == "edge 0"


def test_validate_structural_rejections():
    # pentagonal pyramid: the apex has valence 5
    assert any("valence" in v.rule for v in validate(pyramid(5)))
    g = tetrahedral_graph()
    # an edge listed in only one face
    bad = MarkedGraph.of([(e.ends[0], e.ends[1], e.label) for e in g.edges], g.faces[:3] + ((0, 1, 2, 3),))
    assert validate(bad)
    # parallel edge
    par = MarkedGraph.of([(0, 1, 2), (1, 0, 2), (1, 2, 2)], [[0, 1, 2]])
    assert any("parallel" in v.rule for v in validate(par))


def test_vertex_class_combinatorial():
    assert vertex_class_combinatorial(_single_vertex_graph((2, 3, 6)), 0) is VertexClass.IDEAL
    assert vertex_class_combinatorial(_single_vertex_graph((2, 3, 5)), 0) is VertexClass.FINITE
    with pytest.raises(HyperIdealVertex):
        vertex_class_combinatorial(_single_vertex_graph((4, 4, 4)), 0)
    assert vertex_class_combinatorial(bipyramid(4), 0) is VertexClass.IDEAL
    with pytest.raises(NotValidated):
        vertex_class_combinatorial(pyramid(5), 0)


def test_circuit_around_prism_truncation():
    g = prism(3, lateral=4, top=2, bottom=2)
    report = turnover_circuits(g)
    lateral = [c for c in report if set(c.labels) == {4} and not c.vertex_parallel]
    assert len(lateral) == 1
    c = lateral[0]
    assert c.kind is CircuitKind.HYPERBOLIC and set(c.faces) == {2, 3, 4}
    assert report.essential == (c,)


def test_circuit_around_tetra_vertex():
    report = turnover_circuits(_single_vertex_graph((2, 3, 7)))
    # faces around A: all but face 0 (opposite A)
    c = [c for c in report if c.faces == (1, 2, 3)]
    assert len(c) == 1
    assert sorted(c[0].labels) == [2, 3, 7]
    assert c[0].kind is CircuitKind.HYPERBOLIC and c[0].vertex_parallel
    assert report.essential == ()


def test_cube_circuits_all_vertex_parallel():
    report = turnover_circuits(cube(3))
    assert len(report) == 8
    assert all(c.vertex_parallel for c in report)


def test_circuit_kinds_exact():
    for labels, kind in [((2, 3, 6), CircuitKind.EUCLIDEAN), ((2, 3, 5), CircuitKind.SPHERICAL), ((3, 3, 4), CircuitKind.HYPERBOLIC)]:
        c = [c for c in turnover_circuits(_single_vertex_graph(labels)) if c.faces == (1, 2, 3)][0]
        assert c.kind is kind


def test_collapse_examples():
    tet = tetrahedral_graph()
    assert collapse_truncations(prism(3, lateral=3, top=2, bottom=3)).n_faces == 4
    assert isomorphic(collapse_truncations(prism(3, 3, 2, 3)), tet, with_labels=False)
    assert collapse_truncations(tet) == tet
    full = from_tetspec(parse_spec("4,4,4;4,4,4"))
    assert full.n_faces == 8
    out = collapse_truncations(full)
    assert out.n_faces == 4 and isomorphic(out, tetrahedral_graph((4,) * 6))


def test_collapse_decreases_faces():
    g = from_tetspec(parse_spec("4,4,4;4,4,4"))
    while True:
        h = collapse_truncations(g) if g.n_faces > 4 else g
        assert h.n_faces <= g.n_faces
        if h == g:
            break
        g = h


def _truncated_forms():
    g = tetrahedral_graph((3, 3, 3, 3, 3, 3))
    out = []
    for v in range(3, -1, -1):
        g = truncate_vertex(g, v)
        out.append(g)
    return out


def test_small_forms():
    assert is_small(tetrahedral_graph()) is Smallness.SMALL
    forms = _truncated_forms()
    assert [f.n_faces for f in forms] == [5, 6, 7, 8]
    for f in forms:
        assert validate(f) == []
        assert is_small(f) is Smallness.SMALL
    assert is_small(prism(3, 4, 2, 3)) is Smallness.SMALL
    assert "not an Andreev" in SMALLNESS_SCOPE


def _hexahedra():
    """Labeled six-faced polyhedra that are not generalized tetrahedra."""
    out = [cube(k) for k in (2, 3, 4, 5)]
    out.append(prism(4, lateral=2, top=3, bottom=4))
    # twice-truncated tetrahedron with a truncation triangle that is not all-2
    g = _truncated_forms()[1]
    edges = [(e.ends[0], e.ends[1], e.label) for e in g.edges]
    tri = g.faces[-1]
    a, b, _ = edges[tri[0]]
    edges[tri[0]] = (a, b, 3)
    out.append(MarkedGraph.of(edges, g.faces))
    # six triangles, quadrivalent equator
    out.append(bipyramid(3))
    return out


def test_not_small():
    assert is_small(cube()) is Smallness.NOT_SMALL
    assert is_small(prism(5, 3, 2, 2)) is Smallness.NOT_SMALL
    for g in _hexahedra():
        assert g.n_faces == 6
        assert validate(g) == []
        assert is_small(g) is Smallness.NOT_SMALL
    assert is_small(pyramid(5)) is Smallness.INVALID


def test_relabel_invariance():
    graphs = _truncated_forms() + _hexahedra() + [prism(5, 3, 2, 2)]
    for k, g in enumerate(graphs):
        for seed in range(3):
            h = _shuffled(g, 100 * k + seed)
            assert validate(h) == []
            assert canonical_form(h) == canonical_form(g)
            assert is_small(h) is is_small(g)


def test_canonical_form_distinguishes_labels():
    assert not isomorphic(cube(2), cube(3))
    assert isomorphic(cube(2), cube(3), with_labels=False)
    assert not isomorphic(prism(5), bipyramid(5), with_labels=False)


def test_json_round_trip_byte_exact():
    for g in _truncated_forms() + _hexahedra():
        text = to_json(g)
        assert from_json(text) == g
        assert to_json(from_json(text)) == text


def test_json_errors():
    for bad in ("{", '{"edges": []}', '{"edges": [{"ends": [0], "label": 2}], "faces": []}',
                '{"edges": [{"ends": [0, 1.5], "label": 2}], "faces": []}'):
        with pytest.raises(GraphParseError):
            from_json(bad)


def test_tetspec_graphs_are_small():
    seen = set()
    for labels in itertools.product((2, 3, 4, 6), repeat=6):
        spec = canonical_spec(parse_spec("{},{},{};{},{},{}".format(*labels)))
        if spec in seen:
            continue
        seen.add(spec)
        if not realizable(spec):
            continue
        g = from_tetspec(spec)
        assert validate(g) == []
        assert is_small(g) is Smallness.SMALL
    assert all_non_finite(parse_spec("4,4,4;4,4,4"))
