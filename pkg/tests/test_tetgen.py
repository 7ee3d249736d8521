import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
import mpmath as mp

from coxtet.mink import Intersecting, PointClass, inner, plane_relation, point_class
from coxtet.tetgen import (
    NotRealizable,
    SpecParseError,
    TetSpec,
    VertexClass,
    classify_vertex,
    exists_hyperbolic,
    gram_from_spec,
    nondegenerate,
    parse_spec,
    realizable,
    realize,
    symmetry_orbit,
    vertex_classes,
)


def charpoly_signature(spec: TetSpec):
    """(positive, negative) eigenvalue counts of the Gram matrix at 50 digits.

    Coefficients come from the Faddeev-LeVerrier recursion; the matrix is real
    symmetric, so all roots are real and Descartes' rule of signs counts them.
    """
    mp.mp.dps = 50
    k = dict(zip("lmqnpr", spec.as_tuple()))
    c = {e: mp.mpf(0) if v == 2 else -mp.cos(mp.pi / v) for e, v in k.items()}
    # rows/columns F_A..F_D; pairs CD=l, AD=m, BD=q, AB=n, BC=p, AC=r
    g = mp.matrix(
        [
            [1, c["n"], c["r"], c["m"]],
            [c["n"], 1, c["p"], c["q"]],
            [c["r"], c["p"], 1, c["l"]],
            [c["m"], c["q"], c["l"], 1],
        ]
    )
    n = 4
    coeffs = [mp.mpf(1)]
    M = mp.zeros(n, n)
    for j in range(1, n + 1):
        M = g * M + coeffs[-1] * mp.eye(n)
        coeffs.append(-sum((g * M)[i, i] for i in range(n)) / j)

    def changes(seq):
        s = [v for v in seq if abs(v) > mp.mpf(10) ** -40]
        return sum(1 for a, b in zip(s, s[1:]) if a * b < 0)

    pos = changes(coeffs)
    neg = changes([v * (-1) ** (n - i) for i, v in enumerate(coeffs)])
    return pos, neg


def test_gram_examples():
    assert np.array_equal(gram_from_spec(parse_spec("2,2,2;2,2,2")), np.eye(4))
    g = gram_from_spec(parse_spec("2,6,3;2,6,3"))
    h = math.sqrt(3) / 2
    assert g[2, 3] == pytest.approx(0, abs=1e-15)
    assert g[0, 3] == pytest.approx(-h)
    assert g[1, 3] == pytest.approx(-0.5)
    assert g[0, 1] == pytest.approx(0, abs=1e-15)
    assert g[1, 2] == pytest.approx(-h)
    assert g[0, 2] == pytest.approx(-0.5)
    g = gram_from_spec(parse_spec("4,4,4;4,4,4"))
    off = g[~np.eye(4, dtype=bool)]
    assert np.allclose(off, -math.sqrt(2) / 2)


@pytest.mark.parametrize(
    "text, expected",
    [("2,2,2;2,2,2", (4, 0)), ("2,6,3;2,6,3", (3, 1)), ("4,4,4;4,4,4", (3, 1))],
)
def test_signature_oracle(text, expected):
    spec = parse_spec(text)
    assert charpoly_signature(spec) == expected
    assert exists_hyperbolic(gram_from_spec(spec)) is (expected == (3, 1))


def test_signature_oracle_sample():
    rng = np.random.default_rng(7)
    for t in rng.integers(2, 9, size=(200, 6)):
        spec = TetSpec.of(t)
        pos, neg = charpoly_signature(spec)
        if pos + neg < 4:
            continue  # singular: reported as Degenerate, not compared here
        assert exists_hyperbolic(gram_from_spec(spec)) is ((pos, neg) == (3, 1))


def test_parse_spec():
    assert parse_spec(" 2, 6,3 ; 2,6 ,3 ") == TetSpec(2, 6, 3, 2, 6, 3)
    assert parse_spec("T[2,6,3;2,6,3]") == TetSpec(2, 6, 3, 2, 6, 3)
    for bad in ("1,2,3", "2,2,2;2,2,1", "a,b,c;d,e,f", ""):
        with pytest.raises(SpecParseError):
            parse_spec(bad)


def test_classify_vertex_examples():
    s = parse_spec("2,6,3;2,6,3")
    assert classify_vertex(s, "A") is VertexClass.IDEAL
    assert vertex_classes(s) == (VertexClass.IDEAL,) * 4
    assert vertex_classes(parse_spec("4,4,4;4,4,4")) == (VertexClass.TRUNCATED,) * 4
    assert classify_vertex(parse_spec("2,3,3;5,2,2"), "A") is VertexClass.FINITE


def test_realize_all_ideal():
    tet = realize(parse_spec("2,6,3;2,6,3"))
    assert tet.residual() < 1e-9
    for v in tet.vertices:
        assert point_class(v.dual / np.abs(v.dual).max()) is PointClass.LIGHTLIKE
        assert v.truncation is None


def test_realize_truncated_orthogonality():
    tet = realize(parse_spec("4,4,4;4,4,4"))
    for i, v in enumerate(tet.vertices):
        assert v.cls is VertexClass.TRUNCATED
        for j in range(4):
            if j == i:
                continue
            rel = plane_relation(v.truncation, tet.faces[j])
            assert isinstance(rel, Intersecting) and abs(rel.angle - math.pi / 2) < 1e-8
    # duals are orthogonal to the three faces through the vertex
    for i, v in enumerate(tet.vertices):
        for j in range(4):
            if j != i:
                assert abs(inner(v.dual, tet.normals[j])) < 1e-9
    # the interior point is inside every face half-space
    assert all(inner(tet.interior, n) < 0 for n in tet.normals)


def test_not_realizable():
    with pytest.raises(NotRealizable):
        realize(parse_spec("2,2,2;2,2,2"))
    # Lorentzian signature, but the truncation plane of D is the face ABC
    s = parse_spec("2,2,2;3,3,5")
    assert exists_hyperbolic(gram_from_spec(s))
    assert not nondegenerate(gram_from_spec(s)) and not realizable(s)
    with pytest.raises(NotRealizable):
        realize(s)


def test_symmetry_orbit_examples():
    orb = symmetry_orbit(parse_spec("2,6,3;2,6,3"))
    assert parse_spec("3,6,2;3,6,2") in orb
    assert symmetry_orbit(parse_spec("2,2,2;2,2,2")) == {parse_spec("2,2,2;2,2,2")}
    for m, q, p in itertools.product((3, 6, 7), (4, 5), (2, 8)):
        assert TetSpec(2, q, m, 2, 3, p) in symmetry_orbit(TetSpec(2, m, q, 2, p, 3))
    for s in (parse_spec("2,3,4;5,6,7"), parse_spec("2,2,3;3,5,2")):
        assert 24 % len(symmetry_orbit(s)) == 0


def test_orbit_soundness():
    rng = np.random.default_rng(11)
    for t in rng.integers(2, 8, size=(20, 6)):
        s = TetSpec.of(t)
        ref = (sorted(c.value for c in vertex_classes(s)), _exists(s))
        for m in symmetry_orbit(s):
            assert (sorted(c.value for c in vertex_classes(m)), _exists(m)) == ref


def _exists(s):
    try:
        return exists_hyperbolic(gram_from_spec(s))
    except ValueError:
        return None


def test_angle_sum_is_exact():
    # 1/2 + 1/3 + 1/6 is exactly one; floating point would need a tolerance
    assert sum(Fraction(1, k) for k in (2, 3, 6)) == 1
    assert classify_vertex(TetSpec(2, 3, 3, 6, 6, 2), "A") is VertexClass.IDEAL
