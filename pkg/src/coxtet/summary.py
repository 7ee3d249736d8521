"""Predicted immersed turnovers for families of Coxeter tetrahedra.

Items 1-3 are the proved classification for tetrahedra without finite
vertices (all three are one family up to relabelling). Items 4-14 are the
conjectural list; each predicate returns the predicted types for a 6-tuple
read as T[l,m,q;n,p,r], or None when the pattern does not apply.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .lattice import TriangleType
from .tetgen import TetSpec, all_non_finite, symmetry_orbit

T = TriangleType.of


def _item1(l, m, q, n, p, r):
    if (l, n, r) == (2, 2, 3) and q >= 3 and m >= 6 and p >= 6:
        return [T(q, m, p)]


def _item2(l, m, q, n, p, r):
    if (l, n, p) == (2, 2, 3) and q >= 6 and m >= 3 and r >= 6:
        return [T(q, m, r)]


def _item3(l, m, q, n, p, r):
    if (l, q, r) == (3, 2, 2) and m >= 6 and n >= 3 and p >= 6:
        return [T(m, n, p)]


def _extras_2_4(x):
    """Additional types accompanying a (2,4,x) turnover."""
    out = [T(2, x, x)]
    if x == 5:
        out.append(T(4, 4, 5))
    if x % 2 == 0:
        out.append(T(x // 2, x, x))
    return out


def _item4(l, m, q, n, p, r):
    if (l, n, r) != (2, 2, 3):
        return None
    if q == 2 and m == 4 and p >= 5:
        return [T(2, 4, p)] + _extras_2_4(p)
    if q == 2 and p == 4 and m >= 5:
        return [T(2, m, 4)] + _extras_2_4(m)
    if q == 2 and m >= 5 and p >= 5:
        out = [T(2, m, p)]
        if p % 2 == 0:
            out.append(T(m, m, p // 2))
        if m % 2 == 0:
            out.append(T(m // 2, p, p))
        return out
    if min(q, m, p) > 2 and max(q, m, p) > 3:
        out = [T(q, m, p)]
        vals = sorted((q, m, p))
        if vals[0] == vals[1] == 3:
            out.append(T(vals[2], vals[2], vals[2]))
        return out
    return None


def _item5(l, m, q, n, p, r):
    if (l, m, q, n, r) == (3, 2, 2, 2, 3) and p >= 5:
        return [T(2, p, p)]


def _item6(l, m, q, n, p, r):
    if (l, q, n, r) == (3, 2, 2, 3) and m >= 3 and p >= 4:
        return [T(m, p, p)]


def _item7(l, m, q, n, p, r):
    if (l, q, n, p, r) == (3, 3, 2, 3, 2) and m >= 4:
        return [T(3, m, m)]


def _item8(l, m, q, n, p, r):
    if (l, m, n, p, r) == (4, 3, 2, 2, 2) and q >= 4:
        return [T(q, q, 3)]


def _item9(l, m, q, n, p, r):
    if (l, m, q, p) != (2, 2, 4, 3):
        return None
    if n == 2 and r >= 5:
        out = [T(2, 4, r)] + _extras_2_4(r)
        if r == 5:
            out += [T(3, 3, 5), T(3, 5, 5), T(5, 5, 5)]
        return out
    if n == 3 and r >= 3:
        return [T(4, 4, r)]
    return None


def _item10(l, m, q, n, p, r):
    if (l, m, n, p) == (2, 3, 2, 3) and q >= 3 and r in (4, 5):
        return [T(q, r, r)]


def _item11(l, m, q, n, p, r):
    if (l, m, n, p, r) == (2, 2, 3, 5, 2) and q >= 3:
        return [T(q, q, 5)]


def _item12(l, m, q, n, p, r):
    if (l, m, q, n, p, r) == (2, 2, 5, 2, 3, 5):
        return [T(3, 5, 5)]


def _item13(l, m, q, n, p, r):
    if (l, m, q, n, r) == (2, 2, 3, 3, 2) and p in (5, 6):
        out = [T(3, p, p), T(p, p, p), T(2, p, p)]
        if p == 5:
            out.append(T(3, 3, 5))
        return out


def _item14(l, m, q, n, p, r):
    if (l, m, q, n, r) != (2, 2, 3, 2, 3):
        return None
    if p == 5:
        return [T(2, 5, 5), T(3, 3, 5), T(5, 5, 5)]
    if p == 6:
        return [T(3, 6, 6)]
    return None


PROVED = {1: _item1, 2: _item2, 3: _item3}
CONJECTURAL = {
    4: _item4,
    5: _item5,
    6: _item6,
    7: _item7,
    8: _item8,
    9: _item9,
    10: _item10,
    11: _item11,
    12: _item12,
    13: _item13,
    14: _item14,
}


class ExpectationKind(enum.Enum):
    ITEM = "Item"
    CONJECTURAL = "ConjecturalItem"
    NONE_EXPECTED = "NoneExpected"
    OUT_OF_SCOPE = "OutOfTheoremScope"


@dataclass(frozen=True)
class Expectation:
    kind: ExpectationKind
    items: tuple[int, ...] = ()
    types: frozenset[TriangleType] = field(default_factory=frozenset)
    # orbit members that matched, per item
    forms: tuple[tuple[int, TetSpec], ...] = ()

    def __str__(self) -> str:
        if self.kind in (ExpectationKind.ITEM, ExpectationKind.CONJECTURAL):
            items = ",".join(str(i) for i in self.items)
            types = " ".join(str(t) for t in sorted(self.types))
            return f"{self.kind.value} {items} {types}"
        return self.kind.value


def _match(table, spec: TetSpec):
    items, types, forms = [], set(), []
    for s in sorted(symmetry_orbit(spec)):
        for k, fn in table.items():
            got = fn(*s.as_tuple())
            if got:
                if k not in items:
                    items.append(k)
                forms.append((k, s))
                types.update(got)
    return sorted(items), frozenset(types), tuple(sorted(forms))


def expectation(spec: TetSpec) -> Expectation:
    items, types, forms = _match(PROVED, spec)
    if items and all_non_finite(spec):
        return Expectation(ExpectationKind.ITEM, tuple(items), types, forms)
    items, types, forms = _match(CONJECTURAL, spec)
    if items:
        return Expectation(ExpectationKind.CONJECTURAL, tuple(items), types, forms)
    if all_non_finite(spec):
        return Expectation(ExpectationKind.NONE_EXPECTED)
    return Expectation(ExpectationKind.OUT_OF_SCOPE)
