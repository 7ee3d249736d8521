"""Inclusions between triangle groups (Singerman's list).

Rows are stored as patterns in the parameters s and t; a type (a,b,c) is
matched against the subgroup column and the supergroup is instantiated.
Every instantiation can be cross-checked with the orbifold Euler
characteristic: the index equals chi(sub) / chi(super).
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import NamedTuple

DEFAULT_CMAX = 100
HEADER = ("Supergroup", "Subgroup", "Index", "Normal")


class TriangleType(NamedTuple):
    a: int
    b: int
    c: int

    @classmethod
    def of(cls, *xs) -> "TriangleType":
        if len(xs) == 1 and not isinstance(xs[0], int):
            xs = tuple(xs[0])
        if len(xs) != 3:
            raise ValueError(f"a triangle type has three entries, got {xs!r}")
        vals = sorted(int(x) for x in xs)
        if vals[0] < 2:
            raise ValueError(f"triangle type entries must be >= 2, got {xs!r}")
        return cls(*vals)

    @property
    def reciprocal_sum(self) -> Fraction:
        return Fraction(1, self.a) + Fraction(1, self.b) + Fraction(1, self.c)

    @property
    def hyperbolic(self) -> bool:
        return self.reciprocal_sum < 1

    @property
    def chi(self) -> Fraction:
        return self.reciprocal_sum - 1

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c})"


def parse_type(text: str) -> TriangleType:
    s = re.sub(r"[\s()\[\]]", "", text)
    parts = s.split(",")
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        raise ValueError(f"cannot parse triangle type {text!r}; expected 'a,b,c'")
    return TriangleType.of(*(int(p) for p in parts))


_ENTRY = re.compile(r"^(\d*)([st]?)$")


def _parse_entry(e: str) -> tuple[int, str | None]:
    """'7' -> (7, None); 't' -> (1, 't'); '4t' -> (4, 't')."""
    m = _ENTRY.match(e)
    if not m or (not m.group(1) and not m.group(2)):
        raise ValueError(f"bad pattern entry {e!r}")
    k = int(m.group(1)) if m.group(1) else 1
    return k, (m.group(2) or None)


@dataclass(frozen=True)
class InclusionRow:
    sup: tuple[str, str, str]
    sub: tuple[str, str, str]
    index: int
    normal: bool

    @property
    def params(self) -> tuple[str, ...]:
        names = {_parse_entry(e)[1] for e in self.sup + self.sub}
        return tuple(sorted(n for n in names if n))

    def instantiate(self, **vals: int) -> tuple[TriangleType, TriangleType]:
        def ev(e):
            k, v = _parse_entry(e)
            return k * vals[v] if v else k

        return TriangleType.of(*(ev(e) for e in self.sup)), TriangleType.of(*(ev(e) for e in self.sub))

    def match_sub(self, t: TriangleType, cmax: int = DEFAULT_CMAX) -> list[dict[str, int]]:
        """Parameter values making the subgroup pattern equal to t."""
        found = []
        ents = [_parse_entry(e) for e in self.sub]
        for perm in set(itertools.permutations(t)):
            vals: dict[str, int] = {}
            ok = True
            for (k, v), x in zip(ents, perm):
                if v is None:
                    ok = k == x
                elif x % k:
                    ok = False
                else:
                    y = x // k
                    ok = vals.setdefault(v, y) == y and 2 <= y <= cmax
                if not ok:
                    break
            if ok and vals not in found:
                found.append(vals)
        return found

    def to_line(self) -> str:
        return "\t".join(
            ["(" + ",".join(self.sup) + ")", "(" + ",".join(self.sub) + ")", str(self.index), "Yes" if self.normal else "No"]
        )


def parse_table(text: str) -> list[InclusionRow]:
    lines = text.splitlines()
    if not lines or tuple(lines[0].split("\t")) != HEADER:
        raise ValueError("table must start with the header line")
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        sup, sub, idx, normal = line.split("\t")
        rows.append(
            InclusionRow(
                tuple(sup.strip("()").split(",")),
                tuple(sub.strip("()").split(",")),
                int(idx),
                {"Yes": True, "No": False}[normal],
            )
        )
    return rows


def format_table(rows) -> str:
    return "\n".join(["\t".join(HEADER)] + [r.to_line() for r in rows]) + "\n"


def _load() -> list[InclusionRow]:
    text = resources.files("coxtet").joinpath("data/triangle_inclusions.txt").read_text(encoding="utf-8")
    return parse_table(text)


ROWS: tuple[InclusionRow, ...] = tuple(_load())


@dataclass(frozen=True)
class Inclusion:
    sup: TriangleType
    sub: TriangleType
    index: int
    normal: bool
    row: int  # position in ROWS


def direct_inclusions(t, cmax: int = DEFAULT_CMAX) -> list[Inclusion]:
    """Supergroups of t obtained from a single table row."""
    t = TriangleType.of(t)
    out: list[Inclusion] = []
    seen = set()
    for i, row in enumerate(ROWS):
        for vals in row.match_sub(t, cmax):
            sup, sub = row.instantiate(**vals)
            key = (sup, row.index, row.normal)
            if sub == t and key not in seen:
                seen.add(key)
                out.append(Inclusion(sup, sub, row.index, row.normal, i))
    out.sort(key=lambda x: (x.sup, x.index, x.row))
    return out


@dataclass(frozen=True)
class Chain:
    steps: tuple[Inclusion, ...]

    @property
    def index(self) -> int:
        k = 1
        for s in self.steps:
            k *= s.index
        return k

    @property
    def normal(self) -> bool | None:
        """Normality is known from the table only for a single step."""
        if not self.steps:
            return True
        if len(self.steps) == 1:
            return self.steps[0].normal
        return None

    def __len__(self) -> int:
        return len(self.steps)


def is_subgroup(sub, sup, cmax: int = DEFAULT_CMAX) -> Chain | None:
    """Shortest chain of table inclusions from sub up to sup, if any."""
    sub, sup = TriangleType.of(sub), TriangleType.of(sup)
    if sub == sup:
        return Chain(())
    prev: dict[TriangleType, tuple[TriangleType, Inclusion] | None] = {sub: None}
    queue = deque([sub])
    while queue:
        x = queue.popleft()
        for inc in direct_inclusions(x, cmax):
            y = inc.sup
            if y in prev:
                continue
            prev[y] = (x, inc)
            if y == sup:
                steps = []
                while prev[y] is not None:
                    x0, st = prev[y]
                    steps.append(st)
                    y = x0
                return Chain(tuple(reversed(steps)))
            queue.append(y)
    return None


def is_maximal(t, cmax: int = DEFAULT_CMAX) -> bool:
    return not direct_inclusions(t, cmax)


def supergroups(t, cmax: int = DEFAULT_CMAX) -> set[TriangleType]:
    """All types reachable upward from t through table rows."""
    t = TriangleType.of(t)
    seen = {t}
    queue = deque([t])
    while queue:
        x = queue.popleft()
        for inc in direct_inclusions(x, cmax):
            if inc.sup not in seen:
                seen.add(inc.sup)
                queue.append(inc.sup)
    seen.discard(t)
    return seen


def subgroups_of(t, candidates) -> set[TriangleType]:
    """Members of `candidates` that sit below t in the table's closure."""
    t = TriangleType.of(t)
    return {TriangleType.of(c) for c in candidates if TriangleType.of(c) != t and is_subgroup(c, t)}


def subgroup_closure(types, bound: int = DEFAULT_CMAX) -> set[TriangleType]:
    """Types plus every table subgroup of them (entries up to `bound`).

    A subgroup of a triangle subgroup of the orbifold group is again a
    triangle subgroup, so presence of (a,b,c) implies presence of its
    table subgroups.
    """
    out = {TriangleType.of(t) for t in types}
    queue = deque(out)
    while queue:
        x = queue.popleft()
        for i, row in enumerate(ROWS):
            for vals in _match_sup(row, x, bound):
                _, sub = row.instantiate(**vals)
                if sub not in out and max(sub) <= bound:
                    out.add(sub)
                    queue.append(sub)
    return out


def _match_sup(row: InclusionRow, t: TriangleType, cmax: int) -> list[dict[str, int]]:
    ents = [_parse_entry(e) for e in row.sup]
    found = []
    for perm in set(itertools.permutations(t)):
        vals: dict[str, int] = {}
        ok = True
        for (k, v), x in zip(ents, perm):
            if v is None:
                ok = k == x
            elif x % k:
                ok = False
            else:
                y = x // k
                ok = vals.setdefault(v, y) == y and 2 <= y <= cmax
            if not ok:
                break
        if ok and set(vals) == set(row.params) and vals not in found:
            found.append(vals)
    return found


def euler_index(row: InclusionRow, **vals: int) -> Fraction | None:
    """chi(sub)/chi(super) for an instantiation; None when chi(super) = 0."""
    sup, sub = row.instantiate(**vals)
    if sup.chi == 0:
        return None
    return sub.chi / sup.chi


def check_euler(cmax: int = DEFAULT_CMAX) -> list[tuple[int, dict[str, int], Fraction | None]]:
    """Instantiations (parameters in [2, cmax]) whose Euler ratio differs from the index.

    Euclidean instantiations (chi = 0) cannot be checked and are reported
    with ratio None.
    """
    bad = []
    for i, row in enumerate(ROWS):
        names = row.params
        for combo in itertools.product(range(2, cmax + 1), repeat=len(names)):
            vals = dict(zip(names, combo))
            ratio = euler_index(row, **vals)
            if ratio is None:
                sup, sub = row.instantiate(**vals)
                if sub.chi != 0:
                    bad.append((i, vals, None))
                continue
            if ratio != row.index:
                bad.append((i, vals, ratio))
    return bad
