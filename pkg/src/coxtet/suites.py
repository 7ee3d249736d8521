"""Sample sets used by the verification suites and the acceptance tests."""

from __future__ import annotations

import itertools
from functools import lru_cache

from .lattice import TriangleType
from .summary import ExpectationKind, expectation
from .tetgen import TetSpec, all_non_finite, canonical_spec, parse_spec, realizable

T = TriangleType.of

# specs matching the proved items, with the single maximal type predicted
ITEM_SPECS: tuple[tuple[str, TriangleType], ...] = (
    ("2,6,3;2,6,3", T(3, 6, 6)),
    ("2,7,3;2,8,3", T(3, 7, 8)),
    ("2,6,4;2,6,3", T(4, 6, 6)),
    ("2,3,6;2,3,6", T(3, 6, 6)),
    ("3,6,2;3,6,2", T(3, 6, 6)),
)

# instantiated conjectural items and the types whose presence is claimed
CONJECTURAL_SPECS: tuple[tuple[str, tuple[TriangleType, ...]], ...] = (
    ("4,3,4;2,2,2", (T(3, 4, 4),)),
    ("3,3,2;2,4,3", (T(3, 4, 4),)),
    ("2,2,5;2,3,5", (T(3, 5, 5),)),
    ("3,4,3;2,3,2", (T(3, 4, 4),)),
    ("2,2,3;3,5,2", (T(3, 5, 5), T(5, 5, 5), T(2, 5, 5), T(3, 3, 5))),
    ("2,3,3;2,3,4", (T(3, 4, 4),)),
)

NEGATIVE_MAX_LABEL = 6


def item_specs() -> list[TetSpec]:
    return [parse_spec(s) for s, _ in ITEM_SPECS]


def conjectural_specs() -> list[TetSpec]:
    return [parse_spec(s) for s, _ in CONJECTURAL_SPECS]


@lru_cache(maxsize=None)
def canonical_specs(max_label: int, min_label: int = 2) -> tuple[TetSpec, ...]:
    """One representative per symmetry orbit, entries in [min_label, max_label]."""
    reps = {canonical_spec(TetSpec.of(t)) for t in itertools.product(range(min_label, max_label + 1), repeat=6)}
    return tuple(sorted(reps))


@lru_cache(maxsize=None)
def non_finite_specs(max_label: int = NEGATIVE_MAX_LABEL) -> tuple[TetSpec, ...]:
    """Realizable orbit representatives without finite vertices."""
    return tuple(s for s in canonical_specs(max_label) if all_non_finite(s) and realizable(s))


@lru_cache(maxsize=None)
def negative_specs(max_label: int = NEGATIVE_MAX_LABEL) -> tuple[TetSpec, ...]:
    """All-non-finite specs outside the item patterns: no turnover is expected."""
    return tuple(s for s in non_finite_specs(max_label) if expectation(s).kind is ExpectationKind.NONE_EXPECTED)
