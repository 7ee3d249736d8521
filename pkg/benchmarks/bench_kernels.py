"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Both kernels run on inputs taken from real developments, so the timings
reflect the loads seen by `develop` and `search`.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from coxtet import _kernels_py
from coxtet.develop import develop
from coxtet.tetgen import parse_spec, realize

try:
    from coxtet import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def expand_inputs(text: str, levels: int):
    tet = realize(parse_spec(text))
    N = np.asarray(tet.normals, dtype=float)
    U = np.asarray(tet.interior, dtype=float)[None, :]
    M = np.eye(4)[None, :, :]
    for _ in range(levels):
        U, M, _, _ = _kernels_py.expand_level(U, M, N, 0.0)
    return U, M, N


def triangle_inputs(text: str, depth: int, k: int):
    st = develop(realize(parse_spec(text)), depth)
    nF = st.walls[int(st.face_wall[0, 3])]
    return nF, st.walls[:k]


def best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    cases = []
    for text, levels in (("2,6,3;2,6,3", 7), ("4,4,4;4,4,4", 6)):
        U, M, N = expand_inputs(text, levels)
        cases.append(
            (
                f"expand_level  {text}  frontier {len(U)}",
                lambda U=U, M=M, N=N: _kernels_py.expand_level(U, M, N, 0.0),
                None if compiled is None else (lambda U=U, M=M, N=N: compiled.expand_level(U, M, N, 0.0)),
            )
        )
    for text, k in (("2,6,3;2,6,3", 400), ("2,7,3;2,8,3", 800)):
        nF, S = triangle_inputs(text, 7, k)
        cases.append(
            (
                f"triangle_pairs  {text}  planes {len(S)}",
                lambda nF=nF, S=S: _kernels_py.triangle_pairs(nF, S, 100, 1e-9),
                None if compiled is None else (lambda nF=nF, S=S: compiled.triangle_pairs(nF, S, 100, 1e-9)),
            )
        )

    print(f"{'case':<48} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, py, cy in cases:
        tp = best(py, args.repeat) * 1e3
        if cy is None:
            print(f"{name:<48} {tp:>10.2f} {'-':>10} {'-':>8}")
            continue
        tc = best(cy, args.repeat) * 1e3
        print(f"{name:<48} {tp:>10.2f} {tc:>10.2f} {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
