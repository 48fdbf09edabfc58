"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Covers the two hot loops: the transportation simplex behind every W1 value
and the Jacobi eigensolver behind the spectral gap.  A third row times an
end-to-end curvature profile with each backend swapped in.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from coarse_ricci import _pykernels, kernels

try:
    from coarse_ricci import _ckernels
except ImportError:
    _ckernels = None


def transport_case(n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.random(n) + 0.01
    b = rng.random(n) + 0.01
    a /= a.sum()
    b /= b.sum()
    # planar points: on a line the northwest-corner start is already optimal
    p = rng.random((n, 2))
    return a, b, np.sqrt(((p[:, None] - p[None, :]) ** 2).sum(-1))


def jacobi_case(n, seed=0):
    A = np.random.default_rng(seed).normal(size=(n, n))
    return A + A.T


def profile_case():
    from coarse_ricci.curvature import curvature_profile
    from coarse_ricci.gallery import dyadic_cascade

    g, _ = dyadic_cascade(10)
    return lambda: curvature_profile(g, extrapolate=False)


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the Python backend is available")
    impls = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])

    rows = []
    for n in (10, 30, 60):
        a, b, C = transport_case(n)
        rows.append((f"transport {n}x{n}", {name: best(lambda m=m: m.transport_simplex(a, b, C), args.repeat)
                                           for name, m in impls}))
    for n in (16, 64, 128):
        S = jacobi_case(n)
        rows.append((f"jacobi {n}x{n}", {name: best(lambda m=m: m.jacobi_eigh(S), args.repeat)
                                        for name, m in impls}))
    run = profile_case()
    saved = kernels.transport_simplex
    timings = {}
    for name, m in impls:
        kernels.transport_simplex = m.transport_simplex
        timings[name] = best(run, args.repeat)
    kernels.transport_simplex = saved
    rows.append(("profile dyadic:10", timings))

    print(f"{'case':<22}{'python [ms]':>12}{'cython [ms]':>12}{'speedup':>10}")
    for label, t in rows:
        py = 1e3 * t["python"]
        cy = 1e3 * t["cython"] if "cython" in t else None
        tail = f"{cy:12.3f}{py / cy:9.1f}x" if cy else f"{'-':>12}{'-':>10}"
        print(f"{label:<22}{py:12.3f}{tail}")


if __name__ == "__main__":
    main()
