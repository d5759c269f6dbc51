"""Numba kernels against the numpy fallback, and the composition strategies.

    python3 benchmarks/bench_kernels.py [--sizes 128 256 512 1024] [--p 2] [--n 2]

Prints one line per (operation, N) with the best of three timings and the
numpy/numba ratio.  Results of the two backends are compared for equality.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from fglab import _kernels as K
from fglab.gf import FieldSpec
from fglab.lab.rng import SplitMix64
from fglab.lift import honda_law
from fglab.pseries import TruncSeries, b_substitute, biv_to_field, compose_arrays


def _best(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _series(rng, spec, N):
    data = np.zeros((spec.n, N + 1), dtype=np.int64)
    for d in range(1, N + 1):
        data[:, d] = rng.element(spec, nonzero=d == 1).coords
    return TruncSeries(spec, N, data)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512, 1024])
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    spec = FieldSpec(a.p, a.n)
    rng = SplitMix64(a.seed)
    backends = ["numba", "numpy"] if K.HAVE_NUMBA else ["numpy"]
    print(f"field F_{a.p}^{a.n}, backends {backends}")
    for N in a.sizes:
        f, g = _series(rng, spec, N), _series(rng, spec, N)
        B = biv_to_field(honda_law(a.p, 2, min(N, 256)), spec)
        fb, gb = f.truncate(B.N), g.truncate(B.N)
        ops = {
            "mul1": lambda: K.mul1(f.data, g.data, N, a.p, spec.reduction),
            "compose": lambda: compose_arrays(spec, f.data, g.data, N, "frobenius"),
            f"b_substitute(N={B.N})": lambda: b_substitute(B, fb, gb).data,
        }
        for name, fn in ops.items():
            times, outs = {}, {}
            for be in backends:
                prev = K.use_backend(be)
                try:
                    fn()  # warm-up and jit
                    times[be], outs[be] = _best(fn)
                finally:
                    K.use_backend(prev)
            same = all(np.array_equal(outs[backends[0]], o) for o in outs.values())
            ratio = times["numpy"] / times["numba"] if "numba" in times else float("nan")
            cols = "  ".join(f"{be}={times[be] * 1e3:9.2f}ms" for be in backends)
            print(f"{name:24s} N={N:5d}  {cols}  numpy/numba={ratio:6.1f}  equal={same}")
        strat = {}
        for s in ("horner", "blocked", "frobenius"):
            compose_arrays(spec, f.data, g.data, 16, s)
            strat[s], _ = _best(lambda s=s: compose_arrays(spec, f.data, g.data, N, s), repeat=1)
        print(f"{'compose strategies':24s} N={N:5d}  "
              + "  ".join(f"{k}={v * 1e3:9.2f}ms" for k, v in strat.items()))


if __name__ == "__main__":
    main()
