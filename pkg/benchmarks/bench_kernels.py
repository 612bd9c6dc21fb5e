"""Compare the compiled and pure-Python modular kernels.

    python benchmarks/bench_kernels.py [--sizes 8 16 32] [--p 5] [--repeat 5]

Also times one end-to-end oracle run under each backend, since that is the
workload the kernels exist for.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from springerfib import _kernels_py

try:
    from springerfib import _ckernels
except ImportError:
    _ckernels = None


def _random_rows(rng, n, m, p):
    return [[rng.randrange(p) for _ in range(m)] for _ in range(n)]


def bench_kernel(name, sizes, p, repeat):
    rng = random.Random(0)
    print(f"{name}  (p = {p}, best of {repeat})")
    print(f"{'size':>6} {'python ms':>12} {'cython ms':>12} {'speedup':>9}")
    for n in sizes:
        a = _random_rows(rng, n, n, p)
        b = _random_rows(rng, n, n, p)
        if name == "rref_modp":
            calls = {mod: (lambda mod=mod: mod.rref_modp([r[:] for r in a], n, p)) for mod in (_kernels_py, _ckernels) if mod}
        else:
            calls = {mod: (lambda mod=mod: mod.matmul_modp(a, b, n, p)) for mod in (_kernels_py, _ckernels) if mod}
        number = max(1, 2000 // (n * n))
        times = {mod: min(timeit.repeat(f, number=number, repeat=repeat)) / number * 1e3 for mod, f in calls.items()}
        py = times[_kernels_py]
        if _ckernels is not None:
            cy = times[_ckernels]
            print(f"{n:>6} {py:>12.3f} {cy:>12.3f} {py / cy:>8.1f}x")
        else:
            print(f"{n:>6} {py:>12.3f} {'n/a':>12} {'':>9}")


_ORACLE = (
    "import time; from springerfib.oracle import EnumerationTask, decompose; "
    "t = time.perf_counter(); decompose(EnumerationTask((5, 5), 3, True)); "
    "print(time.perf_counter() - t)"
)


def bench_oracle():
    print("oracle: type D (5,5) over F_3")
    for label, env in (("python", {"SPRINGERFIB_PURE_PYTHON": "1"}), ("cython", {})):
        full = dict(os.environ)
        full.pop("SPRINGERFIB_PURE_PYTHON", None)
        full.update(env)
        out = subprocess.run([sys.executable, "-c", _ORACLE], env=full, capture_output=True, text=True, check=True)
        print(f"  {label:>6}: {float(out.stdout):.2f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-oracle", action="store_true")
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels are not built; only the fallback is timed")
    bench_kernel("rref_modp", args.sizes, args.p, args.repeat)
    print()
    bench_kernel("matmul_modp", args.sizes, args.p, args.repeat)
    if not args.skip_oracle:
        print()
        bench_oracle()


if __name__ == "__main__":
    main()
