"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 1000 100000] [--repeat 5]

Kernel timings call both modules directly.  The end-to-end row times a batch
of oracle pairings in a subprocess, once per backend, selected through
POINTDIST_PURE_PYTHON.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from pointdist import _kernels_py

try:
    from pointdist import _kernels
except ImportError:
    _kernels = None

END_TO_END = """
import time
from pointdist import KERNEL_BACKEND
from pointdist.field_algebra import SingularField, SmoothTerm
from pointdist.quadrature import pair
from pointdist.testfn import probe_function
phi = probe_function(0.5, degree=8)
F = SingularField("scalar", [SmoothTerm(1, k, p, n, "cos") for k in range(-4, 3) for p in (0, 1) for n in (0, 2)])
t = time.perf_counter()
for lam in (1.0, 0.5, 0.25):
    pair(F, phi.rescale(lam))
print(KERNEL_BACKEND, time.perf_counter() - t)
"""


def inputs(n, rng):
    r = rng.uniform(1e-3, 1.0, n)
    theta = rng.uniform(0, 2 * np.pi, n)
    terms = 12
    ks = rng.integers(-3, 4, terms).astype(np.int64)
    ps = rng.integers(0, 3, terms).astype(np.int64)
    ns = rng.integers(0, 5, terms).astype(np.int64)
    ss = (rng.integers(0, 2, terms) * (ns > 0)).astype(np.int64)
    cs = rng.normal(size=terms)
    a = rng.integers(0, 6, terms).astype(np.int64)
    b = rng.integers(0, 6, terms).astype(np.int64)
    w = rng.uniform(size=n)
    idx = np.sort(rng.integers(0, 32, n)).astype(np.int64)
    return {
        "eval_terms": (ks, ps, ns, ss, cs, r, theta),
        "eval_poly": (a, b, cs, r * np.cos(theta), r * np.sin(theta)),
        "radial_panel_sums": (-2, 1, r, w, theta, idx, 32),
    }


def best_time(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def end_to_end(pure: bool) -> str:
    env = dict(os.environ, POINTDIST_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
    backend, seconds = out.stdout.split()
    return backend, float(seconds)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[1_000, 100_000])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<20}{'n':>9}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for n in args.sizes:
        for name, call_args in inputs(n, rng).items():
            ref = getattr(_kernels_py, name)(*call_args)
            fast = getattr(_kernels, name)(*call_args)
            np.testing.assert_allclose(fast, ref, rtol=1e-12, atol=1e-12 * np.max(np.abs(ref)))
            tp = best_time(getattr(_kernels_py, name), call_args, args.repeat)
            tc = best_time(getattr(_kernels, name), call_args, args.repeat)
            print(f"{name:<20}{n:>9}{tp * 1e3:>14.3f}{tc * 1e3:>14.3f}{tp / tc:>10.2f}")
    if not args.skip_end_to_end:
        for pure in (True, False):
            backend, seconds = end_to_end(pure)
            print(f"end-to-end pairings ({backend}): {seconds:.3f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
