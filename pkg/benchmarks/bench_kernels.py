"""Time the compiled kernels against the NumPy fallback.

Run from the repository root after building the extension:

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from bochnerlab import _pykernels

try:
    from bochnerlab import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    w = rng.normal(size=(18, 6))
    yield "sign_pattern_norms m=18 d=6 l2", "sign_pattern_norms", (w, 1)
    v, mu = rng.normal(size=(12, 16)), rng.random(12)
    yield "dual_vertex_values m=12 d=16", "dual_vertex_values", (v, mu)
    x = rng.normal(size=(256, 4))
    wt = np.full(256, 1 / 256)
    cell = np.arange(256) % 12
    masks = np.arange(1 << 12, dtype=np.uint64)
    yield "bocce_osc_masks n=256 sets=4096", "bocce_osc_masks", \
        (x, wt, cell, masks, 1)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'case':40} {'numpy s':>10} {'cython s':>10} {'speedup':>8}")
    for label, fn, inputs in cases(rng):
        py = getattr(_pykernels, fn)
        t_py = min(timeit.repeat(lambda: py(*inputs), number=1,
                                 repeat=args.repeat))
        if _ckernels is None:
            print(f"{label:40} {t_py:10.4f} {'n/a':>10} {'n/a':>8}")
            continue
        c = getattr(_ckernels, fn)
        if not np.allclose(c(*inputs), py(*inputs), rtol=1e-10, atol=1e-10):
            raise SystemExit(f"{label}: backends disagree")
        t_c = min(timeit.repeat(lambda: c(*inputs), number=1,
                                repeat=args.repeat))
        print(f"{label:40} {t_py:10.4f} {t_c:10.4f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
