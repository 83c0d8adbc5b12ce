"""Compiled vs numpy kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from epsuppress import _pycore
from epsuppress.operators import PauliString

try:
    from epsuppress import _core
except ImportError:
    _core = None


def cases():
    for n in (4, 8, 10):
        p = PauliString("XYZ" * (n // 3) + "Y" * (n % 3))
        x, z, ny = p.masks()
        yield f"pauli_dense n={n}", "pauli_dense", (n, x, z, ny, 1.0)
    for order in (16, 256):
        x = np.ascontiguousarray(np.linspace(1e-4, 500.0, 30 * order))
        w = np.full_like(x, x[1] - x[0])
        yield f"pv_paired_sum {x.size} nodes", "pv_paired_sum", (1.3, x, w, 1.0, 1.0, 1, 10.0)


def best(fn, args, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-7)))
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':<28}{'numpy [us]':>14}{'cython [us]':>14}{'speedup':>10}")
    for label, name, a in cases():
        t_py = best(getattr(_pycore, name), a, args.repeat)
        if _core is None:
            print(f"{label:<28}{t_py * 1e6:14.2f}{'n/a':>14}{'':>10}")
            continue
        t_c = best(getattr(_core, name), a, args.repeat)
        print(f"{label:<28}{t_py * 1e6:14.2f}{t_c * 1e6:14.2f}{t_py / t_c:10.1f}")


if __name__ == "__main__":
    main()
