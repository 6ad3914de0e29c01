"""Timing comparison of the compiled and pure-numpy kernel backends.

Run:  python benchmarks/bench_backends.py

The pure backend is vectorized per lattice shell, so the plain phase sums
(direct lattice sum, spherical field sum, matrix assembly) run near parity;
the compiled backend wins decisively on the error-function-heavy Ewald
real-space kernel, which dominates production lattice-sum evaluations at
real frequency.
"""

from __future__ import annotations

import time

import numpy as np

from dirac_lattice import _kernels_py as kpy

try:
    from dirac_lattice import _kernels as kc
except ImportError:
    kc = None


CASES = [
    (
        "direct J_1 sum, radius 400 (~1.3e6 sites)",
        lambda k: k.j_sum_direct_kernel(1, 0.8 + 0.05j, 0.2, 0.1, 1.0, 400, None),
    ),
    (
        "spherical field sum, radius 400",
        lambda k: k.field_sum_kernel(0.7 + 0.05j, 0.2, 0.1, 1.0, 0.3, 0.4, 1.2, 400, 1e-30),
    ),
    (
        "Ewald real-space kernel (erfc-heavy)",
        lambda k: k.ewald_real_kernel(1.0 + 0j, 0.2, 0.1, 1.0, 0.0796, 0.0, 60, 1e-12),
    ),
    (
        "complex erfc, 2e5 points",
        lambda k: k.erfc_cmplx_array(_ERFC_ARGS),
    ),
    (
        "assemble 900x900 system",
        lambda k: k.assemble_kernel(_CENTERS, 0.7, 0.6 + 0.1j),
    ),
]

_rng = np.random.default_rng(0)
_ERFC_ARGS = _rng.uniform(0, 8, 200_000) + 1j * _rng.uniform(-2, 2, 200_000)
_g = np.arange(-14, 15) * 1.0
_X, _Y = np.meshgrid(_g, _g)
_CENTERS = np.ascontiguousarray(
    np.column_stack([_X.ravel(), _Y.ravel(), np.zeros(_X.size)])
)


def _time(fn, reps=5):
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    backends = [("python", kpy)]
    if kc is not None:
        backends.append(("compiled", kc))
    else:
        print("compiled backend not built; run `python setup.py build_ext --inplace`")
    width = max(len(name) for name, _ in CASES)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{n:>10}" for n, _ in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, case in CASES:
        times = [_time(lambda m=mod: case(m)) for _, mod in backends]
        row = f"{name:<{width}}  " + "  ".join(f"{t * 1e3:9.2f}ms" for t in times)
        if len(times) == 2:
            row += f"  {times[0] / times[1]:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
