#!/usr/bin/env python3
"""Numba vs numpy for the band kernels and for a full min-max optimization.

Both backends are importable in one process (the numpy path is always
defined); the env flag only changes the default. Run with
``python3 benchmarks/bench_kernels.py``.
"""

import time

import numpy as np

from osmaxwell import kernels
from osmaxwell.model import HarmonicRegime, MediumParameters, TimeDiscreteRegime
from osmaxwell.optimize import build_band, minmax_optimize


def best_of(f, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        f()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    if kernels.BACKEND != "numba":
        print("numba unavailable or disabled; only the numpy path can be timed")
        return
    a = 1.0 + 0.0j
    s1, s2 = 3.0 + 0.0j, 20.0 + 0.0j
    # warm-up compiles the kernels (cached on disk after the first run)
    t0 = time.perf_counter()
    kernels.max_rho(5, s1, s2, np.linspace(1, 2, 8), a, 0.0, backend="numba")
    kernels.rho_band(5, s1, s2, np.linspace(1, 2, 8), a, 0.0, backend="numba")
    print(f"JIT warm-up: {time.perf_counter() - t0:.2f}s\n")

    print(f"{'kernel':>10} {'samples':>8} {'numpy (us)':>11} {'numba (us)':>11} {'speedup':>8} {'max |diff|':>11}")
    for n in (1024, 2048, 16384, 131072):
        k = np.geomspace(np.pi, 256 * np.pi, n)
        for name in ("rho_band", "max_rho"):
            fn = getattr(kernels, name)
            t_np = best_of(lambda: fn(5, s1, s2, k, a, 0.0, backend="numpy"))
            t_nb = best_of(lambda: fn(5, s1, s2, k, a, 0.0, backend="numba"))
            diff = np.max(np.abs(np.asarray(fn(5, s1, s2, k, a, 0.0, backend="numpy"))
                                 - np.asarray(fn(5, s1, s2, k, a, 0.0, backend="numba"))))
            print(f"{name:>10} {n:>8} {1e6 * t_np:>11.1f} {1e6 * t_nb:>11.1f} {t_np / t_nb:>7.1f}x {diff:>11.1e}")

    print(f"\n{'optimize':>24} {'numpy (s)':>10} {'numba (s)':>10} {'speedup':>8}")
    med = MediumParameters()
    regimes = [("time-discrete", TimeDiscreteRegime.from_eta_tilde(1.0, med)),
               ("harmonic", HarmonicRegime.from_omega_tilde(2 * np.pi, med))]
    for label, regime in regimes:
        band = build_band(1 / 128, regime, med)
        for case_id in (2, 5):
            t_np = best_of(lambda: minmax_optimize(case_id, band, "none", backend="numpy"), repeat=2)
            t_nb = best_of(lambda: minmax_optimize(case_id, band, "none", backend="numba"), repeat=2)
            print(f"{label + ' case ' + str(case_id):>24} {t_np:>10.3f} {t_nb:>10.3f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
