"""Hot loops of the parameter optimizer: convergence factor over a sampled band.

Two implementations share one signature. The numba kernels run by default;
set ``OSMAXWELL_DISABLE_NUMBA=1`` (or uninstall numba) to use the vectorised
numpy path instead. ``BACKEND`` tells which one is active.
"""

from __future__ import annotations

import os

import numpy as np

from osmaxwell.symbols import rho_case_k


def _rho_band_numpy(case_id, s1, s2, k, a, L):
    params = () if case_id == 1 else ((s1,) if case_id in (2, 3) else (s1, s2))
    return rho_case_k(case_id, params, k, a, L)


def _max_rho_numpy(case_id, s1, s2, k, a, L):
    return float(np.max(_rho_band_numpy(case_id, s1, s2, k, a, L)))


_DISABLED = os.environ.get("OSMAXWELL_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError("numba disabled by environment")
    import cmath
    import math

    from numba import njit

    @njit(cache=True)
    def _rho_one(case_id, s1, s2, kk, a, L):
        z = complex(kk * kk) + a * a
        lam = cmath.sqrt(z)
        if lam.real == 0.0 and lam.imag < 0.0:
            lam = -lam
        decay = math.exp(-lam.real * L)
        pre = abs((lam - a) / (lam + a))
        if case_id == 1:
            return pre * decay
        if case_id == 2 or case_id == 3:
            s2 = s1
        r = math.sqrt(abs((lam - s1) / (lam + s1) * (lam - s2) / (lam + s2))) * decay
        if case_id == 3 or case_id == 5:
            r *= pre
        return r

    @njit(cache=True)
    def _rho_band_numba(case_id, s1, s2, k, a, L):
        out = np.empty(k.shape[0])
        for i in range(k.shape[0]):
            out[i] = _rho_one(case_id, s1, s2, k[i], a, L)
        return out

    @njit(cache=True)
    def _max_rho_numba(case_id, s1, s2, k, a, L):
        best = 0.0
        for i in range(k.shape[0]):
            r = _rho_one(case_id, s1, s2, k[i], a, L)
            if r > best or r != r:
                best = r
        return best

    BACKEND = "numba"
except ImportError:
    BACKEND = "numpy"


def rho_band(case_id, s1, s2, k, a, L, backend=None):
    """Convergence factor of a case at every sample of ``k``."""
    backend = backend or BACKEND
    k = np.ascontiguousarray(k, dtype=float)
    if backend == "numba":
        return _rho_band_numba(int(case_id), complex(s1), complex(s2), k, complex(a), float(L))
    return _rho_band_numpy(case_id, complex(s1), complex(s2), k, complex(a), float(L))


def max_rho(case_id, s1, s2, k, a, L, backend=None):
    """``max_k rho`` without materialising the band (numba) or vectorised (numpy)."""
    backend = backend or BACKEND
    k = np.ascontiguousarray(k, dtype=float)
    if backend == "numba":
        return float(_max_rho_numba(int(case_id), complex(s1), complex(s2), k, complex(a), float(L)))
    return _max_rho_numpy(case_id, complex(s1), complex(s2), k, complex(a), float(L))
