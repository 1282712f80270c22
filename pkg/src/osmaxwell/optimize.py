"""Frequency bands, asymptotic transmission parameters and numeric min-max optimization.

The optimized parameters minimize ``max_{k in K} rho(k)`` over the band of
tangential frequencies the mesh can represent. The asymptotic formulas are
closed forms for small ``h``; :func:`minmax_optimize` solves the same problem
numerically on a sampled band, starting from them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize as sopt

from osmaxwell.errors import ContractError, OptimizationError, ResonanceError
from osmaxwell.kernels import max_rho, rho_band
from osmaxwell.model import HARMONIC, TIME_DISCRETE, MediumParameters
from osmaxwell.symbols import N_PARAMS, TransmissionSpec

log = logging.getLogger(__name__)

ASYMPTOTIC = "asymptotic-formula"
NUMERIC = "numeric-minmax"
UNIT_SQUARE = "unit-square-2D"


@dataclass(frozen=True)
class FrequencyBand:
    """Sampled tangential frequencies ``[k_min, k_minus] U [k_plus, k_max]``.

    In the time-discrete regime there is no resonance and the band is the
    single interval ``[k_min, k_max]`` (``k_minus``/``k_plus`` are ``None``).
    """

    k_min: float
    k_minus: float | None
    k_plus: float | None
    k_max: float
    C: float
    h: float
    kind: str
    shift: complex
    samples: np.ndarray = field(repr=False)
    omega_tilde: float | None = None
    eta_tilde: float | None = None

    def __post_init__(self):
        s = self.samples
        if s.size == 0 or np.any(np.diff(s) < 0):
            raise ContractError("band samples must be nonempty and sorted")
        if self.kind == HARMONIC:
            w = self.omega_tilde
            if not (self.k_min <= self.k_minus < w < self.k_plus <= self.k_max):
                raise ContractError(
                    f"need k_min <= k_minus < omega_tilde < k_plus <= k_max, got "
                    f"{self.k_min}, {self.k_minus}, {w}, {self.k_plus}, {self.k_max}"
                )
        elif not self.k_min <= self.k_max:
            raise ContractError(f"k_min {self.k_min} > k_max {self.k_max}")

    @property
    def C_omega(self) -> float | None:
        if self.kind != HARMONIC:
            return None
        w2 = self.omega_tilde**2
        return min(self.k_plus**2 - w2, w2 - self.k_minus**2)

    @property
    def intervals(self) -> list[tuple[float, float]]:
        if self.kind == HARMONIC:
            return [(self.k_min, self.k_minus), (self.k_plus, self.k_max)]
        return [(self.k_min, self.k_max)]


def _log_samples(lo, hi, n):
    if hi <= lo:
        return np.array([lo])
    return np.geomspace(lo, hi, n)


def _mode_frequencies(geometry, k_cap):
    """Sorted admissible interface frequencies up to ``k_cap``."""
    if geometry == UNIT_SQUARE:
        return math.pi * np.arange(1, int(k_cap / math.pi) + 2)
    _, a, b = geometry
    m = np.arange(1, int(k_cap * a / math.pi) + 2)
    n = np.arange(1, int(k_cap * b / math.pi) + 2)
    return np.unique(math.pi * np.sqrt((m[:, None] / a) ** 2 + (n[None, :] / b) ** 2))


def build_band(
    h,
    regime,
    medium: MediumParameters | None = None,
    geometry=UNIT_SQUARE,
    C=None,
    n_samples=1024,
    on_resonance="bracket",
) -> FrequencyBand:
    """Band of the interface frequencies for mesh size ``h``.

    ``geometry`` is ``"unit-square-2D"`` (``k = m pi``, ``k_max = pi/h``) or
    ``("rectangle", a, b)`` (``k = pi sqrt(m^2/a^2 + n^2/b^2)``, ``k_max =
    sqrt(2) pi/h``). In the harmonic regime ``k_minus``/``k_plus`` are the
    admissible frequencies bracketing ``omega_tilde``; if ``omega_tilde`` is
    itself admissible it is skipped (``on_resonance="bracket"``) or rejected
    (``on_resonance="error"``).
    """
    if not h > 0:
        raise ContractError(f"h must be positive, got {h}")
    if n_samples < 512:
        raise ContractError("use at least 512 samples per sub-interval")
    medium = medium or MediumParameters()
    if geometry == UNIT_SQUARE:
        k_min = math.pi
        C = math.pi if C is None else C
    elif isinstance(geometry, tuple) and len(geometry) == 3 and geometry[0] == "rectangle":
        _, a, b = geometry
        if not (a > 0 and b > 0):
            raise ContractError("rectangle sides must be positive")
        k_min = math.pi * math.sqrt(1 / a**2 + 1 / b**2)
        C = math.sqrt(2) * math.pi if C is None else C
    else:
        raise ContractError(f"unknown geometry {geometry!r}")
    k_max = C / h
    shift = regime.shift(medium)
    if regime.kind == TIME_DISCRETE:
        samples = _log_samples(k_min, k_max, n_samples)
        return FrequencyBand(k_min, None, None, k_max, C, h, TIME_DISCRETE, shift, samples,
                             eta_tilde=regime.eta_tilde(medium))
    w = regime.omega_tilde(medium)
    modes = _mode_frequencies(geometry, max(w, k_min) * 1.5 + 10)
    hit = np.isclose(modes, w, rtol=1e-12, atol=0)
    if hit.any():
        if on_resonance == "error":
            raise ResonanceError(f"omega_tilde={w} coincides with an interface frequency")
        if on_resonance != "bracket":
            raise ContractError(f"on_resonance must be 'bracket' or 'error', got {on_resonance!r}")
        log.info("omega_tilde=%g is an interface frequency; bracketing with its neighbours", w)
    below, above = modes[(modes < w) & ~hit], modes[(modes > w) & ~hit]
    if below.size == 0:
        raise ResonanceError(f"omega_tilde={w} lies below the lowest frequency {k_min}")
    k_minus, k_plus = float(below[-1]), float(above[0])
    if k_plus > k_max:
        raise ContractError(f"mesh too coarse: k_plus={k_plus} exceeds k_max={k_max}")
    samples = np.concatenate([_log_samples(k_min, k_minus, n_samples), _log_samples(k_plus, k_max, n_samples)])
    return FrequencyBand(k_min, k_minus, k_plus, k_max, C, h, HARMONIC, shift, samples, omega_tilde=w)


def _overlap_value(overlap, h):
    if overlap in ("none", 0, 0.0, None):
        return 0.0
    if overlap == "h" or (isinstance(overlap, float) and math.isclose(overlap, h)):
        return h
    raise ContractError(f"overlap must be 'none' or 'h' (= {h}), got {overlap!r}")


def asymptotic_parameters(case_id, band: FrequencyBand, overlap="none") -> TransmissionSpec:
    """Small-``h`` optimal parameters of case ``case_id`` for ``band``.

    Harmonic parameters are ``s = p(1 + i)`` with our ``exp(+i omega t)``
    convention (the conjugate of ``p(1 - i)`` under ``exp(-i omega t)``);
    time-discrete ones are ``s = p`` real.
    """
    L = _overlap_value(overlap, band.h)
    h, C = band.h, band.C
    if case_id == 1:
        return TransmissionSpec(1, (), L, band.kind)
    if case_id not in (2, 3, 4, 5):
        raise ContractError(f"case_id must be 1..5, got {case_id}")
    if band.kind == TIME_DISCRETE:
        e = band.eta_tilde
        if L > 0:
            p = {
                2: (2 ** (-1 / 3) * e ** (1 / 3) / h ** (1 / 3),),
                3: (math.sqrt(2) * e**0.25 / math.sqrt(h),),
                4: (e**0.2 / (2**0.4 * h**0.6), e**0.4 / (16**0.2 * h**0.2)),
                5: (2 ** (2 / 3) * e ** (1 / 3) / h ** (1 / 3), 2 ** (1 / 3) * e ** (1 / 6) / h ** (2 / 3)),
            }[case_id]
        else:
            p = {
                2: (math.sqrt(C) * e**0.25 / math.sqrt(h),),
                3: (2 ** (2 / 3) * C ** (2 / 3) * e ** (1 / 6) / h ** (2 / 3),),
                4: (math.sqrt(2) * C**0.75 * e**0.125 / h**0.75, C**0.25 * e**0.375 / (math.sqrt(2) * h**0.25)),
                5: (2 * C**0.8 * e**0.1 / h**0.8, 2 * C**0.4 * e**0.3 / h**0.4),
            }[case_id]
        return TransmissionSpec(case_id, p, L, TIME_DISCRETE)
    # cases 3 and 5 only see the upper side of the resonance gap
    Cw = band.C_omega if case_id in (2, 4) else band.k_plus**2 - band.omega_tilde**2
    if case_id in (2, 3):
        p = (Cw ** (1 / 3) / (2 * h ** (1 / 3)),) if L > 0 else (math.sqrt(C) * Cw**0.25 / math.sqrt(2 * h),)
    elif L > 0:
        p = (Cw**0.4 / (2**1.4 * h**0.2), Cw**0.2 / (2**1.2 * h**0.6))
    else:
        p = (Cw**0.375 * C**0.25 / (2 * h**0.25), Cw**0.125 * C**0.75 / h**0.75)
    return TransmissionSpec(case_id, tuple(q * (1 + 1j) for q in p), L, HARMONIC)


def asymptotic_rho(case_id, band: FrequencyBand, overlap="none") -> float:
    """Leading-order ``max rho`` predicted for the asymptotic parameters."""
    L = _overlap_value(overlap, band.h)
    h, C = band.h, band.C
    if band.kind == TIME_DISCRETE:
        e = band.eta_tilde
        if L > 0:
            d = {1: 2**1.5 * e**0.25 * h**0.5, 2: 2 ** (13 / 6) * e ** (1 / 6) * h ** (1 / 3),
                 3: 2**1.75 * e**0.125 * h**0.25, 4: 2**0.8 * e**0.1 * h**0.2,
                 5: 2 ** (7 / 6) * e ** (1 / 12) * h ** (1 / 6)}[case_id]
        else:
            d = {1: 2 * math.sqrt(e) * h / C, 2: 4 * e**0.25 * math.sqrt(h / C),
                 3: 2 ** (5 / 3) * e ** (1 / 6) * (h / C) ** (1 / 3), 4: math.sqrt(2) * e**0.125 * (h / C) ** 0.25,
                 5: 2 * e**0.1 * (h / C) ** 0.2}[case_id]
        return 1 - d
    Cw = band.C_omega if case_id in (2, 4) else band.k_plus**2 - band.omega_tilde**2
    if case_id == 1:
        return 1 - math.sqrt(Cw) * h if L > 0 else 1.0
    if L > 0:
        d = 2 * Cw ** (1 / 6) * h ** (1 / 3) if case_id in (2, 3) else 2**0.4 * Cw**0.1 * h**0.2
    else:
        d = math.sqrt(2) * Cw**0.25 * math.sqrt(h / C) if case_id in (2, 3) else Cw**0.125 * (h / C) ** 0.25
    return 1 - d


@dataclass(frozen=True)
class OptimizationResult:
    spec: TransmissionSpec
    achieved_max_rho: float
    equioscillation_points: tuple
    strategy: str
    evaluations: int = 0


def band_max_rho(spec: TransmissionSpec, band: FrequencyBand, backend=None) -> float:
    s1, s2 = spec.side_params
    s1 = 0j if s1 is None else s1
    s2 = s1 if s2 is None else s2
    return max_rho(spec.case_id, s1, s2, band.samples, band.shift, spec.overlap, backend)


def equioscillation_points(spec: TransmissionSpec, band: FrequencyBand, rtol=1e-4, backend=None):
    """Band samples that are local maxima of ``rho`` within ``rtol`` of the global max."""
    s1, s2 = spec.side_params
    s1 = 0j if s1 is None else s1
    s2 = s1 if s2 is None else s2
    r = rho_band(spec.case_id, s1, s2, band.samples, band.shift, spec.overlap, backend)
    top = r.max()
    pad = np.concatenate([[-np.inf], r, [-np.inf]])
    local = (pad[1:-1] >= pad[:-2]) & (pad[1:-1] >= pad[2:])
    idx = np.flatnonzero(local & (r >= top * (1 - rtol)))
    return tuple(float(band.samples[i]) for i in idx)


def _encode(spec: TransmissionSpec):
    """Log-coordinates of the parameters (real and imaginary parts if complex)."""
    x = []
    for p in spec.params:
        x.append(math.log(p.real))
        if spec.regime == HARMONIC:
            x.append(math.log(p.imag))
    return np.array(x)


def _decode(x, spec: TransmissionSpec):
    if spec.regime == HARMONIC:
        return tuple(complex(math.exp(x[2 * i]), math.exp(x[2 * i + 1])) for i in range(len(x) // 2))
    return tuple(math.exp(v) for v in x)


def _golden(f, x, i, width, tol):
    """Minimize ``f`` along coordinate ``i`` on ``[x_i - width, x_i + width]``."""

    def g(t):
        y = x.copy()
        y[i] = t
        return f(y)

    res = sopt.minimize_scalar(g, bounds=(x[i] - width, x[i] + width), method="bounded",
                               options={"xatol": tol})
    y = x.copy()
    y[i] = res.x
    return y, res.fun


def minmax_optimize(
    case_id,
    band: FrequencyBand,
    overlap="none",
    start: TransmissionSpec | None = None,
    max_sweeps=60,
    tol=1e-12,
    backend=None,
    raise_on_budget=False,
) -> OptimizationResult:
    """Numeric ``min_s max_{k in band} rho``.

    Coordinate descent in log-parameters with a bounded Brent/golden search
    per coordinate, started at the asymptotic formula (and at half and twice
    that point), then a Nelder-Mead polish. The result is never worse than
    the starting point on the same samples.
    """
    if case_id not in (2, 3, 4, 5):
        raise ContractError(f"numeric optimization needs case 2..5, got {case_id}")
    start = start or asymptotic_parameters(case_id, band, overlap)
    if N_PARAMS[start.case_id] != N_PARAMS[case_id]:
        raise ContractError("start spec has the wrong number of parameters")
    n_eval = 0

    def f(x):
        nonlocal n_eval
        n_eval += 1
        try:
            v = band_max_rho(start.with_params(_decode(x, start)), band, backend)
        except (ArithmeticError, ValueError, OverflowError):
            return np.inf
        return v if np.isfinite(v) else np.inf

    x0 = _encode(start)
    best_x, best_f = x0, f(x0)
    exhausted = True
    for shift in (0.0, -math.log(2), math.log(2)):
        x = x0 + shift
        fx = f(x)
        for _ in range(max_sweeps):
            prev = fx
            for i in range(len(x)):
                x, fx = _golden(f, x, i, 1.5, 1e-10)
            if prev - fx <= tol * max(1.0, abs(prev)):
                exhausted = False
                break
        if len(x) > 1:
            res = sopt.minimize(f, x, method="Nelder-Mead",
                                options={"xatol": 1e-11, "fatol": 1e-14, "maxiter": 4000})
            if res.fun < fx:
                x, fx = res.x, res.fun
        if fx < best_f:
            best_x, best_f = x, fx
    spec = start.with_params(_decode(best_x, start))
    if exhausted and raise_on_budget:
        raise OptimizationError(f"min-max search used all {max_sweeps} sweeps", best=spec)
    return OptimizationResult(spec, float(best_f), equioscillation_points(spec, band, backend=backend), NUMERIC, n_eval)


def asymptotic_result(case_id, band: FrequencyBand, overlap="none", backend=None) -> OptimizationResult:
    spec = asymptotic_parameters(case_id, band, overlap)
    return OptimizationResult(spec, band_max_rho(spec, band, backend),
                              equioscillation_points(spec, band, backend=backend), ASYMPTOTIC)


def fit_loglog(x, y):
    """Least-squares slope and intercept of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(slope), float(intercept), float(res[0]) if res.size else 0.0


def scaling_audit(case_id, regime, overlap, h_list, medium=None, strategy=ASYMPTOTIC, geometry=UNIT_SQUARE):
    """Fit ``log(1 - max rho)`` against ``log h``; returns ``(slope, intercept)``."""
    h_list = sorted(h_list, reverse=True)
    if len(h_list) < 4:
        raise ContractError("scaling audit needs at least 4 mesh sizes")
    gaps = []
    for h in h_list:
        band = build_band(h, regime, medium, geometry)
        if strategy == NUMERIC and case_id != 1:
            r = minmax_optimize(case_id, band, overlap).achieved_max_rho
        else:
            r = band_max_rho(asymptotic_parameters(case_id, band, overlap), band)
        gaps.append(1.0 - r)
    slope, intercept, _ = fit_loglog(h_list, gaps)
    return slope, intercept
