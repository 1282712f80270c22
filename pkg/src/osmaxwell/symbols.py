"""Fourier-mode analysis of two-subdomain Schwarz iterations for Maxwell's equations.

Everything is written in terms of the regime shift ``a`` (``i*omega_tilde`` or
``sqrt(eta_tilde)``, see :mod:`osmaxwell.model`), so the time-discrete formulas
are literally the harmonic ones evaluated at a real shift.

Vectorised helpers ending in ``_k`` take an array of tangential moduli ``|k|``
and plain numbers; the :class:`SymbolPoint` wrappers handle a single mode with
its full ``(k_y, k_z)`` structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from osmaxwell.errors import ContractError, PoleError, ResonanceError
from osmaxwell.model import HARMONIC, TIME_DISCRETE, MediumParameters

CASES = (1, 2, 3, 4, 5)
N_PARAMS = {1: 0, 2: 1, 3: 1, 4: 2, 5: 2}
FAMILIES = ("gamma-gamma", "delta-delta", "gamma-delta")


def principal_sqrt(z):
    """Square root with ``Re >= 0`` and ``Im >= 0`` on the cut ``Re == 0``."""
    r = np.sqrt(np.asarray(z, dtype=complex))
    flip = (r.real == 0) & (r.imag < 0)
    r = np.where(flip, -r, r)
    return r[()] if r.ndim == 0 else r


def lambda_k(k, a, sigma_z=0.0):
    """``sqrt(|k|^2 + a^2 + a*sigma*Z)`` on the principal branch."""
    k = np.asarray(k, dtype=float)
    return principal_sqrt(k * k + a * a + a * sigma_z)


@dataclass(frozen=True)
class SymbolPoint:
    """One tangential Fourier mode together with the medium and regime it lives in."""

    k_y: float
    k_z: float
    medium: MediumParameters
    regime: object

    @property
    def k_abs2(self) -> float:
        return self.k_y**2 + self.k_z**2

    @property
    def a(self) -> complex:
        return self.regime.shift(self.medium)

    @property
    def sigma_z(self) -> float:
        return self.medium.sigma * self.medium.impedance

    @property
    def lam(self) -> complex:
        return complex(lambda_k(np.sqrt(self.k_abs2), self.a, self.sigma_z))

    @property
    def kind(self) -> str:
        return self.regime.kind


def lambda_symbol(k_y, k_z, medium: MediumParameters, regime) -> complex:
    return SymbolPoint(k_y, k_z, medium, regime).lam


# --------------------------------------------------------------------------- matrices


@dataclass(frozen=True)
class InterfaceMatrices:
    A1: np.ndarray
    A2: np.ndarray
    M: np.ndarray


def interface_matrices(pt: SymbolPoint) -> InterfaceMatrices:
    ky, kz, lam, a, sz = pt.k_y, pt.k_z, pt.lam, pt.a, pt.sigma_z
    A1 = np.array(
        [
            [-ky * kz, ky**2 + a * a + a * lam + sz * (lam + a)],
            [kz**2 + a * a + a * lam + sz * (lam + a), -ky * kz],
        ],
        dtype=complex,
    )
    A2 = np.array(
        [
            [ky * kz, -(ky**2) - a * a + a * lam + sz * (lam - a)],
            [-(kz**2) - a * a + a * lam + sz * (lam - a), ky * kz],
        ],
        dtype=complex,
    )
    return InterfaceMatrices(A1, A2, tangential_matrix(pt))


def tangential_matrix(pt: SymbolPoint) -> np.ndarray:
    """The matrix ``M`` whose entries are second-order tangential symbols."""
    ky, kz, sl = pt.k_y, pt.k_z, pt.lam * pt.sigma_z
    return np.array(
        [[ky**2 - kz**2 - sl, -2 * ky * kz], [-2 * ky * kz, kz**2 - ky**2 - sl]],
        dtype=complex,
    )


def _solve(A, B):
    if abs(np.linalg.det(A)) < 1e-300:
        raise ResonanceError("singular interface matrix; mode sits on a resonance")
    return np.linalg.solve(A, B)


def classical_double_iteration_matrix(pt: SymbolPoint, L: float) -> np.ndarray:
    """``R = (A1^{-1} A2)^2 exp(-2 lambda L)`` for characteristic transmission."""
    mats = interface_matrices(pt)
    T = _solve(mats.A1, mats.A2)
    return T @ T * np.exp(-2 * pt.lam * L)


def classical_factored_matrix(pt: SymbolPoint, L: float) -> np.ndarray:
    """The same ``R`` written as a multiple of identity plus a conductivity term."""
    lam, a, sz, ky, kz = pt.lam, pt.a, pt.sigma_z, pt.k_y, pt.k_z
    e = np.exp(-2 * lam * L)
    first = ((lam - a) / (lam + a)) ** 2 * np.eye(2)
    coeff = 4 * lam * sz / ((lam + a) ** 2 * (lam + a + sz) ** 2)
    return (first + coeff * np.array([[-(kz**2), ky * kz], [ky * kz, -(ky**2)]])) * e


# --------------------------------------------------------------------------- classical


def rho_classical_k(k, a, sigma_z=0.0, L=0.0):
    lam = lambda_k(k, a, sigma_z)
    return np.abs((lam - a) / (lam + a)) * np.exp(-lam.real * L)


def rho_classical(pt: SymbolPoint, L: float) -> float:
    """Per-iteration convergence factor of characteristic (impedance) transmission.

    At the resonance ``lambda = 0`` of a lossless harmonic problem this
    returns the limiting value 1.
    """
    return float(rho_classical_k(np.sqrt(pt.k_abs2), pt.a, pt.sigma_z, L))


def classical_time_discrete_bound(medium: MediumParameters, regime, L: float) -> float:
    """Supremum over all modes of the time-discrete classical factor.

    Maximises ``(l - r)/(l + r) exp(-l L)`` over ``l >= r`` with ``r =
    sqrt(eta_tilde)``; the maximiser is ``l^2 = r^2 + 2 r / L``.
    """
    if regime.kind != TIME_DISCRETE:
        raise ContractError("bound applies to the time-discrete regime only")
    if L <= 0:
        return 1.0
    r = float(np.sqrt(regime.eta_tilde(medium)))
    q = np.sqrt(L * r * r + 2 * r)
    p = np.sqrt(L) * r
    return float((q - p) / (q + p) * np.exp(-np.sqrt(L) * q))


# --------------------------------------------------------------------------- transparent


def transparent_symbol(pt: SymbolPoint, form: int = 1) -> np.ndarray:
    """Symbol of the exact (non-local) transmission operator, in one of four equal forms."""
    lam, a, sz = pt.lam, pt.a, pt.sigma_z
    M = tangential_matrix(pt)
    if form == 1:
        return M / ((lam + a) * (lam + a + sz))
    if form == 2:
        return (lam - a) / (lam + a) * M / (pt.k_abs2 + lam * sz)
    if form == 3:
        return (lam - a - sz) / (lam + a + sz) * M / (pt.k_abs2 - lam * sz)
    if form == 4:
        return (lam - a) * (lam - a - sz) * np.linalg.inv(M)
    raise ContractError(f"form must be 1..4, got {form}")


# --------------------------------------------------------------------------- general families


def _require_lossless(pt: SymbolPoint):
    if pt.medium.sigma != 0:
        raise ContractError("closed-form optimized factors are stated for sigma = 0 only")


def _family_factor(lam, a, family, c1, c2):
    """Product whose modulus, times ``|exp(-2 lam L)|``, is rho squared."""
    lp, lm = (lam + a) ** 2, (lam - a) ** 2
    if family == "gamma-gamma":
        num = (lam - a) ** 2 * (1 - c1 * lp) * (1 - c2 * lp)
        den = lp * (1 - c1 * lm) * (1 - c2 * lm)
    elif family == "delta-delta":
        num = lp * (c1 - lm) * (c2 - lm)
        den = lm * (c1 - lp) * (c2 - lp)
    elif family == "gamma-delta":
        num = (1 - c1 * lp) * (c2 - lm)
        den = (1 - c1 * lm) * (c2 - lp)
    else:
        raise ContractError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if np.any(np.abs(den) == 0):
        raise PoleError(f"coefficient hits a pole of the {family} convergence factor")
    return num / den


def rho_general(pt: SymbolPoint, L: float, family: str, coeffs) -> float:
    """Convergence factor for second-order symbols ``gamma*M`` and/or ``delta*M^{-1}``."""
    _require_lossless(pt)
    c1, c2 = coeffs
    f = _family_factor(pt.lam, pt.a, family, c1, c2)
    return float(np.sqrt(np.abs(f)) * np.exp(-pt.lam.real * L))


# --------------------------------------------------------------------------- cases 1-5


@dataclass(frozen=True)
class TransmissionSpec:
    """One of the five transmission conditions with its parameters.

    Harmonic parameters are complex, time-discrete ones real. ``overlap`` is
    the physical overlap width ``L``.
    """

    case_id: int
    params: tuple = ()
    overlap: float = 0.0
    regime: str = HARMONIC
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.case_id not in CASES:
            raise ContractError(f"case_id must be 1..5, got {self.case_id}")
        params = tuple(complex(p) for p in self.params)
        if len(params) != N_PARAMS[self.case_id]:
            raise ContractError(
                f"case {self.case_id} takes {N_PARAMS[self.case_id]} parameter(s), got {len(params)}"
            )
        if self.regime not in (HARMONIC, TIME_DISCRETE):
            raise ContractError(f"unknown regime {self.regime!r}")
        if self.regime == TIME_DISCRETE and any(p.imag != 0 for p in params):
            raise ContractError("time-discrete parameters must be real")
        if self.overlap < 0:
            raise ContractError("overlap must be >= 0")
        object.__setattr__(self, "params", params)

    @property
    def side_params(self) -> tuple:
        """Parameter used on the first and on the second subdomain."""
        if self.case_id == 1:
            return (None, None)
        if self.case_id in (2, 3):
            return (self.params[0], self.params[0])
        return self.params

    def with_params(self, params) -> "TransmissionSpec":
        return TransmissionSpec(self.case_id, tuple(params), self.overlap, self.regime)


def rho_case_k(case_id, params, k, a, L=0.0):
    """Vectorised lossless convergence factor of case 1..5 over moduli ``k``."""
    lam = lambda_k(k, a)
    decay = np.exp(-lam.real * L)
    pre = np.abs((lam - a) / (lam + a))
    if case_id == 1:
        return pre * decay
    s1 = params[0]
    s2 = params[1] if case_id in (4, 5) else s1
    d1, d2 = lam + s1, lam + s2
    if np.any(d1 == 0) or np.any(d2 == 0):
        raise PoleError("transmission parameter equals -lambda at a sampled mode")
    r = np.sqrt(np.abs((lam - s1) / d1 * (lam - s2) / d2)) * decay
    return pre * r if case_id in (3, 5) else r


def rho_case(spec: TransmissionSpec, pt: SymbolPoint) -> float:
    if spec.regime != pt.kind:
        raise ContractError(f"spec regime {spec.regime} does not match point regime {pt.kind}")
    if spec.case_id == 1:
        return rho_classical(pt, spec.overlap)
    _require_lossless(pt)
    return float(rho_case_k(spec.case_id, spec.params, np.sqrt(pt.k_abs2), pt.a, spec.overlap))


def case_symbols(spec: TransmissionSpec, pt: SymbolPoint, realization: str = "gamma"):
    """Fourier symbols ``(S1, S2)`` (2x2 matrices) realising a case.

    ``realization="gamma"`` uses ``gamma_l * M`` on both sides; for cases 2
    and 4 ``"gamma-delta"`` uses ``gamma_1 * M`` and ``delta_2 * M^{-1}``
    instead, which avoids the ``1/|k|^2`` in the gamma form.
    """
    a, k2 = pt.a, pt.k_abs2
    M = tangential_matrix(pt)
    s1, s2 = spec.side_params
    if spec.case_id == 1:
        return np.zeros((2, 2), complex), np.zeros((2, 2), complex)
    if spec.case_id in (3, 5):
        return (M / (k2 + 2 * a * a + 2 * a * s1), M / (k2 + 2 * a * a + 2 * a * s2))
    if realization == "gamma":
        return (M * (s1 - a) / ((s1 + a) * k2), M * (s2 - a) / ((s2 + a) * k2))
    if realization == "gamma-delta":
        return (M / (k2 + 2 * a * a + 2 * a * s1), (k2 + 2 * a * a - 2 * a * s2) * np.linalg.inv(M))
    raise ContractError(f"unknown realization {realization!r}")


def double_iteration_matrix(spec, pt, symbols=None) -> np.ndarray:
    """``A1b^{-1} A2b B1b^{-1} B2b exp(-2 lambda L)`` built from interface matrices."""
    mats = interface_matrices(pt)
    S1, S2 = symbols if symbols is not None else case_symbols(spec, pt)
    A1b, A2b = mats.A1 + S1 @ mats.A2, mats.A2 + S1 @ mats.A1
    B1b, B2b = mats.A1 + S2 @ mats.A2, mats.A2 + S2 @ mats.A1
    return _solve(A1b, A2b) @ _solve(B1b, B2b) * np.exp(-2 * pt.lam * spec.overlap)


def rho_from_matrix(R) -> float:
    return float(np.sqrt(np.max(np.abs(np.linalg.eigvals(R)))))


def fourier_propagator(spec, pt, n_iters, rng=None, symbols=None) -> np.ndarray:
    """Iterate the exact coefficient recurrence and return ``||alpha^n|| + ||beta^n||``.

    Entry ``n`` is the norm after ``n`` single (parallel) steps, starting from
    random coefficients. The ratio of entries two apart tends to ``rho^2``.
    """
    rng = np.random.default_rng(rng)
    mats = interface_matrices(pt)
    S1, S2 = symbols if symbols is not None else case_symbols(spec, pt)
    e = np.exp(-pt.lam * spec.overlap)
    TA = _solve(mats.A1 + S1 @ mats.A2, mats.A2 + S1 @ mats.A1) * e
    TB = _solve(mats.A1 + S2 @ mats.A2, mats.A2 + S2 @ mats.A1) * e
    alpha = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    beta = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    norms = [np.linalg.norm(alpha) + np.linalg.norm(beta)]
    for _ in range(n_iters):
        alpha, beta = TA @ beta, TB @ alpha
        norms.append(np.linalg.norm(alpha) + np.linalg.norm(beta))
    return np.array(norms)


# --------------------------------------------------------------------------- first-order ODE


def fourier_ode_matrix(pt: SymbolPoint) -> np.ndarray:
    """Matrix of ``d/dx (E2, E3, H2, H3) + A (E2, E3, H2, H3) = 0`` after the tangential transform."""
    m = pt.medium
    b = pt.regime.rate()
    a, ky, kz = pt.a, pt.k_y, pt.k_z
    be, bm = b * m.epsilon + m.sigma, b * m.mu
    bms = b * m.mu * m.sigma
    return np.array(
        [
            [0, 0, -ky * kz / be, (a * a + ky**2 + bms) / be],
            [0, 0, (-a * a - kz**2 - bms) / be, ky * kz / be],
            [ky * kz / bm, (-a * a - ky**2 - bms) / bm, 0, 0],
            [(a * a + kz**2 + bms) / bm, -ky * kz / bm, 0, 0],
        ],
        dtype=complex,
    )


def fourier_ode_eigenvectors(pt: SymbolPoint) -> np.ndarray:
    """Columns ``v1..v4``; ``v1, v2`` belong to ``-lambda`` and ``v3, v4`` to ``+lambda``."""
    m = pt.medium
    b = pt.regime.rate()
    a, ky, kz, lam = pt.a, pt.k_y, pt.k_z, pt.lam
    d = (b * m.epsilon + m.sigma) * lam
    bms = b * m.mu * m.sigma
    v1 = [ky * kz / d, (a * a + kz**2 + bms) / d, 1, 0]
    v2 = [(-a * a - ky**2 - bms) / d, -ky * kz / d, 0, 1]
    v3 = [-ky * kz / d, (-a * a - kz**2 - bms) / d, 1, 0]
    v4 = [(ky**2 + a * a + bms) / d, ky * kz / d, 0, 1]
    return np.array([v1, v2, v3, v4], dtype=complex).T
