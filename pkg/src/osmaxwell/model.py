"""Physical parameters, regimes and characteristic variables of the Maxwell system.

The two regimes share every formula through a single complex number, the
*shift* ``a``: ``a = i*omega*sqrt(eps*mu)`` for time-harmonic fields and
``a = sqrt(eta*eps*mu)`` with ``sqrt(eta) = 2/dt`` for one implicit
(Crank-Nicolson) time step. The per-unit-length rate ``b = a/sqrt(eps*mu)``
(``i*omega`` or ``sqrt(eta)``) multiplies the field terms of the PDE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from osmaxwell.errors import ContractError

HARMONIC = "harmonic"
TIME_DISCRETE = "time-discrete"


@dataclass(frozen=True)
class MediumParameters:
    """Constant coefficients ``epsilon``, ``mu`` (> 0) and ``sigma`` (>= 0)."""

    epsilon: float = 1.0
    mu: float = 1.0
    sigma: float = 0.0

    def __post_init__(self):
        if not (self.epsilon > 0 and self.mu > 0):
            raise ContractError(f"epsilon and mu must be positive, got {self.epsilon}, {self.mu}")
        if not self.sigma >= 0:
            raise ContractError(f"sigma must be non-negative, got {self.sigma}")

    @property
    def impedance(self) -> float:
        return math.sqrt(self.mu / self.epsilon)

    Z = impedance

    @property
    def wave_speed(self) -> float:
        return 1.0 / math.sqrt(self.epsilon * self.mu)

    c = wave_speed

    @property
    def sqrt_eps_mu(self) -> float:
        return math.sqrt(self.epsilon * self.mu)


@dataclass(frozen=True)
class HarmonicRegime:
    """Time-harmonic fields ``Re(E exp(i omega t))``."""

    omega: float

    kind = HARMONIC

    def __post_init__(self):
        if not self.omega > 0:
            raise ContractError(f"omega must be positive, got {self.omega}")

    @classmethod
    def from_omega_tilde(cls, omega_tilde: float, medium: MediumParameters) -> "HarmonicRegime":
        return cls(omega_tilde / medium.sqrt_eps_mu)

    def omega_tilde(self, medium: MediumParameters) -> float:
        return self.omega * medium.sqrt_eps_mu

    def rate(self) -> complex:
        return 1j * self.omega

    def shift(self, medium: MediumParameters) -> complex:
        return 1j * self.omega_tilde(medium)


@dataclass(frozen=True)
class TimeDiscreteRegime:
    """One Crank-Nicolson step of size ``delta_t``; ``sqrt_eta = 2/delta_t``."""

    delta_t: float

    kind = TIME_DISCRETE

    def __post_init__(self):
        if not self.delta_t > 0:
            raise ContractError(f"delta_t must be positive, got {self.delta_t}")

    @classmethod
    def from_eta_tilde(cls, eta_tilde: float, medium: MediumParameters) -> "TimeDiscreteRegime":
        sqrt_eta = math.sqrt(eta_tilde / (medium.epsilon * medium.mu))
        return cls(2.0 / sqrt_eta)

    @property
    def sqrt_eta(self) -> float:
        return 2.0 / self.delta_t

    @property
    def eta(self) -> float:
        return self.sqrt_eta**2

    def eta_tilde(self, medium: MediumParameters) -> float:
        return self.eta * medium.epsilon * medium.mu

    def rate(self) -> complex:
        return complex(self.sqrt_eta)

    def shift(self, medium: MediumParameters) -> complex:
        return complex(self.sqrt_eta * medium.sqrt_eps_mu)


Regime = HarmonicRegime | TimeDiscreteRegime


# Blocks N_x, N_y, N_z of the first-order system.
N_BLOCKS = (
    np.array([[0, 0, 0], [0, 0, 1], [0, -1, 0]], dtype=float),
    np.array([[0, 0, -1], [0, 0, 0], [1, 0, 0]], dtype=float),
    np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 0]], dtype=float),
)


def characteristic_matrix(n, medium: MediumParameters) -> np.ndarray:
    """Return the 6x6 matrix ``C(n) = G0^{-1} sum_l n_l [[0, N_l], [-N_l, 0]]``."""
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ContractError(f"n must be a unit 3-vector, got {n!r}")
    block = sum(nl * nb for nl, nb in zip(n, N_BLOCKS))
    C = np.zeros((6, 6))
    C[:3, 3:] = block / medium.epsilon
    C[3:, :3] = -block / medium.mu
    return C


def eigenvector_matrix(medium: MediumParameters) -> np.ndarray:
    """Eigenvectors of ``C((1,0,0))`` as columns, ordered (-c, -c, 0, 0, c, c)."""
    Z = medium.impedance
    return np.array(
        [
            [0, 0, 0, 1, 0, 0],
            [-Z, 0, 0, 0, Z, 0],
            [0, Z, 0, 0, 0, -Z],
            [0, 0, 1, 0, 0, 0],
            [0, 1, 0, 0, 0, 1],
            [1, 0, 0, 0, 1, 0],
        ],
        dtype=float,
    )


@dataclass(frozen=True)
class CharacteristicDecomposition:
    """Characteristic variables for the normal ``(1, 0, 0)``.

    ``w_minus`` travels with speed ``-c`` (incoming on a boundary with outward
    normal +x), ``w_zero`` is stationary and ``w_plus`` travels with ``+c``.
    """

    w_minus: tuple[complex, complex]
    w_zero: tuple[complex, complex]
    w_plus: tuple[complex, complex]

    def as_vector(self) -> np.ndarray:
        return np.array([*self.w_minus, *self.w_zero, *self.w_plus], dtype=complex)

    def reconstruct(self, medium: MediumParameters) -> tuple[np.ndarray, np.ndarray]:
        u = eigenvector_matrix(medium) @ self.as_vector()
        return u[:3], u[3:]


def characteristic_variables(E, H, medium: MediumParameters) -> CharacteristicDecomposition:
    E1, E2, E3 = np.asarray(E, dtype=complex)
    H1, H2, H3 = np.asarray(H, dtype=complex)
    Z = medium.impedance
    w1 = -0.5 * (E2 / Z - H3)
    w2 = 0.5 * (E3 / Z + H2)
    w5 = 0.5 * (E2 / Z + H3)
    w6 = -0.5 * (E3 / Z - H2)
    return CharacteristicDecomposition((w1, w2), (H1, E1), (w5, w6))
