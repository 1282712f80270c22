"""Staggered finite-volume discretization of the 2D transverse-electric system.

Unknowns on the unit square with ``N`` cells per side and ``h = 1/N``:

* ``H3`` at the grid nodes ``(ih, jh)``, ``0 <= i, j <= N``;
* ``E1`` at vertical-edge midpoints ``(ih, (j+1/2)h)``;
* ``E2`` at horizontal-edge midpoints ``((i+1/2)h, jh)``.

The equations are ``-b eps E + curl H - sigma E = J`` and ``b mu H + curl E = g``
with ``b = i*omega`` (harmonic) or ``b = sqrt(eta)`` (one time step). The
magnetic balance is taken over the dual cell of each node, which is cut to a
half (or quarter) cell on the boundary; away from the boundary this is the
Yee scheme. The tangential field on a vertical side (``E2`` on ``x = const``)
does not live on the grid, so every strip carries one auxiliary unknown per
node of each vertical side: the boundary value of ``E2`` entering the
half-cell flux. Walls and interfaces are rows for these auxiliaries, e.g.
``H3 - n_x E2/Z = 0`` (first-order absorbing wall) or a transmission
condition. On horizontal walls the tangential ``E1`` is eliminated directly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from osmaxwell.errors import ContractError
from osmaxwell.model import HARMONIC, MediumParameters
from osmaxwell.symbols import TransmissionSpec

log = logging.getLogger(__name__)

WALL_CONDITIONS = ("pec", "impedance")
LEFT, RIGHT = 0, 1


@dataclass(frozen=True)
class StaggeredGrid2D:
    """Index maps for the strip of node lines ``i0 <= i <= i1`` of an ``N x N`` grid.

    Local ordering: H3 ``[(i-i0)*(N+1) + j]``, then E1 (``N`` per node line),
    then E2 (``N+1`` per cell column), then the left and right auxiliaries.
    """

    N: int
    i0: int = 0
    i1: int | None = None

    def __post_init__(self):
        if self.i1 is None:
            object.__setattr__(self, "i1", self.N)
        if not (0 <= self.i0 < self.i1 <= self.N):
            raise ContractError(f"bad node range [{self.i0}, {self.i1}] for N={self.N}")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def nx(self) -> int:
        return self.i1 - self.i0

    @property
    def n_h3(self) -> int:
        return (self.nx + 1) * (self.N + 1)

    @property
    def n_e1(self) -> int:
        return (self.nx + 1) * self.N

    @property
    def n_e2(self) -> int:
        return self.nx * (self.N + 1)

    @property
    def n_field(self) -> int:
        return self.n_h3 + self.n_e1 + self.n_e2

    @property
    def size(self) -> int:
        return self.n_field + 2 * (self.N + 1)

    def h3(self, i, j):
        return (np.asarray(i) - self.i0) * (self.N + 1) + np.asarray(j)

    def e1(self, i, j):
        return self.n_h3 + (np.asarray(i) - self.i0) * self.N + np.asarray(j)

    def e2(self, i, j):
        return self.n_h3 + self.n_e1 + (np.asarray(i) - self.i0) * (self.N + 1) + np.asarray(j)

    def aux(self, side, j):
        return self.n_field + side * (self.N + 1) + np.asarray(j)

    def to_global(self) -> np.ndarray:
        """Position of every local field unknown in the numbering of the full grid."""
        g = StaggeredGrid2D(self.N)
        N = self.N
        ni = np.arange(self.i0, self.i1 + 1)[:, None]
        ci = np.arange(self.i0, self.i1)[:, None]
        h3 = g.h3(ni, np.arange(N + 1)[None, :]).ravel()
        e1 = g.e1(ni, np.arange(N)[None, :]).ravel()
        e2 = g.e2(ci, np.arange(N + 1)[None, :]).ravel()
        return np.concatenate([h3, e1, e2])

    def split(self, u):
        """Return ``(H3, E1, E2, aux)`` as 2D arrays indexed by local position."""
        u = np.asarray(u)
        N, a, b, c = self.N, self.n_h3, self.n_h3 + self.n_e1, self.n_field
        return (
            u[:a].reshape(self.nx + 1, N + 1),
            u[a:b].reshape(self.nx + 1, N),
            u[b:c].reshape(self.nx, N + 1),
            u[c:].reshape(2, N + 1),
        )


@dataclass
class Sources:
    """Volume data on the full grid: ``J1 (N+1, N)``, ``J2 (N, N+1)``, ``g (N+1, N+1)``."""

    J1: np.ndarray
    J2: np.ndarray
    g: np.ndarray

    @classmethod
    def zeros(cls, N, dtype=float):
        return cls(np.zeros((N + 1, N), dtype), np.zeros((N, N + 1), dtype), np.zeros((N + 1, N + 1), dtype))

    @classmethod
    def random(cls, N, rng, dtype=float):
        def draw(shape):
            x = rng.standard_normal(shape)
            return x + 1j * rng.standard_normal(shape) if dtype is complex else x

        return cls(draw((N + 1, N)), draw((N, N + 1)), draw((N + 1, N + 1)))


class _Triplets:
    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add(self, r, c, v):
        r, c = np.broadcast_arrays(np.asarray(r).ravel(), np.asarray(c).ravel())
        self.rows.append(r)
        self.cols.append(c)
        self.vals.append(np.broadcast_to(np.asarray(v), r.shape).ravel())

    def matrix(self, shape, dtype):
        if not self.rows:
            return sp.csr_matrix(shape, dtype=dtype)
        rows = np.concatenate(self.rows)
        cols = np.concatenate(self.cols)
        vals = np.concatenate(self.vals)
        if dtype is float:
            vals = vals.real
        return sp.csr_matrix((vals.astype(dtype), (rows, cols)), shape=shape)


def _dtype(regime):
    return complex if regime.kind == HARMONIC else float


def _real_if_td(x, regime):
    return complex(x) if regime.kind == HARMONIC else complex(x).real


@dataclass(frozen=True)
class InterfaceOperator:
    """Transmission functional ``cH*H3 + cE*E2 + cD*(-D_yy H3)`` on a vertical line.

    ``normal`` is the outward normal (+1 or -1 along x) of the subdomain that
    *receives* the data; the same functional is evaluated on both sides.
    """

    cH: complex
    cE: complex
    cD: complex
    normal: int

    @classmethod
    def for_case(cls, case_id, s, normal, medium, regime):
        a = regime.shift(medium)
        Z = medium.impedance
        if case_id == 1:
            cH, cE, cD = 1.0, -normal / Z, 0.0
        elif case_id in (2, 4):
            cH, cE, cD = s, -normal * a / Z, 0.0
        elif case_id in (3, 5):
            c = a * (a + s)
            cH, cE, cD = c, -normal * c / Z, 1.0
        else:
            raise ContractError(f"unknown case {case_id}")
        return cls(_real_if_td(cH, regime), _real_if_td(cE, regime), _real_if_td(cD, regime), normal)


def tangential_second_difference(N: int, h: float) -> sp.csr_matrix:
    """``D_yy`` on the ``N+1`` nodal values of a vertical line, reflecting ends.

    Its eigenvectors are ``cos(m pi y_j)`` with eigenvalues ``-(2 - 2cos(m pi h))/h^2``.
    """
    main = -2.0 * np.ones(N + 1)
    up = np.ones(N)
    lo = np.ones(N)
    up[0] = 2.0
    lo[-1] = 2.0
    return sp.diags([lo, main, up], [-1, 0, 1], format="csr") / h**2


def _bc_for(bc, wall):
    name = bc.get(wall) if isinstance(bc, dict) else bc
    if name not in WALL_CONDITIONS:
        raise ContractError(f"unknown boundary condition {name!r}; expected {WALL_CONDITIONS}")
    return name


def _y_flux(t, grid, rows, i, medium, bc, scale=1.0):
    """Add ``-scale * (E1_north - E1_south)/w_y`` at the nodes of line ``i``."""
    N, h = grid.N, grid.h
    Z = medium.impedance
    j = np.arange(N + 1)
    wy = np.where((j == 0) | (j == N), h / 2, h)
    inner = j < N
    t.add(rows[inner], grid.e1(i, j[inner]), -scale / wy[inner])
    inner = j > 0
    t.add(rows[inner], grid.e1(i, j[inner] - 1), scale / wy[inner])
    # tangential E1 on the horizontal walls: 0 (pec) or +-Z H3 (absorbing)
    if _bc_for(bc, "bottom") == "impedance":
        t.add(rows[0], grid.h3(i, 0), scale * Z / wy[0])
    if _bc_for(bc, "top") == "impedance":
        t.add(rows[N], grid.h3(i, N), scale * Z / wy[N])


def trace_rows(grid: StaggeredGrid2D, node: int, side: str, medium, regime, bc="pec"):
    """Sparse maps ``u -> H3(x_node, :)`` and ``u -> E2(x_node, :)`` plus the ``g`` weight.

    On a vertical side of the strip the ``E2`` trace is the auxiliary unknown.
    At an interior line it is rebuilt from the half-cell magnetic balance on
    the requested side (``"left"`` uses the cell ``node-1``, ``"right"`` the
    cell ``node``); the affine part is ``wg * g[node, :]``.
    """
    N, h = grid.N, grid.h
    j = np.arange(N + 1)
    dtype = _dtype(regime)
    if not (grid.i0 <= node <= grid.i1):
        raise ContractError(f"node {node} outside strip [{grid.i0}, {grid.i1}]")
    H = _Triplets()
    H.add(j, grid.h3(node, j), 1.0)
    H = H.matrix((N + 1, grid.size), dtype)
    E = _Triplets()
    if side not in ("left", "right"):
        raise ContractError(side)
    if node == grid.i0 and side == "right":
        E.add(j, grid.aux(LEFT, j), 1.0)
        return H, E.matrix((N + 1, grid.size), dtype), 0.0
    if node == grid.i1 and side == "left":
        E.add(j, grid.aux(RIGHT, j), 1.0)
        return H, E.matrix((N + 1, grid.size), dtype), 0.0
    cell, sgn = (node - 1, -1.0) if side == "left" else (node, 1.0)
    if not (grid.i0 <= cell < grid.i1):
        raise ContractError(f"trace at node {node} from the {side} needs cell {cell}")
    bm = regime.rate() * medium.mu
    E.add(j, grid.e2(cell, j), 1.0)
    E.add(j, grid.h3(node, j), sgn * h / 2 * bm)
    _y_flux(E, grid, j, node, medium, bc, scale=sgn * h / 2)
    return H, E.matrix((N + 1, grid.size), dtype), -sgn * h / 2


def operator_rows(op: InterfaceOperator, grid, node, side, medium, regime, bc="pec"):
    """Return ``(Q, W)`` with ``op(trace) = Q u + W g[node]``."""
    H, E, wg = trace_rows(grid, node, side, medium, regime, bc)
    Hop = op.cH * sp.identity(grid.N + 1, format="csr")
    if op.cD != 0:
        Hop = Hop - op.cD * tangential_second_difference(grid.N, grid.h)
    Q = (Hop @ H + op.cE * E).tocsr()
    W = (op.cE * wg) * sp.identity(grid.N + 1, format="csr", dtype=_dtype(regime))
    return Q, W.tocsr()


def assemble_block(grid, medium, regime, bc="pec", left=None, right=None):
    """Matrix of the strip ``grid`` with walls or interface operators on its vertical sides.

    ``left``/``right`` are :class:`InterfaceOperator` instances for interface
    sides and ``None`` for physical walls (whose condition comes from ``bc``,
    a name or a dict keyed by ``left/right/bottom/top``).
    """
    N, h = grid.N, grid.h
    b = regime.rate()
    be = b * medium.epsilon + medium.sigma
    bm = b * medium.mu
    Z = medium.impedance
    dtype = _dtype(regime)
    t = _Triplets()
    j = np.arange(N + 1)

    # magnetic balance over the (cut) dual cell of each node
    for i in range(grid.i0, grid.i1 + 1):
        r = grid.h3(i, j)
        wx = h / 2 if i in (grid.i0, grid.i1) else h
        t.add(r, r, bm)
        east = grid.e2(i, j) if i < grid.i1 else grid.aux(RIGHT, j)
        west = grid.e2(i - 1, j) if i > grid.i0 else grid.aux(LEFT, j)
        t.add(r, east, 1 / wx)
        t.add(r, west, -1 / wx)
        _y_flux(t, grid, r, i, medium, bc)

    # E1 on every node line
    ni = np.arange(grid.i0, grid.i1 + 1)[:, None]
    ej = np.arange(N)[None, :]
    r = grid.e1(ni, ej)
    t.add(r, r, -be)
    t.add(r, grid.h3(ni, ej + 1), 1 / h)
    t.add(r, grid.h3(ni, ej), -1 / h)

    # E2 on every cell column
    ci = np.arange(grid.i0, grid.i1)[:, None]
    cj = j[None, :]
    r = grid.e2(ci, cj)
    t.add(r, r, -be)
    t.add(r, grid.h3(ci + 1, cj), -1 / h)
    t.add(r, grid.h3(ci, cj), 1 / h)

    # vertical sides: wall rows or transmission rows for the auxiliaries
    for side, node, op, wall in ((LEFT, grid.i0, left, "left"), (RIGHT, grid.i1, right, "right")):
        rows = grid.aux(side, j)
        if op is None:
            if _bc_for(bc, wall) == "pec":
                t.add(rows, rows, 1.0)
            else:
                nrm = -1 if side == LEFT else 1
                t.add(rows, grid.h3(node, j), 1.0)
                t.add(rows, rows, -nrm / Z)
    shape = (grid.size, grid.size)
    A = t.matrix(shape, dtype)
    for side, node, op in ((LEFT, grid.i0, left), (RIGHT, grid.i1, right)):
        if op is not None:
            Q, _ = operator_rows(op, grid, node, "right" if side == LEFT else "left", medium, regime, bc)
            P = sp.csr_matrix((np.ones(N + 1), (grid.aux(side, j), j)), shape=(grid.size, N + 1))
            A = A + P @ Q
    return A.tocsc()


def source_vector(grid, medium, regime, src: Sources):
    """Right-hand side of ``assemble_block`` for volume data ``src`` (interface data excluded)."""
    N = grid.N
    f = np.zeros(grid.size, np.result_type(_dtype(regime), src.J1, src.J2, src.g))
    ni = np.arange(grid.i0, grid.i1 + 1)[:, None]
    ci = np.arange(grid.i0, grid.i1)[:, None]
    f[grid.h3(ni, np.arange(N + 1)[None, :]).ravel()] = src.g[grid.i0 : grid.i1 + 1].ravel()
    f[grid.e1(ni, np.arange(N)[None, :]).ravel()] = src.J1[grid.i0 : grid.i1 + 1].ravel()
    f[grid.e2(ci, np.arange(N + 1)[None, :]).ravel()] = src.J2[grid.i0 : grid.i1].ravel()
    return f


@dataclass
class GlobalProblem:
    grid: StaggeredGrid2D
    medium: MediumParameters
    regime: object
    bc: object
    matrix: sp.csc_matrix

    def rhs(self, src: Sources) -> np.ndarray:
        return source_vector(self.grid, self.medium, self.regime, src)

    def solve(self, src: Sources) -> np.ndarray:
        return spla.spsolve(self.matrix, self.rhs(src))


def assemble_global(N, medium, regime, bc="pec") -> GlobalProblem:
    if N < 4:
        raise ContractError(f"N must be >= 4, got {N}")
    for wall in ("left", "right", "bottom", "top"):
        _bc_for(bc, wall)
    grid = StaggeredGrid2D(N)
    return GlobalProblem(grid, medium, regime, bc, assemble_block(grid, medium, regime, bc))


@dataclass
class SubdomainProblem:
    """One strip of the decomposition with its transmission rows and send operator.

    ``receive`` places interface data into the right-hand side; ``send`` maps
    the local state to the data the *other* subdomain needs (``send_g`` is
    the affine weight of the global ``g`` column at the neighbour's line).
    """

    grid: StaggeredGrid2D
    matrix: sp.csc_matrix
    interface_node: int
    neighbour_node: int
    op_in: InterfaceOperator
    op_out: InterfaceOperator
    receive: sp.csr_matrix
    send: sp.csr_matrix
    send_g: sp.csr_matrix
    global_index: np.ndarray
    bc: object = "pec"
    _lu: object = field(default=None, repr=False)

    def factorize(self):
        if self._lu is None:
            self._lu = spla.splu(self.matrix)
        return self._lu

    def solve(self, rhs):
        return self.factorize().solve(rhs)

    def fields(self, u):
        """Field part of a local state (auxiliaries dropped)."""
        return np.asarray(u)[: self.grid.n_field]


def split_domain(N, medium, regime, spec: TransmissionSpec, alpha=None, beta=None, bc="pec"):
    """Two strips ``(0, beta)`` and ``(alpha, 1)`` with case-``spec`` coupling.

    ``alpha`` and ``beta`` must lie on grid lines and ``beta - alpha`` must be
    ``0`` or ``h``; by default ``beta = 1/2`` and ``alpha = beta - spec.overlap``.
    """
    if N < 4:
        raise ContractError(f"N must be >= 4, got {N}")
    h = 1.0 / N
    if beta is None:
        beta = 0.5
    if alpha is None:
        alpha = beta - spec.overlap
    ib, ia = round(beta * N), round(alpha * N)
    if abs(ib - beta * N) > 1e-9 or abs(ia - alpha * N) > 1e-9:
        raise ContractError(f"alpha={alpha}, beta={beta} are not on grid lines of h={h}")
    if ib - ia not in (0, 1):
        raise ContractError(f"overlap must be 0 or h, got {beta - alpha}")
    if not (0 < ia <= ib < N):
        raise ContractError(f"need 0 < alpha <= beta < 1, got {alpha}, {beta}")
    if abs((ib - ia) * h - spec.overlap) > 1e-12:
        raise ContractError(f"spec overlap {spec.overlap} disagrees with beta - alpha = {(ib - ia) * h}")
    if spec.regime != regime.kind:
        raise ContractError(f"spec regime {spec.regime} does not match {regime.kind}")
    s1, s2 = spec.side_params
    op1 = InterfaceOperator.for_case(spec.case_id, s1, +1, medium, regime)
    op2 = InterfaceOperator.for_case(spec.case_id, s2, -1, medium, regime)
    g1 = StaggeredGrid2D(N, 0, ib)
    g2 = StaggeredGrid2D(N, ia, N)
    A1 = assemble_block(g1, medium, regime, bc, right=op1)
    A2 = assemble_block(g2, medium, regime, bc, left=op2)
    j = np.arange(N + 1)
    R1 = sp.csr_matrix((np.ones(N + 1), (g1.aux(RIGHT, j), j)), shape=(g1.size, N + 1))
    R2 = sp.csr_matrix((np.ones(N + 1), (g2.aux(LEFT, j), j)), shape=(g2.size, N + 1))
    # op1 is Omega_1's condition at beta, whose own E2 trace is the one from the
    # left; Omega_2 rebuilds the same one-sided trace (from the right if L=0).
    Q21, W21 = operator_rows(op1, g2, ib, "left" if ib > ia else "right", medium, regime, bc)
    Q12, W12 = operator_rows(op2, g1, ia, "right" if ib > ia else "left", medium, regime, bc)
    sub1 = SubdomainProblem(g1, A1, ib, ia, op1, op2, R1, Q12, W12, g1.to_global(), bc)
    sub2 = SubdomainProblem(g2, A2, ia, ib, op2, op1, R2, Q21, W21, g2.to_global(), bc)
    log.debug("split N=%d alpha=%g beta=%g sizes %d + %d", N, alpha, beta, g1.size, g2.size)
    return sub1, sub2


def subdomain_rhs(sub: SubdomainProblem, medium, regime, src: Sources):
    return source_vector(sub.grid, medium, regime, src)


def dump_operators(path, **matrices):
    """Write each sparse matrix as ``<path>/<name>.mtx`` (Matrix Market)."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for name, M in matrices.items():
        scipy.io.mmwrite(str(path / f"{name}.mtx"), sp.coo_matrix(M))
    return sorted(str(path / f"{n}.mtx") for n in matrices)
