"""Parallel Schwarz iteration on two strips, stationary or GMRES-accelerated.

The iteration acts on the interface data ``g = (g1, g2)``: subdomain ``l``
solves ``A_l u_l = f_l + P_l g_l`` and the data for the next step are
``g1 = Q_2 u_2`` and ``g2 = Q_1 u_1``. Stationary runs measure the discrete
L2 norm of the combined field (the overlap is taken from the first strip);
GMRES runs solve ``(I - T) g = d`` on the interface and measure the residual.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from osmaxwell.discretization import Sources, StaggeredGrid2D, SubdomainProblem, subdomain_rhs
from osmaxwell.errors import ContractError, DivergenceError, GMRESBreakdown
from osmaxwell.model import HARMONIC
from osmaxwell.optimize import band_max_rho

log = logging.getLogger(__name__)

STATIONARY = "stationary"
GMRES = "gmres"


@dataclass
class SchwarzState:
    iteration: int
    u1: np.ndarray
    u2: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    history: list = field(default_factory=list)


@dataclass
class RunReport:
    iterations: int
    final_error: float
    contraction: float
    mode: str
    converged: bool
    diverged: bool = False
    stagnated: bool = False
    history: list = field(default_factory=list, repr=False)
    config: dict = field(default_factory=dict)
    interface: np.ndarray | None = field(default=None, repr=False, compare=False)

    def as_dict(self):
        d = asdict(self)
        d.pop("history")
        d.pop("interface")
        return d


class SchwarzPair:
    """Two factorized subdomain problems plus the data needed to iterate them."""

    def __init__(self, sub1: SubdomainProblem, sub2: SubdomainProblem, medium, regime, src: Sources | None = None):
        self.sub1, self.sub2 = sub1, sub2
        self.medium, self.regime = medium, regime
        self.N = sub1.grid.N
        self.h = sub1.grid.h
        self.n_interface = sub1.receive.shape[1]
        self.dtype = complex if regime.kind == HARMONIC else float
        src = src if src is not None else Sources.zeros(self.N, self.dtype)
        self.src = src
        self.f1 = subdomain_rhs(sub1, medium, regime, src)
        self.f2 = subdomain_rhs(sub2, medium, regime, src)
        # affine part of the data each strip sends (g on the receiver's line)
        self.c12 = sub1.send_g @ src.g[sub1.neighbour_node]
        self.c21 = sub2.send_g @ src.g[sub2.neighbour_node]
        self._owned2 = ~np.isin(sub2.global_index, sub1.global_index)
        self._n_glob = StaggeredGrid2D(sub1.grid.N).n_field
        sub1.factorize()
        sub2.factorize()

    def solve1(self, g1):
        return self.sub1.solve(self.f1 + self.sub1.receive @ g1)

    def solve2(self, g2):
        return self.sub2.solve(self.f2 + self.sub2.receive @ g2)

    def send(self, u1, u2):
        """Interface data ``(g1, g2)`` produced by the current states."""
        return self.sub2.send @ u2 + self.c21, self.sub1.send @ u1 + self.c12

    def combine(self, u1, u2):
        u = np.zeros(self._n_glob, dtype=np.result_type(u1, u2))
        u[self.sub2.global_index] = self.sub2.fields(u2)
        u[self.sub1.global_index] = self.sub1.fields(u1)
        return u

    def error_norm(self, u1, u2, reference=None):
        """Discrete L2 norm over all field unknowns, overlap counted once."""
        e1, e2 = self.sub1.fields(u1), self.sub2.fields(u2)
        if reference is not None:
            e1 = e1 - reference[self.sub1.global_index]
            e2 = e2 - reference[self.sub2.global_index]
        total = np.sum(np.abs(e1) ** 2) + np.sum(np.abs(e2[self._owned2]) ** 2)
        return float(self.h * np.sqrt(total))

    def random_state(self, seed):
        """Uniform [-1, 1] unknowns (independent real and imaginary parts if complex)."""
        rng = np.random.default_rng(seed)

        def draw(n):
            x = rng.uniform(-1, 1, n)
            if self.dtype is complex:
                x = x + 1j * rng.uniform(-1, 1, n)
            return x

        return draw(self.sub1.grid.size), draw(self.sub2.grid.size)

    def step(self, u1, u2):
        g1, g2 = self.send(u1, u2)
        return self.solve1(g1), self.solve2(g2), g1, g2

    def interface_map(self, g):
        """Linear part ``T g`` of the interface fixed-point map."""
        n = self.n_interface
        u1 = self.sub1.solve(self.sub1.receive @ g[:n])
        u2 = self.sub2.solve(self.sub2.receive @ g[n:])
        return np.concatenate([self.sub2.send @ u2, self.sub1.send @ u1])

    def interface_rhs(self):
        u1, u2 = self.sub1.solve(self.f1), self.sub2.solve(self.f2)
        g1, g2 = self.send(u1, u2)
        return np.concatenate([g1, g2])


def _contraction(history, window=5):
    h = np.asarray(history, dtype=float)
    h = h[h > 0]
    if len(h) < 2:
        return float("nan")
    ratios = h[1:] / h[:-1]
    tail = ratios[-window:]
    return float(np.exp(np.mean(np.log(tail))))


def run_stationary(
    pair: SchwarzPair,
    tol=1e-6,
    max_iters=5000,
    seed=0,
    initial=None,
    reference=None,
    divergence_factor=10.0,
    stagnation_window=250,
    config=None,
) -> RunReport:
    """Jacobi-type Schwarz iteration from a random (or given) initial state.

    Counts iterations until the field error is ``<= tol``. A run whose error
    exceeds ``divergence_factor`` times its first-iterate error is reported as
    diverged; exhausting ``max_iters`` is reported as not converged. Every
    ``stagnation_window`` iterations (from the second window on) the rate over
    the last window is extrapolated, and the run stops early, flagged as
    stagnated, if ``tol`` would not be reached within ``max_iters``.
    """
    if tol <= 0:
        raise ContractError("tol must be positive")
    u1, u2 = pair.random_state(seed) if initial is None else initial
    state = SchwarzState(0, u1, u2, None, None, [pair.error_norm(u1, u2, reference)])
    converged = diverged = stagnated = False
    first = None
    w = stagnation_window
    while state.iteration < max_iters:
        state.u1, state.u2, state.g1, state.g2 = pair.step(state.u1, state.u2)
        state.iteration += 1
        err = pair.error_norm(state.u1, state.u2, reference)
        state.history.append(err)
        if not np.isfinite(err):
            diverged = True
            break
        if err <= tol:
            converged = True
            break
        first = err if first is None else first
        if err > divergence_factor * first:
            diverged = True
            break
        it = state.iteration
        if w and it >= 2 * w and it % w == 0:
            rate = np.log(err / state.history[it - w]) / w
            if rate >= 0 or it + np.log(tol / err) / rate > max_iters:
                stagnated = True
                break
    report = RunReport(
        iterations=state.iteration,
        final_error=state.history[-1],
        contraction=_contraction(state.history),
        mode=STATIONARY,
        converged=converged,
        diverged=diverged,
        stagnated=stagnated,
        history=state.history,
        config=dict(config or {}, seed=seed, tol=tol),
    )
    log.debug("stationary: %d its, err %.3e, converged=%s", report.iterations, report.final_error, converged)
    return report


def gmres(apply, b, x0, tol=1e-6, max_iters=None):
    """Full (unrestarted) GMRES with modified Gram-Schmidt and Givens rotations.

    Returns ``(x, iterations, residual_history)``; convergence is declared when
    ``||b - A x_k|| <= tol * ||b - A x_0||``.
    """
    n = b.shape[0]
    max_iters = n if max_iters is None else max_iters
    dtype = np.result_type(b, x0, complex if np.iscomplexobj(b) or np.iscomplexobj(x0) else float)
    r = b - apply(x0)
    beta = np.linalg.norm(r)
    hist = [float(beta)]
    if beta == 0:
        return x0.copy(), 0, hist
    V = np.zeros((n, max_iters + 1), dtype)
    H = np.zeros((max_iters + 1, max_iters), dtype)
    cs = np.zeros(max_iters, dtype)
    sn = np.zeros(max_iters, dtype)
    e = np.zeros(max_iters + 1, dtype)
    e[0] = beta
    V[:, 0] = r / beta
    k = 0
    for k in range(1, max_iters + 1):
        j = k - 1
        w = apply(V[:, j])
        for i in range(k):
            H[i, j] = np.vdot(V[:, i], w)
            w = w - H[i, j] * V[:, i]
        H[k, j] = np.linalg.norm(w)
        for i in range(j):
            t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
            H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + cs[i] * H[i + 1, j]
            H[i, j] = t
        denom = np.hypot(abs(H[j, j]), abs(H[k, j]))
        if denom == 0:
            raise GMRESBreakdown(f"zero column at iteration {k}")
        cs[j] = abs(H[j, j]) / denom
        phase = H[j, j] / abs(H[j, j]) if H[j, j] != 0 else 1.0
        sn[j] = phase * np.conj(H[k, j]) / denom
        H[j, j] = phase * denom
        H[k, j] = 0
        e[k] = -np.conj(sn[j]) * e[j]
        e[j] = cs[j] * e[j]
        hist.append(float(abs(e[k])))
        if abs(e[k]) <= tol * beta:
            break
        if H[k - 1, j] == 0 or np.linalg.norm(w) < 1e-300:
            break
        V[:, k] = w / np.linalg.norm(w)
    y = np.linalg.solve(np.triu(H[:k, :k]), e[:k])
    return x0 + V[:, :k] @ y, k, hist


def run_gmres(pair: SchwarzPair, tol=1e-6, max_iters=None, seed=0, initial=None, restart=None, config=None) -> RunReport:
    """GMRES on ``(I - T) g = d`` started from the interface traces of a random state.

    ``restart=None`` (or 0) runs full GMRES; otherwise GMRES(restart) cycles are
    chained and ``iterations`` counts all inner steps.
    """
    u1, u2 = pair.random_state(seed) if initial is None else initial
    x = np.concatenate(pair.send(u1, u2))
    d = pair.interface_rhs()
    n = x.shape[0]
    budget = max_iters or (n if not restart else 50 * n)

    def apply(v):
        return v - pair.interface_map(v)

    r0 = float(np.linalg.norm(d - apply(x)))
    hist, its = [r0], 0
    while its < budget:
        cycle = min(restart or budget, budget - its)
        x, k, h = gmres(apply, d, x, tol=min(tol * r0 / max(hist[-1], 1e-300), 1.0), max_iters=cycle)
        its += k
        hist.extend(h[1:])
        if not restart or k == 0:
            break
        # true residual after each cycle
        hist[-1] = float(np.linalg.norm(d - apply(x)))
        if hist[-1] <= tol * r0:
            break
    converged = hist[-1] <= tol * r0 * (1 + 1e-9)
    n1 = pair.n_interface
    v1, v2 = pair.solve1(x[:n1]), pair.solve2(x[n1:])
    report = RunReport(
        iterations=its,
        final_error=pair.error_norm(v1, v2),
        contraction=_contraction(hist),
        mode=GMRES,
        converged=bool(converged),
        history=hist,
        config=dict(config or {}, seed=seed, tol=tol, restart=restart or 0),
        interface=x,
    )
    if not converged and its < budget:
        raise GMRESBreakdown(f"GMRES stalled after {its} iterations (residual {hist[-1] / r0:.3e})")
    return report


@dataclass(frozen=True)
class ContractionEstimate:
    measured: float
    predicted: float
    slack: float = 0.25

    @property
    def within_bound(self) -> bool:
        return self.measured <= self.predicted * (1 + self.slack)


def contraction_probe(pair: SchwarzPair, spec, band, n_iters=60, seed=0, window=10, floor=1e-12):
    """Observed error reduction per double step against ``max_band rho^2``.

    The measurement is the geometric mean of ``e_n / e_{n-2}`` over the last
    ``window`` iterations before the error reaches ``floor`` (or ``n_iters``).
    """
    report = run_stationary(pair, tol=floor, max_iters=n_iters, seed=seed, divergence_factor=np.inf,
                            stagnation_window=0)
    e = np.asarray(report.history, dtype=float)
    e = e[e > floor]
    if len(e) < 4:
        raise ContractError("too few iterations above the floor to estimate a contraction")
    ratios = e[2:] / e[:-2]
    measured = float(np.exp(np.mean(np.log(ratios[-window:]))))
    predicted = band_max_rho(spec, band) ** 2
    return ContractionEstimate(measured, predicted)


def divergence_check(report: RunReport):
    if report.diverged:
        raise DivergenceError(f"Schwarz iteration diverged after {report.iterations} iterations", report)
    return report
