"""Sweeps behind the command line: iteration-count grids and slope fits.

A bench cell is one ``(case, h, overlap)`` combination of the 2D TE model
problem on the unit square, split at ``x = 1/2``. The cell solves the error
equation (zero sources) from a seeded random initial state, once with the
stationary iteration and once with GMRES on the interface system.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from osmaxwell.discretization import split_domain
from osmaxwell.errors import ContractError
from osmaxwell.model import HARMONIC, TIME_DISCRETE, MediumParameters
from osmaxwell.optimize import (
    ASYMPTOTIC,
    NUMERIC,
    UNIT_SQUARE,
    asymptotic_parameters,
    band_max_rho,
    build_band,
    fit_loglog,
    minmax_optimize,
)
from osmaxwell.schwarz import SchwarzPair, run_gmres, run_stationary

log = logging.getLogger(__name__)

DASH = "-"

# exponent alpha of 1 - max rho ~ c h^alpha for the optimized parameters;
# iteration counts then grow like h^(-alpha)
GAP_EXPONENTS = {
    (TIME_DISCRETE, "h"): {1: 1 / 2, 2: 1 / 3, 3: 1 / 4, 4: 1 / 5, 5: 1 / 6},
    (TIME_DISCRETE, "none"): {1: 1.0, 2: 1 / 2, 3: 1 / 3, 4: 1 / 4, 5: 1 / 5},
    (HARMONIC, "h"): {1: 1.0, 2: 1 / 3, 3: 1 / 3, 4: 1 / 5, 5: 1 / 5},
    (HARMONIC, "none"): {1: 0.0, 2: 1 / 2, 3: 1 / 2, 4: 1 / 4, 5: 1 / 4},
}


def predicted_iteration_slope(case_id, kind, overlap):
    """Slope of ``log(iterations)`` against ``log h`` implied by the band analysis."""
    return -GAP_EXPONENTS[(kind, overlap)][case_id]


def transmission_for(case_id, band, overlap, strategy=ASYMPTOTIC):
    """Parameters for one cell: closed-form asymptotics or the numeric min-max."""
    if strategy == NUMERIC and case_id != 1:
        return minmax_optimize(case_id, band, overlap).spec
    if strategy not in (ASYMPTOTIC, NUMERIC):
        raise ContractError(f"unknown parameter strategy {strategy!r}")
    return asymptotic_parameters(case_id, band, overlap)


@dataclass(frozen=True)
class BenchCell:
    case_id: int
    h_inv: int
    overlap: str


@dataclass(frozen=True)
class BenchRow:
    case_id: int
    regime: str
    overlap: str
    h_inv: int
    it_s: int | None
    it_gm: int | None
    contraction: float
    predicted_max_rho: float
    params: tuple

    def key(self):
        return (self.case_id, self.overlap != "h", self.h_inv)


def run_cell(cell: BenchCell, regime, medium=None, strategy=ASYMPTOTIC, tol=1e-6, max_iters=5000,
             seed=0, bc="impedance", gmres_restart=None, geometry=UNIT_SQUARE) -> BenchRow:
    """Stationary and GMRES iteration counts of one grid cell."""
    medium = medium or MediumParameters()
    N = cell.h_inv
    h = 1.0 / N
    band = build_band(h, regime, medium, geometry)
    spec = transmission_for(cell.case_id, band, cell.overlap, strategy)
    s1, s2 = split_domain(N, medium, regime, spec, bc=bc)
    pair = SchwarzPair(s1, s2, medium, regime)
    echo = dict(case=cell.case_id, h=h, overlap=cell.overlap, regime=regime.kind, seed=seed)
    st = run_stationary(pair, tol=tol, max_iters=max_iters, seed=seed, config=echo)
    gm = run_gmres(pair, tol=tol, max_iters=max_iters, seed=seed, restart=gmres_restart, config=echo)
    log.info("case %d h=1/%d L=%s: %s(%s)", cell.case_id, N, cell.overlap,
             st.iterations if st.converged else DASH, gm.iterations if gm.converged else DASH)
    return BenchRow(
        case_id=cell.case_id,
        regime=regime.kind,
        overlap=cell.overlap,
        h_inv=N,
        it_s=st.iterations if st.converged else None,
        it_gm=gm.iterations if gm.converged else None,
        contraction=st.contraction,
        predicted_max_rho=band_max_rho(spec, band),
        params=tuple(complex(p) for p in spec.params),
    )


def run_grid(cases, h_invs, overlaps, regime, threads=1, **kw) -> list[BenchRow]:
    """All requested cells, returned in (case, overlap, h) order whatever the completion order."""
    cells = [BenchCell(c, n, o) for c in cases for o in overlaps for n in h_invs]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(lambda c: run_cell(c, regime, **kw), cells))
    else:
        rows = [run_cell(c, regime, **kw) for c in cells]
    return sorted(rows, key=BenchRow.key)


@dataclass(frozen=True)
class SlopeFit:
    case_id: int
    overlap: str
    slope: float
    intercept: float
    residual: float
    n_points: int


def fit_slopes(rows, quantity="iterations", column="it_s") -> list[SlopeFit]:
    """Per (case, overlap) log-log fit of a column against ``h``.

    ``quantity`` is ``"iterations"`` (fit the count itself) or
    ``"one-minus-contraction"`` (fit ``1 - contraction``). Rows without a
    value (non-convergent cells) are skipped; groups need four mesh sizes.
    """
    groups = {}
    for r in rows:
        groups.setdefault((r.case_id, r.overlap), []).append(r)
    fits = []
    for (case_id, overlap), grp in sorted(groups.items()):
        if quantity == "iterations":
            pts = [(1.0 / r.h_inv, getattr(r, column)) for r in grp if getattr(r, column) is not None]
        elif quantity == "one-minus-contraction":
            pts = [(1.0 / r.h_inv, 1.0 - r.contraction) for r in grp
                   if math.isfinite(r.contraction) and r.contraction < 1]
        else:
            raise ContractError(f"unknown fit quantity {quantity!r}")
        if len({p[0] for p in pts}) < 4:
            raise ContractError(f"case {case_id}, overlap {overlap}: need at least 4 mesh sizes, got {len(pts)}")
        x, y = np.array(pts).T
        slope, intercept, residual = fit_loglog(x, y)
        fits.append(SlopeFit(case_id, overlap, slope, intercept, residual, len(pts)))
    return fits
