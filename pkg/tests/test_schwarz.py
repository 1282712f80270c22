import numpy as np
import pytest

from osmaxwell.discretization import Sources, assemble_global, split_domain
from osmaxwell.errors import ContractError, DivergenceError
from osmaxwell.optimize import asymptotic_parameters, build_band
from osmaxwell.schwarz import (
    RunReport,
    SchwarzPair,
    contraction_probe,
    divergence_check,
    gmres,
    run_gmres,
    run_stationary,
)
from osmaxwell.symbols import TransmissionSpec


def _pair(N, case_id, overlap, regime, medium, src=None):
    band = build_band(1 / N, regime, medium)
    spec = asymptotic_parameters(case_id, band, overlap)
    s1, s2 = split_domain(N, medium, regime, spec, bc="impedance")
    return SchwarzPair(s1, s2, medium, regime, src), spec, band


@pytest.mark.parametrize("case_id", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("overlap", ["h", "none"])
def test_converges_to_global_solution(regime, medium, case_id, overlap):
    N = 16
    if regime.kind == "harmonic" and case_id == 1 and overlap == "none":
        pytest.skip("classical non-overlapping harmonic iteration does not converge")
    rng = np.random.default_rng(7)
    src = Sources.random(N, rng, complex if regime.kind == "harmonic" else float)
    ref = assemble_global(N, medium, regime, "impedance").solve(src)
    pair, _, _ = _pair(N, case_id, overlap, regime, medium, src)
    report = run_stationary(pair, tol=1e-9, reference=ref)
    assert report.converged
    g = run_gmres(pair, tol=1e-12)
    n = pair.n_interface
    u1, u2 = pair.solve1(g.interface[:n]), pair.solve2(g.interface[n:])
    assert pair.error_norm(u1, u2, ref) < 1e-8


def test_zero_initial_state_is_one_iteration(time_discrete, medium):
    pair, _, _ = _pair(16, 2, "none", time_discrete, medium)
    zero = (np.zeros(pair.sub1.grid.size), np.zeros(pair.sub2.grid.size))
    report = run_stationary(pair, initial=zero)
    assert report.iterations == 1 and report.converged and report.final_error == 0


def test_seed_determinism(harmonic, medium):
    pair, _, _ = _pair(16, 4, "h", harmonic, medium)
    a = run_stationary(pair, seed=11)
    b = run_stationary(pair, seed=11)
    c = run_stationary(pair, seed=12)
    assert a.history == b.history and a.as_dict() == b.as_dict()
    assert a.history != c.history


def test_report_fields(time_discrete, medium):
    pair, _, _ = _pair(16, 3, "h", time_discrete, medium)
    r = run_stationary(pair, config={"case": 3})
    assert isinstance(r, RunReport)
    assert len(r.history) == r.iterations + 1
    assert 0 < r.contraction < 1
    assert r.config["case"] == 3 and r.config["seed"] == 0 and r.mode == "stationary"


@pytest.mark.parametrize("case_id", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("overlap", ["h", "none"])
def test_gmres_not_slower_than_stationary(regime, medium, case_id, overlap):
    pair, _, _ = _pair(32, case_id, overlap, regime, medium)
    st = run_stationary(pair)
    gm = run_gmres(pair)
    assert gm.converged
    if st.converged:
        assert gm.iterations <= st.iterations


def test_classical_harmonic_without_overlap_is_flagged(harmonic, medium):
    pair, _, _ = _pair(16, 1, "none", harmonic, medium)
    r = run_stationary(pair, max_iters=5000)
    assert not r.converged and r.stagnated
    assert r.iterations < 5000


def test_stagnation_rule_spares_slow_convergence(time_discrete, medium):
    pair, _, _ = _pair(32, 1, "none", time_discrete, medium)
    r = run_stationary(pair, max_iters=5000)
    assert r.converged and r.iterations > 250


def test_contraction_matches_band_prediction(regime, medium):
    for case_id in (2, 4):
        pair, spec, band = _pair(32, case_id, "h", regime, medium)
        est = contraction_probe(pair, spec, band)
        assert est.within_bound


def test_divergence_check():
    ok = RunReport(3, 1e-7, 0.1, "stationary", True)
    assert divergence_check(ok) is ok
    with pytest.raises(DivergenceError):
        divergence_check(RunReport(3, 1e3, 5.0, "stationary", False, diverged=True))


def test_gmres_solves_dense_system():
    rng = np.random.default_rng(3)
    A = np.eye(40) + 0.3 * rng.standard_normal((40, 40)) / np.sqrt(40)
    b = rng.standard_normal(40)
    x, k, hist = gmres(lambda v: A @ v, b, np.zeros(40), tol=1e-12)
    assert np.allclose(x, np.linalg.solve(A, b), atol=1e-10)
    assert k <= 40 and hist[-1] <= 1e-12 * hist[0]


def test_restarted_gmres_converges(harmonic, medium):
    pair, _, _ = _pair(32, 1, "none", harmonic, medium)
    full = run_gmres(pair)
    restarted = run_gmres(pair, restart=10)
    assert restarted.converged and restarted.iterations >= full.iterations


def test_tolerance_must_be_positive(time_discrete, medium):
    pair, _, _ = _pair(16, 2, "h", time_discrete, medium)
    with pytest.raises(ContractError):
        run_stationary(pair, tol=0)


def _restrict(pair, gp, U, src, medium, regime):
    """Subdomain states equal to the global solution, interface traces included."""
    from osmaxwell.discretization import LEFT, RIGHT, trace_rows

    full = gp.grid
    j = np.arange(full.N + 1)
    states = []
    for sub, own_side, wall_side in ((pair.sub1, RIGHT, LEFT), (pair.sub2, LEFT, RIGHT)):
        g = sub.grid
        u = np.zeros(g.size, dtype=U.dtype)
        u[: g.n_field] = U[sub.global_index]
        u[g.aux(wall_side, j)] = U[full.aux(wall_side, j)]
        node = g.i1 if own_side == RIGHT else g.i0
        _, E, wg = trace_rows(full, node, "left" if own_side == RIGHT else "right", medium, regime, "impedance")
        u[g.aux(own_side, j)] = E @ U + wg * src.g[node]
        states.append(u)
    return tuple(states)


@pytest.mark.parametrize("case_id", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("overlap", ["h", "none"])
def test_global_solution_is_a_fixed_point(regime, medium, case_id, overlap):
    N = 16
    src = Sources.random(N, np.random.default_rng(3), complex if regime.kind == "harmonic" else float)
    gp = assemble_global(N, medium, regime, "impedance")
    U = gp.solve(src)
    pair, _, _ = _pair(N, case_id, overlap, regime, medium, src)
    u1, u2 = _restrict(pair, gp, U, src, medium, regime)
    assert pair.error_norm(u1, u2, U) < 1e-12
    v1, v2, _, _ = pair.step(u1, u2)
    assert pair.error_norm(v1, v2, U) <= 1e-10


def test_homogeneous_global_problem_has_zero_solution(time_discrete, medium):
    gp = assemble_global(16, medium, time_discrete, "pec")
    assert np.all(gp.solve(Sources.zeros(16)) == 0)


def test_hierarchy_at_h_64(time_discrete, medium):
    it = {c: run_stationary(_pair(64, c, "none", time_discrete, medium)[0]).iterations for c in (1, 2, 3, 4, 5)}
    assert it[1] > 5 * it[2] and it[2] > it[4]
    assert it[3] <= it[2] and it[5] <= it[2]
