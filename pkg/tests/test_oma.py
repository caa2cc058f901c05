import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fasfair import FasSide, Scenario, SystemParams, oma_design, oma_outage_pair
from fasfair.barrier import BarrierError, barrier_minimize
from fasfair.oma import (A, ALPHA, B, U, V, ScaConfig, _to_vector, approx_objective,
                         grid_oracle, sca_initialize, sca_iterates, sca_linearize, sca_solve,
                         solve_subproblem)

FIG4_POWERS = (5.0, 10.0, 15.0)


def fig4(p_dbm):
    return Scenario(SystemParams(p_dbm=p_dbm))


# ---------------------------------------------------------------- barrier solver

def _affine(A_, b_):
    A_ = np.asarray(A_, float)
    b_ = np.asarray(b_, float)

    def cons(x):
        return A_ @ x - b_, A_.copy(), np.zeros((len(b_), len(x), len(x)))
    return cons


def test_barrier_lp_box():
    # min x + 2y on the unit box
    cons = _affine([[-1, 0], [0, -1], [1, 0], [0, 1]], [0, 0, 1, 1])
    res = barrier_minimize(np.array([1.0, 2.0]), cons, np.array([0.5, 0.5]))
    assert np.allclose(res.x, 0.0, atol=1e-8)
    assert res.gap < 1e-9


def test_barrier_disk():
    # min x over the disk (x - 2)^2 + y^2 <= 1
    def cons(z):
        x, y = z
        f = np.array([(x - 2) ** 2 + y ** 2 - 1.0])
        J = np.array([[2 * (x - 2), 2 * y]])
        H = np.array([[[2.0, 0.0], [0.0, 2.0]]])
        return f, J, H
    res = barrier_minimize(np.array([1.0, 0.0]), cons, np.array([2.0, 0.3]))
    assert res.x[0] == pytest.approx(1.0, abs=1e-8)
    assert res.kkt_residual < 1e-6


def test_barrier_rejects_infeasible_start():
    cons = _affine([[1.0]], [0.0])
    with pytest.raises(BarrierError) as info:
        barrier_minimize(np.array([1.0]), cons, np.array([1.0]))
    assert info.value.x[0] == 1.0


@pytest.mark.parametrize("n,eta,a_max", [(4, 0.8, 0.9), (2, 0.5, 0.3), (8, 1.0, 0.95)])
def test_barrier_one_active_floor(n, eta, a_max):
    # min tau  s.t.  1 - a <= (tau/eta)^(1/n),  a <= a_max,  0 < tau <= 1
    def cons(x):
        tau, a = x
        root = (tau / eta) ** (1.0 / n) if tau > 0 else 0.0
        f = np.array([1.0 - a - root, a - a_max, -tau, tau - 1.0])
        J = np.array([[-root / (n * tau), -1.0], [0.0, 1.0], [-1.0, 0.0], [1.0, 0.0]])
        H = np.zeros((4, 2, 2))
        H[0, 0, 0] = (n - 1) * root / (n * n * tau * tau)
        return f, J, H
    floor = eta * (1.0 - a_max) ** n
    res = barrier_minimize(np.array([1.0, 0.0]), cons, np.array([0.99, a_max / 2]))
    assert abs(res.x[0] - floor) < 1e-9


# ---------------------------------------------------------------- initializer

@pytest.mark.parametrize("p_dbm", FIG4_POWERS)
def test_initializer_strictly_feasible(p_dbm):
    sc = fig4(p_dbm)
    state = sca_initialize(sc)
    assert (state.alpha, state.beta) == (0.5, 0.5)
    sub = sca_linearize(sc, state)
    assert np.all(sub.original_constraints(sub.point) < 0)
    assert np.all(sub.constraints(sub.point)[0] < 0)
    assert 0 < state.tau < 1


def test_initializer_c_value():
    sc = Scenario(SystemParams(p_dbm=0.0))
    assert sca_initialize(sc).c == pytest.approx(6e-8 * 1.001, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 40), st.integers(1, 12), st.integers(1, 12),
       st.floats(0.2, 6.0), st.floats(0.2, 6.0), st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_initializer_never_fails(p, nc, ne, wc, we, r1, r2):
    sc = Scenario(SystemParams(p_dbm=p, r1=r1, r2=r2), n_c=nc, n_e=ne, w_c=wc, w_e=we)
    d = oma_design(sc.params, 0.5, 0.5)
    for psi, side in ((d.psi1, sc.cu), (d.psi2, sc.eu)):
        # beyond this exp(-x) underflows; covered by test_initializer_underflow
        assume(psi / (side.sigma2 * (1 - side.mu ** 2)) < 700)
    state = sca_initialize(sc)
    values = [state.tau, state.a, state.b, state.c, state.d]
    assert all(math.isfinite(v) and v > 0 for v in values)
    sca_linearize(sc, state)


def test_initializer_underflow():
    sc = Scenario(SystemParams(p_dbm=0.0, r2=2.0), n_c=1, n_e=1, w_e=0.21875)
    with pytest.raises(ValueError, match="underflows"):
        sca_initialize(sc)


def test_fully_correlated_refused(fig1):
    s2 = fig1.cu.sigma2
    sc = SimpleNamespace(params=fig1.params, cu=FasSide(4, None, 1.0, s2), eu=fig1.eu)
    with pytest.raises(ValueError, match="mu = 1"):
        sca_initialize(sc)


def test_linearize_rejects_bad_point(fig1):
    state = sca_initialize(fig1)
    with pytest.raises(ValueError, match="re-initialize"):
        sca_linearize(fig1, state.__class__(**{**state.__dict__, "a": 0.99999}))
    with pytest.raises(ValueError):
        sca_linearize(fig1, state.__class__(**{**state.__dict__, "tau": 1.5}))


# ---------------------------------------------------------------- surrogates

def test_surrogates_tight_at_point(fig1):
    sub = sca_linearize(fig1, sca_initialize(fig1))
    assert np.allclose(sub.values(sub.point)[:6], sub.original_constraints(sub.point),
                       rtol=1e-12, atol=1e-12)


def test_fast_values_match_full(fig1):
    sub = sca_linearize(fig1, sca_initialize(fig1))
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = sub.point * (1 + 0.01 * rng.standard_normal(7))
        assert np.allclose(sub.values(x), sub.constraints(x)[0], rtol=1e-13, atol=1e-13)


@given(st.floats(1e-6, 10.0), st.floats(1e-6, 10.0))
def test_log_tangent_upper_bounds(a, a0):
    assert math.log(a0) + (a - a0) / a0 >= math.log(a) - 1e-12


@given(st.floats(0, 5), st.floats(0, 5), st.floats(0, 5), st.floats(0, 5))
def test_quarter_square_tangent_lower_bounds(al, c, al0, c0):
    s0 = al0 + c0
    zeta = 0.25 * s0 * s0 + 0.5 * s0 * (al - al0 + c - c0)
    assert zeta <= 0.25 * (al + c) ** 2 + 1e-12


def _feasible_samples(sub, x_end, n, rng):
    out = []
    # points on the segment to the subproblem optimum lie in the convex set
    for t in rng.uniform(0, 1, n // 2):
        out.append(sub.point + t * (x_end - sub.point))
    tries = 0
    while len(out) < n and tries < 200 * n:
        tries += 1
        base = out[rng.integers(len(out))]
        scale = 10.0 ** rng.uniform(-5, -1.5)
        x = base * (1 + scale * rng.standard_normal(7))
        if np.all(sub.values(x) <= 0):
            out.append(x)
    assert len(out) == n
    return np.array(out)


@pytest.mark.parametrize("p_dbm", FIG4_POWERS)
def test_surrogate_safety(p_dbm):
    sc = fig4(p_dbm)
    states, _, _ = sca_iterates(sc, ScaConfig(max_outer=2))
    rng = np.random.default_rng(int(p_dbm))
    for state, nxt in zip(states[:-1], states[1:]):
        sub = sca_linearize(sc, state)
        x_end = _to_vector(nxt, sub.const, sub.tau_scale)
        pts = _feasible_samples(sub, x_end, 1000, rng)
        for x in pts:
            g = sub.original_constraints(x)
            assert np.all(g <= 1e-12 * np.maximum(1.0, np.abs(sub.values(x)[:6]))), g


@pytest.mark.parametrize("n", [2, 4, 8])
def test_root_concavity(n):
    tau = np.linspace(1e-4, 1.0, 400)
    for eta in (0.3, 1.0):
        f = (tau / eta) ** (1.0 / n)
        assert np.all(np.diff(f, 2) <= 1e-15)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_rate_convexity(r):
    beta = np.linspace(0.05, 0.95, 400)
    assert np.all(np.diff(2.0 ** (r / beta), 2) >= 0)
    assert np.all(np.diff(2.0 ** (r / (1 - beta)), 2) >= 0)


# ---------------------------------------------------------------- subproblem

def _subproblem_oracle(sub):
    """min tau of one linearized subproblem by nested (alpha, beta) grid refinement.

    For fixed (alpha, beta) the smallest admissible u, v come from the quadratic
    surrogate rate constraints; a, b then follow from the log tangents and tau
    from the port-count powers.
    """
    k, pt = sub.const, sub.point
    a0, b0, al0, u0, v0 = (pt[i] for i in (A, B, ALPHA, U, V))
    s0, d0 = al0 + u0, al0 - v0

    def tau_at(al, be):
        with np.errstate(over="ignore"):
            g1 = np.exp2(k.r1 / be) - 1
            g2 = np.exp2(k.r2 / (1 - be)) - 1
        bu = (s0 + al) / 2
        du = bu * bu + s0 * s0 / 4 + s0 * (al - al0 - u0) / 2 - al * al / 4 - g1 / k.k1
        bv = 1 - al / 2 - d0 / 2
        dv = bv * bv - al * al / 4 + d0 * d0 / 4 + d0 * (al - al0 + v0) / 2 - g2 / k.k2
        u = np.where(du >= 0, 2 * (bu - np.sqrt(np.abs(du))), np.inf)
        v = np.where(dv >= 0, 2 * (bv - np.sqrt(np.abs(dv))), np.inf)
        a = a0 * (1 - np.maximum(u, 0) - math.log(a0))
        b = b0 * (1 - np.maximum(v, 0) - math.log(b0))
        th = np.where(a > 0, k.eta_h * np.clip(1 - a, 0, None) ** k.n_c, np.inf)
        tg = np.where(b > 0, k.eta_g * np.clip(1 - b, 0, None) ** k.n_e, np.inf)
        return np.maximum(th, tg)

    ac = bc = w = 0.5
    for _ in range(8):
        ax = np.clip(np.linspace(ac - w, ac + w, 201), sub.box, 1 - sub.box)
        bx = np.clip(np.linspace(bc - w, bc + w, 201), sub.box, 1 - sub.box)
        T = tau_at(*np.meshgrid(ax, bx, indexing="ij"))
        i, j = np.unravel_index(np.argmin(T), T.shape)
        ac, bc, best = ax[i], bx[j], T[i, j]
        w *= 0.05
    return float(best)


@pytest.mark.parametrize("p_dbm", FIG4_POWERS)
def test_first_subproblem_matches_grid(p_dbm):
    sc = fig4(p_dbm)
    sub = sca_linearize(sc, sca_initialize(sc))
    new = solve_subproblem(sub)
    assert abs(new.tau - _subproblem_oracle(sub)) < 1e-3
    assert new.kkt_residual < 1e-3


def test_fixed_point(fig1):
    cfg = ScaConfig(eps_tau=1e-12, max_outer=200)
    rep = sca_solve(fig1.with_values(p_dbm=15.0), cfg)
    sc = fig1.with_values(p_dbm=15.0)
    states, _, _ = sca_iterates(sc, cfg)
    again = solve_subproblem(sca_linearize(sc, states[-1], cfg), cfg)
    assert abs(again.tau - states[-1].tau) < cfg.inner_tol
    assert rep.objective == states[-1].tau


# ---------------------------------------------------------------- full SCA

@pytest.mark.parametrize("p_dbm", FIG4_POWERS)
def test_sca_monotone_and_near_oracle(p_dbm):
    sc = fig4(p_dbm)
    cfg = ScaConfig()
    rep = sca_solve(sc, cfg)
    hist = np.array(rep.history)
    assert np.all(np.diff(hist) <= cfg.inner_tol)
    assert rep.converged
    _, _, tau_grid = grid_oracle(sc, 0.005)
    assert abs(rep.objective - tau_grid) < 1e-2
    # the surrogate optimum is an upper bound on the true approximate objective
    assert approx_objective(sc, rep.alpha, rep.beta) <= rep.objective * (1 + 1e-6)


def test_sca_report_carries_exact_outage(fig1):
    rep = sca_solve(fig1)
    exact = oma_outage_pair(fig1, rep.alpha, rep.beta)
    assert rep.outage == exact
    assert rep.method == "sca" and rep.beta is not None
    assert math.isfinite(rep.outage.p_max - rep.objective)  # gap recorded, not bounded


def test_sca_max_outer_cap(fig1):
    rep = sca_solve(fig1, ScaConfig(max_outer=1, eps_tau=1e-12))
    assert rep.iterations == 1 and not rep.converged


def test_sca_relative_stop_at_high_power():
    sc = fig4(30.0)
    rep = sca_solve(sc, ScaConfig(eps_tau=1e-6, relative=True))
    _, _, tau_grid = grid_oracle(sc, 0.005)
    assert rep.objective == pytest.approx(tau_grid, rel=5e-3)


def test_sca_degenerate_edge_rate():
    # vanishing EU requirement: the EU needs almost no time or power
    sc = Scenario(SystemParams(p_dbm=10.0, r2=1e-6))
    rep = sca_solve(sc)
    assert rep.alpha > 0.99 and rep.beta > 0.99
    assert rep.objective < 2e-3


def test_symmetric_scenario_against_grid():
    sc = Scenario(SystemParams(p_dbm=10.0, d_e=400.0))
    rep = sca_solve(sc)
    _, _, tau_grid = grid_oracle(sc, 0.005)
    assert abs(rep.objective - tau_grid) < 1e-2


@pytest.mark.parametrize("kw", [dict(eps_tau=0), dict(max_outer=0), dict(barrier_mu=1.0),
                                dict(box=0.6)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        ScaConfig(**kw)


# ---------------------------------------------------------------- grid oracle

def test_grid_coarse_has_nine_points():
    sc = Scenario(SystemParams(d_e=400.0))
    al, be, tau = grid_oracle(sc, 0.25)
    assert al in (0.25, 0.5, 0.75) and be in (0.25, 0.5, 0.75)
    axis = [0.25, 0.5, 0.75]
    vals = [approx_objective(sc, a, b) for a in axis for b in axis]
    assert len(vals) == 9 and tau == min(vals)
    assert grid_oracle(sc, 0.25) == (al, be, tau)


def test_grid_refinement_nonincreasing(fig1):
    _, _, coarse = grid_oracle(fig1, 0.01)
    _, _, fine = grid_oracle(fig1, 0.005)
    assert fine <= coarse + 1e-15


@pytest.mark.parametrize("step", [0.0, 0.5, -0.1])
def test_grid_step_domain(fig1, step):
    with pytest.raises(ValueError):
        grid_oracle(fig1, step)


def test_approx_objective_matches_design(fig1):
    d = oma_design(fig1.params, 0.4, 0.6)
    cu = fig1.cu
    s = cu.sigma2 * (1 - cu.mu ** 2)
    pc = cu.eta * (-math.expm1(-d.psi1 / s)) ** cu.n_ports
    assert approx_objective(fig1, 0.4, 0.6) >= pc * (1 - 1e-12)
