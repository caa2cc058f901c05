import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fasfair import (FasSide, Regime, Scenario, SystemParams, correlation_mu, dbm_to_mw,
                     gamma_thresholds, noma_design, oma_design)

# frozen from a 50-digit mpmath evaluation of the defining expression
MU_FROZEN = {
    0.1: 0.99182259386864065614,
    0.5: 0.8225996235834697756,
    1.0: 0.55610720702492761129,
    2.0: 0.39666478407412187898,
    5.0: 0.25192418235400032489,
}


def mu_oracle(w):
    mpmath.mp.dps = 40
    x = 2 * mpmath.pi * w
    inner = mpmath.hyp1f2(0.5, 1, 1.5, -mpmath.pi ** 2 * w ** 2) - mpmath.besselj(1, x) / x
    return float(mpmath.sqrt(2 * inner))


# ---------------------------------------------------------------- correlation

@pytest.mark.parametrize("w", sorted(MU_FROZEN))
def test_mu_frozen(w):
    assert correlation_mu(w) == pytest.approx(MU_FROZEN[w], rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 6.0))
def test_mu_matches_oracle(w):
    assert correlation_mu(w) == pytest.approx(mu_oracle(w), abs=1e-11)


def test_mu_small_aperture_limit():
    assert correlation_mu(1e-9) == pytest.approx(1.0, abs=1e-12)
    assert correlation_mu(1e-4) <= 1.0


def test_mu_half_between():
    assert correlation_mu(5.0) < correlation_mu(0.5) < 1.0


def test_mu_strictly_decreasing_grid():
    grid = np.round(np.arange(0.1, 5.0001, 0.1), 10)
    values = [correlation_mu(w) for w in grid]
    assert np.all(np.diff(values) < 0)


@pytest.mark.parametrize("w", [0.0, -1.0, math.inf, math.nan])
def test_mu_rejects_bad_aperture(w):
    with pytest.raises(ValueError):
        correlation_mu(w)


# ---------------------------------------------------------------- units and thresholds

def test_dbm_to_mw():
    assert dbm_to_mw(0.0) == 1.0
    assert dbm_to_mw(-80.0) == pytest.approx(1e-8, rel=1e-15)
    assert dbm_to_mw(5.0) == pytest.approx(3.16228, rel=1e-6)


def test_gamma_thresholds():
    assert gamma_thresholds(SystemParams()) == (1.0, 1.0)
    assert gamma_thresholds(SystemParams(r1=2.0))[0] == 3.0
    g1, _ = gamma_thresholds(SystemParams(r1=1e-9))
    assert 0 < g1 < 1e-8


@pytest.mark.parametrize("key", ["d_c", "d_e", "theta", "r1", "r2"])
def test_params_positive(key):
    with pytest.raises(ValueError, match=key):
        SystemParams(**{key: 0.0})


def test_sigma_ratio():
    p = SystemParams()
    assert p.sigma2_c / p.sigma2_e == pytest.approx(3.375, rel=1e-14)


def test_fas_side_consistency(fig1):
    fig1.cu.check(400.0, 3.0)
    fig1.eu.check(600.0, 3.0)
    assert fig1.cu.mu == correlation_mu(5.0)
    bad = FasSide(4, 5.0, 0.3, 400.0 ** -3)
    with pytest.raises(ValueError):
        bad.check(400.0, 3.0)


def test_fas_side_validation():
    with pytest.raises(ValueError):
        FasSide(0, 1.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        FasSide(2, 1.0, 1.5, 1.0)
    with pytest.raises(ValueError):
        FasSide(2, 1.0, 0.5, 0.0)


def test_eta():
    side = FasSide(4, None, 0.0, 1.0)
    assert side.eta == 1.0
    mu = correlation_mu(5.0)
    assert FasSide.from_geometry(4, 5.0, 400.0, 3.0).eta == pytest.approx(
        (1 - mu ** 2) / (1 + 3 * mu ** 2))


def test_scenario_with_values(fig1):
    sc = fig1.with_values(n_c=2, p_dbm=10.0)
    assert sc.cu.n_ports == 2 and sc.params.p_dbm == 10.0
    with pytest.raises(KeyError):
        fig1.with_values(bogus=1)


def test_conventional_scenario(fig1):
    conv = fig1.conventional()
    assert conv.cu.n_ports == 1 and conv.cu.mu == 0.0
    assert conv.eu.sigma2 == fig1.eu.sigma2


# ---------------------------------------------------------------- NOMA design

def test_noma_boundary_equal_thresholds():
    p = SystemParams()
    d = noma_design(p, 1.0 / 3.0)
    assert d.phi1 == pytest.approx(d.phi2, rel=1e-14)
    assert d.regime is Regime.P1


def test_noma_infeasible():
    d = noma_design(SystemParams(), 0.6)
    assert d.regime is Regime.INFEASIBLE
    assert math.isinf(d.phi1)


def test_noma_phi2_value():
    d = noma_design(SystemParams(), 1.0 / 3.0)
    assert d.phi2 == pytest.approx(9.4868e-9, rel=1e-4)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
def test_noma_domain(alpha):
    with pytest.raises(ValueError):
        noma_design(SystemParams(), alpha)


@pytest.mark.parametrize("r1,r2", [(1.0, 1.0), (0.5, 1.5), (2.0, 0.7)])
def test_noma_regimes_exhaustive(r1, r2):
    p = SystemParams(r1=r1, r2=r2)
    for alpha in np.linspace(1e-3, 1 - 1e-3, 1000):
        d = noma_design(p, alpha)
        if alpha >= p.alpha_max:
            assert d.regime is Regime.INFEASIBLE
        elif d.regime is Regime.P1:
            assert alpha <= p.alpha_boundary and d.phi1 <= d.phi2 * (1 + 1e-14)
        else:
            assert alpha > p.alpha_boundary and d.phi1 > d.phi2


def test_noma_threshold_monotonicity():
    p = SystemParams()
    alphas = np.linspace(1e-3, p.alpha_max - 1e-3, 500)
    designs = [noma_design(p, a) for a in alphas]
    assert np.all(np.diff([d.phi2 for d in designs]) < 0)
    assert np.all(np.diff([d.phi1 for d in designs]) > 0)


# ---------------------------------------------------------------- OMA design

def test_oma_effective_threshold():
    p = SystemParams()
    d = oma_design(p, 0.5, 0.5)
    assert d.psi2 * p.p_mw * 0.5 / p.noise_mw == pytest.approx(3.0)


def test_oma_psi1_value():
    p = SystemParams(p_dbm=0.0)
    assert oma_design(p, 0.5, 0.5).psi1 == pytest.approx(6e-8, rel=1e-12)


def test_oma_beta_to_one_overflows_to_inf():
    d = oma_design(SystemParams(), 0.5, 1.0 - 1e-12)
    assert math.isinf(d.psi2) or d.psi2 > 1e200


@settings(max_examples=50)
@given(st.floats(0.01, 0.99), st.floats(0.05, 0.95), st.floats(0.1, 3.0))
def test_oma_increasing_in_rate(alpha, beta, r):
    lo = oma_design(SystemParams(r1=r, r2=r), alpha, beta)
    hi = oma_design(SystemParams(r1=r * 1.1, r2=r * 1.1), alpha, beta)
    assert hi.psi1 > lo.psi1 and hi.psi2 > lo.psi2


@pytest.mark.parametrize("alpha,beta", [(0.0, 0.5), (0.5, 1.0), (1.2, 0.5)])
def test_oma_domain(alpha, beta):
    with pytest.raises(ValueError):
        oma_design(SystemParams(), alpha, beta)
