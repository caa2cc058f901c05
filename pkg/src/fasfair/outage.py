"""Outage probabilities of a best-port fluid-antenna receiver.

Given the reference-port gain ``t = |h0|^2 / sigma^2 ~ Exp(1)``, each port is
Rician and the ports are conditionally independent, so

    P(|h_max|^2 <= x) = int_0^inf e^-t [1 - Q1(a sqrt(t), b)]^N dt

with ``a = sqrt(2 mu^2 / (1 - mu^2))`` and ``b = sqrt(2 x / (sigma^2 (1 - mu^2)))``.
Every exact evaluator below reduces to :func:`best_port_outage`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import FasSide, NomaDesign, Regime, noma_design, oma_design
from .specfun import QuadratureSpec, integrate_exp_weighted, marcum_q1_pair

__all__ = [
    "OutagePair",
    "ApproxParams",
    "DEFAULT_QUAD",
    "best_port_outage",
    "noma_outage_cu",
    "noma_outage_cu_phi1",
    "noma_outage_cu_phi2",
    "noma_outage_eu",
    "noma_outage_pair",
    "oma_outage",
    "oma_outage_pair",
    "noma_outage_approx",
    "oma_outage_approx",
    "approx_params",
]

DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class OutagePair:
    p_cu: float
    p_eu: float

    @property
    def p_max(self) -> float:
        return max(self.p_cu, self.p_eu)


@dataclass(frozen=True)
class ApproxParams:
    eta_h: float
    eta_g: float


def approx_params(cu: FasSide, eu: FasSide) -> ApproxParams:
    return ApproxParams(cu.eta, eu.eta)


def best_port_outage(side: FasSide, threshold: float,
                     quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Probability that the best of ``side.n_ports`` correlated ports has gain <= ``threshold``."""
    threshold = float(threshold)
    if math.isnan(threshold):
        raise ValueError("threshold is NaN")
    if threshold <= 0.0:
        return 0.0
    if math.isinf(threshold):
        return 1.0
    x = threshold / side.sigma2
    n = side.n_ports
    m2 = side.mu ** 2
    if m2 >= 1.0:
        # fully correlated: every port equals the reference port
        return -math.expm1(-x)

    a = math.sqrt(2.0 * m2 / (1.0 - m2))
    b = math.sqrt(2.0 * x / (1.0 - m2))

    def integrand(t):
        _, p = marcum_q1_pair(a * np.sqrt(t), b)
        with np.errstate(divide="ignore"):
            return np.exp(n * np.log(p))

    return integrate_exp_weighted(integrand, quad, clamp=True).value


def noma_outage_cu_phi1(cu: FasSide, design: NomaDesign,
                        quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """CU outage when SIC of the EU message is the binding step."""
    return best_port_outage(cu, design.phi1, quad)


def noma_outage_cu_phi2(cu: FasSide, design: NomaDesign,
                        quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """CU outage when decoding its own message is the binding step."""
    return best_port_outage(cu, design.phi2, quad)


def noma_outage_cu(cu: FasSide, design: NomaDesign,
                   quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    if design.regime is Regime.INFEASIBLE:
        return 1.0
    return best_port_outage(cu, max(design.phi1, design.phi2), quad)


def noma_outage_eu(eu: FasSide, design: NomaDesign,
                   quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    if design.regime is Regime.INFEASIBLE:
        return 1.0
    return best_port_outage(eu, design.phi1, quad)


def noma_outage_pair(scenario, alpha: float,
                     quad: QuadratureSpec = DEFAULT_QUAD) -> OutagePair:
    design = noma_design(scenario.params, alpha)
    return OutagePair(noma_outage_cu(scenario.cu, design, quad),
                      noma_outage_eu(scenario.eu, design, quad))


def oma_outage(side: FasSide, psi: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    if not psi > 0:
        raise ValueError("psi must be positive")
    return best_port_outage(side, psi, quad)


def oma_outage_pair(scenario, alpha: float, beta: float,
                    quad: QuadratureSpec = DEFAULT_QUAD) -> OutagePair:
    design = oma_design(scenario.params, alpha, beta)
    return OutagePair(oma_outage(scenario.cu, design.psi1, quad),
                      oma_outage(scenario.eu, design.psi2, quad))


def noma_outage_approx(side: FasSide, phi: float) -> float:
    """``1 - N exp(-phi / sigma^2)``.

    Deliberately unclamped: it goes negative for small ``phi`` and is meant
    for root finding, not for reporting.
    """
    return 1.0 - side.n_ports * math.exp(-phi / side.sigma2)


def oma_outage_approx(side: FasSide, psi: float, eta: float | None = None) -> float:
    """``eta * [1 - exp(-psi / (sigma^2 (1 - mu^2)))]^N``; lies in ``[0, eta]``."""
    m2 = side.mu ** 2
    if m2 >= 1.0:
        raise ValueError("approximation is degenerate for fully correlated ports (mu = 1)")
    if eta is None:
        eta = side.eta
    if math.isinf(psi):
        return eta
    base = -math.expm1(-psi / (side.sigma2 * (1.0 - m2)))
    return eta * base ** side.n_ports

