"""Min-max outage power allocation for two-user NOMA.

Three solvers are provided:

* :func:`solve_special_case` -- closed form, optimal when both users have the
  same port count and correlation;
* :func:`solve_general_bisection` -- exact optimum in general, by bisection on
  ``P_c(phi2) - P_e`` over the regime where the CU is limited by its own
  message;
* :func:`solve_theorem1` -- closed form built on the ``1 - N e^{-x}``
  approximation of the best-port outage.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

from .model import noma_design
from .outage import (DEFAULT_QUAD, OutagePair, noma_outage_cu, noma_outage_cu_phi2,
                     noma_outage_eu)
from .specfun import QuadratureSpec

__all__ = [
    "SolveReport",
    "Theorem1Coeffs",
    "ALPHA_FLOOR",
    "special_case_alpha",
    "solve_special_case",
    "solve_general_bisection",
    "theorem1_coeffs",
    "theorem1_roots",
    "solve_theorem1",
]

# alpha = 0 is singular (phi2 -> inf); bisection works on [ALPHA_FLOOR, alpha_B]
ALPHA_FLOOR = 1e-9


@dataclass(frozen=True)
class SolveReport:
    method: str
    alpha: float
    outage: OutagePair
    iterations: int = 0
    converged: bool = True
    beta: Optional[float] = None
    bracket: Optional[tuple[float, float]] = None
    objective: Optional[float] = None  # surrogate objective (SCA only)
    history: tuple[float, ...] = ()
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class Theorem1Coeffs:
    a1: float
    b1: float
    c1: float
    d1: float


def _exact_report(scenario, method, alpha, quad, **extra) -> SolveReport:
    design = noma_design(scenario.params, alpha)
    outage = OutagePair(noma_outage_cu(scenario.cu, design, quad),
                        noma_outage_eu(scenario.eu, design, quad))
    return SolveReport(method=method, alpha=alpha, outage=outage, **extra)


def special_case_alpha(scenario) -> float:
    p = scenario.params
    g1, g2 = p.gamma1, p.gamma2
    return 1.0 / (1.0 + g2 + g2 * scenario.cu.sigma2 / (g1 * scenario.eu.sigma2))


def solve_special_case(scenario, quad: QuadratureSpec = DEFAULT_QUAD) -> SolveReport:
    """Closed-form split that equalizes ``phi2 / sigma_h^2`` and ``phi1 / sigma_g^2``.

    Optimal only when both users have equal port counts and correlations; for
    other inputs the same formula is returned (useful as a baseline) with a
    warning.
    """
    cu, eu = scenario.cu, scenario.eu
    flags = ()
    if cu.n_ports != eu.n_ports or cu.mu != eu.mu:
        warnings.warn("special-case closed form applied to unequal users; "
                      "the result is not the min-max optimum", stacklevel=2)
        flags = ("premises_violated",)
    return _exact_report(scenario, "special_closed", special_case_alpha(scenario), quad,
                         flags=flags)


def solve_general_bisection(scenario, tol_alpha: float = 1e-8,
                            quad: QuadratureSpec = DEFAULT_QUAD) -> SolveReport:
    """Exact min-max split for arbitrary port counts and correlations.

    Let ``g(alpha) = P_c(phi2) - P_e`` with ``P_c(phi2)`` decreasing and
    ``P_e`` increasing in alpha.  If ``g >= 0`` at the regime boundary
    ``alpha_B`` the boundary is optimal; otherwise the unique root of ``g`` in
    ``(0, alpha_B)`` is bracketed to ``tol_alpha`` and its midpoint returned.
    """
    if not tol_alpha > 0:
        raise ValueError("tol_alpha must be positive")
    params, cu, eu = scenario.params, scenario.cu, scenario.eu

    def g(alpha):
        design = noma_design(params, alpha)
        return noma_outage_cu_phi2(cu, design, quad) - noma_outage_eu(eu, design, quad)

    alpha_b = params.alpha_boundary
    if g(alpha_b) >= 0.0:
        return _exact_report(scenario, "bisection", alpha_b, quad, flags=("boundary",))

    lo, hi = ALPHA_FLOOR, alpha_b
    if g(lo) <= 0.0:
        raise RuntimeError("bisection bracket failure: P_c(phi2) <= P_e at both ends")
    iterations = 0
    while hi - lo > tol_alpha:
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return _exact_report(scenario, "bisection", 0.5 * (lo + hi), quad,
                         iterations=iterations, bracket=(lo, hi))


def theorem1_coeffs(scenario) -> Theorem1Coeffs:
    p, cu, eu = scenario.params, scenario.cu, scenario.eu
    inv_snr = p.noise_mw / p.p_mw
    return Theorem1Coeffs(
        a1=math.log(eu.n_ports / cu.n_ports),
        b1=p.gamma1 * inv_snr / cu.sigma2,
        c1=p.gamma2 * inv_snr / eu.sigma2,
        d1=1.0 + p.gamma2,
    )


def theorem1_roots(coeffs: Theorem1Coeffs) -> tuple[float, float]:
    """Roots of ``a1 d1 x^2 + (b1 d1 + c1 - a1) x - b1 = 0``.

    Follows the ``+`` / ``-`` ordering of the usual quadratic formula; a
    non-real or negative root is reported as ``+inf``.
    """
    a1, b1, c1, d1 = coeffs.a1, coeffs.b1, coeffs.c1, coeffs.d1
    qa = a1 * d1
    qb = b1 * d1 + c1 - a1
    qc = -b1
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        return math.inf, math.inf
    sq = math.sqrt(disc)
    # cancellation-free pairing: one root from the formula, the other from Vieta
    q = -0.5 * (qb + math.copysign(sq, qb))
    r_q = q / qa
    r_c = qc / q if q != 0.0 else math.inf
    plus, minus = (r_c, r_q) if qb >= 0.0 else (r_q, r_c)
    return tuple(r if r >= 0.0 else math.inf for r in (plus, minus))


def solve_theorem1(scenario, quad: QuadratureSpec = DEFAULT_QUAD) -> SolveReport:
    """Closed-form split from the approximate outage ``1 - N exp(-phi / sigma^2)``."""
    coeffs = theorem1_coeffs(scenario)
    if scenario.cu.n_ports == scenario.eu.n_ports:
        alpha = special_case_alpha(scenario)
    else:
        alpha_b = scenario.params.alpha_boundary
        r1, r2 = theorem1_roots(coeffs)
        alpha = min(min(max(r1, 0.0), alpha_b), min(max(r2, 0.0), alpha_b))
    return _exact_report(scenario, "theorem1_closed", alpha, quad)
