"""Min-max outage time/power allocation for OMA (TDMA) by successive convex approximation.

The objective is the closed-form approximation

    P_hat = eta * [1 - exp(-psi / (sigma^2 (1 - mu^2)))]^N

for both users.  With slack variables ``tau, a, b, c, d`` the epigraph problem
reads

    min tau  s.t.  1 - a <= (tau / eta_h)^(1/N_c),   1 - b <= (tau / eta_g)^(1/N_e),
                   ln a + c / s_h <= 0,              ln b + d / s_g <= 0,
                   2^(R1/beta) - 1 <= (P/sigma^2) alpha c,
                   2^(R2/(1-beta)) - 1 <= (P/sigma^2) (1 - alpha) d,

with ``s_h = sigma_h^2 (1 - mu_h^2)``.  Each round replaces ``ln`` by its
tangent and the convex half of each quarter-square product identity by its
tangent; both substitutions shrink the feasible set, so every iterate stays
feasible for the original constraints and ``tau`` cannot increase.

Internally the slacks ``c`` and ``d`` are carried in units of ``s_h`` and
``s_g`` (``u = c / s_h``, ``v = d / s_g``) and ``tau`` in units of its value at
the linearization point, so that every variable of the subproblem is of order
one and the barrier tolerance acts relative to the current objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .barrier import BarrierError, barrier_minimize
from .model import oma_design
from .noma import SolveReport
from .outage import DEFAULT_QUAD, oma_outage_pair
from .specfun import QuadratureSpec

__all__ = [
    "ScaConfig",
    "ScaState",
    "ScaSubproblem",
    "sca_initialize",
    "sca_linearize",
    "solve_subproblem",
    "sca_iterates",
    "sca_solve",
    "grid_oracle",
    "approx_objective",
]

_LN2 = math.log(2.0)
_INIT_MARGIN = 1e-3

# variable order in the subproblem vector
TAU, ALPHA, BETA, A, B, U, V = range(7)


@dataclass(frozen=True)
class ScaConfig:
    eps_tau: float = 1e-6
    max_outer: int = 50
    barrier_t0: float = 1.0
    barrier_mu: float = 20.0
    inner_tol: float = 1e-9
    box: float = 1e-6  # alpha, beta are confined to [box, 1 - box]
    relative: bool = False  # stop on |d tau| < eps_tau * tau instead of |d tau| < eps_tau

    def __post_init__(self):
        if min(self.eps_tau, self.barrier_t0, self.inner_tol) <= 0 or self.max_outer < 1:
            raise ValueError("SCA tolerances and iteration cap must be positive")
        if not self.barrier_mu > 1:
            raise ValueError("barrier_mu must exceed 1")
        if not 0 < self.box < 0.5:
            raise ValueError("box must lie in (0, 0.5)")


@dataclass(frozen=True)
class ScaState:
    """One SCA iterate; ``c`` and ``d`` are in the units of the thresholds psi."""

    tau: float
    alpha: float
    beta: float
    a: float
    b: float
    c: float
    d: float
    iteration: int = 0
    kkt_residual: float = 0.0


@dataclass(frozen=True)
class _Constants:
    k1: float  # P s_h / sigma^2
    k2: float  # P s_g / sigma^2
    s_h: float
    s_g: float
    eta_h: float
    eta_g: float
    n_c: int
    n_e: int
    r1: float
    r2: float

    @classmethod
    def from_scenario(cls, scenario) -> "_Constants":
        p, cu, eu = scenario.params, scenario.cu, scenario.eu
        for name, side in (("CU", cu), ("EU", eu)):
            if side.mu >= 1.0:
                raise ValueError(f"{name} ports are fully correlated (mu = 1); "
                                 "the outage approximation degenerates")
        s_h = cu.sigma2 * (1.0 - cu.mu ** 2)
        s_g = eu.sigma2 * (1.0 - eu.mu ** 2)
        return cls(k1=p.snr * s_h, k2=p.snr * s_g, s_h=s_h, s_g=s_g,
                   eta_h=cu.eta, eta_g=eu.eta, n_c=cu.n_ports, n_e=eu.n_ports,
                   r1=p.r1, r2=p.r2)


def _pow2(x):
    return np.exp2(np.minimum(x, 1023.0))


def _pow2_scalar(x: float) -> float:
    return 2.0 ** min(x, 1023.0)


@dataclass(frozen=True)
class ScaSubproblem:
    """Convex subproblem of one SCA round, linearized at ``point`` (scaled coordinates)."""

    const: _Constants
    point: np.ndarray
    box: float
    tau_scale: float = 1.0

    def values(self, x: np.ndarray) -> np.ndarray:
        """Constraint values only; the cheap path used by the line search."""
        k = self.const
        tau, al, be, a, b, u, v = (float(t) for t in x)
        a0, b0, al0, u0, v0 = (float(self.point[i]) for i in (A, B, ALPHA, U, V))
        s0 = al0 + u0
        d0 = al0 - v0
        ts = self.tau_scale
        lo, hi = self.box, 1.0 - self.box
        if tau > 0:
            root_h = (ts * tau / k.eta_h) ** (1.0 / k.n_c)
            root_g = (ts * tau / k.eta_g) ** (1.0 / k.n_e)
        else:
            root_h = root_g = 0.0
        return np.array([
            math.log(a0) + (a - a0) / a0 + u,
            math.log(b0) + (b - b0) / b0 + v,
            _pow2_scalar(k.r1 / be) - 1.0
            - k.k1 * (0.25 * s0 * s0 + 0.5 * s0 * (al - al0 + u - u0) - 0.25 * (al - u) ** 2),
            _pow2_scalar(k.r2 / (1.0 - be)) - 1.0
            - k.k2 * (v - 0.25 * (al + v) ** 2 + 0.25 * d0 * d0 + 0.5 * d0 * (al - al0 - v + v0)),
            1.0 - a - root_h,
            1.0 - b - root_g,
            tau - 1.0 / ts, -tau, lo - al, al - hi, lo - be, be - hi, -a, -b, -u, -v,
        ])

    def constraints(self, x: np.ndarray):
        """Values, gradients and Hessians of all ``f_i(x) <= 0`` constraints."""
        k = self.const
        tau, al, be, a, b, u, v = x
        a0, b0, al0, u0, v0 = (self.point[i] for i in (A, B, ALPHA, U, V))
        f = np.empty(16)
        J = np.zeros((16, 7))
        H = np.zeros((16, 7, 7))

        # tangent of ln a, ln b
        f[0] = math.log(a0) + (a - a0) / a0 + u
        J[0, A], J[0, U] = 1.0 / a0, 1.0
        f[1] = math.log(b0) + (b - b0) / b0 + v
        J[1, B], J[1, V] = 1.0 / b0, 1.0

        # 2^(R1/beta) - 1 <= k1 * [zeta(alpha, u) - (alpha - u)^2 / 4]
        s0 = al0 + u0
        g1 = _pow2_scalar(k.r1 / be)
        zeta = 0.25 * s0 * s0 + 0.5 * s0 * (al - al0 + u - u0)
        f[2] = g1 - 1.0 - k.k1 * (zeta - 0.25 * (al - u) ** 2)
        J[2, BETA] = -g1 * k.r1 * _LN2 / be ** 2
        J[2, ALPHA] = -k.k1 * (0.5 * s0 - 0.5 * (al - u))
        J[2, U] = -k.k1 * (0.5 * s0 + 0.5 * (al - u))
        H[2, BETA, BETA] = g1 * ((k.r1 * _LN2) ** 2 / be ** 4 + 2.0 * k.r1 * _LN2 / be ** 3)
        H[2, ALPHA, ALPHA] = H[2, U, U] = 0.5 * k.k1
        H[2, ALPHA, U] = H[2, U, ALPHA] = -0.5 * k.k1

        # 2^(R2/(1-beta)) - 1 <= k2 * [v - (alpha + v)^2 / 4 + xi(alpha, v)]
        w = 1.0 - be
        d0 = al0 - v0
        g2 = _pow2_scalar(k.r2 / w)
        xi = 0.25 * d0 * d0 + 0.5 * d0 * (al - al0 - v + v0)
        f[3] = g2 - 1.0 - k.k2 * (v - 0.25 * (al + v) ** 2 + xi)
        J[3, BETA] = g2 * k.r2 * _LN2 / w ** 2
        J[3, ALPHA] = -k.k2 * (-0.5 * (al + v) + 0.5 * d0)
        J[3, V] = -k.k2 * (1.0 - 0.5 * (al + v) - 0.5 * d0)
        H[3, BETA, BETA] = g2 * ((k.r2 * _LN2) ** 2 / w ** 4 + 2.0 * k.r2 * _LN2 / w ** 3)
        H[3, ALPHA, ALPHA] = H[3, V, V] = H[3, ALPHA, V] = H[3, V, ALPHA] = 0.5 * k.k2

        # 1 - a <= (tau / eta)^(1/N), kept exact (concave right-hand side)
        ts = self.tau_scale
        for row, var, eta, n in ((4, A, k.eta_h, k.n_c), (5, B, k.eta_g, k.n_e)):
            root = (ts * tau / eta) ** (1.0 / n) if tau > 0 else 0.0
            f[row] = 1.0 - x[var] - root
            J[row, var] = -1.0
            if tau > 0:
                J[row, TAU] = -root / (n * tau)
                H[row, TAU, TAU] = (n - 1) * root / (n * n * tau * tau)

        # tau in (0, 1]; alpha, beta in the box; remaining slacks positive
        lo, hi = self.box, 1.0 - self.box
        f[6], J[6, TAU] = tau - 1.0 / ts, 1.0
        f[7], J[7, TAU] = -tau, -1.0
        f[8], J[8, ALPHA] = lo - al, -1.0
        f[9], J[9, ALPHA] = al - hi, 1.0
        f[10], J[10, BETA] = lo - be, -1.0
        f[11], J[11, BETA] = be - hi, 1.0
        for row, var in ((12, A), (13, B), (14, U), (15, V)):
            f[row], J[row, var] = -x[var], -1.0
        return f, J, H

    def original_constraints(self, x: np.ndarray) -> np.ndarray:
        """The nonconvex constraints the surrogates replace, as ``g_i(x) <= 0``."""
        k = self.const
        tau, al, be, a, b, u, v = x
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.array([
                math.log(a) + u if a > 0 else math.inf,
                math.log(b) + v if b > 0 else math.inf,
                float(_pow2(k.r1 / be)) - 1.0 - k.k1 * al * u,
                float(_pow2(k.r2 / (1.0 - be))) - 1.0 - k.k2 * (1.0 - al) * v,
                1.0 - a - (self.tau_scale * tau / k.eta_h) ** (1.0 / k.n_c),
                1.0 - b - (self.tau_scale * tau / k.eta_g) ** (1.0 / k.n_e),
            ])


def _to_vector(state: ScaState, const: _Constants, tau_scale: float = 1.0) -> np.ndarray:
    return np.array([state.tau / tau_scale, state.alpha, state.beta, state.a, state.b,
                     state.c / const.s_h, state.d / const.s_g])


def _from_vector(x: np.ndarray, const: _Constants, iteration: int,
                 kkt: float = 0.0, tau_scale: float = 1.0) -> ScaState:
    return ScaState(tau=float(x[TAU]) * tau_scale, alpha=float(x[ALPHA]), beta=float(x[BETA]),
                    a=float(x[A]), b=float(x[B]), c=float(x[U]) * const.s_h,
                    d=float(x[V]) * const.s_g, iteration=iteration, kkt_residual=kkt)


def sca_initialize(scenario, alpha0: float = 0.5, beta0: float = 0.5) -> ScaState:
    """Strictly feasible starting point built around ``(alpha0, beta0)``."""
    const = _Constants.from_scenario(scenario)
    design = oma_design(scenario.params, alpha0, beta0)
    c = design.psi1 * (1.0 + _INIT_MARGIN)
    d = design.psi2 * (1.0 + _INIT_MARGIN)
    a = math.exp(-c / const.s_h) * (1.0 - _INIT_MARGIN)
    b = math.exp(-d / const.s_g) * (1.0 - _INIT_MARGIN)
    if not (a > 0.0 and b > 0.0):
        # exp(-x) underflows for x > ~745: outage is certain to double precision
        raise ValueError("starting point underflows (outage is numerically certain at "
                         f"alpha0={alpha0}, beta0={beta0}); the scenario is outside the "
                         "range the SCA reformulation can represent")
    tau = max(const.eta_h * (1.0 - a) ** const.n_c, const.eta_g * (1.0 - b) ** const.n_e)
    tau = min(tau * (1.0 + _INIT_MARGIN), 0.5 * (tau + 1.0))
    return ScaState(tau=tau, alpha=alpha0, beta=beta0, a=a, b=b, c=c, d=d)


def sca_linearize(scenario, state: ScaState, cfg: ScaConfig = ScaConfig()) -> ScaSubproblem:
    const = _Constants.from_scenario(scenario)
    if not 0.0 < state.tau <= 1.0:
        raise ValueError("linearization point must have tau in (0, 1]; "
                         "re-initialize with sca_initialize")
    point = _to_vector(state, const, state.tau)
    sub = ScaSubproblem(const, point, cfg.box, state.tau)
    if not np.all(sub.constraints(point)[0] < 0):
        raise ValueError("linearization point is not strictly feasible; "
                         "re-initialize with sca_initialize")
    return sub


def solve_subproblem(sub: ScaSubproblem, cfg: ScaConfig = ScaConfig(),
                     iteration: int = 1) -> ScaState:
    """Minimize ``tau`` over the convex subproblem, starting from its linearization point."""
    c = np.zeros(7)
    c[TAU] = 1.0
    res = barrier_minimize(c, sub.constraints, sub.point, values=sub.values, t0=cfg.barrier_t0,
                           mu=cfg.barrier_mu, tol=cfg.inner_tol)
    return _from_vector(res.x, sub.const, iteration, res.kkt_residual, sub.tau_scale)


def approx_objective(scenario, alpha, beta):
    """``max(P_hat_cu, P_hat_eu)`` at one point, or elementwise on arrays."""
    const = _Constants.from_scenario(scenario)
    p = scenario.params
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    with np.errstate(over="ignore"):
        gam1 = _pow2(p.r1 / beta) - 1.0
        gam2 = _pow2(p.r2 / (1.0 - beta)) - 1.0
    x1 = gam1 / (const.k1 * alpha)
    x2 = gam2 / (const.k2 * (1.0 - alpha))
    pc = const.eta_h * (-np.expm1(-x1)) ** const.n_c
    pe = const.eta_g * (-np.expm1(-x2)) ** const.n_e
    out = np.maximum(pc, pe)
    return float(out) if out.ndim == 0 else out


def sca_iterates(scenario, cfg: ScaConfig = ScaConfig()) -> tuple[list[ScaState], bool, tuple[str, ...]]:
    """Run SCA rounds until ``tau`` moves by less than ``cfg.eps_tau``.

    Returns every accepted iterate (the initial point first), whether the
    stopping rule was met, and diagnostic flags.
    """
    state = sca_initialize(scenario)
    states = [state]
    flags = []
    converged = False
    for it in range(1, cfg.max_outer + 1):
        sub = sca_linearize(scenario, state, cfg)
        try:
            new = solve_subproblem(sub, cfg, iteration=it)
        except BarrierError as exc:
            raise RuntimeError(f"SCA subproblem {it} failed: {exc}") from exc
        delta = new.tau - state.tau
        if delta > cfg.inner_tol * state.tau:
            raise RuntimeError(f"SCA objective increased by {delta:.3e} at round {it}")
        if delta > 0.0:
            # stall within solver tolerance
            flags.append("stalled")
            converged = True
            break
        state = new
        states.append(state)
        if -delta < (cfg.eps_tau * state.tau if cfg.relative else cfg.eps_tau):
            converged = True
            break

    edge = 10.0 * cfg.box
    if min(state.alpha, state.beta) < edge or max(state.alpha, state.beta) > 1.0 - edge:
        flags.append("boundary")
    return states, converged, tuple(flags)


def sca_solve(scenario, cfg: ScaConfig = ScaConfig(),
              quad: QuadratureSpec = DEFAULT_QUAD) -> SolveReport:
    """SCA solution of the OMA min-max problem.

    The report carries the surrogate objective ``tau`` (and its history, the
    initial value first) together with the exact outage pair recomputed at
    the returned ``(alpha, beta)``.
    """
    states, converged, flags = sca_iterates(scenario, cfg)
    final = states[-1]
    outage = oma_outage_pair(scenario, final.alpha, final.beta, quad)
    return SolveReport(method="sca", alpha=final.alpha, beta=final.beta, outage=outage,
                       iterations=len(states) - 1, converged=converged,
                       objective=final.tau, history=tuple(s.tau for s in states),
                       flags=flags)


def grid_oracle(scenario, step: float) -> tuple[float, float, float]:
    """Exhaustive minimum of the approximate objective over an ``(alpha, beta)`` grid."""
    if not 0 < step < 0.5:
        raise ValueError("step must lie in (0, 0.5)")
    n = int(math.floor((1.0 - 1e-12) / step))
    axis = step * np.arange(1, n + 1)
    axis = axis[axis < 1.0]
    al, be = np.meshgrid(axis, axis, indexing="ij")
    obj = approx_objective(scenario, al, be)
    i, j = np.unravel_index(int(np.argmin(obj)), obj.shape)
    return float(axis[i]), float(axis[j]), float(obj[i, j])

