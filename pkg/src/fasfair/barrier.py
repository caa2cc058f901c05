"""Log-barrier interior-point method for small smooth convex programs.

Solves ``min c @ x  s.t.  f_i(x) <= 0`` from a strictly feasible start using
damped Newton centering steps and a geometric barrier schedule.  Intended for
a handful of variables, so the Newton system is solved densely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["BarrierError", "BarrierResult", "barrier_minimize"]

# returns (f, J, H): f of shape (m,), J of shape (m, n), H of shape (m, n, n)
ConstraintFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


class BarrierError(RuntimeError):
    def __init__(self, message: str, x: np.ndarray):
        super().__init__(message)
        self.x = x


@dataclass(frozen=True)
class BarrierResult:
    x: np.ndarray
    t: float
    gap: float  # m / t, bound on the suboptimality of x
    newton_steps: int
    kkt_residual: float


def _phi(c, x, f, t):
    return t * float(c @ x) - float(np.sum(np.log(-f)))


def _newton_direction(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Solve ``hess dx = -grad`` robustly.

    Near-active constraints make the Hessian badly scaled (entries ~ 1/f^2),
    so the system is solved after symmetric diagonal scaling.  If roundoff
    still yields a non-descent direction, the scaled system is shifted by a
    growing multiple of the identity.
    """
    d = np.sqrt(np.maximum(np.abs(np.diag(hess)), np.finfo(float).tiny))
    hs = hess / np.outer(d, d)
    gs = grad / d
    shift = 0.0
    for _ in range(20):
        try:
            ys = np.linalg.solve(hs + shift * np.eye(len(gs)), -gs)
        except np.linalg.LinAlgError:
            ys = np.linalg.lstsq(hs + shift * np.eye(len(gs)), -gs, rcond=None)[0]
        if np.all(np.isfinite(ys)) and float(gs @ ys) < 0.0:
            return ys / d
        shift = 1e-12 if shift == 0.0 else 10.0 * shift
    # steepest descent in the scaled metric
    return -gs / d


def barrier_minimize(c: np.ndarray, constraints: ConstraintFn, x0: np.ndarray, *,
                     values: Callable[[np.ndarray], np.ndarray] | None = None,
                     t0: float = 1.0, mu: float = 20.0, tol: float = 1e-9,
                     armijo: float = 0.25, shrink: float = 0.5,
                     newton_tol: float = 1e-10, max_newton: int = 100,
                     max_outer: int = 60) -> BarrierResult:
    """Minimize ``c @ x`` subject to ``constraints(x)[0] < 0``.

    ``values``, if given, returns the constraint values alone and is used in
    the line search in place of the full ``constraints`` call.
    """
    if values is None:
        def values(z):
            return constraints(z)[0]
    c = np.asarray(c, dtype=float)
    x = np.array(x0, dtype=float)
    f, J, H = constraints(x)
    if not np.all(f < 0):
        raise BarrierError("starting point is not strictly feasible", x)
    m = f.size
    t = t0
    steps = 0
    for _ in range(max_outer):
        for _ in range(max_newton):
            inv = -1.0 / f
            grad = t * c + J.T @ inv
            hess = (J.T * inv ** 2) @ J + np.einsum("i,ijk->jk", inv, H)
            dx = _newton_direction(hess, grad)
            decrement = -float(grad @ dx)
            if not np.isfinite(decrement):
                raise BarrierError("Newton step is not finite", x)
            if decrement / 2.0 <= newton_tol:
                break
            phi0 = _phi(c, x, f, t)
            s = 1.0
            while True:
                x_new = x + s * dx
                f_new = values(x_new)
                if np.all(f_new < 0) and np.all(np.isfinite(f_new)):
                    if _phi(c, x_new, f_new, t) <= phi0 - armijo * s * decrement:
                        break
                s *= shrink
                if s < 1e-20:
                    break
            if s < 1e-20:
                # no progress possible at this t; numerical floor reached
                break
            x = x_new
            f, J, H = constraints(x)
            steps += 1
        if m / t < tol:
            break
        t *= mu
    else:
        raise BarrierError("barrier schedule exhausted before reaching tolerance", x)

    dual = -1.0 / (t * f)
    kkt = float(np.linalg.norm(c + J.T @ dual))
    return BarrierResult(x=x, t=t, gap=m / t, newton_steps=steps, kkt_residual=kkt)
