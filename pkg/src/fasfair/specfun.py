"""Special functions used by the best-port outage integrals.

Bessel functions come from :mod:`scipy.special`; the first-order Marcum Q
function, the ``1F2`` series and the exponentially weighted quadrature are
implemented here because scipy either lacks them or exposes them only through
distribution objects with different accuracy trade-offs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import linalg, special

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "QuadratureWarning",
    "bessel_j1",
    "bessel_i0",
    "bessel_i0e",
    "hyp1f2",
    "marcum_q1",
    "marcum_q1_pair",
    "integrate_exp_weighted",
]

# log(max double); I0(z) ~ e^|z| / sqrt(2 pi |z|) overflows just above this
_LOG_DBL_MAX = math.log(np.finfo(float).max)

_HYP_MAX_TERMS = 10_000
_MARCUM_BLOCK = 32
_MARCUM_MAX_TERMS = 20_000


class QuadratureWarning(RuntimeWarning):
    """Quadrature refinement stopped before meeting ``abs_tol``."""


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def bessel_j1(x: float) -> float:
    """Bessel function of the first kind of order one."""
    return float(special.j1(_require_finite("x", x)))


def bessel_i0e(z: float) -> float:
    """Exponentially scaled modified Bessel function ``I0(z) * exp(-|z|)``."""
    return float(special.i0e(_require_finite("z", z)))


def bessel_i0(z: float) -> float:
    """Modified Bessel function of the first kind of order zero.

    For ``|z| > 700`` the value is assembled from the scaled form in log space.
    Raises ``OverflowError`` when the result is not representable; use
    :func:`bessel_i0e` in that regime.
    """
    z = abs(_require_finite("z", z))
    if z < 1e-3:
        # the library routine rounds just below 1 near the origin
        z2 = z * z
        return 1.0 + z2 / 4.0 + z2 * z2 / 64.0
    if z <= 700.0:
        return float(special.i0(z))
    log_val = math.log(special.i0e(z)) + z
    if log_val >= _LOG_DBL_MAX:
        raise OverflowError(f"I0({z}) exceeds double range; use bessel_i0e")
    return math.exp(log_val)


def _pochhammer_ok(b: float) -> bool:
    return not (b <= 0 and float(b).is_integer())


def hyp1f2(a: float, b1: float, b2: float, z: float) -> float:
    """Generalized hypergeometric function ``1F2(a; b1, b2; z)``.

    The series is summed forward with Kahan compensation.  When the largest
    term dwarfs the sum (alternating series with large ``|z|``) the rounding
    in individual terms would dominate, so the same series is re-summed in
    exact rational arithmetic and rounded once.
    """
    a, b1, b2, z = (_require_finite(n, v) for n, v in
                    (("a", a), ("b1", b1), ("b2", b2), ("z", z)))
    if not (_pochhammer_ok(b1) and _pochhammer_ok(b2)):
        raise ValueError("b1 and b2 must not be non-positive integers")
    if z == 0.0:
        return 1.0

    total, comp, term, biggest = 1.0, 0.0, 1.0, 1.0
    for k in range(_HYP_MAX_TERMS):
        term *= (a + k) * z / ((b1 + k) * (b2 + k) * (k + 1))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        biggest = max(biggest, abs(term))
        if term == 0.0 or (abs(term) < 1e-16 * max(abs(total), 1e-300)
                           and abs(term) < 1e-16):
            break
    else:
        raise ValueError(f"1F2 series did not converge in {_HYP_MAX_TERMS} terms")

    # relative error budget lost to cancellation
    if biggest * 1e-16 > 1e-13 * abs(total):
        return _hyp1f2_exact(a, b1, b2, z)
    return total


def _hyp1f2_exact(a: float, b1: float, b2: float, z: float) -> float:
    fa, fb1, fb2, fz = (Fraction(v) for v in (a, b1, b2, z))
    total = Fraction(1)
    term = Fraction(1)
    for k in range(_HYP_MAX_TERMS):
        term = term * (fa + k) * fz / ((fb1 + k) * (fb2 + k) * (k + 1))
        total += term
        if term == 0:
            return float(total)
        # past the peak; stop once the tail cannot move the double result
        if k > 2 * math.sqrt(abs(z)) + 10 and abs(term) < abs(total) * Fraction(1, 10**20):
            return float(total)
    raise ValueError(f"1F2 series did not converge in {_HYP_MAX_TERMS} terms")


def marcum_q1_pair(a, b):
    """Return ``(Q1(a, b), 1 - Q1(a, b))`` with the smaller one computed directly.

    Works elementwise on broadcastable arrays.  For ``b > a`` the series

        Q1 = exp(-(b-a)^2/2) * sum_{k>=0} (a/b)^k Ie_k(ab)

    is summed; otherwise the complement

        1 - Q1 = exp(-(a-b)^2/2) * sum_{k>=1} (b/a)^k Ie_k(ab)

    where ``Ie_k`` is the exponentially scaled modified Bessel function.  Both
    series have nonnegative terms, so there is no cancellation.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(~np.isfinite(b)):
        raise ValueError("Marcum Q arguments must be finite")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("Marcum Q arguments must be nonnegative")
    a, b = np.broadcast_arrays(a, b)
    shape = a.shape
    a = a.ravel()
    b = b.ravel()

    upper = b > a  # sum Q directly
    big = np.where(upper, b, a)
    small = np.where(upper, a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(big > 0, small / big, 0.0)
    x = a * b
    scale = np.exp(-0.5 * (big - small) ** 2)

    total = np.zeros_like(a)
    active = scale > 0
    k0 = 0
    while np.any(active) and k0 < _MARCUM_MAX_TERMS:
        k = np.arange(k0, k0 + _MARCUM_BLOCK, dtype=float)[:, None]
        idx = np.nonzero(active)[0]
        with np.errstate(under="ignore"):
            terms = ratio[idx] ** k * special.ive(k, x[idx])
        # the complementary series starts at k = 1
        if k0 == 0:
            terms[0] = np.where(upper[idx], terms[0], 0.0)
        total[idx] += terms.sum(axis=0)
        last = terms[-1]
        done = last <= 1e-15 * total[idx]
        # Ie_k(x) is decreasing in k only once k exceeds ~sqrt(x)
        done &= k0 + _MARCUM_BLOCK > np.sqrt(x[idx])
        active[idx[done]] = False
        k0 += _MARCUM_BLOCK
    if np.any(active):
        raise ArithmeticError("Marcum Q series did not converge")

    tail = np.clip(scale * total, 0.0, 1.0)
    q = np.where(upper, tail, 1.0 - tail)
    p = np.where(upper, 1.0 - tail, tail)
    return q.reshape(shape), p.reshape(shape)


def marcum_q1(a, b):
    """First-order Marcum Q function ``Q1(a, b)`` for ``a, b >= 0``.

    Scalars in give a float back; arrays are handled elementwise.
    """
    q, _ = marcum_q1_pair(a, b)
    return float(q) if q.ndim == 0 else q


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Laguerre settings for integrals of the form ``int_0^inf e^-t f(t) dt``."""

    node_count: int = 96
    abs_tol: float = 1e-9
    max_refinements: int = 1

    def __post_init__(self):
        if int(self.node_count) != self.node_count or self.node_count < 8:
            raise ValueError("node_count must be an integer >= 8")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if int(self.max_refinements) != self.max_refinements or self.max_refinements < 1:
            raise ValueError("max_refinements must be a positive integer")


@dataclass(frozen=True)
class QuadResult:
    value: float
    change: float  # |difference| between the last two estimates
    node_count: int
    converged: bool


@lru_cache(maxsize=16)
def _laguerre(n: int):
    with np.errstate(over="ignore", invalid="ignore"):
        nodes, weights = special.roots_laguerre(n)
    if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
        # the library's Newton polish overflows for large n; fall back to Golub-Welsch
        k = np.arange(n, dtype=float)
        nodes, vectors = linalg.eigh_tridiagonal(2.0 * k + 1.0, k[1:])
        weights = vectors[0] ** 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def integrate_exp_weighted(f: Callable[[np.ndarray], np.ndarray],
                           spec: QuadratureSpec = QuadratureSpec(),
                           clamp: bool = False) -> QuadResult:
    """Estimate ``int_0^inf exp(-t) f(t) dt`` by Gauss-Laguerre quadrature.

    ``f`` must accept an array of nodes.  The rule is doubled until two
    successive estimates agree to ``spec.abs_tol`` or ``spec.max_refinements``
    doublings have been spent; in the latter case a :class:`QuadratureWarning`
    is issued and ``converged`` is False.  ``clamp`` restricts the result to
    ``[0, 1]`` for probability-valued integrands.
    """
    n = spec.node_count
    nodes, weights = _laguerre(n)
    prev = float(np.dot(weights, f(nodes)))
    change = math.inf
    for _ in range(spec.max_refinements):
        n *= 2
        nodes, weights = _laguerre(n)
        cur = float(np.dot(weights, f(nodes)))
        change = abs(cur - prev)
        prev = cur
        if change <= spec.abs_tol:
            break
    if not math.isfinite(prev):
        raise ArithmeticError("quadrature produced a non-finite value")
    converged = change <= spec.abs_tol
    if not converged:
        warnings.warn(f"quadrature change {change:.3e} exceeds abs_tol {spec.abs_tol:.1e} "
                      f"at {n} nodes", QuadratureWarning, stacklevel=2)
    value = min(max(prev, 0.0), 1.0) if clamp else prev
    return QuadResult(value, change, n, converged)
