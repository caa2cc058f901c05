"""Scenario parameterization: powers, channel statistics and decoding thresholds.

All powers are handled internally in milliwatts.  Channel variances follow the
pure path-loss convention ``sigma^2 = d ** -theta``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .specfun import bessel_j1, hyp1f2

__all__ = [
    "SystemParams",
    "FasSide",
    "Scenario",
    "NomaDesign",
    "OmaDesign",
    "Regime",
    "correlation_mu",
    "dbm_to_mw",
    "gamma_thresholds",
    "noma_design",
    "oma_design",
]


def dbm_to_mw(x_dbm: float) -> float:
    return 10.0 ** (x_dbm / 10.0)


def correlation_mu(w: float) -> float:
    """Port correlation coefficient for a linear aperture of ``w`` wavelengths.

    ``mu = sqrt(2) * sqrt(1F2(1/2; 1, 3/2; -pi^2 w^2) - J1(2 pi w) / (2 pi w))``
    """
    w = float(w)
    if not (w > 0 and math.isfinite(w)):
        raise ValueError(f"aperture must be positive and finite, got {w!r}")
    x = 2.0 * math.pi * w
    f = hyp1f2(0.5, 1.0, 1.5, -(math.pi * w) ** 2)
    # J1(x)/x -> 1/2 - x^2/16; the library J1 loses relative accuracy below ~1e-8
    j1_over_x = 0.5 - x * x / 16.0 if x < 1e-6 else bessel_j1(x) / x
    inner = f - j1_over_x
    if inner < 0.0:
        if inner < -1e-12:
            raise ArithmeticError(f"negative correlation radicand {inner!r} at w={w}")
        inner = 0.0
    return min(math.sqrt(2.0 * inner), 1.0)


@dataclass(frozen=True)
class SystemParams:
    """Scenario-wide constants.  Defaults are the baseline scenario of ``fig 1``."""

    p_dbm: float = 5.0
    noise_dbm: float = -80.0
    d_c: float = 400.0
    d_e: float = 600.0
    theta: float = 3.0
    r1: float = 1.0
    r2: float = 1.0

    def __post_init__(self):
        for key in ("p_dbm", "noise_dbm", "d_c", "d_e", "theta", "r1", "r2"):
            value = getattr(self, key)
            if not math.isfinite(value):
                raise ValueError(f"{key} must be finite")
        for key in ("d_c", "d_e", "theta", "r1", "r2"):
            if getattr(self, key) <= 0:
                raise ValueError(f"{key} must be positive")

    @property
    def p_mw(self) -> float:
        return dbm_to_mw(self.p_dbm)

    @property
    def noise_mw(self) -> float:
        return dbm_to_mw(self.noise_dbm)

    @property
    def snr(self) -> float:
        """Transmit SNR ``P / sigma^2`` (linear)."""
        return self.p_mw / self.noise_mw

    @property
    def gamma1(self) -> float:
        return 2.0 ** self.r1 - 1.0

    @property
    def gamma2(self) -> float:
        return 2.0 ** self.r2 - 1.0

    @property
    def sigma2_c(self) -> float:
        return self.d_c ** -self.theta

    @property
    def sigma2_e(self) -> float:
        return self.d_e ** -self.theta

    @property
    def alpha_boundary(self) -> float:
        """Power split at which both CU thresholds coincide."""
        g1, g2 = self.gamma1, self.gamma2
        return 1.0 / (1.0 + g2 + g2 / g1)

    @property
    def alpha_max(self) -> float:
        """Supremum of power splits for which the EU message is decodable."""
        return 1.0 / (1.0 + self.gamma2)


def gamma_thresholds(params: SystemParams) -> tuple[float, float]:
    return params.gamma1, params.gamma2


@dataclass(frozen=True)
class FasSide:
    """One receiver: port count, aperture (wavelengths), correlation and variance.

    ``w_aperture`` is None for a conventional fixed antenna, which is modelled
    as a single uncorrelated port.
    """

    n_ports: int
    w_aperture: Optional[float]
    mu: float
    sigma2: float

    def __post_init__(self):
        if int(self.n_ports) != self.n_ports or self.n_ports < 1:
            raise ValueError("n_ports must be an integer >= 1")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must lie in [0, 1]")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.w_aperture is not None and not self.w_aperture > 0:
            raise ValueError("w_aperture must be positive")

    @classmethod
    def from_geometry(cls, n_ports: int, w_aperture: float, distance: float,
                      theta: float) -> "FasSide":
        return cls(int(n_ports), float(w_aperture), correlation_mu(w_aperture),
                   distance ** -theta)

    @classmethod
    def conventional(cls, distance: float, theta: float) -> "FasSide":
        return cls(1, None, 0.0, distance ** -theta)

    @property
    def eta(self) -> float:
        """Scale factor of the closed-form best-port outage approximation."""
        m2 = self.mu ** 2
        return (1.0 - m2) / (1.0 + (self.n_ports - 1) * m2)

    def check(self, distance: float, theta: float) -> None:
        """Recompute derived fields and raise if they disagree with the stored ones."""
        if self.w_aperture is not None:
            mu = correlation_mu(self.w_aperture)
            if abs(mu - self.mu) > 1e-12:
                raise ValueError(f"stored mu {self.mu} != correlation_mu {mu}")
        s2 = distance ** -theta
        if abs(s2 - self.sigma2) > 1e-12 * s2:
            raise ValueError(f"stored sigma2 {self.sigma2} != d^-theta {s2}")


@dataclass(frozen=True)
class Scenario:
    """System constants plus the central-user (``cu``) and edge-user (``eu``) receivers."""

    params: SystemParams = field(default_factory=SystemParams)
    n_c: int = 4
    n_e: int = 4
    w_c: float = 5.0
    w_e: float = 5.0
    cu: FasSide = field(init=False, repr=False, compare=False)
    eu: FasSide = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = self.params
        object.__setattr__(self, "cu", FasSide.from_geometry(self.n_c, self.w_c, p.d_c, p.theta))
        object.__setattr__(self, "eu", FasSide.from_geometry(self.n_e, self.w_e, p.d_e, p.theta))

    @classmethod
    def from_values(cls, **values) -> "Scenario":
        side_keys = {"n_c", "n_e", "w_c", "w_e"}
        sides = {k: values.pop(k) for k in list(values) if k in side_keys}
        return cls(SystemParams(**values), **sides)

    def to_values(self) -> dict:
        p = self.params
        return {
            "p_dbm": p.p_dbm, "noise_dbm": p.noise_dbm, "d_c": p.d_c, "d_e": p.d_e,
            "theta": p.theta, "r1": p.r1, "r2": p.r2,
            "n_c": self.n_c, "n_e": self.n_e, "w_c": self.w_c, "w_e": self.w_e,
        }

    def with_values(self, **changes) -> "Scenario":
        values = self.to_values()
        unknown = set(changes) - set(values)
        if unknown:
            raise KeyError(f"unknown scenario keys: {sorted(unknown)}")
        values.update(changes)
        return Scenario.from_values(**values)

    def conventional(self) -> "ConventionalScenario":
        """Same scenario with single fixed antennas at both users."""
        return ConventionalScenario(self.params)


@dataclass(frozen=True)
class ConventionalScenario:
    """Single fixed antenna at each user; quacks like :class:`Scenario` for the solvers."""

    params: SystemParams = field(default_factory=SystemParams)

    @property
    def cu(self) -> FasSide:
        return FasSide.conventional(self.params.d_c, self.params.theta)

    @property
    def eu(self) -> FasSide:
        return FasSide.conventional(self.params.d_e, self.params.theta)

    def with_values(self, **changes) -> "ConventionalScenario":
        return ConventionalScenario(replace(self.params, **changes))


class Regime(enum.Enum):
    P1 = "P1"  # phi1 <= phi2: the CU is limited by its own message
    P2 = "P2"  # phi1 > phi2: the CU is limited by SIC of the EU message
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class NomaDesign:
    """Power split with the channel-gain thresholds it induces.

    ``phi1`` gates decoding of the EU message, ``phi2`` the CU message after
    SIC.  ``phi1`` is ``inf`` in the infeasible regime.
    """

    alpha: float
    phi1: float
    phi2: float
    regime: Regime


def noma_design(params: SystemParams, alpha: float) -> NomaDesign:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    g1, g2 = params.gamma1, params.gamma2
    noise, p = params.noise_mw, params.p_mw
    phi2 = g1 * noise / (p * alpha)
    denom = 1.0 - alpha - g2 * alpha
    if alpha >= params.alpha_max or denom <= 0.0:
        return NomaDesign(alpha, math.inf, phi2, Regime.INFEASIBLE)
    phi1 = g2 * noise / (p * denom)
    regime = Regime.P1 if alpha <= params.alpha_boundary else Regime.P2
    return NomaDesign(alpha, phi1, phi2, regime)


@dataclass(frozen=True)
class OmaDesign:
    alpha: float
    beta: float
    psi1: float
    psi2: float


def _time_scaled_gamma(rate: float, fraction: float) -> float:
    exponent = rate / fraction
    # 2**1024 overflows; an infinite threshold means certain outage
    if exponent >= 1023.0:
        return math.inf
    return 2.0 ** exponent - 1.0


def oma_design(params: SystemParams, alpha: float, beta: float) -> OmaDesign:
    alpha, beta = float(alpha), float(beta)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta!r}")
    noise, p = params.noise_mw, params.p_mw
    psi1 = _time_scaled_gamma(params.r1, beta) * noise / (p * alpha)
    psi2 = _time_scaled_gamma(params.r2, 1.0 - beta) * noise / (p * (1.0 - alpha))
    return OmaDesign(alpha, beta, psi1, psi2)
