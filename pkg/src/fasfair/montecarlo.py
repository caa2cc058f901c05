"""Monte Carlo estimates of best-port outage, independent of the quadrature path.

Ports follow the constant-correlation model

    h_k = mu h_0 + sqrt(1 - mu^2) z_k,   h_0, z_k ~ CN(0, sigma^2) i.i.d.,

which keeps every port CN(0, sigma^2) and reproduces the conditional Rician
density underlying the analytic outage integrals.

Trials are grouped into fixed-size chunks; chunk ``i`` draws from a Philox
stream keyed by ``(seed, i)``.  Estimates are sums of per-chunk integer counts,
so results are bit-identical for any number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import FasSide, Regime, noma_design, oma_design

__all__ = [
    "McConfig",
    "McEstimate",
    "chunk_generator",
    "sample_port_gains",
    "estimate_noma_outage",
    "estimate_oma_outage",
    "oma_outage_events",
]

CHUNK_TRIALS = 1 << 16


@dataclass(frozen=True)
class McConfig:
    trials: int = 100_000
    seed: int = 20240601
    antithetic: bool = False
    workers: int = 1

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError("trials must be a positive integer")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    stderr: float
    trials: int

    @classmethod
    def from_count(cls, count: int, trials: int) -> "McEstimate":
        p = count / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials)

    def agrees(self, value: float, n_sigma: float = 3.0) -> bool:
        return abs(self.p_hat - value) <= n_sigma * self.stderr


def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based stream for one chunk of trials."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(chunk,))))


def _chunks(trials: int):
    for i, start in enumerate(range(0, trials, CHUNK_TRIALS)):
        yield i, min(CHUNK_TRIALS, trials - start)


def sample_port_gains(side: FasSide, rng: np.random.Generator, size: int,
                      antithetic: bool = False) -> np.ndarray:
    """Draw ``size`` samples of ``max_k |h_k|^2`` for one receiver.

    With ``antithetic`` the second half of the batch reuses the reference
    channel of the first half with negated port innovations.
    """
    n = side.n_ports
    half = (size + 1) // 2 if antithetic else size
    sd = math.sqrt(side.sigma2 / 2.0)
    h0 = rng.normal(0.0, sd, (half, 1, 2))
    z = rng.normal(0.0, sd, (half, n, 2))
    if antithetic:
        h0 = np.concatenate([h0, h0])[:size]
        z = np.concatenate([z, -z])[:size]
    h = side.mu * h0 + math.sqrt(max(0.0, 1.0 - side.mu ** 2)) * z
    return np.max(np.sum(h * h, axis=2), axis=1)


def _run_chunks(fn, cfg: McConfig) -> np.ndarray:
    jobs = list(_chunks(cfg.trials))
    if cfg.workers == 1:
        counts = [fn(i, m) for i, m in jobs]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            counts = list(pool.map(lambda job: fn(*job), jobs))
    return np.sum(np.array(counts, dtype=np.int64), axis=0)


def _pinned(cfg: McConfig) -> McEstimate:
    return McEstimate(1.0, 0.0, cfg.trials)


def estimate_noma_outage(scenario, alpha: float,
                         cfg: McConfig = McConfig()) -> tuple[McEstimate, McEstimate]:
    """Empirical (CU, EU) NOMA outage at power split ``alpha``.

    The CU fails when its best gain is at most ``max(phi1, phi2)``, the EU when
    its best gain is at most ``phi1``.
    """
    design = noma_design(scenario.params, alpha)
    if design.regime is Regime.INFEASIBLE:
        return _pinned(cfg), _pinned(cfg)
    thr_cu = max(design.phi1, design.phi2)
    thr_eu = design.phi1

    def chunk(i, m):
        rng = chunk_generator(cfg.seed, i)
        g_cu = sample_port_gains(scenario.cu, rng, m, cfg.antithetic)
        g_eu = sample_port_gains(scenario.eu, rng, m, cfg.antithetic)
        return int(np.count_nonzero(g_cu <= thr_cu)), int(np.count_nonzero(g_eu <= thr_eu))

    cu, eu = _run_chunks(chunk, cfg)
    return McEstimate.from_count(int(cu), cfg.trials), McEstimate.from_count(int(eu), cfg.trials)


def oma_outage_events(scenario, alpha: float, beta: float, g_cu: np.ndarray,
                      g_eu: np.ndarray, via: str = "threshold") -> tuple[np.ndarray, np.ndarray]:
    """Per-trial OMA outage indicators from best-port gains.

    ``via="threshold"`` compares gains against psi1/psi2; ``via="rate"``
    compares the time-scaled achievable rates against the targets.
    """
    p = scenario.params
    if via == "threshold":
        design = oma_design(p, alpha, beta)
        return g_cu <= design.psi1, g_eu <= design.psi2
    if via == "rate":
        rate_cu = beta * np.log2(1.0 + p.p_mw * alpha * g_cu / p.noise_mw)
        rate_eu = (1.0 - beta) * np.log2(1.0 + p.p_mw * (1.0 - alpha) * g_eu / p.noise_mw)
        return rate_cu <= p.r1, rate_eu <= p.r2
    raise ValueError(f"unknown event formulation {via!r}")


def estimate_oma_outage(scenario, alpha: float, beta: float,
                        cfg: McConfig = McConfig()) -> tuple[McEstimate, McEstimate]:
    oma_design(scenario.params, alpha, beta)  # validates the domain

    def chunk(i, m):
        rng = chunk_generator(cfg.seed, i)
        g_cu = sample_port_gains(scenario.cu, rng, m, cfg.antithetic)
        g_eu = sample_port_gains(scenario.eu, rng, m, cfg.antithetic)
        out_cu, out_eu = oma_outage_events(scenario, alpha, beta, g_cu, g_eu)
        return int(np.count_nonzero(out_cu)), int(np.count_nonzero(out_eu))

    cu, eu = _run_chunks(chunk, cfg)
    return McEstimate.from_count(int(cu), cfg.trials), McEstimate.from_count(int(eu), cfg.trials)
