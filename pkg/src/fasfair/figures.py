"""Figure reproduction as CSV tables, generic parameter sweeps and MC validation.

Every table starts with the columns ``scenario_id, method``.  Numbers are
rendered with 10 significant digits and rows are emitted in sweep order no
matter how many worker threads evaluated them.
"""

from __future__ import annotations

import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import ConfigError, validate_values
from .model import Scenario, noma_design
from .montecarlo import McConfig, estimate_noma_outage
from .noma import SolveReport, solve_general_bisection, solve_special_case, solve_theorem1
from .oma import ScaConfig, sca_iterates, sca_solve
from .outage import (DEFAULT_QUAD, noma_outage_cu, noma_outage_cu_phi1, noma_outage_cu_phi2,
                     noma_outage_eu)
from .specfun import QuadratureSpec

__all__ = [
    "Table",
    "SweepSpec",
    "SOLVE_COLUMNS",
    "FIGURE_IDS",
    "format_value",
    "write_csv",
    "solve",
    "report_row",
    "run_figure",
    "run_sweep",
    "run_mc_validate",
]

FIGURE_IDS = tuple(range(1, 10))
SOLVE_COLUMNS = ("scenario_id", "method", "alpha", "beta", "objective", "p_cu", "p_eu",
                 "p_max", "iterations", "converged", "flags")
ALPHA_COLUMNS = ("scenario_id", "method", "alpha", "p_c_phi1", "p_c_phi2", "p_e", "p_cu",
                 "p_max")

# SCA settings for figure sweeps: at high power tau drops far below any fixed
# absolute tolerance, so the stopping rule is taken relative to tau
FIGURE_SCA = ScaConfig(eps_tau=1e-6, relative=True)

# sweep variable -> scenario key
SWEEP_KEYS = {"alpha": None, "power_dbm": "p_dbm", "n_c": "n_c", "n_e": "n_e",
              "r1": "r1", "r2": "r2"}
INTEGER_VARIABLES = ("n_c", "n_e")
METHODS = ("special_closed", "bisection", "theorem1_closed", "sca", "noma_exact")


@dataclass
class Table:
    header: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_csv(self, buf)
        return buf.getvalue()


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return format(float(value), ".10g")
    if value is None:
        return ""
    return str(value)


def write_csv(table: Table, stream) -> None:
    # values never contain commas, so no quoting is needed
    stream.write(",".join(table.header) + "\n")
    for row in table.rows:
        if len(row) != len(table.header):
            raise ValueError("row width does not match header")
        stream.write(",".join(format_value(v) for v in row) + "\n")


def _ordered_map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def solve(scenario, method: str, quad: QuadratureSpec = DEFAULT_QUAD,
          tol: float = 1e-8, sca: ScaConfig = ScaConfig()) -> SolveReport:
    if method == "special_closed":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return solve_special_case(scenario, quad)
    if method == "bisection":
        return solve_general_bisection(scenario, tol, quad)
    if method == "theorem1_closed":
        return solve_theorem1(scenario, quad)
    if method == "sca":
        return sca_solve(scenario, sca, quad)
    raise ValueError(f"unknown method {method!r}")


def report_row(scenario_id: str, report: SolveReport) -> tuple:
    return (scenario_id, report.method, report.alpha, report.beta, report.objective,
            report.outage.p_cu, report.outage.p_eu, report.outage.p_max,
            report.iterations, report.converged, ";".join(report.flags))


def _apply(scenario, values: dict):
    if not values:
        return scenario
    if isinstance(scenario, Scenario):
        return scenario.with_values(**values)
    # conventional receivers ignore port and aperture settings
    params_only = {k: v for k, v in values.items() if k not in ("n_c", "n_e", "w_c", "w_e")}
    return scenario.with_values(**params_only) if params_only else scenario


def _base(overrides: dict | None, **figure_values) -> Scenario:
    values = dict(figure_values)
    values.update(overrides or {})
    return validate_values(values)


# ---------------------------------------------------------------- alpha sweeps

def _alpha_row(scenario, scenario_id, method, alpha, quad):
    design = noma_design(scenario.params, alpha)
    cu, eu = scenario.cu, scenario.eu
    if design.regime.value == "infeasible":
        p_phi1, p_phi2 = 1.0, noma_outage_cu_phi2(cu, design, quad)
    else:
        p_phi1 = noma_outage_cu_phi1(cu, design, quad)
        p_phi2 = noma_outage_cu_phi2(cu, design, quad)
    p_e = noma_outage_eu(eu, design, quad)
    p_cu = noma_outage_cu(cu, design, quad)
    return (scenario_id, method, alpha, p_phi1, p_phi2, p_e, p_cu, max(p_cu, p_e))


def _alpha_figure(fig_id, scenario, optimum_methods, quad, tol, workers, points=200):
    sid = f"fig{fig_id}"
    alphas = np.linspace(0.01, 0.49, points)
    rows = _ordered_map(lambda a: _alpha_row(scenario, sid, "exact", float(a), quad),
                        list(alphas), workers)
    for method in optimum_methods:
        rep = solve(scenario, method, quad, tol)
        rows.append(_alpha_row(scenario, sid, method, rep.alpha, quad))
    return Table(ALPHA_COLUMNS, rows)


# ------------------------------------------------------------- SCA convergence

def _fig4(overrides, workers):
    powers = (5.0, 10.0, 15.0)
    base = _base(overrides)
    runs = _ordered_map(lambda p: sca_iterates(base.with_values(p_dbm=p))[0], powers, workers)
    taus = [[s.tau for s in states] for states in runs]
    length = max(len(t) for t in taus)
    header = ("scenario_id", "method", "iteration") + tuple(f"tau_p{int(p)}" for p in powers)
    rows = []
    for k in range(length):
        # converged runs are held at their final value
        rows.append(("fig4", "sca", k) + tuple(t[min(k, len(t) - 1)] for t in taus))
    return Table(header, rows)


# ------------------------------------------------------- method comparisons

@dataclass(frozen=True)
class _Series:
    scenario_id: str
    scenario: object
    methods: tuple[str, ...]


def _comparison(fig_id, variable, grid, series: Sequence[_Series], quad, tol, workers):
    key = SWEEP_KEYS[variable]
    header = ("scenario_id", "method", variable, "alpha", "beta", "p_cu", "p_eu", "p_max",
              "iterations", "converged")
    jobs = [(s, m, x) for s in series for m in s.methods for x in grid]

    def run(job):
        s, method, x = job
        rep = solve(_apply(s.scenario, {key: x}), method, quad, tol, FIGURE_SCA)
        return (s.scenario_id, method, x, rep.alpha, rep.beta, rep.outage.p_cu,
                rep.outage.p_eu, rep.outage.p_max, rep.iterations, rep.converged)

    return Table(header, _ordered_map(run, jobs, workers))


NOMA_GENERAL = ("bisection", "theorem1_closed", "sca")
NOMA_SPECIAL = ("special_closed", "sca")
CONVENTIONAL = ("bisection", "sca")


def run_figure(fig_id: int, overrides: dict | None = None, *, quad: QuadratureSpec = DEFAULT_QUAD,
               tol: float = 1e-8, workers: int = 1) -> Table:
    """Data behind one figure; ``overrides`` replaces scenario keys before the sweep."""
    if fig_id not in FIGURE_IDS:
        raise ValueError(f"figure id must be one of {FIGURE_IDS}, got {fig_id!r}")
    ov = dict(overrides or {})
    if fig_id == 1:
        return _alpha_figure(1, _base(ov), ("special_closed", "bisection"), quad, tol, workers)
    if fig_id == 2:
        sc = _base(ov, n_c=2, n_e=20, w_c=1.0, w_e=5.0)
        return _alpha_figure(2, sc, ("bisection", "theorem1_closed"), quad, tol, workers)
    if fig_id == 3:
        sc = _base(ov, n_c=2, n_e=6, w_c=1.0, w_e=5.0)
        return _alpha_figure(3, sc, ("bisection", "theorem1_closed"), quad, tol, workers)
    if fig_id == 4:
        return _fig4(ov, workers)
    if fig_id == 5:
        general = _base(ov, n_c=4, n_e=6, w_c=2.0, w_e=5.0)
        special = _base(ov)
        series = [_Series("fig5_general", general, NOMA_GENERAL),
                  _Series("fig5_special", special, NOMA_SPECIAL),
                  _Series("fig5_conventional", general.conventional(), CONVENTIONAL)]
        return _comparison(5, "power_dbm", [float(p) for p in range(0, 31, 2)], series,
                           quad, tol, workers)
    if fig_id in (6, 7):
        if fig_id == 6:
            general = _base(ov, n_e=6, w_c=5.0, w_e=1.0, p_dbm=5.0)
            variable = "n_c"
        else:
            general = _base(ov, n_c=4, w_c=1.0, w_e=5.0, p_dbm=10.0)
            variable = "n_e"
        series = [_Series(f"fig{fig_id}_general", general, NOMA_GENERAL),
                  _Series(f"fig{fig_id}_conventional", general.conventional(), CONVENTIONAL)]
        return _comparison(fig_id, variable, list(range(2, 21)), series, quad, tol, workers)
    # figures 8 and 9: rate sweeps; the general series swaps the port counts between them
    if fig_id == 8:
        general = _base(ov, n_c=6, n_e=4, p_dbm=10.0)
        variable = "r1"
    else:
        general = _base(ov, n_c=4, n_e=6, p_dbm=10.0)
        variable = "r2"
    special = general.with_values(n_c=4, n_e=4)
    series = [_Series(f"fig{fig_id}_general", general, NOMA_GENERAL),
              _Series(f"fig{fig_id}_special", special, NOMA_SPECIAL),
              _Series(f"fig{fig_id}_conventional", general.conventional(), CONVENTIONAL)]
    grid = [round(0.5 + 0.1 * k, 10) for k in range(16)]
    return _comparison(fig_id, variable, grid, series, quad, tol, workers)


# ---------------------------------------------------------------- free sweeps

@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int
    methods: tuple[str, ...] = ("bisection",)

    def __post_init__(self):
        if self.variable not in SWEEP_KEYS:
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if not self.start < self.stop:
            raise ValueError("sweep start must be below stop")
        if self.points < 2:
            raise ValueError("a sweep needs at least 2 points")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
            if (m == "noma_exact") != (self.variable == "alpha"):
                raise ValueError("noma_exact is the only method of an alpha sweep")
        if self.variable in INTEGER_VARIABLES:
            if self.start != int(self.start) or self.stop != int(self.stop) or self.start < 1:
                raise ValueError("port-count sweeps need integer bounds >= 1")

    def values(self) -> list:
        if self.variable in INTEGER_VARIABLES:
            grid = np.unique(np.rint(np.linspace(self.start, self.stop, self.points)))
            return [int(v) for v in grid]
        return [float(v) for v in np.linspace(self.start, self.stop, self.points)]


def run_sweep(scenario: Scenario, spec: SweepSpec, *, scenario_id: str = "sweep",
              quad: QuadratureSpec = DEFAULT_QUAD, tol: float = 1e-8,
              workers: int = 1) -> Table:
    if spec.variable == "alpha":
        if not (0.0 < spec.start and spec.stop < 1.0):
            raise ValueError("alpha sweep must stay inside (0, 1)")
        rows = _ordered_map(lambda a: _alpha_row(scenario, scenario_id, "noma_exact", a, quad),
                            spec.values(), workers)
        return Table(ALPHA_COLUMNS, rows)
    try:
        # reject invalid values up front, naming the key
        for v in (spec.start, spec.stop):
            _apply(scenario, {SWEEP_KEYS[spec.variable]: v})
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc), key=SWEEP_KEYS[spec.variable]) from exc
    series = [_Series(scenario_id, scenario, spec.methods)]
    return _comparison(0, spec.variable, spec.values(), series, quad, tol, workers)


# ---------------------------------------------------------------- MC validation

MC_COLUMNS = ("scenario_id", "method", "p_dbm", "alpha", "user", "analytic", "p_hat",
              "stderr", "trials", "pass", "low_power")
MC_POWERS = (5.0, 10.0, 15.0)
MC_ALPHAS = (0.15, 0.25, 0.333)


def run_mc_validate(scenario: Scenario, cfg: McConfig = McConfig(), *,
                    powers: Sequence[float] = MC_POWERS, alphas: Sequence[float] = MC_ALPHAS,
                    scenario_id: str = "mc", quad: QuadratureSpec = DEFAULT_QUAD,
                    workers: int = 1) -> Table:
    """Analytic NOMA outage next to its Monte Carlo estimate on a power x alpha grid.

    ``pass`` is the 3-sigma agreement test.  ``low_power`` marks rows whose
    expected number of outage (or non-outage) events is below 10, where the
    test carries little information.
    """
    jobs = [(float(p), float(a)) for p in powers for a in alphas]

    def run(job):
        p, a = job
        sc = scenario.with_values(p_dbm=p)
        design = noma_design(sc.params, a)
        exact = (noma_outage_cu(sc.cu, design, quad), noma_outage_eu(sc.eu, design, quad))
        est = estimate_noma_outage(sc, a, cfg)
        out = []
        for user, value, e in zip(("cu", "eu"), exact, est):
            low = cfg.trials * min(value, 1.0 - value) < 10.0
            out.append((scenario_id, "noma_mc", p, a, user, value, e.p_hat, e.stderr,
                        e.trials, e.agrees(value), low))
        return out

    rows = [row for chunk in _ordered_map(run, jobs, workers) for row in chunk]
    return Table(MC_COLUMNS, rows)
