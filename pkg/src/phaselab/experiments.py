"""Sweep and refinement studies: rate fits, growth-constant fits, and the
identity refinement harness behind the check-identities command.

Sweep members couple the resolution to the interface width (h = eps/8 and
dt = eps^2/20 by default) so that every member resolves its own transition
layer equally well; reports carry fitted log-log slopes with residuals.
Everything here is deterministic: fixed iteration order, no randomness.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import diagnostics, solver
from .grids import Grid, RADIAL
from .solver import ConfigError, SimulationConfig

DEFAULT_BANDS = {
    "err_l1": (0.8, 1.2),
    "rel_entropy": (1.7, 2.3),
    "initial_entropy": (1.8, 2.2),
    "gronwall_factor": 2.0,
}
GRONWALL_FLOOR = 1e-10


@dataclass
class RateFit:
    slope: float
    intercept: float
    residual_norm: float


def fit_rate(points) -> RateFit:
    """Least-squares slope of log q against log eps.

    Needs at least three points with positive q; the intercept and the
    residual norm of the fit are reported alongside the slope.
    """
    points = list(points)
    if len(points) < 3:
        raise ValueError(f"rate fit needs >= 3 points, got {len(points)}")
    eps = np.array([p[0] for p in points], dtype=float)
    q = np.array([p[1] for p in points], dtype=float)
    if np.any(q <= 0.0):
        raise ValueError("rate fit requires positive quantities")
    if np.any(eps <= 0.0):
        raise ValueError("rate fit requires positive eps values")
    coeff, stats = np.polynomial.polynomial.polyfit(
        np.log(eps), np.log(q), 1, full=True)
    resid = float(np.sqrt(stats[0][0])) if len(stats[0]) else 0.0
    return RateFit(slope=float(coeff[1]), intercept=float(coeff[0]),
                   residual_norm=resid)


@dataclass
class GronwallFit:
    c_hat: float
    degenerate: bool = False


def gronwall_fit(series) -> GronwallFit:
    """Smallest C >= 0 with E(t) <= E(0) exp(C t) on all samples.

    C = max over t > 0 of log(E(t)/E(0)) / t, clipped at zero.  The fit is
    flagged degenerate when E(0) sits at the quadrature floor or any sample
    is nonpositive.
    """
    series = list(series)
    if not series:
        raise ValueError("empty series")
    e0 = series[0][1]
    values = np.array([e for _, e in series])
    if e0 <= GRONWALL_FLOOR or np.any(values <= 0.0):
        return GronwallFit(c_hat=0.0, degenerate=True)
    rates = [math.log(e / e0) / t for t, e in series[1:] if t > 0.0]
    if not rates:
        return GronwallFit(c_hat=0.0, degenerate=True)
    return GronwallFit(c_hat=max(0.0, max(rates)))


@dataclass
class SweepPlan:
    """An eps sweep over one base configuration.

    Members share everything except eps and the coupled resolution:
    h = eps / h_over_eps and dt = eps^2 / dt_over_eps2 (initial-entropy
    studies may use the finer initial_h_over_eps since they never step).
    """

    base: SimulationConfig
    epsilons: list
    h_over_eps: float = 8.0
    dt_over_eps2: float = 20.0
    initial_h_over_eps: float = 16.0
    bands: dict = field(default_factory=lambda: dict(DEFAULT_BANDS))

    def validate(self) -> list:
        issues = []
        eps = list(self.epsilons)
        if len(eps) < 3:
            issues.append(f"sweep.epsilons: need >= 3 entries, got {len(eps)}")
        if eps and (min(eps) <= 0.0):
            issues.append("sweep.epsilons: must be positive")
        if eps and max(eps) < 4.0 * min(eps) - 1e-12:
            issues.append("sweep.epsilons: must span at least a 4x range")
        if any(a <= b for a, b in zip(eps, eps[1:])):
            issues.append("sweep.epsilons: must be strictly descending")
        for e in eps:
            member_issues = solver.validate(self.member(e))
            issues.extend(f"member eps={e}: {m}" for m in member_issues)
        return issues

    def member(self, eps: float, h_over_eps: Optional[float] = None) -> SimulationConfig:
        rel = h_over_eps if h_over_eps is not None else self.h_over_eps
        h = eps / rel
        grid = self.base.grid
        if grid.mode == RADIAL:
            npts = int(round(grid.half_width / h)) + 1
        else:
            npts = int(round(2.0 * grid.half_width / h))
        new_grid = Grid(mode=grid.mode, dim=grid.dim,
                        half_width=grid.half_width, npts=npts)
        return replace(self.base, epsilon=eps, grid=new_grid,
                       dt=eps ** 2 / self.dt_over_eps2)


@dataclass
class RateReport:
    epsilons: list
    quantities: dict          # name -> list aligned with epsilons
    slopes: dict              # name -> RateFit
    gronwall_constants: list
    pass_flags: dict

    def to_json_dict(self) -> dict:
        return {
            "epsilons": self.epsilons,
            "quantities": self.quantities,
            "slopes": {k: {"slope": v.slope, "intercept": v.intercept,
                           "residual_norm": v.residual_norm}
                       for k, v in self.slopes.items()},
            "gronwall_constants": self.gronwall_constants,
            "pass_flags": self.pass_flags,
        }


@dataclass
class SweepResult:
    report: RateReport
    runs: list = field(default_factory=list)    # RunResult per eps

    def member_csv(self, idx: int) -> str:
        return diagnostics.rows_to_csv(self.runs[idx].breakdowns)


def _in_band(value, band) -> bool:
    return band[0] <= value <= band[1]


def initial_entropy_study(plan: SweepPlan) -> RateReport:
    """Relative entropy of the profile initial data per eps, with the
    fitted decay slope (no time stepping involved)."""
    issues = plan.validate()
    if issues:
        raise ConfigError(issues)
    values = []
    for eps in plan.epsilons:
        cfg = plan.member(eps, h_over_eps=plan.initial_h_over_eps)
        u0 = solver.initial_data(cfg)
        b = diagnostics.relative_entropy(
            u0, eps, cfg.potential, cfg.trajectory, cfg.cutoff, cfg.grid,
            0.0, s0=cfg.s0 if cfg.s0 is not None else cfg.cutoff.r_c / 4.0)
        values.append(b.rel_entropy)
    fit = fit_rate(list(zip(plan.epsilons, values)))
    band = plan.bands.get("initial_entropy", DEFAULT_BANDS["initial_entropy"])
    return RateReport(
        epsilons=list(plan.epsilons),
        quantities={"initial_entropy": values},
        slopes={"initial_entropy": fit},
        gronwall_constants=[],
        pass_flags={"initial_entropy": _in_band(fit.slope, band)})


def run_sweep(plan: SweepPlan, threads: int = 1,
              keep_runs: bool = True) -> SweepResult:
    """Run every member, track sup_t of the interface error and the relative
    entropy, fit both slopes and the per-member growth constants."""
    issues = plan.validate()
    if issues:
        raise ConfigError(issues)

    def one(eps):
        try:
            return solver.run(plan.member(eps))
        except Exception as exc:
            raise RuntimeError(f"sweep member eps={eps} failed: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, plan.epsilons))
    else:
        results = [one(eps) for eps in plan.epsilons]

    sup_err, sup_ent, e0s, gronwall = [], [], [], []
    for res in results:
        rows = res.breakdowns
        sup_err.append(max(b.err_l1 for b in rows))
        sup_ent.append(max(b.rel_entropy for b in rows))
        e0s.append(rows[0].rel_entropy)
        gronwall.append(gronwall_fit([(b.t, b.rel_entropy) for b in rows]))

    slopes = {
        "err_l1": fit_rate(list(zip(plan.epsilons, sup_err))),
        "rel_entropy": fit_rate(list(zip(plan.epsilons, sup_ent))),
    }
    cs = [g.c_hat for g in gronwall]
    factor_band = plan.bands.get("gronwall_factor",
                                 DEFAULT_BANDS["gronwall_factor"])
    if any(g.degenerate for g in gronwall):
        gron_ok = False
    elif max(cs) <= 0.0:
        gron_ok = True
    else:
        gron_ok = min(cs) > 0.0 and max(cs) / min(cs) <= factor_band

    pass_flags = {
        "err_l1": _in_band(slopes["err_l1"].slope,
                           plan.bands.get("err_l1", DEFAULT_BANDS["err_l1"])),
        "rel_entropy": _in_band(
            slopes["rel_entropy"].slope,
            plan.bands.get("rel_entropy", DEFAULT_BANDS["rel_entropy"])),
        "gronwall_factor": gron_ok,
    }
    report = RateReport(
        epsilons=list(plan.epsilons),
        quantities={"sup_err_l1": sup_err, "sup_rel_entropy": sup_ent,
                    "initial_entropy": e0s},
        slopes=slopes,
        gronwall_constants=cs,
        pass_flags=pass_flags)
    return SweepResult(report=report, runs=results if keep_runs else [])


@dataclass
class IdentityLevel:
    h: float
    dt: float
    identity_residual: float
    dissipation_residual: float
    max_dissipation_residual: float


@dataclass
class IdentityReport:
    """Residuals of the entropy identity and the energy balance across
    jointly refined (h, dt) levels, with observed convergence orders."""

    levels: list
    identity_orders: list
    dissipation_orders: list

    def min_order(self) -> float:
        orders = self.identity_orders + self.dissipation_orders
        return min(orders) if orders else math.nan

    def to_json_dict(self) -> dict:
        return {
            "levels": [{"h": lv.h, "dt": lv.dt,
                        "identity_residual": lv.identity_residual,
                        "dissipation_residual": lv.dissipation_residual,
                        "max_dissipation_residual": lv.max_dissipation_residual}
                       for lv in self.levels],
            "identity_orders": self.identity_orders,
            "dissipation_orders": self.dissipation_orders,
        }


def _refined(cfg: SimulationConfig, factor: int) -> SimulationConfig:
    grid = cfg.grid
    if grid.mode == RADIAL:
        npts = (grid.npts - 1) * factor + 1
    else:
        npts = grid.npts * factor
    new_grid = Grid(mode=grid.mode, dim=grid.dim,
                    half_width=grid.half_width, npts=npts)
    return replace(cfg, grid=new_grid, dt=cfg.dt / factor,
                   compute_identity=True)


def check_identities(cfg: SimulationConfig, levels: int = 3) -> IdentityReport:
    """Short runs at (h, dt), (h/2, dt/2), ... comparing the centered dE/dt
    against the assembled identity right-hand side, and the energy decay
    against the dissipation, at the diagnostic times shared by every level."""
    if levels < 2:
        raise ValueError("need at least 2 refinement levels")
    base_dt = replace(cfg, compute_identity=True)
    runs = [solver.run(_refined(base_dt, 2 ** lv)) for lv in range(levels)]

    base_times = [b.t for b in runs[0].breakdowns[1:-1]]
    common = []
    for t in base_times:
        if all(any(abs(b.t - t) < 1e-12 for b in r.breakdowns[1:-1])
               for r in runs):
            common.append(t)
    if not common:
        raise RuntimeError("no common interior diagnostic times across levels")

    out_levels = []
    for lv, r in enumerate(runs):
        ident = []
        by_time = {round(b.t, 12): b for b in r.breakdowns}
        for t in common:
            b = by_time[round(t, 12)]
            if not math.isnan(b.identity_residual):
                ident.append(b.identity_residual)
        all_diss = diagnostics.dissipation_residuals(r.breakdowns)
        diss = [v for t, v in all_diss
                if any(abs(t - c) < 1e-12 for c in common)]
        out_levels.append(IdentityLevel(
            h=_refined(base_dt, 2 ** lv).grid.h, dt=r.dt,
            identity_residual=max(ident),
            dissipation_residual=max(diss),
            max_dissipation_residual=max(v for _, v in all_diss)))

    id_orders = [math.log2(a.identity_residual / b.identity_residual)
                 for a, b in zip(out_levels, out_levels[1:])]
    diss_orders = [math.log2(a.dissipation_residual / b.dissipation_residual)
                   for a, b in zip(out_levels, out_levels[1:])]
    return IdentityReport(levels=out_levels, identity_orders=id_orders,
                          dissipation_orders=diss_orders)
