"""Parameter sweeps, figure presets and the analytic-vs-simulation report.

Presets reproduce the shapes of the published curves (monotonicity, limits,
crossovers).  Only the diversity preset has a published number to hit.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .benchmark import benchmark_expected_cost
from .config import MCSettings
from .errors import DomainError, InfeasibleMarketError, InvalidMarketError, PhShareError, UnsupportedMarketError
from .heterogeneous import expected_cost_het, optimal_price_het
from .homogeneous import expected_cost_hom, optimal_price_hom
from .market import MarketParams, PhType, TariffPlan, UsageModel
from .montecarlo import (mc_benchmark_cost, mc_expected_cost_het, mc_expected_cost_hom,
                         mc_expected_cost_mul)
from .multi import expected_cost_mul_exact, optimal_price_mul

EXPERIMENTS = ("cost-vs-density", "price-vs-hour", "cost-vs-delta-mu", "cost-vs-traveler-density", "custom")
CSV_COLUMNS = ("series", "param", "value", "density", "price", "expected_cost", "benchmark_cost",
               "mc_mean", "mc_std_err", "regime", "status")
CUSTOM_PARAMS = ("ph_density", "traveler_density", "reservation", "roaming_fee", "demand", "usage_mean",
                 "radius", "price")
DEFAULT_EPS_GRID = (0.2, 0.5, 1.0)  # not enumerated by the source; our choice
Z_LIMIT = 3.0


def reference_market(mu=1.7, density=1e-3, eps=0.5, traveler_density=0.0, demand=0.2, quota=2.0):
    """Single-type market at the reference setting (plan 2 GB, $17, $13/GB; C0 = $3; d = 30 m)."""
    t = PhType(TariffPlan(quota, 17.0, 13.0), UsageModel(mu, 0.1), density)
    return MarketParams((t,), roaming_fee=3.0, demand=demand, reservation=eps, radius=30.0,
                        traveler_density=traveler_density)


def diversity_market(delta_mu, quota=2.0, mu=1.7, density=2.5e-4, eps=0.2):
    """Two types with usage means ``mu -+ delta_mu/2`` and a shared plan."""
    plan = TariffPlan(quota, 17.0, 13.0)
    light = PhType(plan, UsageModel(mu - delta_mu / 2, 0.1), density)
    heavy = PhType(plan, UsageModel(mu + delta_mu / 2, 0.1), density)
    return MarketParams((light, heavy), roaming_fee=3.0, demand=0.2, reservation=eps, radius=30.0)


@dataclass(frozen=True)
class SweepSpec:
    experiment: str
    param: str
    grid: tuple
    base: Optional[MarketParams] = None
    mc: Optional[MCSettings] = None
    options: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DomainError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        grid = tuple(float(g) for g in self.grid)
        if not grid:
            raise DomainError("sweep grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("sweep grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        if self.experiment == "custom":
            if self.base is None:
                raise DomainError("custom sweeps need a base market")
            if self.param not in CUSTOM_PARAMS:
                raise DomainError(f"custom sweep param must be one of {CUSTOM_PARAMS}, got {self.param!r}")


def preset(name, mc=None, **options):
    """Sweep spec for one of the four figure experiments."""
    if name == "cost-vs-density":
        grid = options.pop("grid", (1e-4, 2e-4, 3e-4, 5e-4, 1e-3, 2e-3, 3e-3))
        options.setdefault("eps", DEFAULT_EPS_GRID)
        return SweepSpec(name, "ph_density", grid, mc=mc, options=options)
    if name == "price-vs-hour":
        options.setdefault("seed", 0)
        return SweepSpec(name, "hour", options.pop("grid", tuple(range(24))), mc=mc, options=options)
    if name == "cost-vs-delta-mu":
        grid = options.pop("grid", tuple(np.round(np.linspace(0.0, 2.4, 13), 10)))
        options.setdefault("quotas", (1.8, 2.0))
        return SweepSpec(name, "delta_mu", grid, mc=mc, options=options)
    if name == "cost-vs-traveler-density":
        grid = options.pop("grid", tuple(np.round(np.linspace(2e-4, 2e-3, 10), 12)))
        return SweepSpec(name, "traveler_density", grid, mc=mc, options=options)
    raise DomainError(f"no preset named {name!r}")


def hourly_densities(seed, hours=range(24)):
    """Per-hour pH densities: U[0.1, 0.5]e-3 from 9pm to 7am, U[0.5, 2]e-3 from 8am to 8pm."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    draws = rng.random(24)
    out = {}
    for h in range(24):
        lo, hi = (0.5e-3, 2e-3) if 8 <= h <= 20 else (0.1e-3, 0.5e-3)
        out[h] = lo + (hi - lo) * draws[h]
    return {int(h): out[int(h)] for h in hours}


# --------------------------------------------------------------------------- rows


def _row(series, param, value, density=None, price=None, cost=None, bench=None, mc=None, regime="", status="ok"):
    return {
        "series": series, "param": param, "value": value, "density": density, "price": price,
        "expected_cost": cost, "benchmark_cost": bench,
        "mc_mean": None if mc is None else mc.mean, "mc_std_err": None if mc is None else mc.std_err,
        "regime": regime, "status": status,
    }


def _row_seed(seed, index):
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])


def _status(exc):
    if isinstance(exc, InfeasibleMarketError):
        return "infeasible"
    if isinstance(exc, UnsupportedMarketError):
        return "unsupported"
    if isinstance(exc, InvalidMarketError):
        return "invalid"
    return "error"


def solve(params):
    """Pick the solver from the market shape.  Returns ``(solution, mc_fn)``."""
    if params.num_types > 1:
        return optimal_price_het(params), mc_expected_cost_het
    if params.traveler_density > 0:
        return optimal_price_mul(params), mc_expected_cost_mul
    return optimal_price_hom(params), mc_expected_cost_hom


def _solved_row(series, param, value, params, mc, index, with_benchmark=False):
    try:
        sol, mc_fn = solve(params)
        est = mc_fn(sol.price, params, mc.n_trials, _row_seed(mc.seed, index)) if mc else None
        bench = benchmark_expected_cost(params) if with_benchmark and params.num_types == 1 else None
        density = sum(t.density for t in params.ph_types)
        return _row(series, param, value, density, sol.price, sol.expected_cost, bench, est, sol.regime)
    except PhShareError as exc:
        return _row(series, param, value, regime="", status=_status(exc))


def _custom_market(base, param, v):
    if param == "ph_density":
        return base.with_(ph_types=tuple(PhType(t.plan, t.usage, v) for t in base.ph_types))
    if param == "traveler_density":
        return base.with_(traveler_density=v)
    if param == "reservation":
        return base.with_(reservation=v)
    if param == "roaming_fee":
        return base.with_(roaming_fee=v)
    if param == "demand":
        return base.with_(demand=v)
    if param == "radius":
        return base.with_(radius=v)
    if param == "usage_mean":
        return base.with_(ph_types=tuple(PhType(t.plan, UsageModel(v, t.usage.std, t.usage.est_noise_var), t.density)
                                         for t in base.ph_types))
    raise DomainError(param)


def _price_row(base, v, mc, index):
    # fixed-price evaluation of whichever cost function the market shape selects
    try:
        if base.num_types > 1:
            cost, mc_fn = expected_cost_het(v, base), mc_expected_cost_het
        elif base.traveler_density > 0:
            cost, mc_fn = expected_cost_mul_exact(v, base), mc_expected_cost_mul
        else:
            cost, mc_fn = expected_cost_hom(v, base), mc_expected_cost_hom
        est = mc_fn(v, base, mc.n_trials, _row_seed(mc.seed, index)) if mc else None
        return _row("custom", "price", v, sum(t.density for t in base.ph_types), v, float(cost), None, est, "fixed")
    except PhShareError as exc:
        return _row("custom", "price", v, status=_status(exc))


def run_sweep(spec):
    """Evaluate a sweep; returns the rows in grid order."""
    mc, opts, rows = spec.mc, spec.options, []
    if spec.experiment == "cost-vs-density":
        for eps in opts["eps"]:
            for v in spec.grid:
                rows.append(_solved_row(f"eps={eps:g}", "ph_density", v, reference_market(density=v, eps=eps), mc,
                                        len(rows), with_benchmark=True))
    elif spec.experiment == "price-vs-hour":
        dens = hourly_densities(opts["seed"], [int(h) for h in spec.grid])
        for v in spec.grid:
            market = reference_market(mu=opts.get("mu", 1.7), density=dens[int(v)], eps=0.5)
            rows.append(_solved_row("hourly", "hour", v, market, mc, len(rows)))
    elif spec.experiment == "cost-vs-delta-mu":
        for q in opts["quotas"]:
            for v in spec.grid:
                rows.append(_solved_row(f"Q={q:g}", "delta_mu", v, diversity_market(v, quota=q), mc, len(rows)))
    elif spec.experiment == "cost-vs-traveler-density":
        base = opts.get("base") or traveler_sweep_market()
        for method in ("global", "proposition"):
            for v in spec.grid:
                params = base.with_(traveler_density=v)
                rows.append(_mul_row(method, v, params, mc, len(rows)))
        for v in spec.grid:
            rows.append(_exact_opt_row(v, base.with_(traveler_density=v), mc, len(rows)))
    else:
        for v in spec.grid:
            if spec.param == "price":
                rows.append(_price_row(spec.base, v, mc, len(rows)))
            else:
                params = _custom_market(spec.base, spec.param, v)
                rows.append(_solved_row("custom", spec.param, v, params, mc, len(rows),
                                        with_benchmark=params.num_types == 1))
    return rows


def _mul_row(method, v, params, mc, index):
    try:
        sol = optimal_price_mul(params, method=method)
        est = mc_expected_cost_mul(sol.price, params, mc.n_trials, _row_seed(mc.seed, index)) if mc else None
        return _row(f"surrogate-{method}", "traveler_density", v, params.single.density, sol.price,
                    sol.expected_cost, None, est, sol.regime)
    except PhShareError as exc:
        return _row(f"surrogate-{method}", "traveler_density", v, status=_status(exc))


def exact_optimum_mul(params, n_grid=401):
    """Grid minimiser of the expected cost under the truncated-series service probability."""
    eps, c0 = params.reservation, params.roaming_fee
    grid = np.linspace(eps, c0, n_grid)
    costs = [float(expected_cost_mul_exact(p, params)) for p in grid]
    j = int(np.argmin(costs))
    return float(grid[j]), costs[j]


def _exact_opt_row(v, params, mc, index):
    try:
        price, cost = exact_optimum_mul(params)
        est = mc_expected_cost_mul(price, params, mc.n_trials, _row_seed(mc.seed, index)) if mc else None
        return _row("exact-series", "traveler_density", v, params.single.density, price, cost, None, est, "grid")
    except PhShareError as exc:
        return _row("exact-series", "traveler_density", v, status=_status(exc))


def traveler_sweep_market():
    return reference_market(mu=1.8, demand=0.29, eps=0.5, density=1e-3)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return f"{float(x):.9g}"


def to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


# --------------------------------------------------------------------- validation


@dataclass(frozen=True)
class ValidationRow:
    quantity: str
    price: Optional[float]
    analytic: float
    mc_mean: float
    mc_std_err: float
    z: float

    @property
    def passed(self):
        return abs(self.z) <= Z_LIMIT


@dataclass(frozen=True)
class ValidationReport:
    rows: tuple

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    @property
    def failures(self):
        return [r for r in self.rows if not r.passed]

    def to_text(self):
        head = f"{'quantity':<16} {'price':>10} {'analytic':>12} {'mc_mean':>12} {'std_err':>10} {'z':>8}  result"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            price = "-" if r.price is None else f"{r.price:.6g}"
            lines.append(f"{r.quantity:<16} {price:>10} {r.analytic:>12.6f} {r.mc_mean:>12.6f} "
                         f"{r.mc_std_err:>10.2e} {r.z:>8.3f}  {'pass' if r.passed else 'FAIL'}")
        bad = len(self.failures)
        lines.append(f"{len(self.rows) - bad}/{len(self.rows)} passed")
        return "\n".join(lines) + "\n"


def default_prices(params, n=5):
    eps, c0 = params.reservation, params.roaming_fee
    top = eps + max(t.plan.overage_rate for t in params.ph_types) * params.demand
    return tuple(float(x) for x in np.linspace(eps, min(c0, top), n))


def run_validation(params, prices=None, mc=None, _perturb=None):
    """Compare every applicable analytic cost with its simulation.

    ``_perturb`` maps a quantity name to an offset added to the analytic
    value; it exists so tests can check that a wrong value is caught.
    """
    mc = mc or MCSettings()
    prices = tuple(prices) if prices else default_prices(params)
    perturb = _perturb or {}
    checks = []
    if params.num_types == 1:
        hom = params.with_(traveler_density=0.0)
        checks.append(("benchmark", None, lambda p: benchmark_expected_cost(hom),
                       lambda p, s: mc_benchmark_cost(hom, mc.n_trials, s)))
        checks.append(("homogeneous", prices, lambda p: expected_cost_hom(p, hom),
                       lambda p, s: mc_expected_cost_hom(p, hom, mc.n_trials, s)))
    checks.append(("heterogeneous", prices, lambda p: expected_cost_het(p, params),
                   lambda p, s: mc_expected_cost_het(p, params, mc.n_trials, s)))
    if params.num_types == 1:
        checks.append(("multi-traveler", prices, lambda p: expected_cost_mul_exact(p, params),
                       lambda p, s: mc_expected_cost_mul(p, params, mc.n_trials, s)))
    rows = []
    for name, grid, analytic_fn, mc_fn in checks:
        for p in grid or (None,):
            analytic = float(analytic_fn(p)) + perturb.get(name, 0.0)
            est = mc_fn(p, _row_seed(mc.seed, len(rows)))
            rows.append(ValidationRow(name, p, analytic, est.mean, est.std_err, est.z_score(analytic)))
    return ValidationReport(tuple(rows))


def sweep_from_config(block, base=None, mc=None):
    """Build a :class:`SweepSpec` from the ``sweep`` block of a config."""
    exp = block.get("experiment", "custom")
    opts = {k: v for k, v in block.items() if k not in ("experiment", "param", "grid")}
    if "grid" in block:
        opts["grid"] = tuple(block["grid"])
    if exp == "custom":
        return SweepSpec(exp, block.get("param", ""), tuple(block.get("grid", ())), base=base, mc=mc)
    if exp == "cost-vs-traveler-density" and base is not None:
        opts["base"] = base
    if "eps" in opts:
        opts["eps"] = tuple(float(e) for e in opts["eps"])
    if "quotas" in opts:
        opts["quotas"] = tuple(float(q) for q in opts["quotas"])
    return preset(exp, mc=mc, **opts)


def z_ok(value, est):
    z = est.z_score(value)
    return math.isfinite(z) and abs(z) <= Z_LIMIT
