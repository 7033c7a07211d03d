"""Acceptance criteria 1 to 7.

Test names start with ``test_criterion_N`` so the summary hook in
conftest.py can print one pass/fail line per criterion.  A criterion
passes only if every test carrying its number passes.
"""

import math
import time

import numpy as np
import pytest
from conftest import market

from phshare.benchmark import benchmark_expected_cost
from phshare.experiments import diversity_market, exact_optimum_mul, traveler_sweep_market
from phshare.heterogeneous import expected_cost_het, optimal_price_het, segment_cost
from phshare.homogeneous import ec_hom_derivative, expected_cost_hom, optimal_price_hom
from phshare.market import MarketParams, PhType, TariffPlan, UsageModel
from phshare.montecarlo import (mc_benchmark_cost, mc_expected_cost_het, mc_expected_cost_hom,
                                mc_expected_cost_mul)
from phshare.multi import (expected_cost_mul_exact, omega_inverse, optimal_price_mul, serve_prob_bounds,
                           serve_prob_exact, split_market, split_plan_subphs)
from phshare.sharing import accept_prob, price_thresholds

MC_TRIALS = 10**6
Z = 3.0


def omega_of(p, params):
    t = params.single
    return accept_prob(p, t.plan, t.usage, params.demand, params.reservation)


def nondecreasing(xs, slack=1e-12):
    return all(b >= a - slack for a, b in zip(xs, xs[1:]))


# ----------------------------------------------------------------- criterion 1


def extreme_diversity(quota):
    # mu_1 = 0.5 and mu_2 = 2.9 around mu = 1.7
    return diversity_market(2.4, quota=quota)


@pytest.mark.parametrize("quota", [1.8, 2.0])
def test_criterion_1_diversity_headline_cost(quota):
    m = extreme_diversity(quota)
    assert [t.usage.mean for t in m.ph_types] == pytest.approx([0.5, 2.9])
    start = time.perf_counter()
    sol = optimal_price_het(m)
    assert time.perf_counter() - start < 1.0
    assert sol.expected_cost == pytest.approx(1.58, abs=0.02)

    start = time.perf_counter()
    est = mc_expected_cost_het(sol.price, m, MC_TRIALS, 7)
    assert time.perf_counter() - start < 30.0
    assert abs(est.z_score(sol.expected_cost)) <= Z


def test_criterion_1_quota_independence():
    a, b = (optimal_price_het(extreme_diversity(q)).expected_cost for q in (1.8, 2.0))
    assert a == pytest.approx(b, abs=1e-9)


# ----------------------------------------------------------------- criterion 2

GAP_GRID = (1e-4, 3e-4, 1e-3, 3e-3)


def test_criterion_2_benchmark_value_and_ordering(params_a):
    bench = benchmark_expected_cost(params_a)
    hom = optimal_price_hom(params_a).expected_cost
    assert bench == pytest.approx(0.669, abs=2e-3)
    assert hom == pytest.approx(0.7316, abs=1e-3)
    assert bench < hom
    est = mc_benchmark_cost(params_a, MC_TRIALS, 11)
    assert abs(est.z_score(bench)) <= Z


def test_criterion_2_gap_shrinks_on_density_grid():
    # Left failing on purpose.  Both costs tend to C0 as density vanishes, so
    # the gap must rise from zero before it can shrink; on this grid it peaks
    # near 3e-4.  See the acceptance notes in README.md.
    gaps = [optimal_price_hom(market(lam=lam)).expected_cost - benchmark_expected_cost(market(lam=lam))
            for lam in GAP_GRID]
    assert all(b < a for a, b in zip(gaps, gaps[1:])), f"gaps on {GAP_GRID}: {gaps}"


# ----------------------------------------------------------------- criterion 3

_rng = np.random.default_rng(20240917)
BENCH_EPS = _rng.uniform(0.1, 2.5, 10)
HOM_PRICES = _rng.uniform(0.5, 3.0, 10)
HET_PRICES = _rng.uniform(0.2, 3.0, 10)
MUL_PRICES = _rng.uniform(0.5, 3.0, 10)
MUL_TRAVELERS = (5e-4, 1e-3, 2e-3)

CASES = ([("benchmark", float(e), None) for e in BENCH_EPS]
         + [("homogeneous", float(p), None) for p in HOM_PRICES]
         + [("heterogeneous", float(p), None) for p in HET_PRICES]
         + [("multi-traveler", float(p), lt) for lt in MUL_TRAVELERS for p in MUL_PRICES])


def _case_id(case):
    name, x, lt = case
    return f"{name}-{x:.4f}" + (f"-lt{lt:g}" if lt else "")


@pytest.mark.parametrize("index,case", list(enumerate(CASES)), ids=[_case_id(c) for c in CASES])
def test_criterion_3_analytic_matches_simulation(index, case):
    name, x, lt = case
    seed = 5000 + index
    if name == "benchmark":
        # the benchmark has no posted price; the random draw is the reservation utility
        params = market(eps=x)
        analytic, est = benchmark_expected_cost(params), mc_benchmark_cost(params, MC_TRIALS, seed)
    elif name == "homogeneous":
        params = market(mu=1.9)
        analytic, est = expected_cost_hom(x, params), mc_expected_cost_hom(x, params, MC_TRIALS, seed)
    elif name == "heterogeneous":
        params = diversity_market(1.0)
        analytic, est = expected_cost_het(x, params), mc_expected_cost_het(x, params, MC_TRIALS, seed)
    else:
        params = market(lt=lt)
        analytic, est = expected_cost_mul_exact(x, params), mc_expected_cost_mul(x, params, MC_TRIALS, seed)
    z = est.z_score(float(analytic))
    assert abs(z) <= Z, f"{name} at {x}: analytic {analytic}, mc {est.mean} +- {est.std_err} (z={z:.2f})"


# ----------------------------------------------------------------- criterion 4


@pytest.mark.parametrize("mu", [1.7, 1.9], ids=["params-a", "params-b"])
def test_criterion_4_derivative_matches_finite_differences(mu):
    params = market(mu=mu)
    rng = np.random.default_rng(404 + int(mu * 10))
    h = 1e-5
    for p in rng.uniform(0.5 + 1e-3, 3.0 - 1e-3, 20):
        p = float(p)
        fd = (expected_cost_hom(p + h, params) - expected_cost_hom(p - h, params)) / (2 * h)
        assert ec_hom_derivative(p, params) == pytest.approx(fd, rel=1e-5), p


@pytest.mark.parametrize("mu", [1.7, 1.9], ids=["params-a", "params-b"])
def test_criterion_4_optimum_beats_price_grid(mu):
    params = market(mu=mu)
    sol = optimal_price_hom(params)
    grid = np.linspace(0.5, 3.0, 10**4)
    assert sol.expected_cost <= expected_cost_hom(grid, params).min() + 1e-6


# ----------------------------------------------------------------- criterion 5


@pytest.mark.parametrize("mu", [1.5, 1.7, 1.8])
def test_criterion_5_homogeneous_convexity(mu):
    params = market(mu=mu, lam=3e-4)
    t = params.single
    thr = price_thresholds(t.plan, t.usage, params.demand, params.reservation)
    xs = np.linspace(thr.p_lo, thr.p_hi, 1000)
    assert np.diff(expected_cost_hom(xs, params), 2).min() >= -1e-7


def test_criterion_5_segment_convexity():
    plan = TariffPlan(2.0, 17.0, 13.0)
    types = (PhType(plan, UsageModel(1.5, 0.1), 5e-4), PhType(plan, UsageModel(1.8, 0.05), 5e-4))
    params = MarketParams(types, roaming_fee=3.0, demand=0.2, reservation=0.5, radius=30.0)
    xs = np.linspace(0.5, 3.0, 1000)
    for k in (1, 2):
        assert np.diff(segment_cost(xs, k, params), 2).min() >= -1e-7


@pytest.mark.parametrize("name,grid,direction", [
    ("B", np.linspace(0.1, 0.3, 5), 1),
    ("c0", np.linspace(2.0, 4.0, 5), 1),
    ("beta", np.linspace(10.0, 16.0, 5), 1),
    ("lam", np.linspace(5e-4, 2e-3, 5), -1),
    ("Q", np.linspace(1.9, 2.1, 5), -1),
    ("mu", np.linspace(1.5, 1.9, 5), 1),  # raising mu lowers Q - mu
])
def test_criterion_5_benchmark_monotonicity(name, grid, direction):
    vals = [benchmark_expected_cost(market(**{name: float(g)})) for g in grid]
    assert nondecreasing(vals[::direction])


@pytest.mark.parametrize("mu", [1.7, 1.75, 1.8])
def test_criterion_5_cost_nondecreasing_in_variance(mu):
    costs = [optimal_price_hom(market(mu=mu, sd=float(math.sqrt(v)))).expected_cost
             for v in np.linspace(4e-4, 1e-2, 5)]
    assert nondecreasing(costs)


LT_GRID = np.linspace(2e-4, 2e-3, 10)


@pytest.mark.parametrize("base", [traveler_sweep_market(), market()], ids=["sweep-market", "params-a"])
def test_criterion_5_multi_traveler_cost_nondecreasing(base):
    approx = [optimal_price_mul(base.with_(traveler_density=float(lt)), method="global").expected_cost
              for lt in LT_GRID]
    exact = [exact_optimum_mul(base.with_(traveler_density=float(lt)))[1] for lt in LT_GRID]
    assert nondecreasing(approx), approx
    assert nondecreasing(exact), exact


# ----------------------------------------------------------------- criterion 6


@pytest.mark.parametrize("mu,p", [(1.7, 0.5), (1.7, 0.9), (1.9, 1.2), (1.9, 1.8), (1.9, 2.5)])
def test_criterion_6_bounds_cross_at_critical_density(mu, p):
    base = market(mu=mu)
    crit = base.single.density * omega_of(p, base)
    b = serve_prob_bounds(p, base.with_(traveler_density=crit))
    assert abs(b.ub1 - b.ub2) <= 1e-9


def test_criterion_6_exact_below_combined_bound():
    rng = np.random.default_rng(606)
    for _ in range(50):
        params = market(mu=float(rng.uniform(1.5, 2.0)), lt=float(rng.uniform(0.0, 4e-3)))
        p = float(rng.uniform(0.5, 3.0))
        b = serve_prob_bounds(p, params)
        assert serve_prob_exact(p, params) <= min(b.ub1, b.ub2) + 1e-6


@pytest.mark.parametrize("mu,sd", [(1.7, 0.1), (1.9, 0.1), (1.8, 0.05), (1.85, 0.2)])
def test_criterion_6_regime_continuity(mu, sd):
    params = market(mu=mu, sd=sd)
    p0 = optimal_price_hom(params).price
    lam = params.single.density
    assert omega_inverse(lam * omega_of(p0, params) / lam, params) == pytest.approx(p0, abs=1e-8)


# ----------------------------------------------------------------- criterion 7


@pytest.mark.parametrize("mu", [1.7, 1.9, 2.1])
def test_criterion_7_single_type_heterogeneous_is_homogeneous(mu):
    params = market(mu=mu)
    het, hom = optimal_price_het(params), optimal_price_hom(params)
    assert het.price == pytest.approx(hom.price, abs=1e-8)
    assert het.expected_cost == pytest.approx(hom.expected_cost, abs=1e-8)
    for p in np.linspace(0.5, 3.0, 11):
        assert expected_cost_het(float(p), params) == pytest.approx(expected_cost_hom(float(p), params), abs=1e-8)


@pytest.mark.parametrize("mu", [1.7, 1.9, 2.1])
def test_criterion_7_no_travelers_is_homogeneous(mu):
    params = market(mu=mu, lt=0.0)
    mul, hom = optimal_price_mul(params), optimal_price_hom(params)
    assert mul.price == pytest.approx(hom.price, abs=1e-8)
    assert mul.expected_cost == pytest.approx(hom.expected_cost, abs=1e-8)
    for p in np.linspace(0.5, 3.0, 11):
        assert expected_cost_mul_exact(float(p), params) == pytest.approx(expected_cost_hom(float(p), params),
                                                                          abs=1e-8)


def test_criterion_7_single_subph_split_is_identity(params_a):
    t = params_a.single
    assert split_plan_subphs(t.plan, t.usage, t.density, 1) == (t.plan, t.usage, t.density)
    assert split_market(params_a, 1) == params_a
    two = diversity_market(1.0)
    assert split_market(two, 1) == two
