import csv
import io

import numpy as np
import pytest
from conftest import market

from phshare.config import MCSettings
from phshare.errors import DomainError
from phshare.experiments import (CSV_COLUMNS, SweepSpec, exact_optimum_mul, traveler_sweep_market, hourly_densities, preset,
                                 reference_market, run_sweep, run_validation, to_csv)


def table(rows):
    return list(csv.DictReader(io.StringIO(to_csv(rows))))


def test_sweep_spec_validation(params_a):
    with pytest.raises(DomainError):
        SweepSpec("cost-vs-density", "ph_density", ())
    with pytest.raises(DomainError):
        SweepSpec("cost-vs-density", "ph_density", (2e-4, 1e-4))
    with pytest.raises(DomainError):
        SweepSpec("bogus", "x", (1.0,))
    with pytest.raises(DomainError):
        SweepSpec("custom", "ph_density", (1e-3,))
    with pytest.raises(DomainError):
        SweepSpec("custom", "colour", (1.0,), base=params_a)
    with pytest.raises(DomainError):
        preset("custom")


def test_cost_vs_density_preset():
    rows = table(run_sweep(preset("cost-vs-density")))
    assert list(rows[0]) == list(CSV_COLUMNS)
    for eps in ("0.2", "0.5", "1"):
        sub = [r for r in rows if r["series"] == f"eps={eps}"]
        costs = [float(r["expected_cost"]) for r in sub]
        assert all(b < a for a, b in zip(costs, costs[1:]))
        assert all(float(r["benchmark_cost"]) <= float(r["expected_cost"]) for r in sub)
        assert costs[-1] - float(eps) < costs[0] - float(eps)


def test_price_vs_hour_preset():
    dens = hourly_densities(0)
    assert all(1e-4 <= dens[h] <= 5e-4 for h in (0, 3, 7, 21, 23))
    assert all(5e-4 <= dens[h] <= 2e-3 for h in range(8, 21))
    assert hourly_densities(0) == dens and hourly_densities(1) != dens
    rows = table(run_sweep(preset("price-vs-hour", mu=1.8)))
    assert len(rows) == 24
    pairs = sorted((float(r["density"]), float(r["price"])) for r in rows)
    prices = [p for _, p in pairs]
    # larger density, smaller price
    assert all(b <= a + 1e-9 for a, b in zip(prices, prices[1:]))
    assert prices[0] > prices[-1]


def test_price_vs_hour_flat_at_reference_usage():
    rows = table(run_sweep(preset("price-vs-hour")))
    assert {float(r["price"]) for r in rows} == {0.5}


def test_cost_vs_delta_mu_preset():
    rows = table(run_sweep(preset("cost-vs-delta-mu")))
    for q in ("1.8", "2"):
        sub = [float(r["expected_cost"]) for r in rows if r["series"] == f"Q={q}"]
        assert len(sub) == 13
        assert sub[-1] == pytest.approx(1.58, abs=0.02)


def test_cost_vs_traveler_density_preset():
    rows = table(run_sweep(preset("cost-vs-traveler-density")))
    for series in ("surrogate-global", "exact-series"):
        costs = [float(r["expected_cost"]) for r in rows if r["series"] == series]
        assert len(costs) == 10
        assert all(b >= a - 1e-12 for a, b in zip(costs, costs[1:]))
    prop = {r["regime"] for r in rows if r["series"] == "surrogate-proposition"}
    assert prop <= {"low-traveler-density", "medium-traveler-density", "high-traveler-density"}


def test_exact_optimum_below_surrogate_cost_bound():
    p = traveler_sweep_market().with_(traveler_density=1e-3)
    price, cost = exact_optimum_mul(p)
    assert 0.5 <= price <= 3.0 and cost <= 3.0


def test_sweep_flags_bad_points_and_continues():
    base = reference_market()
    rows = table(run_sweep(SweepSpec("custom", "reservation", (0.5, 3.5), base=base)))
    assert [r["status"] for r in rows] == ["ok", "infeasible"]


def test_custom_price_sweep_with_mc():
    spec = SweepSpec("custom", "price", (0.5, 1.0, 2.0), base=reference_market(), mc=MCSettings(20_000, 3))
    rows = table(run_sweep(spec))
    for r in rows:
        z = (float(r["expected_cost"]) - float(r["mc_mean"])) / float(r["mc_std_err"])
        assert abs(z) < 4


def test_csv_is_byte_stable():
    spec = preset("cost-vs-delta-mu", mc=MCSettings(2000, 9), grid=(0.0, 1.2, 2.4))
    a, b = to_csv(run_sweep(spec)), to_csv(run_sweep(spec))
    assert a == b
    assert a.startswith(",".join(CSV_COLUMNS) + "\n")
    assert "\r" not in a


def test_validation_passes_on_params_a(params_a):
    report = run_validation(params_a, mc=MCSettings(100_000, 0))
    assert report.passed, report.to_text()
    assert {r.quantity for r in report.rows} == {"benchmark", "homogeneous", "heterogeneous", "multi-traveler"}
    assert len([r for r in report.rows if r.quantity == "homogeneous"]) == 5


def test_validation_negative_control(params_a):
    report = run_validation(params_a, prices=(0.5, 1.0), mc=MCSettings(50_000, 0), _perturb={"benchmark": 0.05})
    assert not report.passed
    assert "benchmark" in {r.quantity for r in report.failures}
    bench = next(r for r in report.rows if r.quantity == "benchmark")
    assert abs(bench.z) > 10
    assert "FAIL" in report.to_text()


def test_validation_zero_variance_rows():
    report = run_validation(market(lam=0.0), prices=(0.5, 1.0), mc=MCSettings(5000, 1))
    assert report.passed
    for r in report.rows:
        assert (r.analytic, r.mc_mean, r.mc_std_err, r.z) == (3.0, 3.0, 0.0, 0.0)


def test_two_type_validation_has_only_het_rows():
    from phshare.experiments import diversity_market

    report = run_validation(diversity_market(1.0), prices=tuple(np.linspace(0.2, 2.8, 3)), mc=MCSettings(50_000, 2))
    assert report.passed
    assert {r.quantity for r in report.rows} == {"heterogeneous"}
