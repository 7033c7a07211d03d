"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--trials N] [--repeat R]

Each backend is warmed up once (numba compiles on first call) before
timing.  Results of the two backends are also checked for equality.
"""

import argparse
import time

import numpy as np

from phshare import MarketParams, PhType, TariffPlan, UsageModel, set_backend
from phshare.kernels import min_costs, serve_prob_series, willing_counts
from phshare.montecarlo import mc_expected_cost_mul


def market(lt=1e-3):
    t = PhType(TariffPlan(2.0, 17.0, 13.0), UsageModel(1.7, 0.1), 1e-3)
    return MarketParams((t,), 3.0, 0.2, 0.5, 30.0, lt)


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=10**6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    counts = rng.poisson(2.83, args.trials)
    usage = rng.normal(1.7, 0.1, int(counts.sum()))
    params = market()
    cases = {
        "willing_counts": lambda: willing_counts(counts, usage, 2.0, 13.0, 0.2, 0.8, 0.5),
        "min_costs": lambda: min_costs(counts, usage, 2.0, 13.0, 0.2),
        "serve_prob_series (x50)": lambda: [serve_prob_series(w, 8.5, 17.0, 120, 180)
                                             for w in np.linspace(0.05, 0.95, 50)],
        "mc_expected_cost_mul": lambda: mc_expected_cost_mul(0.8, params, args.trials, 1).mean,
    }
    print(f"{'kernel':<26} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8}  same")
    for name, fn in cases.items():
        set_backend("numba")
        t_nb, out_nb = best_of(fn, args.repeat)
        set_backend("numpy")
        t_np, out_np = best_of(fn, args.repeat)
        same = np.allclose(np.asarray(out_nb, dtype=float), np.asarray(out_np, dtype=float), rtol=1e-12, atol=0)
        print(f"{name:<26} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>8.1f}  {same}")
    set_backend("numba")


if __name__ == "__main__":
    main()
