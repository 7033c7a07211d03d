"""Monte Carlo simulation of the sharing market.

Trials are grouped in fixed blocks of ``BLOCK`` trials.  Block ``b`` draws
from its own Philox stream keyed by ``(seed, b)``, and block statistics
are merged in block order, so an estimate depends only on the seed and
the trial count, never on how many workers ran it.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .homogeneous import _require_single
from .kernels import min_costs, willing_counts

BLOCK = 1 << 16


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    std_err: float
    n_trials: int
    seed: int

    def z_score(self, value):
        """Signed distance of ``value`` from the estimate in standard errors.

        Zero when both sides agree exactly, infinite when the estimate has
        no spread but disagrees.
        """
        diff = value - self.mean
        if self.std_err == 0.0:
            return 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(value)) else math.copysign(math.inf, diff)
        return diff / self.std_err

    def interval(self, k=3.0):
        return self.mean - k * self.std_err, self.mean + k * self.std_err


def block_rng(seed, block):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _check(n_trials, seed):
    if isinstance(n_trials, bool) or int(n_trials) != n_trials or n_trials < 1:
        raise DomainError(f"n_trials must be a positive integer, got {n_trials!r}")
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed < 2**64:
        raise DomainError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(n_trials), int(seed)


def positive_normal(rng, mean, std, size):
    """Normal draws with negative values redrawn until none remain."""
    x = rng.normal(mean, std, size)
    bad = np.flatnonzero(x < 0.0)
    while bad.size:
        x[bad] = rng.normal(mean, std, bad.size)
        bad = bad[x[bad] < 0.0]
    return x


def _draw_types(rng, params, n):
    """Per-type pH counts and usages for ``n`` trials, in type order."""
    out = []
    for t in params.ph_types:
        counts = rng.poisson(t.density * params.area, n)
        usage = positive_normal(rng, t.usage.mean, t.usage.std, int(counts.sum()))
        out.append((t, counts, usage))
    return out


def _willing(draws, params, p):
    total = None
    for t, counts, usage in draws:
        w = willing_counts(counts, usage, t.plan.quota, t.plan.overage_rate, params.demand, p, params.reservation)
        total = w if total is None else total + w
    return total


def _stats(x):
    x = np.asarray(x, dtype=float)
    m = x.mean()
    return x.size, m, float(((x - m) ** 2).sum())


def _merge(a, b):
    # Chan et al. pairwise update of (count, mean, sum of squared deviations)
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    d = mb - ma
    return n, ma + d * nb / n, sa + sb + d * d * na * nb / n


def _run(sample_block, n_trials, seed, workers=None):
    n_trials, seed = _check(n_trials, seed)
    sizes = [BLOCK] * (n_trials // BLOCK)
    if n_trials % BLOCK:
        sizes.append(n_trials % BLOCK)

    def job(b):
        return _stats(sample_block(block_rng(seed, b), sizes[b]))

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(b) for b in range(len(sizes))]
    acc = parts[0]
    for part in parts[1:]:
        acc = _merge(acc, part)
    n, mean, m2 = acc
    se = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
    return EstimateWithCI(float(mean), se, n_trials, seed)


def mc_expected_cost_het(p, params, n_trials, seed, workers=None):
    """Simulated cost of posting ``p``: pay ``p`` if any pH of any type accepts, else roam."""
    c0 = params.roaming_fee

    def block(rng, n):
        served = _willing(_draw_types(rng, params, n), params, p) > 0
        return np.where(served, p, c0)

    return _run(block, n_trials, seed, workers)


def mc_expected_cost_hom(p, params, n_trials, seed, workers=None):
    _require_single(params)
    return mc_expected_cost_het(p, params, n_trials, seed, workers)


def mc_benchmark_cost(params, n_trials, seed, workers=None):
    """Complete information: pay ``eps`` plus the cheapest pH's cost, or roam if none."""
    _require_single(params)
    eps, c0 = params.reservation, params.roaming_fee

    def block(rng, n):
        ((t, counts, usage),) = _draw_types(rng, params, n)
        cheapest = min_costs(counts, usage, t.plan.quota, t.plan.overage_rate, params.demand)
        return np.where(counts > 0, eps + cheapest, c0)

    return _run(block, n_trials, seed, workers)


def _mul_served(rng, params, p, n):
    draws = _draw_types(rng, params, n)
    n_y = _willing(draws, params, p)
    others = rng.poisson(params.traveler_density * params.area, n)
    # the tagged traveler's position in a uniform random order of all M + 1 travelers
    rank = rng.integers(0, others + 1)
    return rank < n_y


def mc_expected_cost_mul(p, params, n_trials, seed, workers=None):
    _require_single(params)
    c0 = params.roaming_fee
    return _run(lambda rng, n: np.where(_mul_served(rng, params, p, n), p, c0), n_trials, seed, workers)


def mc_serve_prob_mul(p, params, n_trials, seed, workers=None):
    _require_single(params)
    return _run(lambda rng, n: _mul_served(rng, params, p, n).astype(float), n_trials, seed, workers)


def mc_accept_freq(p, params, n_draws, seed, type_index=0):
    """Fraction of simulated pHs of one type that accept ``p``."""
    t = params.ph_types[type_index]

    def block(rng, n):
        usage = positive_normal(rng, t.usage.mean, t.usage.std, n)
        ones = np.ones(n, dtype=np.int64)
        return willing_counts(ones, usage, t.plan.quota, t.plan.overage_rate, params.demand, p,
                              params.reservation).astype(float)

    return _run(block, n_draws, seed)
