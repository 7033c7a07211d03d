"""Hot inner loops, each in a numba loop form and a vectorised numpy form.

Dispatch goes through :func:`phshare._backend.get_backend`.  The two forms
of the per-trial kernels are bit-identical: they evaluate the same IEEE
expressions per pH and reduce with integer counts or exact ``min``.
"""

import math

import numpy as np

from ._backend import get_backend, njit
from .sharing import PRICE_SLACK

# ----------------------------------------------------------------------------
# per-trial Monte Carlo reductions
#
# A block of trials is stored ragged: ``counts[i]`` pHs for trial i, their
# usages laid out consecutively in ``usage``.


@njit
def _willing_counts_loop(counts, usage, quota, rate, demand, price, eps):
    n = counts.shape[0]
    out = np.zeros(n, dtype=np.int64)
    j = 0
    for i in range(n):
        c = 0
        for _ in range(counts[i]):
            excess = usage[j] + demand - quota
            if excess < 0.0:
                excess = 0.0
            elif excess > demand:
                excess = demand
            if price - rate * excess >= eps:
                c += 1
            j += 1
        out[i] = c
    return out


def _willing_counts_np(counts, usage, quota, rate, demand, price, eps):
    excess = np.minimum(np.maximum(usage + demand - quota, 0.0), demand)
    willing = (price - rate * excess) >= eps
    owner = np.repeat(np.arange(counts.shape[0]), counts)
    return np.bincount(owner, weights=willing, minlength=counts.shape[0]).astype(np.int64)


def willing_counts(counts, usage, quota, rate, demand, price, eps):
    """Number of pHs per trial whose sharing cost leaves them at least ``eps``."""
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    usage = np.ascontiguousarray(usage, dtype=np.float64)
    args = (float(quota), float(rate), float(demand), float(price), float(eps) - PRICE_SLACK)
    if get_backend() == "numba":
        return _willing_counts_loop(counts, usage, *args)
    return _willing_counts_np(counts, usage, *args)


@njit
def _min_costs_loop(counts, usage, quota, rate, demand):
    n = counts.shape[0]
    out = np.full(n, np.inf)
    j = 0
    for i in range(n):
        best = np.inf
        for _ in range(counts[i]):
            excess = usage[j] + demand - quota
            if excess < 0.0:
                excess = 0.0
            elif excess > demand:
                excess = demand
            cost = rate * excess
            if cost < best:
                best = cost
            j += 1
        out[i] = best
    return out


def _min_costs_np(counts, usage, quota, rate, demand):
    cost = rate * np.minimum(np.maximum(usage + demand - quota, 0.0), demand)
    out = np.full(counts.shape[0], np.inf)
    owner = np.repeat(np.arange(counts.shape[0]), counts)
    np.minimum.at(out, owner, cost)
    return out


def min_costs(counts, usage, quota, rate, demand):
    """Cheapest sharing cost per trial (``inf`` for trials without pHs)."""
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    usage = np.ascontiguousarray(usage, dtype=np.float64)
    args = (float(quota), float(rate), float(demand))
    if get_backend() == "numba":
        return _min_costs_loop(counts, usage, *args)
    return _min_costs_np(counts, usage, *args)


# ----------------------------------------------------------------------------
# service probability with overlapping travelers, as a truncated triple sum
#   sum_M sum_N sum_k min(1, k/(M+1)) Binom(k; N, w) Pois(N; a) Pois(M; a_t)


def _log_pois(mean, n_max):
    n = np.arange(n_max + 1, dtype=np.float64)
    if mean == 0.0:
        out = np.full(n_max + 1, -np.inf)
        out[0] = 0.0
        return out
    lg = np.array([math.lgamma(v + 1.0) for v in n])
    return n * math.log(mean) - mean - lg


@njit
def _serve_prob_loop(w, log_pois_n, log_pois_m):
    n_max = log_pois_n.shape[0] - 1
    m_max = log_pois_m.shape[0] - 1
    lw = math.log(w) if w > 0.0 else -np.inf
    l1w = math.log1p(-w) if w < 1.0 else -np.inf
    # willing[k] = Pr(N >= 1, N_y = k); it does not depend on M
    willing = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        pn = math.exp(log_pois_n[n])
        if pn == 0.0:
            continue
        lgn = math.lgamma(n + 1.0)
        for k in range(n + 1):
            if w == 0.0:
                b = 1.0 if k == 0 else 0.0
            elif w == 1.0:
                b = 1.0 if k == n else 0.0
            else:
                b = math.exp(lgn - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0) + k * lw + (n - k) * l1w)
            willing[k] += pn * b
    total = 0.0
    for m in range(m_max + 1):
        pm = math.exp(log_pois_m[m])
        if pm == 0.0:
            continue
        s = 0.0
        for k in range(1, n_max + 1):
            share = k / (m + 1.0)
            if share > 1.0:
                share = 1.0
            s += share * willing[k]
        total += pm * s
    return total


def _binom_table(w, n_max):
    n = np.arange(n_max + 1)[:, None].astype(np.float64)
    k = np.arange(n_max + 1)[None, :].astype(np.float64)
    valid = k <= n
    if w == 0.0:
        return np.where(k == 0, 1.0, 0.0) * valid
    if w == 1.0:
        return np.where(k == n, 1.0, 0.0)
    lg = np.vectorize(math.lgamma)
    logc = lg(n + 1) - lg(k + 1) - lg(np.where(valid, n - k, 0.0) + 1)
    logb = logc + k * math.log(w) + (n - k) * math.log1p(-w)
    return np.exp(np.where(valid, logb, -np.inf))


def _serve_prob_np(w, log_pois_n, log_pois_m):
    n_max = log_pois_n.shape[0] - 1
    m_max = log_pois_m.shape[0] - 1
    pn = np.exp(log_pois_n)
    pn[0] = 0.0  # no pH, no service
    willing = pn @ _binom_table(w, n_max)  # Pr(N >= 1, N_y = k)
    k = np.arange(n_max + 1, dtype=np.float64)
    m = np.arange(m_max + 1, dtype=np.float64)
    share = np.minimum(1.0, k[None, :] / (m[:, None] + 1.0))
    return float(np.exp(log_pois_m) @ (share @ willing))


def serve_prob_series(w, mean_n, mean_m, n_max, m_max):
    """Truncated service probability for willingness ``w`` and Poisson means."""
    ln = _log_pois(float(mean_n), int(n_max))
    lm = _log_pois(float(mean_m), int(m_max))
    if get_backend() == "numba":
        return float(_serve_prob_loop(float(w), ln, lm))
    return _serve_prob_np(float(w), ln, lm)
