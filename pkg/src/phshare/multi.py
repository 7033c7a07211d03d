"""Pricing when several travelers compete for the same pHs.

Travelers form their own Poisson process with density ``traveler_density``.
A tagged traveler shares the willing pHs in range with the ``M`` other
travelers there; under uniform random matching it is served with
probability ``min(1, N_y / (M + 1))``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import numerics
from .errors import DomainError
from .homogeneous import PricingSolution, _require_feasible, _require_single, optimal_price_hom
from .kernels import serve_prob_series
from .market import PhType, TariffPlan, UsageModel, poisson_truncation
from .numerics import SQRT2, erfc_inverse
from .sharing import accept_prob, omega, omega_density

SPLIT_CONVENTIONS = ("deterministic", "independent")


@dataclass(frozen=True)
class ServeProbBounds:
    exact: float
    ub1: float
    ub2: float
    combined: float
    truncation_error: float


def _omega(p, params):
    t = params.single
    return accept_prob(p, t.plan, t.usage, params.demand, params.reservation)


def _means(params):
    t = params.single
    return t.density * params.area, params.traveler_density * params.area


def _poisson_tail(mean, n_max):
    # Pr(Poisson(mean) > n_max) = P(n_max + 1, mean), the regularised lower gamma
    if mean == 0.0:
        return 0.0
    return float(special.gammainc(n_max + 1, mean))


def _serve_series(p, params):
    _require_single(params)
    if params.traveler_density < 0:
        raise DomainError("traveler density must be non-negative")
    a, a_t = _means(params)
    w = _omega(p, params)
    if a == 0.0 or w == 0.0:
        return 0.0, 0.0
    n_max, m_max = poisson_truncation(a), poisson_truncation(a_t)
    value = serve_prob_series(w, a, a_t, n_max, m_max)
    # every summand is a probability weight times a factor in [0, 1]
    err = _poisson_tail(a, n_max) + _poisson_tail(a_t, m_max)
    return min(1.0, max(0.0, value)), err


def serve_prob_exact(p, params, tol=None):
    """Service probability of the tagged traveler from the truncated triple series."""
    return _serve_series(p, params)[0]


def _bounds(p, params):
    a, a_t = _means(params)
    x = a * _omega(p, params)
    ub1 = -np.expm1(-x)
    if a_t == 0.0:
        ub2 = x
    else:
        ub2 = x * (-math.expm1(-a_t)) / a_t
    ub2 = np.minimum(ub2, 1.0)
    return ub1, ub2, np.minimum(ub1, ub2)


def serve_prob_bounds(p, params):
    """Supply-rich bound ``ub1``, demand-rich bound ``ub2``, their minimum and the series."""
    _require_single(params)
    exact, err = _serve_series(p, params)
    ub1, ub2, combined = _bounds(float(p), params)
    return ServeProbBounds(exact=exact, ub1=float(ub1), ub2=float(ub2), combined=float(combined),
                           truncation_error=err)


def _approx_cost(p, params):
    c0 = params.roaming_fee
    return c0 + (p - c0) * _bounds(p, params)[2]


def approx_expected_cost_mul(p, params):
    """Expected cost with the service probability replaced by ``min(ub1, ub2)``."""
    _require_single(params)
    eps, c0 = params.reservation, params.roaming_fee
    if not eps <= p <= c0:
        raise DomainError(f"price {p} outside [{eps}, {c0}]")
    return float(_approx_cost(float(p), params))


def omega_inverse(target, params):
    """Price at which the (unclamped) acceptance probability equals ``target``."""
    if not 0.0 < target < 1.0:
        raise DomainError(f"target must lie in (0, 1), got {target}")
    _require_single(params)
    t = params.single
    plan, usage = t.plan, t.usage
    rate = plan.overage_rate
    y = erfc_inverse(2.0 * (1.0 - target))
    return params.reservation - rate * (plan.quota - params.demand - usage.mean) + SQRT2 * usage.std * rate * y


def _fixed_point_gap(p, params):
    t = params.single
    B, eps, c0 = params.demand, params.reservation, params.roaming_fee
    return omega(p, t.plan, t.usage, B, eps) + (p - c0) * omega_density(p, t.plan, t.usage, B, eps)


def _high_density_search(params, tol=None):
    eps, c0 = params.reservation, params.roaming_fee
    tol = tol or numerics.DEFAULT_TOL
    diag = {}
    grid = np.linspace(eps, c0, 201)
    signs = np.sign(_fixed_point_gap(grid, params))
    changes = int(np.count_nonzero(np.diff(signs[signs != 0])))
    diag["sign_changes"] = changes
    if changes > 1:
        # (C0 - p) * Omega(p) is the lambda_t-free part of the objective
        def neg_revenue(p):
            t = params.single
            return -(c0 - p) * omega(p, t.plan, t.usage, params.demand, eps)

        price, _ = numerics.minimize_scalar(neg_revenue, eps, c0, tol, vectorized=True)
        diag["method"] = "grid-fallback"
        return price, diag
    if _fixed_point_gap(eps, params) >= 0.0:
        diag["method"] = "boundary"
        return eps, diag
    diag["method"] = "bisection"
    return numerics.find_root_bisect(lambda p: _fixed_point_gap(p, params), eps, c0, tol), diag


def high_density_root(params, tol=None):
    """Optimal price once travelers outnumber pHs; does not depend on traveler density."""
    _require_single(params)
    return _high_density_search(params, tol)[0]


def optimal_price_mul(params, tol=None, method="proposition"):
    """Three-regime optimal price against the ``min(ub1, ub2)`` surrogate.

    ``method="proposition"`` applies the closed-form regime prices as
    stated: the homogeneous optimum, ``omega_inverse(lambda_t / lambda)``
    and the high-density root.  The medium-regime formula assumes the
    ``ub2`` branch keeps falling up to the crossing price, which fails when
    its own minimiser lies lower (Params A, for instance); the grid check
    then records ``surrogate_grid_gap``.

    ``method="global"`` returns the true minimiser of the surrogate over
    ``[eps, C0]``: the best of the regime candidate, the high-density root
    and a dense grid.  Its optimal cost is nondecreasing in traveler
    density, since the surrogate is pointwise nonincreasing in it.
    """
    if method not in ("proposition", "global"):
        raise DomainError(f"unknown method {method!r}")
    _require_single(params)
    _require_feasible(params)
    eps, c0 = params.reservation, params.roaming_fee
    lam = params.single.density
    lam_t = params.traveler_density
    tol = tol or numerics.DEFAULT_TOL

    base = optimal_price_hom(params.with_(traveler_density=0.0), tol)
    p0 = base.price
    boundary = lam * _omega(p0, params)
    diag = {"p0": p0, "low_medium_boundary": boundary, "method": method}

    if lam_t <= boundary:
        price, regime = p0, "low-traveler-density"
    elif lam_t <= lam:
        regime = "medium-traveler-density"
        target = lam_t / lam
        if target >= 1.0:
            price = min(c0, eps + params.single.plan.overage_rate * params.demand)
        else:
            price = min(c0, omega_inverse(target, params))
        if price < eps - 1e-9:
            raise AssertionError(f"medium-regime price {price} fell below the reservation utility {eps}")
        price = max(price, eps)
    else:
        regime = "high-traveler-density"
        price, extra = _high_density_search(params, tol)
        diag.update(extra)

    cost = float(_approx_cost(price, params))
    grid = np.linspace(eps, c0, tol.grid_points)
    costs = _approx_cost(grid, params)
    j = int(np.argmin(costs))
    if costs[j] < cost - 1e-9:
        diag["surrogate_grid_gap"] = (float(grid[j]), cost - float(costs[j]))

    if method == "global":
        diag["proposition_price"] = price
        candidates = [price, p0, _high_density_search(params, tol)[0]]
        refined, _ = numerics.minimize_scalar(lambda p: _approx_cost(p, params), eps, c0, tol, vectorized=True)
        candidates.append(refined)
        values = [float(_approx_cost(c, params)) for c in candidates]
        k = min(range(len(candidates)), key=lambda i: (values[i], i))
        price, cost = candidates[k], values[k]

    return PricingSolution(price=float(price), expected_cost=cost,
                           success_prob=float(_bounds(price, params)[2]), regime=regime, diagnostics=diag)


def split_plan_subphs(plan, usage, density, q, convention="deterministic"):
    """Split each pH into ``q`` identical sub-pHs with a plan ``(Q/q, P0/q, rate)``.

    ``convention="deterministic"`` splits the realised usage evenly, so the
    sub-pH std is ``std/q``; ``"independent"`` treats the sub-pHs as
    independent draws that sum to the original, giving ``std/sqrt(q)``.
    """
    if isinstance(q, bool) or int(q) != q or q < 1:
        raise DomainError(f"q must be a positive integer, got {q!r}")
    if convention not in SPLIT_CONVENTIONS:
        raise DomainError(f"unknown split convention {convention!r}")
    q = int(q)
    if q == 1:
        return plan, usage, density
    std = usage.std / q if convention == "deterministic" else usage.std / math.sqrt(q)
    noise = usage.est_noise_var / q**2 if convention == "deterministic" else usage.est_noise_var / q
    return (
        TariffPlan(plan.quota / q, plan.lump_sum / q, plan.overage_rate),
        UsageModel(usage.mean / q, std, noise),
        density * q,
    )


def split_market(params, q, convention="deterministic"):
    """Apply :func:`split_plan_subphs` to every pH type of a market."""
    types = []
    for t in params.ph_types:
        plan, usage, density = split_plan_subphs(t.plan, t.usage, t.density, q, convention)
        types.append(PhType(plan, usage, density))
    return params.with_(ph_types=tuple(types))


def expected_cost_mul_exact(p, params):
    """Expected cost using the truncated-series service probability."""
    c0 = params.roaming_fee
    return c0 + (p - c0) * serve_prob_exact(p, params)
