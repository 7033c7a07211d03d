"""One posted price facing K pH types with different tariffs and usage."""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DomainError, InvalidMarketError
from .homogeneous import PricingSolution, _finish, _require_feasible, solve_price
from .sharing import BAND_HALF_WIDTH, accept_prob, omega, omega_density, price_thresholds

CROSS_CHECK_SLACK = 1e-9


@dataclass(frozen=True)
class TypeThresholds:
    t: Tuple[float, ...]


def _band(ph, B):
    plan, usage = ph.plan, ph.usage
    return plan.overage_rate * (B + usage.mean - plan.quota - BAND_HALF_WIDTH * usage.std)


def type_thresholds(params):
    """Threshold price of each type; types must be listed in non-decreasing order.

    Negative band terms are allowed (the type then starts accepting at or
    below ``eps``); only the ordering is enforced.
    """
    bands = [_band(t, params.demand) for t in params.ph_types]
    for k in range(len(bands) - 1):
        if bands[k] > bands[k + 1]:
            raise InvalidMarketError(
                f"pH types {k + 1} and {k + 2} are out of order: band terms {bands[k]:.6g} > {bands[k + 1]:.6g}"
            )
    return TypeThresholds(tuple(params.reservation + b for b in bands))


def _hazard(p, params, upto):
    """``sum_j a_j * Omega~_j(p)`` over the first ``upto`` types."""
    total = 0.0
    for t in params.ph_types[:upto]:
        a = t.density * params.area
        total = total + a * accept_prob(p, t.plan, t.usage, params.demand, params.reservation)
    return total


def success_prob_het(p, params):
    h = _hazard(p, params, params.num_types)
    return -np.expm1(-h) if np.ndim(p) else -math.expm1(-h)


def expected_cost_het(p, params):
    c0 = params.roaming_fee
    return c0 + (p - c0) * success_prob_het(p, params)


def segment_cost(p, k, params):
    """Objective when only the first ``k`` types (1-based) can accept."""
    c0 = params.roaming_fee
    h = _hazard(p, params, k)
    return c0 + (p - c0) * (-np.expm1(-h))


def segment_slope(p, k, params):
    B, eps, c0 = params.demand, params.reservation, params.roaming_fee
    h = 0.0
    weighted = 0.0
    for t in params.ph_types[:k]:
        a = t.density * params.area
        h += a * omega(p, t.plan, t.usage, B, eps)
        weighted += a * omega_density(p, t.plan, t.usage, B, eps)
    return 1.0 - math.exp(-h) * (1.0 + (c0 - p) * weighted)


def segment_optimum(k, params, tol=None):
    """Minimiser of the k-type objective over ``[eps, C0]``."""
    if not 1 <= k <= params.num_types:
        raise DomainError(f"segment index {k} outside 1..{params.num_types}")
    _require_feasible(params)
    price, _, _ = _segment_search(k, params, tol)
    return price


def _segment_search(k, params, tol=None):
    B, eps, c0 = params.demand, params.reservation, params.roaming_fee
    types = params.ph_types[:k]
    convex = all(B + t.usage.mean <= t.plan.quota for t in types)
    thr = [price_thresholds(t.plan, t.usage, B, eps) for t in types]
    tops = [eps + t.plan.overage_rate * B for t in types]
    # the slope formula is the derivative of the clamped objective only below every top
    bracket = (max(eps, min(x.p_lo for x in thr)), min(c0, min(tops), max(x.p_hi for x in thr)))
    breakpoints = (eps, *sorted(tops), c0)

    def cost(p):
        return segment_cost(p, k, params)

    def slope(p):
        return segment_slope(p, k, params)

    return solve_price(cost, slope, eps, c0, bracket, convex, breakpoints, tol)


def optimal_price_het(params, tol=None):
    """Threshold case selection, followed by a cross-check over every segment."""
    _require_feasible(params)
    thresholds = type_thresholds(params).t
    c0 = params.roaming_fee
    K = params.num_types

    if c0 <= thresholds[0]:
        k_case = 0
    else:
        k_case = max(k for k in range(1, K + 1) if thresholds[k - 1] <= c0)

    candidates = {}
    for k in range(1, K + 1):
        price, regime, diag = _segment_search(k, params, tol)
        candidates[k] = (price, float(expected_cost_het(price, params)), regime, diag)

    if k_case == 0:
        price, cost, diag = c0, c0, {"case": "roaming"}
        regime = "roaming-only"
    else:
        price, cost, _, diag = candidates[k_case]
        diag = dict(diag, case=k_case)
        regime = f"segment-{k_case}"

    best_k = min(candidates, key=lambda k: (candidates[k][1], k))
    if candidates[best_k][1] < cost - CROSS_CHECK_SLACK:
        beaten = cost
        price, cost, _, diag = candidates[best_k]
        diag = dict(diag, case=k_case, cross_check_override=best_k, case_cost=beaten)
        regime = f"segment-{best_k}"

    diag["segment_costs"] = {k: v[1] for k, v in candidates.items()}
    price = min(max(price, params.reservation), c0)
    if regime == "roaming-only":
        return PricingSolution(price=c0, expected_cost=c0, success_prob=float(success_prob_het(c0, params)),
                               regime=regime, diagnostics=diag)
    return _finish(params, price, regime, diag, expected_cost_het, success_prob_het)
