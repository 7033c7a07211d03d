"""Optimal posted price against i.i.d. pHs of a single type."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import BracketError, DomainError, InfeasibleMarketError, UnsupportedMarketError
from .sharing import accept_prob, omega, omega_density, price_thresholds

ROAMING_SLACK = 1e-9
REGIMES = (
    "boundary-eps",
    "interior-root",
    "roaming-only",
    "low-traveler-density",
    "medium-traveler-density",
    "high-traveler-density",
)


@dataclass(frozen=True)
class PricingSolution:
    """Result of a pricing query.

    ``regime`` is one of :data:`REGIMES` or ``"segment-k"`` for the
    heterogeneous solver.  ``diagnostics`` holds the solver trace: method,
    bracket, residual, convexity flag and any fallbacks that fired.
    """

    price: float
    expected_cost: float
    success_prob: float
    regime: str
    diagnostics: dict = field(default_factory=dict, compare=False)


def _require_single(params):
    if params.num_types != 1:
        raise UnsupportedMarketError(f"homogeneous pricing needs one pH type, got {params.num_types}")


def _require_feasible(params):
    if params.reservation > params.roaming_fee:
        raise InfeasibleMarketError(
            f"reservation utility {params.reservation} exceeds roaming fee {params.roaming_fee}"
        )


def success_prob_hom(p, params):
    _require_single(params)
    t = params.single
    a = t.density * params.area
    om = accept_prob(p, t.plan, t.usage, params.demand, params.reservation)
    return -np.expm1(-a * om) if np.ndim(p) else -math.expm1(-a * om)


def expected_cost_hom(p, params):
    """``p * P(success) + C0 * (1 - P(success))``; vectorised over ``p``."""
    c0 = params.roaming_fee
    return c0 + (p - c0) * success_prob_hom(p, params)


def ec_hom_derivative(p, params):
    """Slope of the smooth middle-segment expected cost at ``p``."""
    _require_single(params)
    t = params.single
    B, eps = params.demand, params.reservation
    thr = price_thresholds(t.plan, t.usage, B, eps)
    slack = 1e-12 * max(1.0, abs(thr.p_hi))
    if not thr.p_lo - slack <= p <= thr.p_hi + slack:
        raise DomainError(f"price {p} outside the middle segment [{thr.p_lo}, {thr.p_hi}]")
    a = t.density * params.area
    om = omega(p, t.plan, t.usage, B, eps)
    dens = omega_density(p, t.plan, t.usage, B, eps)
    return 1.0 - math.exp(-a * om) * (1.0 + a * (params.roaming_fee - p) * dens)


def solve_price(cost, slope, eps, c0, bracket, convex, breakpoints=(), tol=None):
    """Shared price search for the single- and multi-type objectives.

    With a convex objective the first-order condition is bisected on
    ``bracket``: a non-negative slope at ``eps`` pins the boundary optimum,
    otherwise a sign change is required and its absence falls back to the
    grid.  Without convexity ``cost`` is grid-searched on ``[eps, c0]``.
    Finally every breakpoint (kinks and jumps of the exact objective) is
    compared against the candidate.

    ``cost`` must accept numpy arrays.  Returns ``(price, regime, diag)``.
    """
    tol = tol or numerics.DEFAULT_TOL
    diag = {"convex": bool(convex)}
    price, regime = None, None
    left, right = bracket
    if convex and left < right:
        s_left, s_right = slope(left), slope(right)
        diag["bracket"] = (left, right)
        diag["bracket_slopes"] = (s_left, s_right)
        if s_left >= 0.0 and left <= eps:
            price, regime = eps, "boundary-eps"
            diag["method"] = "slope-sign"
        elif s_left < 0.0 < s_right:
            try:
                root = numerics.find_root_bisect(slope, left, right, tol)
            except BracketError:
                root = None
            if root is not None:
                diag["method"] = "bisection"
                diag["residual"] = slope(root)
                price, regime = max(eps, root), "interior-root"
        if price is None:
            diag["bracket_fallback"] = True
    if price is None:
        price, _ = numerics.minimize_scalar(cost, eps, c0, tol, vectorized=True)
        diag["method"] = diag.get("method", "grid")
        regime = "boundary-eps" if price <= eps else "interior-root"

    best = float(cost(np.array([price]))[0])
    for bp in breakpoints:
        if eps <= bp <= c0:
            v = float(cost(np.array([bp]))[0])
            if v < best - 1e-15:
                diag["breakpoint_override"] = (bp, best - v)
                price, best = bp, v
                regime = "boundary-eps" if bp <= eps else "interior-root"
    if price > c0:
        diag["upper_clip"] = price
        price = c0
    return price, regime, diag


def optimal_price_hom(params, tol=None):
    """Cost-minimising posted price for a homogeneous market."""
    _require_single(params)
    _require_feasible(params)
    t = params.single
    B, eps, c0 = params.demand, params.reservation, params.roaming_fee
    plan, usage = t.plan, t.usage
    thr = price_thresholds(plan, usage, B, eps)
    convex = B + usage.mean <= plan.quota

    def cost(p):
        return expected_cost_hom(p, params)

    def slope(p):
        return ec_hom_derivative(p, params)

    bracket = (max(eps, thr.p_lo), min(thr.p_hi, c0))
    breakpoints = (eps, eps + plan.overage_rate * B, c0)
    price, regime, diag = solve_price(cost, slope, eps, c0, bracket, convex, breakpoints, tol)
    if B > plan.quota:
        diag["demand_exceeds_quota"] = True
    return _finish(params, price, regime, diag, expected_cost_hom, success_prob_hom)


def _finish(params, price, regime, diag, cost_fn, prob_fn):
    c0 = params.roaming_fee
    ec = float(cost_fn(price, params))
    if c0 - ec < ROAMING_SLACK:
        regime = "roaming-only"
        diag["roaming_price"] = price
        price, ec = c0, c0
    return PricingSolution(
        price=float(price),
        expected_cost=ec,
        success_prob=float(prob_fn(price, params)),
        regime=regime,
        diagnostics=diag,
    )
