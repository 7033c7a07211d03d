"""Complete-information benchmark: the traveler pays the cheapest pH its cost plus eps."""

import math

from . import numerics
from .errors import DomainError, UnsupportedMarketError
from .numerics import SQRT2, ToleranceConfig, erfc_accurate, gaussian_cdf

BENCHMARK_TOL = ToleranceConfig(abs_tol=1e-8)


def _require_single(params):
    if params.num_types != 1:
        raise UnsupportedMarketError(f"benchmark needs one pH type, got {params.num_types}")


def expected_price_given_n(n, plan, usage, B, eps, tol=None):
    """Expected payment ``eps + E[min cost]`` when exactly ``n >= 1`` pHs are present.

    Uses ``E[min] = integral over [0, rate*B] of Pr(min > c) dc``.
    """
    if n < 1:
        raise DomainError("expected_price_given_n needs n >= 1 (n = 0 means roaming)")
    rate = plan.overage_rate

    def survival(c):
        return (1.0 - gaussian_cdf(c / rate + plan.quota - B, usage.mean, usage.std)) ** n

    return eps + numerics.integrate(survival, 0.0, rate * B, tol or BENCHMARK_TOL)


def benchmark_expected_cost(params, tol=None):
    """Expected traveler cost under complete information, averaged over the pH count."""
    _require_single(params)
    t = params.single
    plan, usage = t.plan, t.usage
    rate, B = plan.overage_rate, params.demand
    eps, c0 = params.reservation, params.roaming_fee
    a = t.density * params.area
    shift = plan.quota - B - usage.mean
    scale = SQRT2 * usage.std

    def integrand(x):
        # exp(-a * Pr(x_i <= x/rate + Q - B)), written with erfc
        return math.exp(0.5 * a * (erfc_accurate((x / rate + shift) / scale) - 2.0))

    integral = numerics.integrate(integrand, 0.0, rate * B, tol or BENCHMARK_TOL)
    return eps + (c0 - eps - rate * B) * math.exp(-a) + integral
