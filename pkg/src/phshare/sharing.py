"""Per-pH sharing cost, its distribution, and the acceptance probability."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .numerics import SQRT2, erfc_accurate, gaussian_cdf

BAND_HALF_WIDTH = 2.0 * SQRT2  # the erfc(+-2) band in units of sigma
# absolute slack on the price edges eps and eps + rate*B, so a price quoted
# as exactly eps + rate*B is not lost to rounding of the sum
PRICE_SLACK = 1e-12


@dataclass(frozen=True)
class PriceThresholds:
    """Price interval over which a pH's acceptance probability moves from ~0 to ~1."""

    p_lo: float
    p_hi: float


def sharing_cost(x, plan, B):
    """Extra overage charge for a pH with usage ``x`` after giving away ``B``."""
    if not B > 0:
        raise DomainError("demand must be positive")
    if np.ndim(x) == 0:
        if x < 0:
            raise DomainError(f"usage must be non-negative, got {x}")
        Q, rate = plan.quota, plan.overage_rate
        if x <= Q - B:
            return 0.0
        if x >= Q:
            return rate * B
        return rate * (x + B - plan.quota)
    x = np.asarray(x, dtype=float)
    if (x < 0).any():
        raise DomainError("usage must be non-negative")
    return plan.overage_rate * np.clip(x + B - plan.quota, 0.0, B)


def cost_cdf(c, plan, usage, B):
    """Pr(cost <= c) for c in [0, rate*B]; the cost has an atom at rate*B."""
    top = plan.overage_rate * B
    if not 0 <= c <= top:
        raise DomainError(f"cost must lie in [0, {top}], got {c}")
    if c == top:
        return 1.0
    return gaussian_cdf(c / plan.overage_rate + plan.quota - B, usage.mean, usage.std)


def _z(p, plan, usage, B, eps):
    rate = plan.overage_rate
    return (p - eps + rate * (plan.quota - B - usage.mean)) / (SQRT2 * usage.std * rate)


def omega(p, plan, usage, B, eps):
    """Unclamped erfc acceptance probability, valid for any real ``p``."""
    z = _z(p, plan, usage, B, eps)
    if np.ndim(z) == 0:
        return 0.5 * erfc_accurate(-float(z))
    return 0.5 * special.erfc(-z)


def omega_density(p, plan, usage, B, eps):
    """d omega / dp: the Gaussian density of the usage threshold, scaled by 1/rate."""
    z = _z(p, plan, usage, B, eps)
    return np.exp(-z * z) / (math.sqrt(2.0 * math.pi) * usage.std * plan.overage_rate)


def accept_prob(p, plan, usage, B, eps):
    """Probability that a single pH accepts posted price ``p``.

    Zero below ``eps``; one from ``eps + rate*B`` upward (every cost is at
    most ``rate*B``); the erfc expression in between.  Vectorised over ``p``.
    """
    lo = eps - PRICE_SLACK
    top = eps + plan.overage_rate * B - PRICE_SLACK
    if np.ndim(p) == 0:
        p = float(p)
        if p < lo:
            return 0.0
        if p >= top:
            return 1.0
        return min(1.0, max(0.0, omega(p, plan, usage, B, eps)))
    p = np.asarray(p, dtype=float)
    out = np.clip(omega(p, plan, usage, B, eps), 0.0, 1.0)
    out = np.where(p < lo, 0.0, out)
    return np.where(p >= top, 1.0, out)


def price_thresholds(plan, usage, B, eps):
    rate = plan.overage_rate
    lower_band = rate * (B + usage.mean - plan.quota - BAND_HALF_WIDTH * usage.std)
    upper_band = rate * (B + usage.mean - plan.quota + BAND_HALF_WIDTH * usage.std)
    p_lo = eps + max(lower_band, 0.0)
    p_hi = eps + min(rate * B, upper_band)
    # with a negative upper band (tiny usage) the pH always accepts from eps on
    return PriceThresholds(p_lo=p_lo, p_hi=max(p_hi, p_lo))
