"""Market description: tariffs, usage statistics, pH types and geometry.

Units follow the config file: data volumes in GB (1 GB = 1000 MB), money in
dollars, overage rates in dollars per GB, lengths in metres, densities per
square metre.
"""

import math
from dataclasses import dataclass, replace
from typing import Tuple

from . import numerics
from .errors import ConvergenceError, DomainError, NumericError

# stricter than the usual 1e-9 * d step rule so the returned radius also has a
# residual below 1e-9 m at metre-scale ranges
RANGE_REL_TOL = 1e-12


@dataclass(frozen=True)
class TariffPlan:
    """Two-part tariff: monthly quota, lump-sum fee, overage rate."""

    quota: float
    lump_sum: float
    overage_rate: float

    def __post_init__(self):
        if not self.quota > 0:
            raise DomainError(f"quota must be positive, got {self.quota}")
        if not self.overage_rate > 0:
            raise DomainError(f"overage_rate must be positive, got {self.overage_rate}")
        if not self.lump_sum >= 0:
            raise DomainError(f"lump_sum must be non-negative, got {self.lump_sum}")


@dataclass(frozen=True)
class UsageModel:
    """Gaussian monthly usage.

    ``est_noise_var`` is the variance of a pH's own usage-prediction noise.
    The sharing-cost model is the noise-free piecewise form, so the value is
    carried for bookkeeping only.
    """

    mean: float
    std: float
    est_noise_var: float = 0.0

    def __post_init__(self):
        if not self.std > 0:
            raise DomainError(f"usage std must be positive, got {self.std}")
        if not self.mean >= 0:
            raise DomainError(f"usage mean must be non-negative, got {self.mean}")
        if not self.est_noise_var >= 0:
            raise DomainError("est_noise_var must be non-negative")


@dataclass(frozen=True)
class PhType:
    plan: TariffPlan
    usage: UsageModel
    density: float

    def __post_init__(self):
        if not self.density >= 0:
            raise DomainError(f"pH density must be non-negative, got {self.density}")


@dataclass(frozen=True)
class MarketParams:
    """Everything a pricing query needs.

    ``ph_types`` is ordered; heterogeneous pricing additionally requires the
    order to match increasing threshold prices (checked there, not here).
    """

    ph_types: Tuple[PhType, ...]
    roaming_fee: float
    demand: float
    reservation: float
    radius: float
    traveler_density: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "ph_types", tuple(self.ph_types))
        if len(self.ph_types) < 1:
            raise DomainError("market needs at least one pH type")
        if not self.reservation > 0:
            raise DomainError(f"reservation utility must be positive, got {self.reservation}")
        if not self.demand > 0:
            raise DomainError(f"demand must be positive, got {self.demand}")
        if not self.radius > 0:
            raise DomainError(f"radius must be positive, got {self.radius}")
        if not self.traveler_density >= 0:
            raise DomainError("traveler density must be non-negative")
        # reservation <= roaming_fee is a feasibility question for the solvers,
        # which raise InfeasibleMarketError; the value object stays constructible.

    @property
    def num_types(self):
        return len(self.ph_types)

    @property
    def single(self):
        """The only pH type of a homogeneous market."""
        return self.ph_types[0]

    @property
    def area(self):
        return math.pi * self.radius**2

    def with_(self, **changes):
        return replace(self, **changes)

    def with_type(self, index=0, *, plan=None, usage=None, density=None):
        t = self.ph_types[index]
        new = PhType(plan or t.plan, usage or t.usage, t.density if density is None else density)
        types = list(self.ph_types)
        types[index] = new
        return replace(self, ph_types=tuple(types))


@dataclass(frozen=True)
class GeometryParams:
    """Link-budget parameters for the sharing-radius computation.

    ``pathloss_const`` is the path-loss constant at the reference distance
    and ``noise_power`` the receiver noise; both are named apart from the
    roaming fee and the usage variance that share symbols with them.
    """

    tx_power: float
    pathloss_const: float
    ref_dist: float
    pathloss_exp: float
    noise_power: float
    sinr_target: float
    density: float

    def __post_init__(self):
        for name in ("tx_power", "pathloss_const", "ref_dist", "noise_power", "sinr_target"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if not self.density >= 0:
            raise DomainError("density must be non-negative")
        if not self.pathloss_exp > 2:
            raise DomainError(f"path-loss exponent must exceed 2, got {self.pathloss_exp}")

    @property
    def received_scale(self):
        """``P_tx * K0 * r0**alpha``: received power at unit distance."""
        return self.tx_power * self.pathloss_const * self.ref_dist**self.pathloss_exp


def poisson_pmf(mean, n):
    """Pr(N = n) for N ~ Poisson(mean), computed in log space."""
    if not mean >= 0:
        raise DomainError(f"Poisson mean must be non-negative, got {mean}")
    if n < 0:
        return 0.0
    if mean == 0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mean) - mean - math.lgamma(n + 1))


def poisson_truncation(mean):
    """Index after which the Poisson tail mass is negligible (< 1e-12)."""
    return int(math.ceil(mean + 20.0 * math.sqrt(mean) + 30.0))


def expected_ph_count(density, d):
    if not density >= 0:
        raise DomainError("density must be non-negative")
    if not d > 0:
        raise DomainError("radius must be positive")
    return density * math.pi * d * d


def mean_interference(geo, d):
    """Mean shot-noise interference from pHs outside radius ``d`` (Campbell)."""
    if not d > 0:
        raise DomainError("radius must be positive")
    a = geo.pathloss_exp
    if not a > 2:
        raise NumericError("interference integral diverges for path-loss exponent <= 2")
    return 2.0 * math.pi * geo.density * geo.received_scale * d ** (2.0 - a) / (a - 2.0)


def laplace_interference(geo, d, s, tol=None):
    """Laplace transform E[exp(-s I_d)] of the interference beyond ``d``.

    The radial integral is cut where the integrand drops below 1e-16; the
    cut uses the small-argument bound ``1 - exp(-u) <= u``.
    """
    if not s >= 0:
        raise DomainError("Laplace argument must be non-negative")
    if s == 0 or geo.density == 0:
        return 1.0
    a = geo.pathloss_exp
    k = s * geo.received_scale

    def integrand(r):
        return -math.expm1(-k * r ** (-a)) * r

    # integrand <= k r^(1-a); beyond r_cut it is below 1e-16
    r_cut = max(d, (k / 1e-16) ** (1.0 / (a - 1.0)))
    tol = tol or numerics.ToleranceConfig(abs_tol=1e-14, rel_tol=1e-11)
    # split on a geometric grid so the slowly decaying tail is resolved
    edges = [d]
    while edges[-1] < r_cut:
        edges.append(min(edges[-1] * 2.0, r_cut))
    total = sum(numerics.integrate(integrand, lo, hi, tol) for lo, hi in zip(edges[:-1], edges[1:]))
    # analytic tail beyond r_cut using 1 - exp(-u) ~ u
    total += k * r_cut ** (2.0 - a) / (a - 2.0)
    value = math.exp(-2.0 * math.pi * geo.density * total)
    if not math.isfinite(value):
        raise NumericError("Laplace transform quadrature diverged", abscissa=s)
    return value


def noise_limited_range(geo):
    return (geo.received_scale / (geo.sinr_target * geo.noise_power)) ** (1.0 / geo.pathloss_exp)


def range_residual(geo, d):
    """``d - (P K0 r0^a / (gamma (I_d + noise)))^(1/a)`` with mean interference."""
    i_d = mean_interference(geo, d)
    rhs = (geo.received_scale / (geo.sinr_target * (i_d + geo.noise_power))) ** (1.0 / geo.pathloss_exp)
    return d - rhs


def ph_range(geo, damping=1.0, tol=None):
    """Largest radius meeting the SINR target, with interference at its mean.

    Fixed-point iteration from the noise-limited radius.  The map is
    increasing with slope below one at the fixed point, so the iterates
    decrease monotonically; ``damping`` < 1 relaxes each step.
    """
    tol = tol or numerics.DEFAULT_TOL
    if not 0 < damping <= 1:
        raise DomainError("damping must lie in (0, 1]")
    d = noise_limited_range(geo)
    a = geo.pathloss_exp
    prev = d
    for _ in range(tol.max_iter):
        i_d = mean_interference(geo, d)
        target = (geo.received_scale / (geo.sinr_target * (i_d + geo.noise_power))) ** (1.0 / a)
        prev, d = d, (1.0 - damping) * d + damping * target
        if abs(d - prev) < RANGE_REL_TOL * d:
            return d
    raise ConvergenceError("pH range iteration did not converge", last=(prev, d))
