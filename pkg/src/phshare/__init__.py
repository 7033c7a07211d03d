"""Posted-price engine for hotspot data-plan sharing, with a Monte Carlo oracle."""

from ._backend import get_backend, set_backend
from .benchmark import benchmark_expected_cost, expected_price_given_n
from .errors import (BracketError, ConfigError, ConvergenceError, DomainError, InfeasibleMarketError,
                     InvalidMarketError, NumericError, PhShareError, UnsupportedMarketError)
from .heterogeneous import (TypeThresholds, expected_cost_het, optimal_price_het, segment_optimum,
                            success_prob_het, type_thresholds)
from .homogeneous import (PricingSolution, ec_hom_derivative, expected_cost_hom, optimal_price_hom,
                          success_prob_hom)
from .market import (GeometryParams, MarketParams, PhType, TariffPlan, UsageModel, expected_ph_count,
                     laplace_interference, mean_interference, ph_range, poisson_pmf)
from .montecarlo import (EstimateWithCI, mc_accept_freq, mc_benchmark_cost, mc_expected_cost_het,
                         mc_expected_cost_hom, mc_expected_cost_mul, mc_serve_prob_mul)
from .multi import (ServeProbBounds, approx_expected_cost_mul, expected_cost_mul_exact, high_density_root,
                    omega_inverse, optimal_price_mul, serve_prob_bounds, serve_prob_exact, split_market,
                    split_plan_subphs)
from .numerics import ToleranceConfig, erfc_accurate, find_root_bisect, integrate, minimize_scalar
from .sharing import PriceThresholds, accept_prob, cost_cdf, omega, price_thresholds, sharing_cost

__version__ = "0.1.0"
