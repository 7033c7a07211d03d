"""JSON config ingestion.

Field names carry their units; nothing is inferred.  Example::

    {
      "market": {
        "roaming_fee": 3.0, "demand_gb": 0.2, "reservation_utility": 0.5,
        "radius_m": 30, "traveler_density_per_m2": 0.0,
        "ph_types": [{"quota_gb": 2, "lump_sum": 17, "overage_rate_per_gb": 13,
                      "usage_mean_gb": 1.7, "usage_std_gb": 0.1,
                      "density_per_m2": 0.001}]
      },
      "prices": [0.5, 0.8],
      "mc": {"n_trials": 100000, "seed": 7}
    }

``radius_m`` may be replaced by a ``geometry`` block, in which case the
SINR-limited range is solved for.  An optional ``subph`` block
(``{"q": 2, "convention": "deterministic"}``) splits every pH.
"""

import json
import re
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError, PhShareError
from .market import GeometryParams, MarketParams, PhType, TariffPlan, UsageModel, ph_range
from .multi import SPLIT_CONVENTIONS, split_market


@dataclass(frozen=True)
class MCSettings:
    n_trials: int = 100_000
    seed: int = 0


@dataclass(frozen=True)
class Config:
    market: Optional[MarketParams]
    prices: tuple
    mc: Optional[MCSettings]
    sweep: Optional[dict]
    raw: dict


def _line_of(text, key):
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


class _Reader:
    def __init__(self, text):
        self.text = text

    def fail(self, msg, field):
        raise ConfigError(msg, field=field, line=_line_of(self.text, field.split(".")[-1].split("[")[0]))

    def get(self, obj, key, path, kind=float, required=True, default=None):
        if key not in obj:
            if required:
                raise ConfigError(f"missing required field '{key}'", field=f"{path}.{key}" if path else key,
                                  line=_line_of(self.text, path.split(".")[-1].split("[")[0]) if path else None)
            return default
        value = obj[key]
        name = f"{path}.{key}" if path else key
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                self.fail(f"expected a number, got {value!r}", name)
            return float(value)
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                self.fail(f"expected an integer, got {value!r}", name)
            return value
        if not isinstance(value, kind):
            self.fail(f"expected {kind.__name__}, got {type(value).__name__}", name)
        return value


def _market(r, m):
    types = r.get(m, "ph_types", "market", kind=list)
    if not types:
        r.fail("at least one pH type is required", "market.ph_types")
    ph = []
    for i, t in enumerate(types):
        path = f"market.ph_types[{i}]"
        if not isinstance(t, dict):
            r.fail("pH type must be an object", path)
        plan = TariffPlan(r.get(t, "quota_gb", path), r.get(t, "lump_sum", path, required=False, default=0.0),
                          r.get(t, "overage_rate_per_gb", path))
        usage = UsageModel(r.get(t, "usage_mean_gb", path), r.get(t, "usage_std_gb", path),
                           r.get(t, "est_noise_var_gb2", path, required=False, default=0.0))
        ph.append(PhType(plan, usage, r.get(t, "density_per_m2", path)))
    return ph


def _geometry(r, g, density):
    path = "geometry"
    geo = GeometryParams(
        tx_power=r.get(g, "tx_power_w", path),
        pathloss_const=r.get(g, "pathloss_const", path),
        ref_dist=r.get(g, "ref_dist_m", path),
        pathloss_exp=r.get(g, "pathloss_exp", path),
        noise_power=r.get(g, "noise_power_w", path),
        sinr_target=r.get(g, "sinr_target", path),
        density=r.get(g, "density_per_m2", path, required=False, default=density),
    )
    return ph_range(geo)


def parse_config(data, text=None):
    """Build a :class:`Config` from a decoded JSON object."""
    r = _Reader(text)
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", line=1)
    try:
        market = None
        if "market" in data:
            m = r.get(data, "market", "", kind=dict)
            ph = _market(r, m)
            if "radius_m" in m:
                radius = r.get(m, "radius_m", "market")
            elif "geometry" in data:
                radius = _geometry(r, r.get(data, "geometry", "", kind=dict), sum(t.density for t in ph))
            else:
                raise ConfigError("either market.radius_m or a geometry block is required", field="market.radius_m",
                                  line=_line_of(text, "market"))
            market = MarketParams(
                tuple(ph),
                roaming_fee=r.get(m, "roaming_fee", "market"),
                demand=r.get(m, "demand_gb", "market"),
                reservation=r.get(m, "reservation_utility", "market"),
                radius=radius,
                traveler_density=r.get(m, "traveler_density_per_m2", "market", required=False, default=0.0),
            )
            if "subph" in m:
                s = r.get(m, "subph", "market", kind=dict)
                q = r.get(s, "q", "market.subph", kind=int)
                conv = r.get(s, "convention", "market.subph", kind=str, required=False, default="deterministic")
                if conv not in SPLIT_CONVENTIONS:
                    r.fail(f"convention must be one of {SPLIT_CONVENTIONS}", "market.subph.convention")
                market = split_market(market, q, conv)
        prices = tuple(float(p) for p in r.get(data, "prices", "", kind=list, required=False, default=[]))
        mc = None
        if "mc" in data:
            block = r.get(data, "mc", "", kind=dict)
            mc = MCSettings(r.get(block, "n_trials", "mc", kind=int, required=False, default=MCSettings.n_trials),
                            r.get(block, "seed", "mc", kind=int, required=False, default=MCSettings.seed))
            if mc.n_trials < 1 or mc.seed < 0:
                r.fail("n_trials must be positive and seed non-negative", "mc")
        sweep = r.get(data, "sweep", "", kind=dict, required=False)
    except ConfigError:
        raise
    except (PhShareError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc), field=getattr(exc, "field", None)) from exc
    return Config(market, prices, mc, sweep, data)


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    return parse_config(data, text)


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return loads(text)


def market_to_dict(params):
    """Inverse of the ``market`` block parser (radius form)."""
    return {
        "roaming_fee": params.roaming_fee,
        "demand_gb": params.demand,
        "reservation_utility": params.reservation,
        "radius_m": params.radius,
        "traveler_density_per_m2": params.traveler_density,
        "ph_types": [
            {
                "quota_gb": t.plan.quota,
                "lump_sum": t.plan.lump_sum,
                "overage_rate_per_gb": t.plan.overage_rate,
                "usage_mean_gb": t.usage.mean,
                "usage_std_gb": t.usage.std,
                "est_noise_var_gb2": t.usage.est_noise_var,
                "density_per_m2": t.density,
            }
            for t in params.ph_types
        ],
    }
