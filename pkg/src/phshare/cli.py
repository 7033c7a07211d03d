"""Command-line front end.

Exit status: 0 on success, 1 when a validation comparison fails, 2 on a
configuration error.
"""

import argparse
import sys
from dataclasses import replace

from . import config as cfgmod
from .benchmark import benchmark_expected_cost
from .config import MCSettings
from .errors import ConfigError, PhShareError
from .experiments import (EXPERIMENTS, _row, preset, run_sweep, run_validation, solve, sweep_from_config,
                          to_csv)
from .heterogeneous import expected_cost_het, optimal_price_het
from .homogeneous import expected_cost_hom, optimal_price_hom
from .montecarlo import mc_benchmark_cost, mc_expected_cost_het, mc_expected_cost_hom, mc_expected_cost_mul
from .multi import expected_cost_mul_exact, optimal_price_mul


def build_parser():
    parser = argparse.ArgumentParser(prog="phshare", description="Posted-price engine for hotspot data sharing.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--seed", type=int, help="Monte Carlo seed (overrides the config)")
    common.add_argument("--trials", type=int, help="Monte Carlo trial count (overrides the config)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("price-hom", parents=[common], help="optimal price, single pH type")
    sub.add_parser("price-het", parents=[common], help="optimal price, several pH types")
    sub.add_parser("price-mul", parents=[common], help="optimal price with overlapping travelers")
    sub.add_parser("benchmark", parents=[common], help="complete-information expected cost")
    sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo cost at given prices")
    sim.add_argument("--price", type=float, action="append", help="price to simulate (repeatable)")
    sw = sub.add_parser("sweep", parents=[common], help="parameter sweep to CSV")
    sw.add_argument("--preset", choices=[e for e in EXPERIMENTS if e != "custom"],
                    help="run a figure preset instead of the config's sweep block")
    sub.add_parser("validate", parents=[common], help="analytic vs Monte Carlo report")
    return parser


def _mc(args, cfg, default=None):
    mc = cfg.mc if cfg and cfg.mc else default
    if args.seed is not None or args.trials is not None:
        mc = mc or MCSettings()
        if args.seed is not None:
            mc = replace(mc, seed=args.seed)
        if args.trials is not None:
            mc = replace(mc, n_trials=args.trials)
    if mc is not None and (mc.n_trials < 1 or mc.seed < 0):
        raise ConfigError("--trials must be positive and --seed non-negative")
    return mc


def _market(cfg):
    if cfg is None or cfg.market is None:
        raise ConfigError("a config with a 'market' block is required", field="market")
    return cfg.market


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _price(cmd, params, mc):
    solver = {"price-hom": (optimal_price_hom, mc_expected_cost_hom),
              "price-het": (optimal_price_het, mc_expected_cost_het),
              "price-mul": (optimal_price_mul, mc_expected_cost_mul)}[cmd]
    sol = solver[0](params)
    est = solver[1](sol.price, params, mc.n_trials, mc.seed) if mc else None
    bench = benchmark_expected_cost(params) if cmd == "price-hom" else None
    density = sum(t.density for t in params.ph_types)
    return [_row(cmd, "", None, density, sol.price, sol.expected_cost, bench, est, sol.regime)]


def _simulate(params, prices, mc):
    if not prices:
        raise ConfigError("no prices given; use --price or a 'prices' list", field="prices")
    _, mc_fn = solve(params)
    if params.num_types > 1:
        analytic = expected_cost_het
    elif params.traveler_density > 0:
        analytic = expected_cost_mul_exact
    else:
        analytic = expected_cost_hom
    density = sum(t.density for t in params.ph_types)
    rows = []
    for p in prices:
        est = mc_fn(p, params, mc.n_trials, mc.seed)
        rows.append(_row("simulate", "price", p, density, p, float(analytic(p, params)), None, est, "fixed"))
    return rows


def run(args):
    cfg = cfgmod.load(args.config) if args.config else None
    cmd = args.command
    if cmd in ("price-hom", "price-het", "price-mul"):
        return to_csv(_price(cmd, _market(cfg), _mc(args, cfg))), 0
    if cmd == "benchmark":
        params = _market(cfg)
        mc = _mc(args, cfg)
        est = mc_benchmark_cost(params, mc.n_trials, mc.seed) if mc else None
        bench = benchmark_expected_cost(params)
        row = _row("benchmark", "", None, params.single.density, None, bench, bench, est, "complete-information")
        return to_csv([row]), 0
    if cmd == "simulate":
        prices = args.price or (cfg.prices if cfg else ())
        return to_csv(_simulate(_market(cfg), prices, _mc(args, cfg, MCSettings()))), 0
    if cmd == "sweep":
        mc = _mc(args, cfg)
        if args.preset:
            spec = preset(args.preset, mc=mc)
        elif cfg and cfg.sweep:
            try:
                spec = sweep_from_config(cfg.sweep, base=cfg.market, mc=mc)
            except (PhShareError, TypeError, ValueError) as exc:
                raise ConfigError(str(exc), field="sweep") from exc
        else:
            raise ConfigError("give --preset or a config with a 'sweep' block", field="sweep")
        return to_csv(run_sweep(spec)), 0
    report = run_validation(_market(cfg), cfg.prices, _mc(args, cfg, MCSettings()))
    return report.to_text(), 0 if report.passed else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text, status = run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PhShareError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(text, args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
