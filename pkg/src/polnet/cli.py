"""Command-line interface: validate, run, figure, compare-renewable,
steady-state, and oracle subcommands.

All file outputs land under --out (default: the POLNET_OUT environment
variable, else the current directory).  Runtime failures print a single
machine-readable JSON object on stderr and exit 1; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import policy, scenario
from .alpha import alpha_autonomous
from .errors import ModelError
from .network import center_node

__all__ = ["main", "build_parser"]


def _default_out() -> str:
    return os.environ.get("POLNET_OUT", ".")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polnet",
        description="Optimal green/brown investment policies and pollution "
                    "dynamics on weighted networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("config", help="path to a scenario config (JSON)")
        p.add_argument("--out", default=_default_out(),
                       help="output directory (default: $POLNET_OUT or '.')")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="tabular output format")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized draws")

    add_common(sub.add_parser("validate", help="validate a config and exit"))
    add_common(sub.add_parser("run", help="run a scenario and write its tables"))
    fig = sub.add_parser("figure", help="run a built-in figure scenario pair")
    fig.add_argument("number", type=int, choices=(1, 2, 3, 4, 5))
    add_common(fig, config=False)
    add_common(sub.add_parser("compare-renewable",
                              help="run a config against its brown-only twin"))
    add_common(sub.add_parser("steady-state",
                              help="write the long-run pollution levels"))
    oracle = sub.add_parser("oracle",
                            help="certify closed forms against the grid-search oracle")
    add_common(oracle)
    oracle.add_argument("--samples", type=int, default=100,
                        help="number of randomized parameter draws")
    return parser


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2, default=str))


def cmd_validate(args) -> int:
    cfg = scenario.load_config(args.config)
    _emit({"ok": True, "name": cfg.name, "n": cfg.n})
    return 0


def cmd_run(args) -> int:
    cfg = scenario.load_config(args.config)
    result = scenario.run_scenario(cfg)
    paths = result.write(args.out, fmt=args.format)
    _emit({"ok": True, "name": cfg.name, "outputs": [str(p) for p in paths]})
    return 0


def cmd_figure(args) -> int:
    out = scenario.run_figure(args.number, args.out, fmt=args.format)
    _emit({"ok": True, "figure": args.number,
           "outputs": [str(p) for p in out["paths"]]})
    return 0


def cmd_compare(args) -> int:
    cfg = scenario.load_config(args.config)
    comp = scenario.compare_renewable(cfg)
    path = comp.write(args.out, fmt=args.format)
    rows = comp.rows()
    center = rows[center_node(cfg.n) - 1]
    _emit({"ok": True, "name": cfg.name, "output": str(path),
           "center_node": center["node"],
           "center_dI_pct": center["dI_pct"],
           "center_dP_inf_pct": center["dP_inf_pct"]})
    return 0


def cmd_steady_state(args) -> int:
    cfg = scenario.load_config(args.config)
    result = scenario.run_scenario(cfg)
    rows = [{"node": i + 1, "P_inf": float(v), "residual": result.steady.residual}
            for i, v in enumerate(result.steady.levels)]
    path = scenario.write_rows(Path(args.out) / f"{cfg.name}_steady.{args.format}",
                               ["node", "P_inf", "residual"], rows, args.format)
    _emit({"ok": True, "name": cfg.name, "output": str(path),
           "residual": result.steady.residual})
    return 0


def _draw_site(rng: np.random.Generator, variant: str):
    """One admissible, knife-edge-free parameter draw for the oracle."""
    while True:
        a_brown = rng.uniform(1.5, 6.5)
        eps = rng.uniform(0.0, 0.9)
        alpha = rng.uniform(0.5, 3.5)
        gamma = rng.uniform(0.2, 0.9) if rng.random() < 0.5 else rng.uniform(1.2, 3.0)
        lam = rng.uniform(0.1, 2.0)
        if variant == "none":
            a_green, cost = 1.0, policy.NoCost()
        elif variant == "linear":
            a_green, cost = rng.uniform(1.05, 2.75), policy.LinearCost(lam)
            threshold = (a_green - 1) / (a_brown - 1) - lam / alpha
            if abs(eps - threshold) < 0.02:
                continue
        else:
            a_green, cost = rng.uniform(1.05, 2.75), policy.QuadraticCost(lam)
        site = policy.SiteParams(decay=0.4, brown_productivity=a_brown,
                                 green_productivity=a_green, green_intensity=eps,
                                 awareness=1.0, cost=cost)
        return site, policy.EconomyParams(rho=0.03, gamma=gamma), alpha


def _oracle_pair(site, econ, alpha):
    closed = policy.solve_node(site, econ, alpha)
    oracle = policy.brute_force_maximize(site, econ, alpha)
    f_gap = abs(closed.value - oracle.value)
    deficit = oracle.value - closed.value
    if closed.regime == policy.REGIME_INDIFFERENT:
        dist = None
    else:
        dist = max(abs(closed.brown - oracle.brown),
                   abs(closed.green - oracle.green))
    return f_gap, deficit, dist, closed.regime


def cmd_oracle(args) -> int:
    cfg = scenario.load_config(args.config)
    econ = cfg.economy_params()
    sites = cfg.site_params()
    gen = cfg.build_generator()
    alphas = alpha_autonomous(gen, np.array([s.awareness for s in sites]), econ.rho)

    report = {"name": cfg.name, "seed": args.seed, "samples": args.samples,
              "nodes": cfg.n}
    failures = []
    max_gap = 0.0
    max_deficit = -np.inf
    max_dist = 0.0
    for i, (site, a) in enumerate(zip(sites, alphas)):
        f_gap, deficit, dist, regime = _oracle_pair(site, econ, float(a))
        max_gap = max(max_gap, f_gap)
        max_deficit = max(max_deficit, deficit)
        if dist is not None:
            max_dist = max(max_dist, dist)
        if deficit > 1e-6:
            failures.append(f"node {i + 1} ({regime}): oracle beats closed form by {deficit:.3e}")

    rng = np.random.default_rng(args.seed)
    variant = cfg.cost["variant"]
    for k in range(args.samples):
        site, econ_k, a = _draw_site(rng, variant)
        f_gap, deficit, dist, regime = _oracle_pair(site, econ_k, a)
        max_gap = max(max_gap, f_gap)
        max_deficit = max(max_deficit, deficit)
        if dist is not None:
            max_dist = max(max_dist, dist)
        if deficit > 1e-6:
            failures.append(f"sample {k} ({regime}): oracle beats closed form by {deficit:.3e}")

    report.update({
        "max_F_gap": max_gap,
        "max_oracle_advantage": max(max_deficit, 0.0),
        "max_control_distance": max_dist,
        "failures": failures,
        "ok": not failures,
    })
    if args.out not in (None, "", "-"):
        out = Path(args.out) / f"{cfg.name}_oracle.json"
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
        report["output"] = str(out)
    _emit(report)
    return 0 if not failures else 1


COMMANDS = {
    "validate": cmd_validate,
    "run": cmd_run,
    "figure": cmd_figure,
    "compare-renewable": cmd_compare,
    "steady-state": cmd_steady_state,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ModelError as e:
        json.dump({"error": type(e).__name__, "message": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    except FileNotFoundError as e:
        json.dump({"error": "FileNotFoundError", "message": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
