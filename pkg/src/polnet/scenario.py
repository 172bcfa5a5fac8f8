"""Scenario configs, experiment runners, and tabular output writers.

A scenario is a single declarative JSON document (versioned schema): a
network block naming a builder, per-site parameter profiles (constant,
triangular peak, node band, or explicit list), an economy block, a cost
block, and a run block.  Node labels are 1-based everywhere in configs and
outputs.  CSV cells are written with 12 significant digits so identical
configs reproduce byte-identical files.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import dynamics, network, policy
from .alpha import alpha_autonomous
from .errors import ConfigError, ModelError

__all__ = [
    "SCHEMA_VERSION",
    "ScenarioConfig",
    "ScenarioResult",
    "RenewableComparison",
    "FigureConfig",
    "parse_config",
    "load_config",
    "expand_profile",
    "run_scenario",
    "compare_renewable",
    "figure_config",
    "run_figure",
    "write_rows",
    "format_cell",
]

SCHEMA_VERSION = 1

NODE_COLUMNS = [
    "node", "delta", "a_brown", "a_green", "epsilon", "omega",
    "alpha", "regime", "I", "R", "C", "N", "Y", "F_value", "P_inf",
]

BUILDERS = ("nearest_neighbor", "distance_based", "wind", "blocked")
COST_VARIANTS = ("none", "linear", "quadratic")

# scenario names become output file prefixes, so no path separators
_NAME_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]*")


def format_cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def write_rows(path: Path, columns: list[str], rows: list[dict], fmt: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(format_cell(r[c]) for c in columns) for r in rows]
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        payload = {"schema_version": SCHEMA_VERSION, "columns": columns,
                   "rows": [{c: r[c] for c in columns} for r in rows]}
        path.write_text(json.dumps(payload, sort_keys=True, indent=2,
                                   default=float) + "\n")
    else:
        raise ConfigError(f"unknown output format '{fmt}' (use csv or json)")
    return path


# ---------------------------------------------------------------------------
# profiles


def expand_profile(spec, n: int, where: str) -> np.ndarray:
    """Materialize a per-site profile: constant, triangular, band, or explicit."""
    if isinstance(spec, (int, float)):
        return np.full(n, float(spec))
    if isinstance(spec, list):
        spec = {"kind": "explicit", "values": spec}
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected a number, list, or profile object")
    kind = spec.get("kind")
    if kind == "constant":
        return np.full(n, float(spec["value"]))
    if kind == "triangular":
        core = float(spec["core"])
        periphery = float(spec["periphery"])
        power = float(spec.get("power", 1))
        if power <= 0:
            raise ConfigError(f"{where}: triangular power must be positive")
        c = network.center_node(n)
        lab = np.arange(1, n + 1)
        dist = np.minimum(np.abs(lab - c), n - np.abs(lab - c))
        dmax = dist.max()
        shape = 1.0 - (dist / dmax) ** power
        return periphery + (core - periphery) * shape
    if kind == "band":
        nodes = spec.get("nodes", [])
        if not nodes:
            raise ConfigError(f"{where}: band profile needs a nonempty node list")
        bad = [v for v in nodes if not 1 <= int(v) <= n]
        if bad:
            raise ConfigError(f"{where}: band nodes must be 1-based labels in 1..{n}")
        out = np.full(n, float(spec["default"]))
        out[np.asarray(sorted(set(int(v) for v in nodes))) - 1] = float(spec["value"])
        return out
    if kind == "explicit":
        values = np.asarray(spec.get("values", []), dtype=float)
        if values.shape != (n,):
            raise ConfigError(f"{where}: explicit profile must list exactly {n} values")
        return values
    raise ConfigError(f"{where}: unknown profile kind '{kind}'")


def _normalize_profile(spec, where: str):
    if isinstance(spec, bool):
        raise ConfigError(f"{where}: expected a number or profile object")
    if isinstance(spec, (int, float)):
        return float(spec)
    if isinstance(spec, list):
        return {"kind": "explicit", "values": [float(v) for v in spec]}
    if isinstance(spec, dict):
        out = dict(spec)
        if out.get("kind") == "triangular":
            out.setdefault("power", 1)
            out = {"kind": "triangular", "core": float(out["core"]),
                   "periphery": float(out["periphery"]), "power": float(out["power"])}
        elif out.get("kind") == "band":
            out = {"kind": "band", "nodes": sorted(set(int(v) for v in out["nodes"])),
                   "value": float(out["value"]), "default": float(out["default"])}
        elif out.get("kind") == "explicit":
            out = {"kind": "explicit", "values": [float(v) for v in out["values"]]}
        elif out.get("kind") == "constant":
            out = {"kind": "constant", "value": float(out["value"])}
        return out
    raise ConfigError(f"{where}: expected a number, list, or profile object")


# ---------------------------------------------------------------------------
# config


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    network: dict
    profiles: dict
    economy: dict
    cost: dict
    run: dict

    @property
    def n(self) -> int:
        return int(self.network["n"])

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "network": self.network,
            "profiles": self.profiles,
            "economy": self.economy,
            "cost": self.cost,
            "run": self.run,
        }

    def build_network(self) -> network.NetworkSpec:
        blk = self.network
        builder = blk["builder"]
        if builder == "nearest_neighbor":
            return network.build_nearest_neighbor(self.n)
        if builder == "distance_based":
            return network.build_distance_based(self.n)
        if builder == "wind":
            return network.build_wind(self.n, blk["wind"], blk["affected"])
        if builder == "blocked":
            base = network.build_nearest_neighbor(self.n)
            return network.build_blocked(base, blk["zeta"], blk["from_nodes"],
                                         blk["to_nodes"])
        raise ConfigError(f"network.builder: unknown builder '{builder}'")

    def decay(self) -> np.ndarray:
        return expand_profile(self.profiles["delta"], self.n, "profiles.delta")

    def build_generator(self) -> network.Generator:
        return network.make_generator(self.build_network(), self.decay())

    def economy_params(self) -> policy.EconomyParams:
        return policy.EconomyParams(
            rho=float(self.economy["rho"]),
            gamma=float(self.economy["gamma"]),
            growth_scale=float(self.economy.get("growth_scale", 1.0)),
            growth_rate=float(self.economy.get("growth_rate", 0.0)),
        )

    def cost_for(self, lam: float):
        variant = self.cost["variant"]
        if variant == "none":
            return policy.NoCost()
        if variant == "linear":
            return policy.LinearCost(lam)
        if variant == "quadratic":
            return policy.QuadraticCost(lam)
        raise ConfigError(f"cost.variant: unknown variant '{variant}'")

    def site_params(self) -> list[policy.SiteParams]:
        n = self.n
        delta = self.decay()
        a_b = expand_profile(self.profiles["a_brown"], n, "profiles.a_brown")
        a_g = expand_profile(self.profiles["a_green"], n, "profiles.a_green")
        eps = expand_profile(self.profiles["epsilon"], n, "profiles.epsilon")
        omega = expand_profile(self.profiles["omega"], n, "profiles.omega")
        lam = expand_profile(self.cost.get("lam", 1.0), n, "cost.lam")
        return [
            policy.SiteParams(
                decay=float(delta[i]),
                brown_productivity=float(a_b[i]),
                green_productivity=float(a_g[i]),
                green_intensity=float(eps[i]),
                awareness=float(omega[i]),
                cost=self.cost_for(float(lam[i])),
            )
            for i in range(n)
        ]

    def initial_pollution(self) -> np.ndarray:
        return expand_profile(self.run.get("p0", 1.0), self.n, "run.p0")


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def parse_config(doc: dict, *, name: str | None = None) -> ScenarioConfig:
    """Validate a config document; error messages name the violated constraint."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    _require(version == SCHEMA_VERSION,
             f"schema_version: expected {SCHEMA_VERSION}, got {version}")
    for key in ("network", "profiles", "economy", "cost"):
        _require(key in doc, f"missing config block '{key}'")

    net = dict(doc["network"])
    builder = net.get("builder")
    _require(builder in BUILDERS,
             f"network.builder: must be one of {BUILDERS}, got '{builder}'")
    n = int(net.get("n", 0))
    _require(n >= 3, f"network.n: builders need at least 3 sites, got {n}")
    norm_net = {"builder": builder, "n": n}
    if builder == "wind":
        wind = float(net.get("wind", 0.0))
        _require(0 <= wind < 0.5,
                 "network.wind: wind must lie in [0, 1/2) so no exchange rate "
                 f"turns negative, got {wind}")
        affected = sorted(set(int(v) for v in net.get("affected", [])))
        _require(all(1 <= v <= n for v in affected),
                 f"network.affected: node labels must be 1-based in 1..{n}")
        norm_net.update({"wind": wind, "affected": affected})
    if builder == "blocked":
        zeta = float(net.get("zeta", 1.0))
        _require(zeta >= 0, f"network.zeta: must be >= 0, got {zeta}")
        for key in ("from_nodes", "to_nodes"):
            nodes = sorted(set(int(v) for v in net.get(key, [])))
            _require(all(1 <= v <= n for v in nodes),
                     f"network.{key}: node labels must be 1-based in 1..{n}")
            norm_net[key] = nodes
        norm_net["zeta"] = zeta

    raw_profiles = dict(doc["profiles"])
    profiles = {}
    for key in ("delta", "a_brown", "a_green", "epsilon", "omega"):
        _require(key in raw_profiles, f"profiles.{key}: missing")
        profiles[key] = _normalize_profile(raw_profiles[key], f"profiles.{key}")
    delta = expand_profile(profiles["delta"], n, "profiles.delta")
    _require(bool(np.all(delta > 0)),
             "profiles.delta: natural decay must be strictly positive at every site")
    a_b = expand_profile(profiles["a_brown"], n, "profiles.a_brown")
    _require(bool(np.all(a_b > 1)),
             "profiles.a_brown: brown productivity must exceed 1 at every site")
    a_g = expand_profile(profiles["a_green"], n, "profiles.a_green")
    _require(bool(np.all(a_g >= 1)),
             "profiles.a_green: green productivity must be at least 1")
    eps = expand_profile(profiles["epsilon"], n, "profiles.epsilon")
    _require(bool(np.all((eps >= 0) & (eps < 1))),
             "profiles.epsilon: green pollution intensity must lie in [0, 1)")
    omega = expand_profile(profiles["omega"], n, "profiles.omega")
    _require(bool(np.all(omega > 0)),
             "profiles.omega: environmental awareness must be strictly positive")

    econ = dict(doc["economy"])
    rho = float(econ.get("rho", 0.0))
    _require(rho > 0, f"economy.rho: discount rate must be positive, got {rho}")
    gamma = float(econ.get("gamma", 0.0))
    _require(gamma > 0 and gamma != 1,
             f"economy.gamma: must be positive and different from 1, got {gamma}")
    growth_rate = float(econ.get("growth_rate", 0.0))
    _require(rho > growth_rate,
             f"economy.growth_rate: discount rate {rho} must exceed growth rate "
             f"{growth_rate} for the welfare integral to converge")
    norm_econ = {"rho": rho, "gamma": gamma}
    if "growth_rate" in econ:
        norm_econ["growth_rate"] = growth_rate
    if "growth_scale" in econ:
        norm_econ["growth_scale"] = float(econ["growth_scale"])

    cost = dict(doc["cost"])
    variant = cost.get("variant")
    _require(variant in COST_VARIANTS,
             f"cost.variant: must be one of {COST_VARIANTS}, got '{variant}'")
    norm_cost = {"variant": variant}
    if variant != "none":
        lam_spec = _normalize_profile(cost.get("lam", 1.0), "cost.lam")
        lam = expand_profile(lam_spec, n, "cost.lam")
        _require(bool(np.all(lam > 0)),
                 "cost.lam: cost coefficient must be strictly positive")
        norm_cost["lam"] = lam_spec
    else:
        _require(bool(np.all(a_g == 1)),
                 "cost.variant: costless green investment requires green "
                 "productivity 1 at every site (no optimum exists otherwise)")

    resolved_name = str(name or doc.get("name", "scenario"))
    _require(bool(_NAME_RE.fullmatch(resolved_name)),
             f"name: '{resolved_name}' must match {_NAME_RE.pattern} "
             "(it becomes an output file prefix)")

    run = dict(doc.get("run", {}))
    horizon = float(run.get("horizon", 50.0))
    _require(horizon > 0, f"run.horizon: must be positive, got {horizon}")
    step = float(run.get("step", 0.01))
    _require(step > 0, f"run.step: must be positive, got {step}")
    p0_spec = _normalize_profile(run.get("p0", 1.0), "run.p0")
    p0 = expand_profile(p0_spec, n, "run.p0")
    _require(bool(np.all(p0 >= 0)),
             "run.p0: initial pollution must be nonnegative")
    outputs = list(run.get("outputs", ["nodes", "steady"]))
    bad = [o for o in outputs if o not in ("nodes", "steady", "trajectory", "welfare")]
    _require(not bad, f"run.outputs: unknown outputs {bad}")
    norm_run = {"p0": p0_spec, "horizon": horizon, "step": step, "outputs": outputs}

    return ScenarioConfig(
        name=resolved_name,
        network=norm_net,
        profiles=profiles,
        economy=norm_econ,
        cost=norm_cost,
        run=norm_run,
    )


def load_config(path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON ({e})") from e
    return parse_config(doc)


# ---------------------------------------------------------------------------
# running


@dataclass(frozen=True)
class ScenarioResult:
    config: ScenarioConfig
    alpha: np.ndarray
    policies: list
    steady: dynamics.SteadyState
    trajectory: dynamics.Trajectory | None = None
    welfare_direct: dynamics.WelfareValue | None = None
    welfare_reduced: dynamics.WelfareValue | None = None

    def node_rows(self) -> list[dict]:
        cfg = self.config
        sites = cfg.site_params()
        rows = []
        for i, (site, pol) in enumerate(zip(sites, self.policies)):
            y = (site.brown_productivity * pol.brown
                 + site.green_productivity * pol.green)
            rows.append({
                "node": i + 1,
                "delta": site.decay,
                "a_brown": site.brown_productivity,
                "a_green": site.green_productivity,
                "epsilon": site.green_intensity,
                "omega": site.awareness,
                "alpha": float(self.alpha[i]),
                "regime": pol.regime,
                "I": pol.brown,
                "R": pol.green,
                "C": pol.consumption,
                "N": pol.emission,
                "Y": y,
                "F_value": pol.value,
                "P_inf": float(self.steady.levels[i]),
            })
        return rows

    def emissions(self) -> np.ndarray:
        return np.array([p.emission for p in self.policies])

    def write(self, out_dir, fmt: str = "csv", prefix: str | None = None) -> list[Path]:
        out_dir = Path(out_dir)
        prefix = prefix or self.config.name
        paths = []
        outputs = self.config.run["outputs"]
        if "nodes" in outputs:
            paths.append(write_rows(out_dir / f"{prefix}_nodes.{fmt}",
                                    NODE_COLUMNS, self.node_rows(), fmt))
        if "steady" in outputs:
            rows = [{"node": i + 1, "P_inf": float(v), "residual": self.steady.residual}
                    for i, v in enumerate(self.steady.levels)]
            paths.append(write_rows(out_dir / f"{prefix}_steady.{fmt}",
                                    ["node", "P_inf", "residual"], rows, fmt))
        if self.trajectory is not None:
            rows = [{"time": float(t), "node": i + 1, "P": float(p)}
                    for t, state in zip(self.trajectory.grid, self.trajectory.states)
                    for i, p in enumerate(state)]
            paths.append(write_rows(out_dir / f"{prefix}_trajectory.{fmt}",
                                    ["time", "node", "P"], rows, fmt))
        meta = {"schema_version": SCHEMA_VERSION, "config": self.config.to_dict(),
                "steady_residual": self.steady.residual}
        if self.welfare_direct is not None:
            meta["welfare"] = {
                "direct": self.welfare_direct.value,
                "reduced": self.welfare_reduced.value,
                "horizon": self.welfare_direct.horizon,
                "direct_truncation_bound": self.welfare_direct.truncation_bound,
                "reduced_truncation_bound": self.welfare_reduced.truncation_bound,
            }
        meta_path = out_dir / f"{prefix}_meta.json"
        meta_path.parent.mkdir(parents=True, exist_ok=True)
        meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
        paths.append(meta_path)
        return paths


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    """Shadow costs, per-site optimal policies, steady state, optional extras."""
    gen = cfg.build_generator()
    econ = cfg.economy_params()
    sites = cfg.site_params()
    alpha = alpha_autonomous(gen, np.array([s.awareness for s in sites]), econ.rho)
    policies = [policy.solve_node(site, econ, float(a))
                for site, a in zip(sites, alpha)]
    emissions = np.array([p.emission for p in policies])
    steady = dynamics.steady_state(gen, emissions)

    trajectory = None
    if "trajectory" in cfg.run["outputs"]:
        trajectory = dynamics.simulate(gen, cfg.initial_pollution(), emissions,
                                       cfg.run["horizon"], cfg.run["step"])
    direct = reduced = None
    if "welfare" in cfg.run["outputs"]:
        brown = np.array([p.brown for p in policies])
        green = np.array([p.green for p in policies])
        direct = dynamics.objective_direct(gen, cfg.initial_pollution(), brown,
                                           green, sites, econ)
        reduced = dynamics.objective_reduced(gen, cfg.initial_pollution(), brown,
                                             green, sites, econ, alpha=alpha)
    return ScenarioResult(config=cfg, alpha=alpha, policies=policies,
                          steady=steady, trajectory=trajectory,
                          welfare_direct=direct, welfare_reduced=reduced)


# ---------------------------------------------------------------------------
# renewable comparison


COMPARE_COLUMNS = [
    "node", "I_green", "I_brown", "dI_pct",
    "N_green", "N_brown", "dN_pct",
    "P_inf_green", "P_inf_brown", "dP_inf_pct",
]


@dataclass(frozen=True)
class RenewableComparison:
    green: ScenarioResult
    brown: ScenarioResult

    def rows(self) -> list[dict]:
        out = []
        for i in range(self.green.config.n):
            pg, pb = self.green.policies[i], self.brown.policies[i]
            sg = float(self.green.steady.levels[i])
            sb = float(self.brown.steady.levels[i])
            out.append({
                "node": i + 1,
                "I_green": pg.brown, "I_brown": pb.brown,
                "dI_pct": 100.0 * (pg.brown - pb.brown) / pb.brown,
                "N_green": pg.emission, "N_brown": pb.emission,
                "dN_pct": 100.0 * (pg.emission - pb.emission) / pb.emission,
                "P_inf_green": sg, "P_inf_brown": sb,
                "dP_inf_pct": 100.0 * (sg - sb) / sb,
            })
        return out

    def write(self, out_dir, fmt: str = "csv") -> Path:
        name = self.green.config.name
        return write_rows(Path(out_dir) / f"{name}_compare.{fmt}",
                          COMPARE_COLUMNS, self.rows(), fmt)


def brown_only_counterpart(cfg: ScenarioConfig) -> ScenarioConfig:
    doc = cfg.to_dict()
    doc["name"] = f"{cfg.name}-brown-only"
    doc["profiles"]["a_green"] = 1.0
    return parse_config(doc)


def compare_renewable(cfg: ScenarioConfig) -> RenewableComparison:
    """Run a config against its green-productivity-1 counterpart."""
    a_g = expand_profile(cfg.profiles["a_green"], cfg.n, "profiles.a_green")
    if np.all(a_g <= 1):
        # degenerate but allowed: both runs coincide and all deltas are 0
        pass
    return RenewableComparison(green=run_scenario(cfg),
                               brown=run_scenario(brown_only_counterpart(cfg)))


# ---------------------------------------------------------------------------
# built-in figures


@dataclass(frozen=True)
class FigureConfig:
    name: str
    baseline: ScenarioConfig
    variant: ScenarioConfig


def figure_config(k: int) -> FigureConfig:
    if k not in (1, 2, 3, 4, 5):
        raise ConfigError(f"figure number must be 1..5, got {k}")
    doc = json.loads(
        resources.files("polnet.configs").joinpath(f"fig{k}.json").read_text())
    return FigureConfig(
        name=doc["name"],
        baseline=parse_config(doc["baseline"], name=f"{doc['name']}-baseline"),
        variant=parse_config(doc["variant"], name=f"{doc['name']}-variant"),
    )


def run_figure(k: int, out_dir, fmt: str = "csv") -> dict:
    """Run a built-in figure (baseline + variant) and write its tables."""
    fig = figure_config(k)
    base = run_scenario(fig.baseline)
    var = run_scenario(fig.variant)
    out_dir = Path(out_dir)
    paths = []
    base_rows = base.node_rows()
    var_rows = var.node_rows()
    paths.append(write_rows(out_dir / f"fig{k}_baseline.{fmt}", NODE_COLUMNS,
                            base_rows, fmt))
    paths.append(write_rows(out_dir / f"fig{k}_variant.{fmt}", NODE_COLUMNS,
                            var_rows, fmt))
    combined = [{**r, "series": "baseline"} for r in base_rows] \
        + [{**r, "series": "variant"} for r in var_rows]
    paths.append(write_rows(out_dir / f"fig{k}_nodes.{fmt}",
                            ["node", "series"] + NODE_COLUMNS[1:], combined, fmt))
    meta = {
        "schema_version": SCHEMA_VERSION,
        "figure": k,
        "name": fig.name,
        "baseline": fig.baseline.to_dict(),
        "variant": fig.variant.to_dict(),
        "outputs": [p.name for p in paths],
        "steady_residuals": {"baseline": base.steady.residual,
                             "variant": var.steady.residual},
    }
    meta_path = out_dir / f"fig{k}_meta.json"
    meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    paths.append(meta_path)
    return {"figure": fig, "baseline": base, "variant": var, "paths": paths}
