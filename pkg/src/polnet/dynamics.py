"""Pollution trajectories, steady states, welfare evaluation, admissibility.

The state equation dP/dt = drift(t) P + N(t) is integrated with a classical
fixed-step 4th-order scheme; in the autonomous constant-emission case the
exact propagator recurrence P(t+h) = E P(t) + drift^-1 (E - I) N with
E = exp(drift h) is used instead and the trajectory is tagged exact.

The welfare functional is evaluated in two independent forms: directly from
the pollution trajectory, and in reduced form where initial pollution enters
only through the shadow cost and the trajectory never appears.  Both report
the horizon used and a bound on the discarded tail; agreement of the two
forms is a core correctness check for the whole pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
import scipy.integrate
import scipy.linalg

from .alpha import alpha_autonomous
from .errors import IllConditionedError, ModelError
from .network import Generator
from .policy import EconomyParams, SiteParams, _utility

__all__ = [
    "Trajectory",
    "SteadyState",
    "WelfareValue",
    "AdmissibilityReport",
    "simulate",
    "steady_state",
    "convergence_check",
    "objective_direct",
    "objective_reduced",
    "truncation_horizon",
    "check_admissibility",
]

DEFAULT_STEP = 1e-2
TRUNCATION_TOL = 1e-6

PathLike = Union[Sequence[float], np.ndarray, Callable[[float], np.ndarray]]


@dataclass(frozen=True)
class Trajectory:
    """Time grid, per-site pollution states, and the emission path used."""

    grid: np.ndarray
    states: np.ndarray
    emissions: object
    exact: bool

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class SteadyState:
    """Long-run pollution levels and the linear-system residual."""

    levels: np.ndarray
    residual: float


@dataclass(frozen=True)
class WelfareValue:
    """Welfare integral truncated at ``horizon`` with the discarded-tail bound."""

    value: float
    horizon: float
    truncation_bound: float


@dataclass(frozen=True)
class AdmissibilityReport:
    passed: bool
    growth_scale: float
    growth_rate: float
    failures: tuple[str, ...]


def _path_at(path: PathLike, t: float, n: int) -> np.ndarray:
    if callable(path):
        return np.broadcast_to(np.asarray(path(t), dtype=float), (n,))
    return np.broadcast_to(np.asarray(path, dtype=float), (n,))


def _grid(horizon: float, step: float) -> tuple[np.ndarray, float]:
    if step <= 0 or horizon <= 0:
        raise ModelError("horizon and step must be positive")
    k = max(2, int(round(horizon / step)))
    if k % 2:
        k += 1
    return np.linspace(0.0, horizon, k + 1), horizon / k


def simulate(gen: Generator, p0, emissions: PathLike, horizon: float,
             step: float = DEFAULT_STEP) -> Trajectory:
    """Integrate the pollution dynamics from p0 over [0, horizon]."""
    grid, h = _grid(horizon, step)
    p = np.broadcast_to(np.asarray(p0, dtype=float), (gen.n,)).copy()
    if np.any(p < 0):
        raise ModelError("initial pollution must be nonnegative")
    constant = not callable(emissions)
    if constant:
        n_vec = _path_at(emissions, 0.0, gen.n)
        if np.any(n_vec < 0):
            raise ModelError("emissions must be nonnegative")

    states = np.empty((grid.size, gen.n))
    states[0] = p
    if gen.autonomous and constant:
        drift = gen.matrix()
        prop = scipy.linalg.expm(drift * h)
        forcing = np.linalg.solve(drift, (prop - np.eye(gen.n)) @ n_vec)
        for k in range(1, grid.size):
            p = prop @ p + forcing
            states[k] = p
        return Trajectory(grid=grid, states=states, emissions=emissions, exact=True)

    def rhs(t, x):
        n_t = _path_at(emissions, t, gen.n)
        if np.any(n_t < -1e-12):
            raise ModelError(f"emissions must be nonnegative (violated at t={t:g})")
        return gen.matrix(t) @ x + n_t

    for k in range(1, grid.size):
        t = grid[k - 1]
        k1 = rhs(t, p)
        k2 = rhs(t + h / 2, p + (h / 2) * k1)
        k3 = rhs(t + h / 2, p + (h / 2) * k2)
        k4 = rhs(t + h, p + h * k3)
        p = p + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        states[k] = p
    return Trajectory(grid=grid, states=states, emissions=emissions, exact=False)


def steady_state(gen: Generator, emissions) -> SteadyState:
    """Solve drift P + N = 0 for the long-run pollution levels."""
    if not gen.autonomous:
        raise ModelError("steady states are defined for autonomous generators")
    n_vec = np.broadcast_to(np.asarray(emissions, dtype=float), (gen.n,))
    drift = gen.matrix()
    cond = np.linalg.cond(drift)
    if cond > 1e12:
        raise IllConditionedError(
            f"drift matrix condition estimate {cond:.3e} exceeds 1e12")
    levels = np.linalg.solve(drift, -n_vec)
    levels = levels - np.linalg.solve(drift, drift @ levels + n_vec)
    residual = float(np.max(np.abs(drift @ levels + n_vec)))
    return SteadyState(levels=levels, residual=residual)


def convergence_check(traj: Trajectory, ss: SteadyState) -> np.ndarray:
    """Squared distance to the steady state at each grid time."""
    diff = traj.states - ss.levels[None, :]
    return np.sum(diff * diff, axis=1)


def truncation_horizon(rho: float, growth_rate: float, certificate: float,
                       value_scale: float, tol: float = TRUNCATION_TOL) -> float:
    """Smallest T with exp(-(rho - g) T) certificate <= tol max(1, |value_scale|)."""
    gap = rho - growth_rate
    if gap <= 0:
        raise ModelError("discount rate must exceed the growth rate")
    target = tol * max(1.0, abs(value_scale))
    if certificate <= target:
        return 1.0
    return math.log(certificate / target) / gap


def _site_arrays(sites: Sequence[SiteParams]):
    a_b = np.array([s.brown_productivity - 1.0 for s in sites])
    a_g = np.array([s.green_productivity - 1.0 for s in sites])
    eps = np.array([s.green_intensity for s in sites])
    omega = np.array([s.awareness for s in sites])
    return a_b, a_g, eps, omega


def _cost_values(sites: Sequence[SiteParams], green: np.ndarray) -> np.ndarray:
    return np.array([float(s.cost.value(g)) for s, g in zip(sites, green)])


def _default_horizon(gen, p0, brown, green, sites, econ):
    """Truncation-rule horizon for constant paths, from the steady-state scale."""
    a_b, a_g, eps, omega = _site_arrays(sites)
    n_vec = brown + eps * green
    cons = a_b * brown + a_g * green
    util = float(np.sum(_utility(cons, econ.gamma)))
    if not np.isfinite(util):
        return 1.0
    fcost = float(np.sum(_cost_values(sites, green)))
    ss = steady_state(gen, n_vec)
    certificate = (abs(util) + fcost + float(omega @ np.abs(ss.levels))
                   + float(omega @ np.abs(np.asarray(p0) - ss.levels))) / econ.rho
    value_scale = (util - fcost - float(omega @ ss.levels)) / econ.rho
    return max(10.0, truncation_horizon(econ.rho, 0.0, certificate, value_scale))


def objective_direct(gen: Generator, p0, brown: PathLike, green: PathLike,
                     sites: Sequence[SiteParams], econ: EconomyParams, *,
                     horizon: float | None = None,
                     step: float = DEFAULT_STEP) -> WelfareValue:
    """Welfare by quadrature of utility - priced pollution - green costs.

    Pollution enters through the simulated trajectory driven by the net
    emissions of the supplied investment paths.
    """
    p0 = np.broadcast_to(np.asarray(p0, dtype=float), (gen.n,))
    a_b, a_g, eps, omega = _site_arrays(sites)
    const_paths = not callable(brown) and not callable(green)

    if horizon is None:
        if not (const_paths and gen.autonomous):
            raise ModelError("pass an explicit horizon for time-varying inputs")
        horizon = _default_horizon(gen, p0, _path_at(brown, 0, gen.n),
                                   _path_at(green, 0, gen.n), sites, econ)
    grid, h = _grid(horizon, step)

    if const_paths:
        b_vec = _path_at(brown, 0.0, gen.n)
        g_vec = _path_at(green, 0.0, gen.n)
        n_path = b_vec + eps * g_vec
        cons = a_b * b_vec + a_g * g_vec
        if econ.gamma > 1 and np.any(cons <= 0):
            return WelfareValue(value=float("-inf"), horizon=horizon, truncation_bound=0.0)
        util_series = float(np.sum(_utility(cons, econ.gamma)))
        cost_series = float(np.sum(_cost_values(sites, g_vec)))
        traj = simulate(gen, p0, n_path, horizon, step)
        pollution = traj.states @ omega
        integrand = np.exp(-econ.rho * grid) * (util_series - pollution - cost_series)
    else:
        def n_fn(t):
            return (_path_at(brown, t, gen.n)
                    + eps * _path_at(green, t, gen.n))
        traj = simulate(gen, p0, n_fn, horizon, step)
        util_series = np.empty(grid.size)
        cost_series = np.empty(grid.size)
        for k, t in enumerate(grid):
            b_t, g_t = _path_at(brown, t, gen.n), _path_at(green, t, gen.n)
            cons = a_b * b_t + a_g * g_t
            if econ.gamma > 1 and np.any(cons <= 0):
                return WelfareValue(value=float("-inf"), horizon=horizon,
                                    truncation_bound=0.0)
            util_series[k] = float(np.sum(_utility(cons, econ.gamma)))
            cost_series[k] = float(np.sum(_cost_values(sites, g_t)))
        pollution = traj.states @ omega
        integrand = np.exp(-econ.rho * grid) * (util_series - pollution - cost_series)

    value = float(scipy.integrate.simpson(integrand, dx=h))
    bound = _direct_tail_bound(gen, traj, omega, util_series, cost_series, econ, horizon)
    return WelfareValue(value=value, horizon=horizon, truncation_bound=bound)


def _direct_tail_bound(gen, traj, omega, util_series, cost_series, econ, horizon):
    disc = math.exp(-econ.rho * horizon)
    if gen.autonomous and traj.exact and np.isscalar(util_series):
        ss = steady_state(gen, _path_at(traj.emissions, horizon, gen.n))
        dmin, _ = gen.decay_range()
        head = abs(util_series - cost_series) + float(omega @ ss.levels)
        transient = float(np.max(omega)) * float(np.sum(np.abs(traj.final - ss.levels)))
        return disc * (head / econ.rho + transient / (econ.rho + dmin))
    # generic estimate from the undiscounted magnitude at the horizon
    tail_mag = abs(float(np.atleast_1d(util_series)[-1])
                   - float(np.atleast_1d(cost_series)[-1])) \
        + float(omega @ np.abs(traj.final))
    gap = econ.rho - econ.growth_rate
    return math.exp(-gap * horizon) * tail_mag * math.exp(econ.growth_rate * horizon) / gap


def objective_reduced(gen: Generator, p0, brown: PathLike, green: PathLike,
                      sites: Sequence[SiteParams], econ: EconomyParams, *,
                      alpha=None, horizon: float | None = None,
                      step: float = DEFAULT_STEP) -> WelfareValue:
    """Welfare in reduced form: no trajectory, initial pollution priced by alpha.

    value = -<alpha(0), p0> + integral of e^(-rho t) [utility - <alpha(t), N(t)>
    - total green cost].
    """
    p0 = np.broadcast_to(np.asarray(p0, dtype=float), (gen.n,))
    a_b, a_g, eps, omega = _site_arrays(sites)
    if alpha is None:
        if not gen.autonomous:
            raise ModelError("pass alpha explicitly for time-varying generators")
        alpha = alpha_autonomous(gen, omega, econ.rho)
    alpha0 = _path_at(alpha, 0.0, gen.n) if callable(alpha) else np.asarray(alpha, dtype=float)

    const_paths = not callable(brown) and not callable(green)
    if horizon is None:
        if not (const_paths and gen.autonomous):
            raise ModelError("pass an explicit horizon for time-varying inputs")
        horizon = _default_horizon(gen, p0, _path_at(brown, 0, gen.n),
                                   _path_at(green, 0, gen.n), sites, econ)
    grid, h = _grid(horizon, step)

    if const_paths and not callable(alpha):
        b_vec = _path_at(brown, 0.0, gen.n)
        g_vec = _path_at(green, 0.0, gen.n)
        cons = a_b * b_vec + a_g * g_vec
        if econ.gamma > 1 and np.any(cons <= 0):
            return WelfareValue(value=float("-inf"), horizon=horizon, truncation_bound=0.0)
        core = (float(np.sum(_utility(cons, econ.gamma)))
                - float(alpha0 @ (b_vec + eps * g_vec))
                - float(np.sum(_cost_values(sites, g_vec))))
        series = np.full(grid.size, core)
    else:
        series = np.empty(grid.size)
        for k, t in enumerate(grid):
            b_t, g_t = _path_at(brown, t, gen.n), _path_at(green, t, gen.n)
            a_t = _path_at(alpha, t, gen.n) if callable(alpha) else alpha0
            cons = a_b * b_t + a_g * g_t
            if econ.gamma > 1 and np.any(cons <= 0):
                return WelfareValue(value=float("-inf"), horizon=horizon,
                                    truncation_bound=0.0)
            series[k] = (float(np.sum(_utility(cons, econ.gamma)))
                         - float(a_t @ (b_t + eps * g_t))
                         - float(np.sum(_cost_values(sites, g_t))))

    integrand = np.exp(-econ.rho * grid) * series
    value = -float(alpha0 @ p0) + float(scipy.integrate.simpson(integrand, dx=h))
    gap = econ.rho - econ.growth_rate
    bound = math.exp(-gap * horizon) * abs(series[-1]) * math.exp(econ.growth_rate * horizon) / gap
    return WelfareValue(value=value, horizon=horizon, truncation_bound=bound)


def check_admissibility(brown: PathLike, green: PathLike,
                        sites: Sequence[SiteParams], econ: EconomyParams,
                        times: np.ndarray) -> AdmissibilityReport:
    """Sample-based admissibility: nonnegative, finite, sub-geometric growth.

    Certifies ||N(t)|| <= scale * exp(rate * t) on the samples and requires
    the estimated growth rate to stay below the discount rate, so that the
    discounted emission and cost integrals converge.
    """
    times = np.asarray(times, dtype=float)
    n = len(sites)
    _, _, eps, _ = _site_arrays(sites)
    failures = []
    norms_emission = np.empty(times.size)
    norms_cost = np.empty(times.size)
    for k, t in enumerate(times):
        b_t, g_t = _path_at(brown, t, n), _path_at(green, t, n)
        if not (np.all(np.isfinite(b_t)) and np.all(np.isfinite(g_t))):
            failures.append(f"non-finite investment at t={t:g}")
            norms_emission[k] = np.nan
            norms_cost[k] = np.nan
            continue
        if np.any(b_t < 0):
            failures.append(f"negative brown investment at t={t:g}: {b_t.min():g}")
        if np.any(g_t < 0):
            failures.append(f"negative green investment at t={t:g}: {g_t.min():g}")
        norms_emission[k] = float(np.linalg.norm(b_t + eps * g_t))
        norms_cost[k] = float(np.linalg.norm(_cost_values(sites, np.maximum(g_t, 0.0))))

    rate = 0.0
    for series in (norms_emission, norms_cost):
        if np.any(~np.isfinite(series)):
            continue
        half = times >= times[-1] / 2
        tail, tail_t = series[half], times[half]
        mask = tail > 1e-300
        if mask.sum() >= 2:
            slopes = np.diff(np.log(tail[mask])) / np.diff(tail_t[mask])
            rate = max(rate, float(np.max(slopes)))
    scale = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for series in (norms_emission, norms_cost):
            if np.all(np.isfinite(series)):
                scale = max(scale, float(np.max(series * np.exp(-rate * times))))

    if rate >= econ.rho - 1e-12:
        failures.append(
            f"discounted integrand does not decay: growth rate {rate:g} "
            f">= discount rate {econ.rho:g}")
    return AdmissibilityReport(
        passed=not failures,
        growth_scale=scale,
        growth_rate=float(rate),
        failures=tuple(failures),
    )
