"""Pointwise optimal investment at a single site.

Given the shadow cost of emissions, the optimal brown/green investment pair
maximizes a concave flow value: CRRA utility of consumption minus the shadow
price of net emissions minus the running cost of green capacity.  The
maximizer has closed form in three regimes (interior mix, green-only,
brown-only) for strictly convex green costs, a threshold form for linear
costs, and a single-formula form when green production is unproductive
(green productivity equal to 1, where only brown investment can pay off).

``brute_force_maximize`` performs an independent grid search over the same
flow value and is the certification oracle for every closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ComparisonNotApplicableError, ModelError

__all__ = [
    "LinearCost",
    "QuadraticCost",
    "ConvexCost",
    "NoCost",
    "SiteParams",
    "EconomyParams",
    "NodePolicy",
    "flow_value",
    "solve_strictly_convex",
    "solve_linear",
    "solve_brown_only",
    "solve_node",
    "brute_force_maximize",
    "emission_comparison",
    "kkt_report",
]

KNIFE_EDGE_TOL = 1e-12

REGIME_INNER = "inner"
REGIME_GREEN_ONLY = "green-only"
REGIME_BROWN_ONLY = "brown-only"
REGIME_BROWN_MODEL = "brown-only-model"
REGIME_INDIFFERENT = "linear-indifference"


# ---------------------------------------------------------------------------
# green cost functions


@dataclass(frozen=True)
class NoCost:
    """Zero running cost; only valid for sites where green is unproductive."""

    variant = "none"
    lam = 0.0

    def value(self, r):
        return np.zeros_like(np.asarray(r, dtype=float)) if np.ndim(r) else 0.0

    def marginal(self, r):
        return np.zeros_like(np.asarray(r, dtype=float)) if np.ndim(r) else 0.0


@dataclass(frozen=True)
class LinearCost:
    lam: float

    variant = "linear"

    def __post_init__(self):
        if self.lam <= 0:
            raise ModelError(f"linear cost slope must be positive, got {self.lam}")

    def value(self, r):
        return self.lam * np.asarray(r, dtype=float) if np.ndim(r) else self.lam * r

    def marginal(self, r):
        return self.lam + 0.0 * r


@dataclass(frozen=True)
class QuadraticCost:
    lam: float

    variant = "quadratic"

    def __post_init__(self):
        if self.lam <= 0:
            raise ModelError(f"quadratic cost coefficient must be positive, got {self.lam}")

    def value(self, r):
        return self.lam * np.square(r) if np.ndim(r) else self.lam * r * r

    def marginal(self, r):
        return 2.0 * self.lam * r

    def curvature(self, r):
        return 2.0 * self.lam + 0.0 * r

    def marginal_inverse(self, y):
        return y / (2.0 * self.lam)


@dataclass(frozen=True)
class ConvexCost:
    """User-supplied strictly convex cost: value(0) = 0, curvature >= some eps > 0.

    The callables should accept numpy arrays.  When no analytic inverse of the
    marginal is given, the inverse falls back to monotone bisection.
    """

    value_fn: Callable = field(repr=False)
    marginal_fn: Callable = field(repr=False)
    curvature_fn: Callable | None = field(repr=False, default=None)
    marginal_inverse_fn: Callable | None = field(repr=False, default=None)
    label: str = "custom-convex"
    lam: float = float("nan")

    variant = "custom-convex"

    def __post_init__(self):
        if abs(float(self.value_fn(0.0))) > 1e-14:
            raise ModelError("convex cost must vanish at 0")
        if float(self.marginal_fn(0.0)) < 0:
            raise ModelError("convex cost must have nonnegative marginal at 0")

    def value(self, r):
        return self.value_fn(r)

    def marginal(self, r):
        return self.marginal_fn(r)

    def curvature(self, r):
        if self.curvature_fn is None:
            raise ModelError("no curvature supplied for this cost")
        return self.curvature_fn(r)

    def marginal_inverse(self, y):
        if self.marginal_inverse_fn is not None:
            return self.marginal_inverse_fn(y)
        return _increasing_inverse(self.marginal_fn, y)


def _increasing_inverse(fn: Callable, y: float, width_tol: float = 1e-12) -> float:
    """x with fn(x) = y for nondecreasing fn, fn(0) <= y, by bisection."""
    if fn(0.0) > y + 1e-15:
        raise ModelError("marginal inverse requested below the marginal at 0")
    hi = 1.0
    for _ in range(200):
        if fn(hi) >= y:
            break
        hi *= 2.0
    else:
        raise ModelError("marginal cost never reaches the requested level")
    lo = 0.0
    while hi - lo > width_tol:
        mid = 0.5 * (lo + hi)
        if fn(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# parameters and policies


@dataclass(frozen=True)
class SiteParams:
    """Per-site coefficients: decay, productivities, pollution intensity, awareness."""

    decay: float
    brown_productivity: float
    green_productivity: float
    green_intensity: float
    awareness: float
    cost: object

    def __post_init__(self):
        if self.decay <= 0:
            raise ModelError(f"decay must be positive, got {self.decay}")
        if self.brown_productivity <= 1:
            raise ModelError(
                f"brown productivity must exceed 1, got {self.brown_productivity}")
        if self.green_productivity < 1:
            raise ModelError(
                f"green productivity must be >= 1, got {self.green_productivity}")
        if not 0 <= self.green_intensity < 1:
            raise ModelError(
                f"green pollution intensity must lie in [0, 1), got {self.green_intensity}")
        if self.awareness <= 0:
            raise ModelError(f"awareness must be positive, got {self.awareness}")


@dataclass(frozen=True)
class EconomyParams:
    """Discounting and preferences, plus the admissible growth certificate."""

    rho: float
    gamma: float
    growth_scale: float = 1.0
    growth_rate: float = 0.0

    def __post_init__(self):
        if self.rho <= 0:
            raise ModelError(f"discount rate must be positive, got {self.rho}")
        if self.gamma <= 0 or self.gamma == 1:
            raise ModelError(
                f"gamma must be positive and different from 1, got {self.gamma}")
        if self.rho <= self.growth_rate:
            raise ModelError(
                f"discount rate {self.rho} must exceed the growth rate {self.growth_rate}")


@dataclass(frozen=True)
class NodePolicy:
    """Optimal controls at one site: investments, consumption, net emission."""

    brown: float
    green: float
    consumption: float
    emission: float
    regime: str
    value: float
    knife_edge: bool = False
    segment: tuple | None = None  # linear-indifference endpoints ((I, R), (I, R))

    def __post_init__(self):
        if self.brown < -1e-12 or self.green < -1e-12:
            raise ModelError("investments must be nonnegative")
        if self.regime != REGIME_INDIFFERENT and self.consumption <= 0:
            raise ModelError("optimal consumption must be positive")
        if self.emission < -1e-12:
            raise ModelError("net emission must be nonnegative")


def _utility(c, gamma):
    """CRRA flow utility; -inf at zero consumption when gamma > 1."""
    arr = np.atleast_1d(np.asarray(c, dtype=float))
    out = np.full(arr.shape, -np.inf)
    pos = arr > 0
    out[pos] = np.power(arr[pos], 1.0 - gamma) / (1.0 - gamma)
    if gamma < 1:
        out[~pos] = 0.0
    return out.reshape(np.shape(c)) if np.ndim(c) else float(out[0])


def flow_value(site: SiteParams, econ: EconomyParams, alpha: float,
               brown, green):
    """Flow value of an investment pair: utility - priced emissions - green cost."""
    if alpha <= 0:
        raise ModelError(f"shadow cost must be positive, got {alpha}")
    brown = np.asarray(brown, dtype=float)
    green = np.asarray(green, dtype=float)
    if np.any(brown < 0) or np.any(green < 0):
        raise ModelError("investments must be nonnegative")
    c = (site.brown_productivity - 1.0) * brown + (site.green_productivity - 1.0) * green
    out = (_utility(c, econ.gamma)
           - alpha * (brown + site.green_intensity * green)
           - site.cost.value(green))
    return out if np.ndim(out) else float(out)


def _policy(site, econ, alpha, brown, green, regime, knife_edge=False, segment=None):
    brown = max(0.0, float(brown))
    green = max(0.0, float(green))
    c = (site.brown_productivity - 1.0) * brown + (site.green_productivity - 1.0) * green
    return NodePolicy(
        brown=brown,
        green=green,
        consumption=c,
        emission=brown + site.green_intensity * green,
        regime=regime,
        value=flow_value(site, econ, alpha, brown, green),
        knife_edge=knife_edge,
        segment=segment,
    )


def _target_consumption(site: SiteParams, econ: EconomyParams, alpha: float) -> float:
    """Consumption level equalizing marginal utility and the brown shadow price."""
    return ((site.brown_productivity - 1.0) / alpha) ** (1.0 / econ.gamma)


def _green_only_root(site: SiteParams, econ: EconomyParams, alpha: float,
                     width_tol: float = 1e-12) -> float:
    """Unique zero of the green-only stationarity gap, by bracketed bisection.

    The gap ((aR-1) x)^(-gamma) (aR-1) - eps alpha - marginal(x) is strictly
    decreasing, blows up at 0+ and goes to -inf, so one sign change exists.
    """
    g = site.green_productivity - 1.0

    def gap(x):
        return (g * x) ** (-econ.gamma) * g - site.green_intensity * alpha \
            - float(site.cost.marginal(x))

    hi = 1.0
    for _ in range(200):
        if gap(hi) < 0:
            break
        hi *= 2.0
    else:
        raise ModelError("green-only stationarity gap never turns negative")
    lo = min(1e-12, hi / 2)
    while gap(lo) < 0:
        lo /= 2.0
        if lo < 1e-300:
            raise ModelError("failed to bracket the green-only investment")
    while hi - lo > width_tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    # two clipped Newton polish steps sharpen the stationarity residual
    for _ in range(2):
        slope = (-econ.gamma) * (g * x) ** (-econ.gamma - 1.0) * g * g
        if hasattr(site.cost, "curvature"):
            slope -= float(site.cost.curvature(x))
        else:
            eps = 1e-7 * max(1.0, x)
            slope -= (float(site.cost.marginal(x + eps)) - float(site.cost.marginal(x - eps))) / (2 * eps)
        if slope == 0:
            break
        x = min(max(x - gap(x) / slope, lo), hi)
    return x


def solve_strictly_convex(site: SiteParams, econ: EconomyParams, alpha: float) -> NodePolicy:
    """Closed-form optimum for strictly convex green costs (three regimes)."""
    if site.cost.variant not in ("quadratic", "custom-convex"):
        raise ModelError(f"strictly convex solver got cost variant '{site.cost.variant}'")
    if site.green_productivity <= 1:
        raise ModelError("strictly convex solver needs green productivity > 1")
    if alpha <= 0:
        raise ModelError(f"shadow cost must be positive, got {alpha}")
    a_b = site.brown_productivity - 1.0
    a_g = site.green_productivity - 1.0
    ratio = a_g / a_b
    edge = ratio - float(site.cost.marginal(0.0)) / alpha

    knife1 = abs(site.green_intensity - edge) < KNIFE_EDGE_TOL
    if site.green_intensity <= edge:
        cstar = _target_consumption(site, econ, alpha)
        lhs = float(site.cost.marginal(cstar / a_g))
        rhs = alpha * (ratio - site.green_intensity)
        knife2 = abs(lhs - rhs) < KNIFE_EDGE_TOL
        if lhs >= rhs:
            green = float(site.cost.marginal_inverse(rhs))
            brown = (cstar - a_g * green) / a_b
            return _policy(site, econ, alpha, brown, green, REGIME_INNER,
                           knife_edge=knife1 or knife2)
        green = _green_only_root(site, econ, alpha)
        return _policy(site, econ, alpha, 0.0, green, REGIME_GREEN_ONLY,
                       knife_edge=knife1)
    brown = _target_consumption(site, econ, alpha) / a_b
    return _policy(site, econ, alpha, brown, 0.0, REGIME_BROWN_ONLY)


def solve_linear(site: SiteParams, econ: EconomyParams, alpha: float) -> NodePolicy:
    """Closed-form optimum for linear green costs (threshold on the intensity)."""
    if site.cost.variant != "linear":
        raise ModelError(f"linear solver got cost variant '{site.cost.variant}'")
    if site.green_productivity <= 1:
        raise ModelError("linear solver needs green productivity > 1")
    if alpha <= 0:
        raise ModelError(f"shadow cost must be positive, got {alpha}")
    a_b = site.brown_productivity - 1.0
    a_g = site.green_productivity - 1.0
    threshold = a_g / a_b - site.cost.lam / alpha
    gamma = econ.gamma

    if abs(site.green_intensity - threshold) < KNIFE_EDGE_TOL:
        cstar = _target_consumption(site, econ, alpha)
        rep_brown = cstar / a_b
        segment = ((rep_brown, 0.0), (0.0, cstar / a_g))
        return _policy(site, econ, alpha, rep_brown, 0.0, REGIME_INDIFFERENT,
                       knife_edge=True, segment=segment)
    if site.green_intensity < threshold:
        green = a_g ** ((1.0 - gamma) / gamma) \
            * (site.cost.lam + site.green_intensity * alpha) ** (-1.0 / gamma)
        return _policy(site, econ, alpha, 0.0, green, REGIME_GREEN_ONLY)
    brown = a_b ** ((1.0 - gamma) / gamma) * alpha ** (-1.0 / gamma)
    return _policy(site, econ, alpha, brown, 0.0, REGIME_BROWN_ONLY)


def solve_brown_only(site: SiteParams, econ: EconomyParams, alpha: float) -> NodePolicy:
    """Optimum when green production is unproductive (green productivity = 1)."""
    if site.green_productivity != 1:
        raise ModelError("brown-only model requires green productivity exactly 1")
    if alpha <= 0:
        raise ModelError(f"shadow cost must be positive, got {alpha}")
    a_b = site.brown_productivity - 1.0
    brown = alpha ** (-1.0 / econ.gamma) * a_b ** ((1.0 - econ.gamma) / econ.gamma)
    return _policy(site, econ, alpha, brown, 0.0, REGIME_BROWN_MODEL)


def solve_node(site: SiteParams, econ: EconomyParams, alpha: float) -> NodePolicy:
    """Dispatch on green productivity and cost variant."""
    if site.green_productivity == 1:
        return solve_brown_only(site, econ, alpha)
    if site.cost.variant == "linear":
        return solve_linear(site, econ, alpha)
    if site.cost.variant in ("quadratic", "custom-convex"):
        return solve_strictly_convex(site, econ, alpha)
    raise ModelError(
        f"cost variant '{site.cost.variant}' requires green productivity 1 "
        "(costless productive green investment has no well-defined optimum)")


# ---------------------------------------------------------------------------
# oracle


def _golden_max(fn, lo: float, hi: float, xtol: float = 1e-8) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def brute_force_maximize(site: SiteParams, econ: EconomyParams, alpha: float, *,
                         coarse: int = 400, control_tol: float = 1e-6) -> NodePolicy:
    """Grid-scan + coordinate-descent oracle for the flow-value maximum.

    The search box starts at 10x the closed-form scales and doubles whenever
    the coarse argmax touches its far edge; the flow value is concave, so
    coordinate descent with golden-section line searches then pins the
    maximizer to ``control_tol``.
    """
    a_b = site.brown_productivity - 1.0
    a_g = site.green_productivity - 1.0
    brown_scale = _target_consumption(site, econ, alpha) / a_b
    green_scale = brown_scale
    if a_g > 0:
        green_scale = _target_consumption(site, econ, alpha) / a_g
        kappa = site.green_intensity * alpha + float(site.cost.marginal(0.0))
        if kappa > 0:
            green_scale = max(green_scale,
                              (a_g / kappa) ** (1.0 / econ.gamma) / a_g)
    i_max = 10.0 * brown_scale
    r_max = 10.0 * max(green_scale, 1e-3)

    def grid_best(i_hi, r_hi):
        ii = np.linspace(0.0, i_hi, coarse)
        rr = np.linspace(0.0, r_hi, coarse)
        vals = flow_value(site, econ, alpha, ii[:, None], rr[None, :])
        k = int(np.argmax(vals))
        return k // coarse, k % coarse, ii, rr

    for _ in range(8):
        ki, kr, ii, rr = grid_best(i_max, r_max)
        grew = False
        if ki >= coarse - 1:
            i_max *= 2.0
            grew = True
        if kr >= coarse - 1:
            r_max *= 2.0
            grew = True
        if not grew:
            break
    brown, green = float(ii[ki]), float(rr[kr])
    window_i = 2.0 * float(ii[1] - ii[0])
    window_r = 2.0 * float(rr[1] - rr[0])

    for _ in range(80):
        new_brown = _golden_max(
            lambda x: flow_value(site, econ, alpha, x, green),
            max(0.0, brown - window_i), brown + window_i,
            xtol=control_tol / 20)
        new_green = _golden_max(
            lambda x: flow_value(site, econ, alpha, new_brown, x),
            max(0.0, green - window_r), green + window_r,
            xtol=control_tol / 20)
        moved = max(abs(new_brown - brown), abs(new_green - green))
        # trust-region flavor: grow when the line search ran to its edge,
        # shrink otherwise, never below the refinement scale
        window_i = max(4 * abs(new_brown - brown), window_i / 2, 1e-5)
        window_r = max(4 * abs(new_green - green), window_r / 2, 1e-5)
        brown, green = new_brown, new_green
        if moved < control_tol / 10 and max(window_i, window_r) <= 1e-4:
            break

    edge_tol = 10 * control_tol
    if green <= edge_tol and brown <= edge_tol:
        regime = REGIME_BROWN_ONLY
    elif green <= edge_tol:
        regime = REGIME_BROWN_MODEL if site.green_productivity == 1 else REGIME_BROWN_ONLY
    elif brown <= edge_tol:
        regime = REGIME_GREEN_ONLY
    else:
        regime = REGIME_INNER
    return _policy(site, econ, alpha, brown, green, regime)


def emission_comparison(site: SiteParams, econ: EconomyParams, alpha: float) -> tuple[float, float]:
    """Net emission with both technologies vs with brown only (same site).

    Applicable in the interior regime for strictly convex costs, where the
    two-source emission is the brown-only one minus a strictly positive gap.
    """
    if site.green_productivity <= 1 or site.cost.variant not in ("quadratic", "custom-convex"):
        raise ComparisonNotApplicableError(
            "comparison needs productive green investment and a strictly convex cost")
    pol = solve_strictly_convex(site, econ, alpha)
    if pol.regime != REGIME_INNER:
        raise ComparisonNotApplicableError(
            f"comparison needs the interior regime, got '{pol.regime}'")
    brown_model = alpha ** (-1.0 / econ.gamma) \
        * (site.brown_productivity - 1.0) ** ((1.0 - econ.gamma) / econ.gamma)
    return pol.emission, brown_model


def kkt_report(site: SiteParams, econ: EconomyParams, alpha: float,
               pol: NodePolicy) -> dict:
    """Stationarity residuals and multipliers of the box-constrained optimum.

    The multiplier on an inactive control must be nonnegative; stationarity
    residuals of active controls must vanish.
    """
    a_b = site.brown_productivity - 1.0
    a_g = site.green_productivity - 1.0
    mu = pol.consumption ** (-econ.gamma)
    grad_brown = mu * a_b - alpha
    grad_green = mu * a_g - site.green_intensity * alpha - float(site.cost.marginal(pol.green))
    return {
        "stationarity_brown": grad_brown if pol.brown > 0 else 0.0,
        "stationarity_green": grad_green if pol.green > 0 else 0.0,
        "multiplier_brown": -grad_brown if pol.brown == 0 else 0.0,
        "multiplier_green": -grad_green if pol.green == 0 else 0.0,
    }
