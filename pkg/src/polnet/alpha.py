"""Per-site shadow cost of emissions.

The shadow cost aggregates the discounted future disutility that one unit of
emission at a site causes anywhere in the network, through transport, decay
and discounting.  With constant coefficients it solves the linear system
(rho I - drift^T) alpha = awareness; in the time-varying case it is the
discounted integral of Phi(t, s)^T awareness, truncated at a finite horizon
with an explicit tail bound.

The time-varying path integrates the matrix ODE for Phi and then transposes;
it never integrates the transposed drift directly, because the transpose of
the transition matrix is not in general the transition matrix of the
transposed generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientHorizonError, ModelError
from .network import Generator
from .transition import _rk4_matrix

__all__ = ["AlphaField", "alpha_autonomous", "alpha_time_varying", "alpha_bounds"]

QUAD_STEP = 1e-2


@dataclass(frozen=True)
class AlphaField:
    """Shadow-cost vector at evaluation time s, with truncation metadata."""

    values: np.ndarray
    s: float
    horizon: float
    tail_bound: float


def alpha_bounds(awareness: np.ndarray, rho: float,
                 decay_min: float, decay_max: float) -> tuple[float, float]:
    """Sandwich [min w / (rho + dmax), max w / (rho + dmin)] for the shadow cost."""
    if rho <= 0:
        raise ModelError(f"discount rate must be positive, got {rho}")
    if not 0 < decay_min <= decay_max:
        raise ModelError("need 0 < decay_min <= decay_max")
    w = np.asarray(awareness, dtype=float)
    return float(w.min() / (rho + decay_max)), float(w.max() / (rho + decay_min))


def alpha_autonomous(gen: Generator, awareness: np.ndarray, rho: float) -> np.ndarray:
    """Solve (rho I - drift^T) alpha = awareness for constant coefficients."""
    if not gen.autonomous:
        raise ModelError("alpha_autonomous requires an autonomous generator")
    if rho <= 0:
        raise ModelError(f"discount rate must be positive, got {rho}")
    w = np.broadcast_to(np.asarray(awareness, dtype=float), (gen.n,))
    a = rho * np.eye(gen.n) - gen.matrix().T
    x = np.linalg.solve(a, w)
    # one step of iterative refinement pins the residual near machine precision
    x = x + np.linalg.solve(a, w - a @ x)
    resid = np.linalg.norm(a @ x - w)
    if resid > 1e-12 * max(1.0, np.linalg.norm(w)):
        raise ModelError(f"shadow-cost linear solve residual too large: {resid:.3e}")
    return x


def alpha_time_varying(gen: Generator, awareness: np.ndarray, rho: float,
                       s: float, horizon: float, *,
                       quad_step: float = QUAD_STEP,
                       ode_step: float = 1e-3,
                       tol: float | None = None) -> AlphaField:
    """Discounted integral of Phi(t, s)^T awareness over [s, s + horizon].

    Returns the quadrature value together with the analytic bound on the
    discarded tail; raises InsufficientHorizonError when a requested ``tol``
    cannot be met by that bound.
    """
    if rho <= 0:
        raise ModelError(f"discount rate must be positive, got {rho}")
    if horizon <= 0:
        raise ModelError(f"horizon must be positive, got {horizon}")
    w = np.broadcast_to(np.asarray(awareness, dtype=float), (gen.n,))
    dmin, _ = gen.decay_range(s, s + horizon)
    tail = float(np.exp(-(rho + dmin) * horizon) * w.max() / (rho + dmin))
    if tol is not None and tail > tol:
        raise InsufficientHorizonError(
            f"horizon {horizon:g} only reaches tail bound {tail:.3e} > tol {tol:.3e}",
            achievable_bound=tail)

    panels = max(2, int(round(horizon / quad_step)))
    if panels % 2:
        panels += 1
    grid = np.linspace(s, s + horizon, panels + 1)
    h = horizon / panels
    if gen.autonomous:
        from .transition import matrix_exponential
        drift = gen.matrix()
        e_h = matrix_exponential(drift, h)
        snaps = [np.eye(gen.n)]
        for _ in range(panels):
            snaps.append(e_h @ snaps[-1])
    else:
        sub = max(1, int(round(h / ode_step)))
        snaps = _rk4_matrix(gen, s, s + horizon, h / sub, record_times=grid)
    integrand = np.stack([
        np.exp(-rho * (u - s)) * (phi.T @ w) for u, phi in zip(grid, snaps)
    ])
    weights = np.ones(panels + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    values = (h / 3.0) * np.tensordot(weights, integrand, axes=1)
    return AlphaField(values=values, s=s, horizon=horizon, tail_bound=tail)
