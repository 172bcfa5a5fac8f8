"""State transition matrices of the pollution drift.

For an autonomous generator the transition matrix over [s, t] is the matrix
exponential of (t - s) times the drift; for time-varying generators it is
obtained by integrating the matrix ODE dPhi/dt = drift(t) Phi with a
classical fixed-step 4th-order scheme.  An iterated-integral series
(`peano_baker`) provides an independent cross-check and is test-only: its
cost grows with terms x quad_points, so it never sits on a production path.

Structural facts used by the test suite: Phi(s, s) is the identity, all
entries are nonnegative, each column sum lies between exp(-dmax (t-s)) and
exp(-dmin (t-s)) for the extreme decay rates on [s, t], and the flow
composes: Phi(t, s) = Phi(t, u) Phi(u, s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ModelError
from .network import Generator

__all__ = [
    "TransitionMatrix",
    "matrix_exponential",
    "transition_matrix",
    "peano_baker",
    "column_sum_window",
]

DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class TransitionMatrix:
    """Flow matrix Phi(t, s) mapping the state at time s to the state at t."""

    matrix: np.ndarray
    s: float
    t: float

    def __post_init__(self):
        if self.t < self.s:
            raise ModelError(f"transition requires t >= s, got s={self.s}, t={self.t}")

    def column_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def l1_norm(self) -> float:
        """Max absolute column sum; <= 1 for every admissible generator."""
        return float(np.linalg.norm(self.matrix, 1))


def column_sum_window(decay_min: float, decay_max: float, elapsed: float) -> tuple[float, float]:
    """Bounds [exp(-dmax dt), exp(-dmin dt)] that every column sum must respect."""
    return float(np.exp(-decay_max * elapsed)), float(np.exp(-decay_min * elapsed))


def matrix_exponential(a: np.ndarray, t: float) -> np.ndarray:
    """exp(a t) by scaling-and-squaring with Pade approximants."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ModelError("matrix exponential requires finite entries")
    if t < 0:
        raise ModelError(f"elapsed time must be nonnegative, got {t}")
    if t == 0:
        return np.eye(a.shape[0])
    return scipy.linalg.expm(a * t)


def _rk4_steps(gen: Generator, s: float, t: float, step: float):
    if step <= 0:
        raise ModelError(f"integration step must be positive, got {step}")
    k = max(1, int(round((t - s) / step)))
    return k, (t - s) / k


def _rk4_matrix(gen: Generator, s: float, t: float, step: float,
                record_times: np.ndarray | None = None) -> np.ndarray | list[np.ndarray]:
    """Integrate dPhi/du = drift(u) Phi from s to t; optionally record snapshots.

    ``record_times`` must be a subset of the integration grid (within 1e-12).
    """
    k, h = _rk4_steps(gen, s, t, step)
    phi = np.eye(gen.n)
    out = []
    rec = list(record_times) if record_times is not None else None
    if rec is not None and rec and abs(rec[0] - s) < 1e-12:
        out.append(phi.copy())
        rec.pop(0)
    u = s
    for i in range(k):
        a1 = gen.matrix(u)
        k1 = a1 @ phi
        a2 = gen.matrix(u + h / 2)
        k2 = a2 @ (phi + (h / 2) * k1)
        k3 = a2 @ (phi + (h / 2) * k2)
        a4 = gen.matrix(u + h)
        k4 = a4 @ (phi + h * k3)
        phi = phi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        u = s + (i + 1) * h
        if rec is not None and rec and abs(rec[0] - u) < 1e-12:
            out.append(phi.copy())
            rec.pop(0)
    if record_times is not None:
        if rec:
            raise ModelError("record_times must lie on the integration grid")
        return out
    return phi


def transition_matrix(gen: Generator, s: float, t: float, step: float = DEFAULT_STEP) -> TransitionMatrix:
    """Phi(t, s): matrix exponential when autonomous, RK4 integration otherwise."""
    if t < s:
        raise ModelError(f"transition requires t >= s, got s={s}, t={t}")
    if t == s:
        return TransitionMatrix(matrix=np.eye(gen.n), s=s, t=t)
    if gen.autonomous:
        return TransitionMatrix(matrix=matrix_exponential(gen.matrix(), t - s), s=s, t=t)
    if gen.derivative_bound is None:
        raise ModelError("time-varying transition needs a declared derivative_bound")
    return TransitionMatrix(matrix=_rk4_matrix(gen, s, t, step), s=s, t=t)


def _cumulative_simpson(values: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral of uniformly sampled array-valued data.

    values has shape (m+1, ...); returns the same shape, entry j holding the
    integral from the first sample to sample j.  Interior points use local
    quadratic interpolation, matching composite Simpson at even indices.
    """
    m = values.shape[0] - 1
    out = np.zeros_like(values)
    if m == 0:
        return out
    if m == 1:
        out[1] = (h / 2.0) * (values[0] + values[1])
        return out
    # first panel via the quadratic through samples 0,1,2; after that both the
    # even and the odd prefix advance by full Simpson pairs
    out[1] = (h / 12.0) * (5 * values[0] + 8 * values[1] - values[2])
    for j in range(2, m + 1):
        out[j] = out[j - 2] + (h / 3.0) * (values[j - 2] + 4 * values[j - 1] + values[j])
    return out


def peano_baker(gen: Generator, s: float, t: float, terms: int, quad_points: int = 400) -> np.ndarray:
    """Partial sum of the iterated-integral series for Phi(t, s) (oracle only).

    Term k+1 is the running integral of drift(u) times term k; the partial
    sum with ``terms`` integral terms is returned.  Quadrature is cumulative
    Simpson on a uniform grid with ``quad_points`` panels.
    """
    if terms < 1:
        raise ModelError(f"terms must be >= 1, got {terms}")
    if t < s:
        raise ModelError(f"series requires t >= s, got s={s}, t={t}")
    if t == s:
        return np.eye(gen.n)
    m = max(2, int(quad_points))
    if m % 2:
        m += 1
    grid = np.linspace(s, t, m + 1)
    h = (t - s) / m
    drift = np.stack([gen.matrix(u) for u in grid])
    total = np.eye(gen.n)
    term = np.broadcast_to(np.eye(gen.n), drift.shape).copy()
    for _ in range(terms):
        term = _cumulative_simpson(drift @ term, h)
        total = total + term[-1]
    return total
