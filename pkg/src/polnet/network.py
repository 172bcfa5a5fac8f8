"""Weighted pollution-transport networks and their drift operators.

A network over n sites is described by a nonnegative weight matrix W with
w[i, j] = intensity of the flow from site j into site i (no self-loops).
The induced graph operator L has the off-diagonal weights and a diagonal
chosen so every column sums to zero (whatever enters other sites left the
source site).  Subtracting the per-site natural decay rates gives the
generator of the pollution dynamics, L - diag(decay), whose eigenvalues lie
strictly in the left half-plane whenever decay > 0.

Node sets and node indices in the public API are 1-based, matching the CSV
and config conventions; arrays are 0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import ModelError

__all__ = [
    "NetworkSpec",
    "GraphOperator",
    "Generator",
    "build_nearest_neighbor",
    "build_distance_based",
    "build_wind",
    "build_blocked",
    "make_generator",
    "center_node",
]

COLUMN_SUM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def center_node(n: int) -> int:
    """1-based central node, ceil(n/2)."""
    return (n + 1) // 2


@dataclass(frozen=True)
class NetworkSpec:
    """n sites plus the nonnegative weight matrix W (w[i, j]: flow j -> i)."""

    n: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if self.n < 2:
            raise ModelError(f"a network needs at least 2 sites, got n={self.n}")
        if w.shape != (self.n, self.n):
            raise ModelError(f"weights must be {self.n}x{self.n}, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ModelError("weights must be finite")
        if np.any(w < 0):
            raise ModelError("weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise ModelError("self-loops are not allowed (diagonal weights must be 0)")
        object.__setattr__(self, "weights", _frozen(w))

    def operator(self) -> "GraphOperator":
        """Graph operator L: off-diagonal = weights, diagonal = -column sums."""
        m = self.weights.copy()
        np.fill_diagonal(m, 0.0)
        np.fill_diagonal(m, -m.sum(axis=0))
        return GraphOperator(matrix=m)


@dataclass(frozen=True)
class GraphOperator:
    """Transport operator with zero column sums and nonnegative off-diagonals."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        n = m.shape[0]
        if m.shape != (n, n):
            raise ModelError("graph operator must be square")
        off = m - np.diag(np.diag(m))
        if np.any(off < 0):
            raise ModelError("off-diagonal entries of the graph operator must be >= 0")
        if np.any(np.diag(m) > 0):
            raise ModelError("diagonal entries of the graph operator must be <= 0")
        colsum = m.sum(axis=0)
        if np.max(np.abs(colsum)) > COLUMN_SUM_TOL:
            raise ModelError(
                f"graph operator columns must sum to 0 (max |sum| = {np.max(np.abs(colsum)):.3e})"
            )
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


DeltaLike = Union[float, Sequence[float], np.ndarray, Callable[[float], np.ndarray]]
WeightsLike = Union[NetworkSpec, Callable[[float], np.ndarray]]


@dataclass(frozen=True)
class Generator:
    """Drift of the pollution ODE: L(t) - diag(decay(t)).

    ``autonomous`` is True when both the weights and the decay rates are
    time-independent; ``derivative_bound`` must be supplied for time-varying
    generators (a finite bound on the time derivative of the matrix).
    """

    n: int
    autonomous: bool
    derivative_bound: float | None = None
    _weights_fn: Callable[[float], np.ndarray] = field(repr=False, default=None)
    _decay_fn: Callable[[float], np.ndarray] = field(repr=False, default=None)
    _constant: np.ndarray | None = field(repr=False, default=None)
    _decay_const: np.ndarray | None = field(repr=False, default=None)

    def matrix(self, t: float = 0.0) -> np.ndarray:
        if self.autonomous:
            return self._constant
        w = np.asarray(self._weights_fn(t), dtype=float)
        m = w - np.diag(np.diag(w))
        drift = m - np.diag(m.sum(axis=0)) - np.diag(self.decay(t))
        return drift

    def decay(self, t: float = 0.0) -> np.ndarray:
        if self.autonomous:
            return self._decay_const
        d = np.broadcast_to(np.asarray(self._decay_fn(t), dtype=float), (self.n,))
        return np.array(d)

    def decay_range(self, t0: float = 0.0, t1: float = 0.0, samples: int = 201) -> tuple[float, float]:
        """(min, max) decay rate over sites and, when time-varying, over [t0, t1]."""
        if self.autonomous:
            return float(self._decay_const.min()), float(self._decay_const.max())
        times = np.linspace(t0, t1, samples) if t1 > t0 else [t0]
        lo, hi = np.inf, -np.inf
        for t in times:
            d = self.decay(t)
            lo, hi = min(lo, d.min()), max(hi, d.max())
        return float(lo), float(hi)

    def spectral_abscissa(self) -> float:
        """Largest real part of the eigenvalues (diagnostic; autonomous only)."""
        if not self.autonomous:
            raise ModelError("spectral abscissa is defined for autonomous generators")
        return float(np.max(np.real(np.linalg.eigvals(self._constant))))


def _as_node_indices(nodes: Iterable[int], n: int, what: str) -> np.ndarray:
    idx = np.asarray(sorted(set(int(v) for v in nodes)), dtype=int)
    if idx.size and (idx.min() < 1 or idx.max() > n):
        raise ModelError(f"{what} must be 1-based node labels in 1..{n}")
    return idx - 1


def build_nearest_neighbor(n: int) -> NetworkSpec:
    """Ring of n sites; each site exchanges with its two neighbors at rate 1/2."""
    if n < 3:
        raise ModelError(f"nearest-neighbor ring needs n >= 3, got {n}")
    w = np.zeros((n, n))
    i = np.arange(n)
    w[i, (i + 1) % n] = 0.5
    w[i, (i - 1) % n] = 0.5
    return NetworkSpec(n=n, weights=w)


def build_distance_based(n: int) -> NetworkSpec:
    """All-to-all ring weights equal to the reciprocal circular distance."""
    if n < 3:
        raise ModelError(f"distance-based network needs n >= 3, got {n}")
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    d = np.minimum(np.abs(i - j), n - np.abs(i - j))
    with np.errstate(divide="ignore"):
        w = np.where(d > 0, 1.0 / np.where(d > 0, d, 1), 0.0)
    np.fill_diagonal(w, 0.0)
    return NetworkSpec(n=n, weights=w)


def build_wind(n: int, wind: float, affected: Iterable[int]) -> NetworkSpec:
    """Ring with a directional distortion on the rows of the affected sites.

    An affected site i receives from i+1 at rate 1/2 + wind and from i-1 at
    rate 1/2 - wind (periodic wraparound), so material drifts toward
    lower-numbered sites through the affected stretch.
    """
    if not 0 <= wind < 0.5:
        raise ModelError(f"wind must satisfy 0 <= wind < 1/2 (got {wind}); "
                         "stronger wind would make an exchange rate negative")
    spec = build_nearest_neighbor(n)
    rows = _as_node_indices(affected, n, "affected nodes")
    w = spec.weights.copy()
    w[rows, (rows + 1) % n] = 0.5 + wind
    w[rows, (rows - 1) % n] = 0.5 - wind
    return NetworkSpec(n=n, weights=w)


def build_blocked(base: NetworkSpec, zeta: float,
                  from_nodes: Iterable[int], to_nodes: Iterable[int]) -> NetworkSpec:
    """Scale by zeta every weight w[i, j] with i in from_nodes, j in to_nodes.

    The pair selects matrix positions: row set x column set.  Entry (i, j)
    carries the flow from site j into site i, so zeta=0 with from={8,14},
    to={9,13} closes the exits from the zone between sites 9 and 13.
    """
    if zeta < 0:
        raise ModelError(f"zeta must be >= 0, got {zeta}")
    rows = _as_node_indices(from_nodes, base.n, "from_nodes")
    cols = _as_node_indices(to_nodes, base.n, "to_nodes")
    w = base.weights.copy()
    w[np.ix_(rows, cols)] *= zeta
    return NetworkSpec(n=base.n, weights=w)


def make_generator(spec: WeightsLike, decay: DeltaLike, *,
                   derivative_bound: float | None = None,
                   check_horizon: float = 100.0) -> Generator:
    """Assemble the drift L(t) - diag(decay(t)) from a network and decay rates.

    ``spec`` is a NetworkSpec (constant weights) or a callable t -> W(t);
    ``decay`` is a scalar, a per-site vector, or a callable t -> vector and
    must be strictly positive wherever sampled.  Time-varying inputs require
    a finite ``derivative_bound`` on the generator's time derivative.
    """
    weights_const = isinstance(spec, NetworkSpec)
    decay_const = not callable(decay)

    if weights_const:
        n = spec.n
    else:
        w0 = np.asarray(spec(0.0), dtype=float)
        n = w0.shape[0]

    if decay_const:
        d = np.broadcast_to(np.asarray(decay, dtype=float), (n,)).copy()
        if np.any(d <= 0):
            raise ModelError("decay rates must be strictly positive at every site")
        decay_fn = None
    else:
        decay_fn = lambda t: np.broadcast_to(np.asarray(decay(t), dtype=float), (n,))
        for t in np.linspace(0.0, check_horizon, 101):
            if np.any(decay_fn(t) <= 0):
                raise ModelError(
                    f"decay rates must be strictly positive at every site (violated at t={t:g})")

    if weights_const and decay_const:
        drift = spec.operator().matrix - np.diag(d)
        return Generator(n=n, autonomous=True, _constant=_frozen(drift),
                         _decay_const=_frozen(d))

    if derivative_bound is None or not np.isfinite(derivative_bound):
        raise ModelError("time-varying generators require a finite derivative_bound")
    weights_fn = (lambda t: spec.weights) if weights_const else spec
    if not weights_const:
        for t in np.linspace(0.0, check_horizon, 101):
            w_t = np.asarray(weights_fn(t), dtype=float)
            if w_t.shape != (n, n) or np.any(w_t < 0) or not np.all(np.isfinite(w_t)):
                raise ModelError(
                    f"weights must stay finite, nonnegative, and {n}x{n} "
                    f"(violated at t={t:g})")
    if decay_fn is None:
        const_d = d
        decay_fn = lambda t: const_d
    return Generator(n=n, autonomous=False, derivative_bound=float(derivative_bound),
                     _weights_fn=weights_fn, _decay_fn=decay_fn)
