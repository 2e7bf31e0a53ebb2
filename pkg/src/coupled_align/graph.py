"""Neighborhood graphs and real weight matrices built from point sets."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError, DataError, IsolatedVertex

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    ids: tuple[str, ...]
    features: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features)
        if feats.ndim != 2:
            raise DataError("features must be a 2-D array")
        if feats.shape[0] < 2:
            raise DataError("a dataset needs at least two points")
        if len(self.ids) != feats.shape[0]:
            raise DataError("ids and feature rows differ in count")
        if len(set(self.ids)) != len(self.ids):
            raise DataError("ids must be unique")
        if not np.all(np.isfinite(feats)):
            raise DataError("features must be finite")
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "features", feats)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @classmethod
    def from_array(cls, x, prefix: str = "p") -> "Dataset":
        x = np.asarray(x)
        width = len(str(max(x.shape[0] - 1, 0)))
        return cls(tuple(f"{prefix}{i:0{width}d}" for i in range(x.shape[0])), x)


@dataclass(frozen=True)
class EpsilonNeighborhood:
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ConfigError("epsilon must be positive")


@dataclass(frozen=True)
class KNearest:
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError("k must be a positive integer")


@dataclass(frozen=True)
class HeatKernel:
    t: float

    def __post_init__(self):
        if self.t == 0:
            raise ConfigError("heat kernel parameter t must be nonzero")


@dataclass(frozen=True)
class Simple:
    pass


@dataclass(frozen=True)
class GraphConfig:
    method: Union[EpsilonNeighborhood, KNearest]
    weighting: Union[HeatKernel, Simple]


@dataclass(frozen=True)
class WeightMatrix:
    w: np.ndarray
    config: GraphConfig | None = None

    @property
    def n(self) -> int:
        return self.w.shape[0]


def _points(data) -> np.ndarray:
    x = data.features if isinstance(data, Dataset) else np.asarray(data)
    if x.ndim == 1:
        x = x[:, None]
    return x


def pairwise_sq_distances(x) -> np.ndarray:
    """Squared Euclidean distances (complex features use the Hermitian norm)."""
    x = _points(x)
    diff = x[:, None, :] - x[None, :, :]
    d2 = np.sum(np.abs(diff) ** 2, axis=-1)
    np.fill_diagonal(d2, 0.0)
    return d2


def epsilon_graph(data, eps: float) -> np.ndarray:
    EpsilonNeighborhood(eps)
    d = np.sqrt(pairwise_sq_distances(data))
    adj = d < eps
    np.fill_diagonal(adj, False)
    return adj


def knn_graph(data, k: int) -> np.ndarray:
    """OR-symmetrized k-nearest-neighbor adjacency; ties go to the lower index."""
    d2 = pairwise_sq_distances(data)
    n = d2.shape[0]
    KNearest(k)
    if k >= n:
        raise ConfigError(f"k must be below the number of points ({n})")
    np.fill_diagonal(d2, np.inf)
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
    adj = np.zeros((n, n), dtype=bool)
    adj[np.repeat(np.arange(n), k), nearest.ravel()] = True
    adj |= adj.T
    np.fill_diagonal(adj, False)
    return adj


def heat_weights(data, adj, t: float, config: GraphConfig | None = None) -> WeightMatrix:
    HeatKernel(t)
    if t < 0:
        log.warning("negative heat-kernel t=%g gives weights above 1", t)
    adj = np.asarray(adj, dtype=bool)
    d2 = pairwise_sq_distances(data)
    if d2.shape != adj.shape:
        raise DataError("adjacency and data sizes differ")
    w = np.where(adj, np.exp(-d2 / t), 0.0)
    w = (w + w.T) / 2
    np.fill_diagonal(w, 0.0)
    return WeightMatrix(w, config)


def simple_weights(adj, config: GraphConfig | None = None) -> WeightMatrix:
    adj = np.asarray(adj, dtype=bool)
    w = (adj | adj.T).astype(np.float64)
    np.fill_diagonal(w, 0.0)
    return WeightMatrix(w, config)


def degree_matrix(w) -> np.ndarray:
    """Diagonal degree matrix with column sums of ``w``; raises on zero degree."""
    if isinstance(w, WeightMatrix):
        w = w.w
    w = np.asarray(w)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DataError("weight matrix must be square")
    deg = w.sum(axis=0)
    zero = np.flatnonzero(deg == 0)
    if zero.size:
        raise IsolatedVertex(int(zero[0]))
    return np.diag(deg)


def build_weights(data, config: GraphConfig) -> WeightMatrix:
    if isinstance(config.method, EpsilonNeighborhood):
        adj = epsilon_graph(data, config.method.eps)
    else:
        adj = knn_graph(data, config.method.k)
    if isinstance(config.weighting, HeatKernel):
        return heat_weights(data, adj, config.weighting.t, config)
    return simple_weights(adj, config)


def median_sq_distance(data) -> float:
    """Median over distinct pairs of squared distances (the ``t = median^2`` rule)."""
    d2 = pairwise_sq_distances(data)
    iu = np.triu_indices(d2.shape[0], k=1)
    return float(np.median(d2[iu]))
