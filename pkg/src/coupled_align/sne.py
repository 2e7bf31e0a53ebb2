"""Stochastic-neighbor refinement of a coupled embedding.

Neighbor probabilities are softmaxes of negative distances.  Under the
default ``ExponentMode.PLAIN`` the exponent is the plain Euclidean distance
(``-||x_s - x_j|| / 2 sigma_s^2`` for data, ``-||y_s - y_j||`` for the map);
``ExponentMode.SQUARED`` uses squared distances, as classical SNE does.

The refined objective is::

    F(Y1, Y2) = KL(P1 || Q(Y1)) + KL(P2 || Q(Y2)) + zeta * ||Y1 - Y2||_F^2

minimized either over the unitary mixer ``U`` of ``Y = E U`` (default; the
embedding stays an orthonormal basis of the chosen eigenspace) or freely
over ``Y1, Y2``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .embed import Embedding, with_mixer
from .errors import ConfigError, ConvergenceError, DataError
from .graph import Dataset, pairwise_sq_distances
from .optim import backtracking_descent

log = logging.getLogger(__name__)


class ExponentMode(enum.Enum):
    PLAIN = "paper"
    SQUARED = "squared"


class Kind(enum.Enum):
    CONDITIONAL_PER_ROW = "conditional"
    SYMMETRIC_PAIRWISE = "pairwise"


@dataclass(frozen=True)
class SimilarityMatrix:
    p: np.ndarray
    kind: Kind = Kind.CONDITIONAL_PER_ROW
    sigma: np.ndarray | float | None = None


def _points(x) -> np.ndarray:
    x = x.features if isinstance(x, Dataset) else np.asarray(x)
    return x.reshape(len(x), -1)


def _exponent_base(x, mode: ExponentMode) -> np.ndarray:
    d2 = pairwise_sq_distances(_points(x))
    return np.sqrt(d2) if mode is ExponentMode.PLAIN else d2


def _row_softmax(neg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row softmax over off-diagonal entries; returns (probabilities, log-probabilities)."""
    z = np.array(neg, dtype=float, copy=True)
    np.fill_diagonal(z, -np.inf)
    z -= np.max(z, axis=1, keepdims=True)
    ez = np.exp(z)
    total = ez.sum(axis=1, keepdims=True)
    logp = z - np.log(total)
    p = ez / total
    np.fill_diagonal(p, 0.0)
    return p, logp


def conditional_probs(x, sigmas, mode: ExponentMode = ExponentMode.PLAIN) -> SimilarityMatrix:
    base = _exponent_base(x, mode)
    n = base.shape[0]
    if n < 2:
        raise DataError("need at least two points")
    sig = np.broadcast_to(np.asarray(sigmas, dtype=float), (n,))
    if np.any(sig <= 0):
        raise ConfigError("sigma must be positive")
    p, _ = _row_softmax(-base / (2 * sig[:, None] ** 2))
    return SimilarityMatrix(p, Kind.CONDITIONAL_PER_ROW, sig.copy())


def pairwise_probs(x, sigma: float, mode: ExponentMode = ExponentMode.PLAIN) -> SimilarityMatrix:
    """Shared-bandwidth similarities, normalized per row."""
    if not sigma > 0:
        raise ConfigError("sigma must be positive")
    base = _exponent_base(x, mode)
    p, _ = _row_softmax(-base / (2 * sigma**2))
    return SimilarityMatrix(p, Kind.SYMMETRIC_PAIRWISE, float(sigma))


def median_distance(x) -> float:
    d = np.sqrt(pairwise_sq_distances(_points(x)))
    iu = np.triu_indices(d.shape[0], k=1)
    return float(np.median(d[iu]))


def _perplexity(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return 2.0 ** (-terms.sum(axis=1))


def sigma_for_perplexity(
    x,
    perplexity: float,
    mode: ExponentMode = ExponentMode.PLAIN,
    tol: float = 1e-4,
    max_iter: int = 200,
    bounds: tuple[float, float] = (1e-10, 1e10),
) -> np.ndarray:
    """Per-row bandwidths whose rows reach ``2**H = perplexity`` (bisection on log sigma)."""
    base = _exponent_base(x, mode)
    n = base.shape[0]
    if not 1 < perplexity < n:
        raise ConfigError(f"perplexity must lie in (1, {n}), got {perplexity}")
    lo = np.full(n, math.log(bounds[0]))
    hi = np.full(n, math.log(bounds[1]))
    sig = np.exp((lo + hi) / 2)
    done = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        sig = np.where(done, sig, np.exp(mid))
        p, _ = _row_softmax(-base / (2 * sig[:, None] ** 2))
        perp = _perplexity(p)
        done |= np.abs(perp - perplexity) <= tol
        if np.all(done):
            break
        too_wide = perp > perplexity
        hi = np.where(~done & too_wide, mid, hi)
        lo = np.where(~done & ~too_wide, mid, lo)
    else:
        bad = np.flatnonzero(~done)
        raise ConvergenceError(f"perplexity bisection failed for row {int(bad[0])}")
    return sig


def map_similarities(y, mode: ExponentMode = ExponentMode.PLAIN) -> SimilarityMatrix:
    base = _exponent_base(y, mode)
    if base.shape[0] < 2:
        raise DataError("need at least two points")
    q, _ = _row_softmax(-base)
    return SimilarityMatrix(q, Kind.CONDITIONAL_PER_ROW, None)


def _array(s) -> np.ndarray:
    return s.p if isinstance(s, SimilarityMatrix) else np.asarray(s, dtype=float)


def kl_divergence(p, q) -> float:
    """``sum p log(p / q)`` with ``0 log 0 = 0``; ``inf`` if ``q = 0`` where ``p > 0``."""
    p, q = _array(p), _array(q)
    if p.shape != q.shape:
        raise DataError(f"shape mismatch: {p.shape} vs {q.shape}")
    pos = p > 0
    if np.any(q[pos] <= 0):
        return math.inf
    return float(np.sum(p[pos] * (np.log(p[pos]) - np.log(q[pos]))))


def coupled_objective(y1, y2, p1, p2, zeta: float, mode: ExponentMode = ExponentMode.PLAIN) -> float:
    y1, y2 = _points(y1), _points(y2)
    if y1.shape != y2.shape:
        raise DataError(f"shape mismatch: {y1.shape} vs {y2.shape}")
    if zeta < 0:
        raise ConfigError("zeta must be nonnegative")
    total = kl_divergence(p1, map_similarities(y1, mode)) + kl_divergence(p2, map_similarities(y2, mode))
    if zeta:
        total += zeta * float(np.sum((y1 - y2) ** 2))
    return total


def _kl_and_grad(y: np.ndarray, p: np.ndarray, mode: ExponentMode) -> tuple[float, np.ndarray]:
    d2 = pairwise_sq_distances(y)
    if mode is ExponentMode.PLAIN:
        dist = np.sqrt(d2)
        base = dist
        with np.errstate(divide="ignore"):
            slope = np.where(dist > 0, 1.0 / np.where(dist > 0, dist, 1.0), 0.0)
    else:
        base = d2
        slope = np.full_like(d2, 2.0)
    q, logq = _row_softmax(-base)
    pos = p > 0
    kl = float(np.sum(p[pos] * (np.log(p[pos]) - logq[pos])))
    coef = p - p.sum(axis=1, keepdims=True) * q
    mixed = (coef + coef.T) * slope
    np.fill_diagonal(mixed, 0.0)
    grad = mixed.sum(axis=1)[:, None] * y - mixed @ y
    return kl, grad


def objective_and_gradients(y1, y2, p1, p2, zeta: float, mode: ExponentMode = ExponentMode.PLAIN):
    """Return ``(F, dF/dY1, dF/dY2)``."""
    y1, y2 = _points(y1).astype(float), _points(y2).astype(float)
    k1, g1 = _kl_and_grad(y1, _array(p1), mode)
    k2, g2 = _kl_and_grad(y2, _array(p2), mode)
    diff = y1 - y2
    f = k1 + k2 + zeta * float(np.sum(diff**2))
    return f, g1 + 2 * zeta * diff, g2 - 2 * zeta * diff


def mixer_gradient(basis: np.ndarray, g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    """Pull ``(dF/dY1, dF/dY2)`` back to ``U`` for ``Y = basis @ U`` as ``dF/dRe U + i dF/dIm U``."""
    er, ei = basis.real, basis.imag
    return (er.T @ g1 + ei.T @ g2) + 1j * (er.T @ g2 - ei.T @ g1)


def polar_retract(m: np.ndarray) -> np.ndarray:
    """Nearest unitary matrix (unitary factor of the polar decomposition)."""
    w, _, vh = np.linalg.svd(m)
    return w @ vh


@dataclass(frozen=True)
class RefineConfig:
    zeta: float = 1.0
    perplexity: float = 30.0
    max_iters: int = 300
    initial_step: float = 1.0
    tolerance: float = 1e-9
    exponent_mode: ExponentMode = ExponentMode.PLAIN
    free: bool = False
    similarity: Kind = Kind.CONDITIONAL_PER_ROW
    sigma: float | None = None

    def __post_init__(self):
        if self.zeta < 0:
            raise ConfigError("--zeta must be nonnegative")
        if not self.perplexity > 1:
            raise ConfigError("--perplexity must exceed 1")
        if self.max_iters < 0 or int(self.max_iters) != self.max_iters:
            raise ConfigError("--iters must be a nonnegative integer")
        if not self.initial_step > 0:
            raise ConfigError("--step must be positive")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.sigma is not None and not self.sigma > 0:
            raise ConfigError("--sigma must be positive")


@dataclass
class RefineResult:
    embedding: Embedding
    trace: list[float] = field(default_factory=list)
    iterations: int = 0
    stalled: bool = False


def input_similarities(x, cfg: RefineConfig) -> SimilarityMatrix:
    """Per-row perplexity-matched bandwidths, or one shared sigma (median distance unless given)."""
    if cfg.similarity is Kind.SYMMETRIC_PAIRWISE:
        sigma = cfg.sigma if cfg.sigma is not None else median_distance(x)
        if not sigma > 0:
            raise DataError("median pairwise distance is zero; pass --sigma")
        return pairwise_probs(x, sigma, cfg.exponent_mode)
    return conditional_probs(x, sigma_for_perplexity(x, cfg.perplexity, cfg.exponent_mode), cfg.exponent_mode)


def refine(e: Embedding, x1, x2, cfg: RefineConfig) -> RefineResult:
    n = e.y.shape[0]
    x1, x2 = _points(x1), _points(x2)
    if len(x1) != n or len(x2) != n:
        raise DataError(f"datasets must have {n} rows to match the embedding")
    p1 = input_similarities(x1, cfg)
    p2 = input_similarities(x2, cfg)
    mode, zeta = cfg.exponent_mode, cfg.zeta

    def value_of(y):
        return objective_and_gradients(y.real, y.imag, p1, p2, zeta, mode)[0]

    def free_grad(y):
        _, g1, g2 = objective_and_gradients(y.real, y.imag, p1, p2, zeta, mode)
        return g1 + 1j * g2

    if cfg.free:
        res = backtracking_descent(
            value_of, free_grad, e.y,
            max_iters=cfg.max_iters, initial_step=cfg.initial_step, tolerance=cfg.tolerance,
        )
        out = Embedding(res.x, e.basis, e.mixer, e.spectrum)
    else:
        basis = e.basis

        def mixer_grad(u):
            y = basis @ u
            _, g1, g2 = objective_and_gradients(y.real, y.imag, p1, p2, zeta, mode)
            return mixer_gradient(basis, g1, g2)

        res = backtracking_descent(
            lambda u: value_of(basis @ u), mixer_grad, e.mixer,
            max_iters=cfg.max_iters, initial_step=cfg.initial_step, tolerance=cfg.tolerance,
            retract=polar_retract,
        )
        out = with_mixer(e, res.x)
    if cfg.max_iters == 0:
        out = e
    return RefineResult(out, res.trace, res.iterations, res.stalled)
