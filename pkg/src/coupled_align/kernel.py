"""Kernel-based unsupervised alignment in a shared ``p``-dimensional latent space.

Each dataset ``s`` has a Gram matrix ``K_s`` and a coefficient matrix
``A_s`` (``p x n_s``); the latent image of point ``j`` is column ``j`` of
``Z_s = A_s K_s``.  The objective is::

    mmd_like(Z1, Z2) + sum_s lambda1 * dis(A_s) + lambda2 * pen(A_s)

with ``dis(A) = ||K - K A* A K||_F`` and ``pen(A) = ||I - A K A*||_F``.
Gradients treat the real and imaginary parts of every coefficient as
independent real variables and are returned as ``d/dRe + i d/dIm``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import rng as rngmod
from .clinalg import as_cmatrix, fro
from .errors import ConfigError, DataError, NumericError
from .graph import Dataset, pairwise_sq_distances
from .optim import backtracking_descent

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaussianRBF:
    t: float

    def __post_init__(self):
        if self.t == 0:
            raise ConfigError("RBF parameter t must be nonzero")


@dataclass(frozen=True)
class Linear:
    pass


@dataclass(frozen=True)
class Polynomial:
    degree: int
    offset: float = 1.0

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise ConfigError("polynomial degree must be a positive integer")
        if self.offset < 0:
            raise ConfigError("polynomial offset must be nonnegative")


KernelSpec = Union[GaussianRBF, Linear, Polynomial]


def rbf(u, v, t: float) -> float:
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise DataError("rbf arguments differ in length")
    GaussianRBF(t)
    if t < 0:
        log.warning("negative RBF parameter t=%g gives values above 1", t)
    return float(np.exp(-np.sum(np.abs(u - v) ** 2) / t))


def _features(data) -> np.ndarray:
    x = data.features if isinstance(data, Dataset) else np.asarray(data)
    return x.reshape(len(x), -1)


def gram_matrix(data, spec: KernelSpec, psd_tol: float = 1e-9) -> np.ndarray:
    """``K_qj = gamma(x_q, x_j)``; Hermitian, checked PSD relative to its trace."""
    x = _features(data)
    if isinstance(spec, GaussianRBF):
        if spec.t < 0:
            log.warning("negative RBF parameter t=%g gives values above 1", spec.t)
        k = np.exp(-pairwise_sq_distances(x) / spec.t).astype(np.complex128)
    else:
        inner = x @ x.conj().T
        if isinstance(spec, Polynomial):
            inner = (inner + spec.offset) ** spec.degree
        k = np.asarray(inner, dtype=np.complex128)
    k = (k + k.conj().T) / 2
    check_psd(k, psd_tol, name=type(spec).__name__)
    return k


def check_psd(k: np.ndarray, tol: float = 1e-9, name: str = "kernel") -> None:
    lowest = float(np.linalg.eigvalsh(k)[0])
    trace = float(np.real(np.trace(k)))
    if lowest < -tol * max(trace, 1e-300):
        raise NumericError(f"{name} Gram matrix is not PSD (min eigenvalue {lowest:.3e})")


def latent_map(a, k) -> np.ndarray:
    """``Z = A K``: entry ``(q, j)`` is ``z_q(x_j)``."""
    a, k = as_cmatrix(a, "a"), as_cmatrix(k, "k")
    if a.shape[1] != k.shape[0]:
        raise DataError(f"A has {a.shape[1]} columns but K has {k.shape[0]} rows")
    return a @ k


def latent_gram(a, k) -> np.ndarray:
    """``A K A*``: RKHS inner products of the latent coordinate functions."""
    a = as_cmatrix(a, "a")
    return latent_map(a, k) @ a.conj().T


def _rbf_block(za: np.ndarray, zb: np.ndarray, t: float) -> np.ndarray:
    diff = za[:, :, None] - zb[:, None, :]
    return np.exp(-np.sum(np.abs(diff) ** 2, axis=0) / t)


def mmd_like(z1, z2, t: float) -> float:
    """Mean within-set RBF similarity minus twice the cross-set mean (columns are points)."""
    z1, z2 = as_cmatrix(z1, "z1"), as_cmatrix(z2, "z2")
    if z1.shape[0] != z2.shape[0]:
        raise DataError("latent images differ in dimension")
    return float(
        _rbf_block(z1, z1, t).mean() - 2 * _rbf_block(z1, z2, t).mean() + _rbf_block(z2, z2, t).mean()
    )


def _distortion_residual(a, k, strict: bool) -> np.ndarray:
    if strict:
        if a.shape[0] != a.shape[1]:
            raise DataError(
                "literal distortion K - K A* K A needs a square A (p = n); "
                f"got A of shape {a.shape}"
            )
        return k - k @ a.conj().T @ k @ a
    return k - k @ a.conj().T @ a @ k


def distortion(a, k, strict: bool = False) -> float:
    """``||K - K A* A K||_F``; ``strict`` evaluates the literal ``||K - K A* K A||_F``."""
    a, k = as_cmatrix(a, "a"), as_cmatrix(k, "k")
    if a.shape[1] != k.shape[0]:
        raise DataError("A and K disagree in size")
    return fro(_distortion_residual(a, k, strict))


def penalty(a, k) -> float:
    """``||I_p - A K A*||_F``."""
    g = latent_gram(a, k)
    return fro(np.eye(g.shape[0]) - g)


def _mmd_grads(z1, z2, t):
    n1, n2 = z1.shape[1], z2.shape[1]
    g11, g12, g22 = _rbf_block(z1, z1, t), _rbf_block(z1, z2, t), _rbf_block(z2, z2, t)
    value = g11.mean() - 2 * g12.mean() + g22.mean()

    def pull(z, w, g):
        return z * g.sum(axis=1)[None, :] - w @ g.T

    gz1 = -4 / (t * n1 * n1) * pull(z1, z1, g11) + 4 / (t * n1 * n2) * pull(z1, z2, g12)
    gz2 = -4 / (t * n2 * n2) * pull(z2, z2, g22) + 4 / (t * n1 * n2) * pull(z2, z1, g12.T)
    return float(value), gz1, gz2


def _distortion_grad(a, k, strict):
    r = _distortion_residual(a, k, strict)
    norm = fro(r)
    if norm == 0:
        return 0.0, np.zeros_like(a)
    if strict:
        g = -(k @ a @ r.conj().T @ k + k @ a @ k @ r) / norm
    else:
        g = -2 * a @ k @ r @ k / norm
    return norm, g


def _penalty_grad(a, k):
    s = np.eye(a.shape[0]) - a @ k @ a.conj().T
    norm = fro(s)
    if norm == 0:
        return 0.0, np.zeros_like(a)
    return norm, -2 * s @ a @ k / norm


@dataclass(frozen=True)
class AlignConfig:
    p: int = 2
    rbf_t: float | None = None
    lambda1: float = 1e-3
    lambda2: float = 0.1
    max_iters: int = 500
    step: float = 1.0
    seed: int = 0
    tolerance: float = 1e-9
    strict_distortion: bool = False

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ConfigError("--dim must be a positive integer")
        if self.rbf_t is not None and self.rbf_t == 0:
            raise ConfigError("--t must be nonzero")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ConfigError("--lambda1/--lambda2 must be nonnegative")
        if self.max_iters < 0 or int(self.max_iters) != self.max_iters:
            raise ConfigError("--iters must be a nonnegative integer")
        if not self.step > 0:
            raise ConfigError("--step must be positive")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")


@dataclass
class KernelModel:
    k1: np.ndarray
    k2: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    rbf_t: float
    lambda1: float
    lambda2: float
    strict_distortion: bool = False
    trace: list[float] = field(default_factory=list)
    stalled: bool = False

    @property
    def p(self) -> int:
        return self.a1.shape[0]

    @property
    def z1(self) -> np.ndarray:
        return latent_map(self.a1, self.k1)

    @property
    def z2(self) -> np.ndarray:
        return latent_map(self.a2, self.k2)

    def objective(self) -> float:
        return align_objective(
            self.a1, self.a2, self.k1, self.k2, self.rbf_t, self.lambda1, self.lambda2,
            self.strict_distortion,
        )


def align_objective(a1, a2, k1, k2, t, lambda1, lambda2, strict=False) -> float:
    total = mmd_like(a1 @ k1, a2 @ k2, t)
    for a, k in ((a1, k1), (a2, k2)):
        total += lambda1 * distortion(a, k, strict) + lambda2 * penalty(a, k)
    return float(total)


def align_gradient(a1, a2, k1, k2, t, lambda1, lambda2, strict=False):
    """Objective value and its gradients with respect to ``A1`` and ``A2``."""
    value, gz1, gz2 = _mmd_grads(a1 @ k1, a2 @ k2, t)
    grads = []
    for a, k, gz in ((a1, k1, gz1), (a2, k2, gz2)):
        g = gz @ k.conj().T
        dis, gd = _distortion_grad(a, k, strict)
        pen, gp = _penalty_grad(a, k)
        value += lambda1 * dis + lambda2 * pen
        grads.append(g + lambda1 * gd + lambda2 * gp)
    return float(value), grads[0], grads[1]


def initial_coefficients(k: np.ndarray, p: int, seed: int) -> np.ndarray:
    """Gaussian entries with variance ``1 / trace(K)``.

    Every dataset draws from the same named stream, so equal-sized datasets
    start from the same (rescaled) coefficient pattern.
    """
    n = k.shape[0]
    gen = rngmod.stream(seed, "kernel-align-init")
    scale = 1.0 / math.sqrt(max(float(np.real(np.trace(k))), 1e-300))
    return (scale * gen.standard_normal((p, n))).astype(np.complex128)


def median_latent_t(z1: np.ndarray, z2: np.ndarray) -> float:
    pooled = np.concatenate([z1, z2], axis=1).T
    d2 = pairwise_sq_distances(pooled)
    iu = np.triu_indices(d2.shape[0], k=1)
    t = float(np.median(d2[iu]))
    if t <= 0:
        raise NumericError("median latent distance is zero; pass rbf_t explicitly")
    return t


def align(k1, k2, cfg: AlignConfig) -> KernelModel:
    k1, k2 = as_cmatrix(k1, "k1"), as_cmatrix(k2, "k2")
    for name, k in (("k1", k1), ("k2", k2)):
        if k.shape[0] != k.shape[1]:
            raise DataError(f"{name} must be square")
        check_psd(k, name=name)
    n1, n2 = k1.shape[0], k2.shape[0]
    if cfg.p > min(n1, n2):
        raise ConfigError(f"--dim must not exceed min(n1, n2) = {min(n1, n2)}")
    if cfg.strict_distortion and not (cfg.p == n1 == n2):
        raise DataError("--strict-paper-distortion needs p = n1 = n2 (square coefficient matrices)")
    a1 = initial_coefficients(k1, cfg.p, cfg.seed)
    a2 = initial_coefficients(k2, cfg.p, cfg.seed)
    t = cfg.rbf_t if cfg.rbf_t is not None else median_latent_t(a1 @ k1, a2 @ k2)
    args = (k1, k2, t, cfg.lambda1, cfg.lambda2, cfg.strict_distortion)

    def value(x):
        return align_objective(x[:, :n1], x[:, n1:], *args)

    def grad(x):
        _, g1, g2 = align_gradient(x[:, :n1], x[:, n1:], *args)
        return np.concatenate([g1, g2], axis=1)

    res = backtracking_descent(
        value, grad, np.concatenate([a1, a2], axis=1),
        max_iters=cfg.max_iters, initial_step=cfg.step, tolerance=cfg.tolerance,
    )
    return KernelModel(
        k1, k2, res.x[:, :n1].copy(), res.x[:, n1:].copy(), t, cfg.lambda1, cfg.lambda2,
        cfg.strict_distortion, res.trace, res.stalled,
    )


def out_of_sample(model: KernelModel, which: int, kvec) -> np.ndarray:
    """Latent image ``A_s k`` of a new point given ``k_j = gamma(x_j, x_new)``."""
    if which not in (1, 2):
        raise ConfigError("dataset tag must be 1 or 2")
    a = model.a1 if which == 1 else model.a2
    kvec = np.asarray(kvec, dtype=np.complex128).ravel()
    if kvec.shape[0] != a.shape[1]:
        raise DataError(f"kernel vector needs {a.shape[1]} entries, got {kvec.shape[0]}")
    return a @ kvec
