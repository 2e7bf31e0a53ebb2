"""Coupled spectral embedding: dataset 1 goes to Re Y, dataset 2 to Im Y."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .clinalg import fro
from .errors import ConfigError, DataError
from .laplacian import GenLaplacian, Spectrum, trace_form

DEFAULT_MIXER_PHASE = np.pi / 4


@dataclass(frozen=True)
class Embedding:
    """``y = basis @ mixer`` with orthonormal ``basis`` and unitary ``mixer``.

    Rows of ``y`` are the embedded points; ``y1``/``y2`` are the real
    coordinates given to dataset 1 and dataset 2.
    """

    y: np.ndarray
    basis: np.ndarray
    mixer: np.ndarray
    spectrum: Spectrum | None = None

    @property
    def m(self) -> int:
        return self.y.shape[1]

    @property
    def y1(self) -> np.ndarray:
        return self.y.real.copy()

    @property
    def y2(self) -> np.ndarray:
        return self.y.imag.copy()

    def orthonormality_residual(self) -> float:
        return fro(self.y.conj().T @ self.y - np.eye(self.m))

    def subspace_residual(self) -> float:
        q = self.basis
        return fro(self.y - q @ (q.conj().T @ self.y))

    def reconstruction_residual(self) -> float:
        return fro(self.y - self.basis @ self.mixer)


def orthonormalize(cols: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt, left to right, with one re-orthogonalization pass."""
    q = np.array(cols, dtype=np.complex128, copy=True)
    for j in range(q.shape[1]):
        v = q[:, j]
        for _ in range(2):
            for k in range(j):
                v = v - np.vdot(q[:, k], v) * q[:, k]
        norm = np.linalg.norm(v)
        if norm == 0:
            raise DataError(f"column {j} is linearly dependent on earlier columns")
        q[:, j] = v / norm
    return q


def spectral_embed(
    spec: Spectrum,
    m: int,
    include_null: bool = False,
    mixer: np.ndarray | None = None,
) -> Embedding:
    """Embed with the ``m`` lowest eigenvectors (constant/null ones skipped by default).

    The D-normalized eigenvectors are re-orthonormalized so that
    ``Y* Y = I``; ``mixer`` defaults to the identity.
    """
    basis = orthonormalize(spec.subspace_basis(m, include_null))
    u = np.eye(m, dtype=np.complex128) if mixer is None else np.asarray(mixer, dtype=np.complex128)
    _require_unitary(u, m)
    return Embedding(basis @ u, basis, u, spec)


def _require_unitary(u: np.ndarray, m: int, tol: float = 1e-10) -> None:
    if u.shape != (m, m):
        raise ConfigError(f"mixer must be {m}x{m}, got {u.shape}")
    if fro(u.conj().T @ u - np.eye(m)) > tol:
        raise ConfigError("mixer is not unitary")


def remix(e: Embedding, u, tol: float = 1e-10) -> Embedding:
    u = np.asarray(u, dtype=np.complex128)
    _require_unitary(u, e.m, tol)
    return replace(e, y=e.y @ u, mixer=e.mixer @ u)


def with_mixer(e: Embedding, u) -> Embedding:
    u = np.asarray(u, dtype=np.complex128)
    return replace(e, y=e.basis @ u, mixer=u)


def phase_mixer(m: int, phase: float = DEFAULT_MIXER_PHASE) -> np.ndarray:
    return np.exp(1j * phase) * np.eye(m, dtype=np.complex128)


def dirichlet_objective(y, lap: GenLaplacian) -> float:
    """``|sum_{s,j} ||y_s - y_j||^2 W_sj|``, evaluated as ``2 |tr(Y* L Y)|``."""
    return 2.0 * abs(trace_form(y, lap.l))


def align_error(y1, y2) -> float:
    """Symmetric FOSCTTM: mean fraction of points closer than the true match."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    y1 = y1.reshape(len(y1), -1)
    y2 = y2.reshape(len(y2), -1)
    if y1.shape != y2.shape:
        raise DataError(f"shape mismatch: {y1.shape} vs {y2.shape}")
    n = y1.shape[0]
    if n < 2:
        raise DataError("align_error needs at least two points")
    d = np.sqrt(np.sum((y1[:, None, :] - y2[None, :, :]) ** 2, axis=-1))
    true = np.diagonal(d)
    rows = np.sum(d < true[:, None], axis=1) / (n - 1)
    cols = np.sum(d < true[None, :], axis=0) / (n - 1)
    return float((rows.mean() + cols.mean()) / 2)
