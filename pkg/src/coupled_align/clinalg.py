"""Dense complex linear algebra: Hermitian components and Jacobi eigensolvers.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The Hermitian
solver is a cyclic Jacobi method using the round-robin (parallel) pivot
ordering, so each round applies ``n // 2`` disjoint rotations as vectorized
row/column updates.  Normal matrices are diagonalized by simultaneously
diagonalizing their commuting Hermitian components.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DataError, NotHermitianError, NotNormalError, NumericError

_EPS = np.finfo(np.float64).eps
MAX_SWEEPS = 60


class Ordering(enum.Enum):
    BY_MODULUS = "modulus"
    BY_REAL_PART = "real"
    BY_IMAG_PART = "imag"


@dataclass(frozen=True)
class HermitianPair:
    re_part: np.ndarray
    im_part: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.re_part + 1j * self.im_part


@dataclass(frozen=True)
class EigenPairs:
    values: np.ndarray
    vectors: np.ndarray
    ordering: Ordering = Ordering.BY_MODULUS

    def __len__(self):
        return len(self.values)


def as_cmatrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D complex128 array (copy-free when possible)."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DataError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DataError(f"{name} has non-finite entries")
    return m


def _require_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.shape[0] != a.shape[1]:
        raise DataError(f"{name} must be square, got shape {a.shape}")


def fro(a) -> float:
    return float(np.linalg.norm(a))


def hermitian_components(a) -> HermitianPair:
    a = as_cmatrix(a)
    _require_square(a)
    ah = a.conj().T
    return HermitianPair((a + ah) / 2, (a - ah) / 2j)


def is_normal(a, tol: float = 1e-10) -> bool:
    if tol <= 0:
        raise DataError("tol must be positive")
    a = as_cmatrix(a)
    _require_square(a)
    ah = a.conj().T
    comm = a @ ah - ah @ a
    return fro(comm) <= tol * fro(a) ** 2


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Disjoint pivot pairs covering every (p, q), p < q, once per sweep."""
    size = n + (n % 2)
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        ps, qs = [], []
        for i in range(size // 2):
            p, q = players[i], players[size - 1 - i]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        order = np.argsort(ps, kind="stable")
        rounds.append(
            (np.asarray(ps, dtype=np.intp)[order], np.asarray(qs, dtype=np.intp)[order])
        )
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _offdiag_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return fro(off)


def jacobi_hermitian(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize a Hermitian matrix by cyclic Jacobi rotations.

    Returns unsorted real eigenvalues (the final diagonal) and the unitary
    matrix of accumulated rotations, whose columns are the eigenvectors.
    """
    a = np.array(h, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = fro(a)
    if n < 2 or scale == 0.0:
        return np.real(np.diagonal(a)).copy(), v
    target = n * _EPS * scale
    rounds = _round_robin(n)
    for _sweep in range(MAX_SWEEPS):
        if _offdiag_norm(a) <= target:
            break
        for ps, qs in rounds:
            apq = a[ps, qs]
            absb = np.abs(apq)
            active = absb > 1e-300
            if not np.any(active):
                continue
            p, q, apq, absb = ps[active], qs[active], apq[active], absb[active]
            app = a[p, p].real
            aqq = a[q, q].real
            phase = apq / absb
            ratio = (aqq - app) / (2.0 * absb)
            sign = np.where(ratio >= 0.0, 1.0, -1.0)
            t = sign / (np.abs(ratio) + np.sqrt(ratio * ratio + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            g_qp = -s * phase.conj()
            g_qq = c * phase.conj()
            # A <- A G, V <- V G on columns (p, q)
            for m in (a, v):
                cp = m[:, p].copy()
                cq = m[:, q]
                m[:, p] = cp * c + cq * g_qp
                m[:, q] = cp * s + cq * g_qq
            # A <- G* A on rows (p, q)
            rp = a[p, :].copy()
            rq = a[q, :]
            a[p, :] = c[:, None] * rp + g_qp.conj()[:, None] * rq
            a[q, :] = s[:, None] * rp + g_qq.conj()[:, None] * rq
            a[p, q] = 0.0
            a[q, p] = 0.0
            a[p, p] = a[p, p].real
            a[q, q] = a[q, q].real
    else:
        if _offdiag_norm(a) > 1e3 * target:
            raise NumericError("Jacobi iteration did not converge")
    return np.real(np.diagonal(a)).copy(), v


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Scale each column so its largest-modulus entry is real and positive."""
    out = np.array(vectors, dtype=np.complex128, copy=True)
    if out.size == 0:
        return out
    idx = np.argmax(np.abs(out), axis=0)
    pivots = out[idx, np.arange(out.shape[1])]
    mags = np.abs(pivots)
    rot = np.where(mags > 0, pivots.conj() / np.where(mags > 0, mags, 1.0), 1.0)
    out *= rot[None, :]
    cols = np.arange(out.shape[1])
    out[idx, cols] = np.abs(out[idx, cols])
    return out


def sort_order(values: np.ndarray, ordering: Ordering) -> np.ndarray:
    """Ascending by ``ordering``; ties by the complementary part, then index."""
    values = np.asarray(values, dtype=np.complex128)
    idx = np.arange(len(values))
    if ordering is Ordering.BY_REAL_PART:
        keys = (idx, values.imag, values.real)
    elif ordering is Ordering.BY_IMAG_PART:
        keys = (idx, values.real, values.imag)
    else:
        keys = (idx, np.angle(values), np.abs(values))
    return np.lexsort(keys)


def _packaged(values, vectors, ordering: Ordering) -> EigenPairs:
    order = sort_order(values, ordering)
    return EigenPairs(
        values=np.asarray(values, dtype=np.complex128)[order],
        vectors=fix_phases(vectors[:, order]),
        ordering=ordering,
    )


def hermitian_eig(h, tol: float = 1e-10, ordering: Ordering = Ordering.BY_REAL_PART) -> EigenPairs:
    h = as_cmatrix(h)
    _require_square(h)
    scale = fro(h)
    if fro(h - h.conj().T) > tol * max(scale, 1e-300):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    h = (h + h.conj().T) / 2
    vals, vecs = jacobi_hermitian(h)
    return _packaged(vals.astype(np.complex128), vecs, ordering)


def _clusters(sorted_vals: np.ndarray, gap: float) -> list[np.ndarray]:
    if len(sorted_vals) == 0:
        return []
    breaks = np.flatnonzero(np.diff(sorted_vals) > gap) + 1
    return np.split(np.arange(len(sorted_vals)), breaks)


def normal_eig(a, tol: float = 1e-10, ordering: Ordering = Ordering.BY_MODULUS) -> EigenPairs:
    """Eigen-decomposition of a normal matrix via its Hermitian components.

    The real component is diagonalized first; inside each of its eigenspaces
    (eigenvalues closer than ``1e-8 * ||a||_F``) the imaginary component is
    diagonalized on the restricted basis.
    """
    a = as_cmatrix(a)
    _require_square(a)
    if not is_normal(a, tol):
        raise NotNormalError("matrix fails the normality test")
    parts = hermitian_components(a)
    re_h = (parts.re_part + parts.re_part.conj().T) / 2
    im_h = (parts.im_part + parts.im_part.conj().T) / 2
    re_vals, basis = jacobi_hermitian(re_h)
    order = np.argsort(re_vals, kind="stable")
    re_vals, basis = re_vals[order], basis[:, order]
    for block in _clusters(re_vals, 1e-8 * fro(a)):
        if len(block) < 2:
            continue
        sub = basis[:, block]
        restricted = sub.conj().T @ im_h @ sub
        restricted = (restricted + restricted.conj().T) / 2
        _, rot = jacobi_hermitian(restricted)
        basis[:, block] = sub @ rot
    lam_re = np.real(np.einsum("ij,ik,kj->j", basis.conj(), re_h, basis))
    lam_im = np.real(np.einsum("ij,ik,kj->j", basis.conj(), im_h, basis))
    return _packaged(lam_re + 1j * lam_im, basis, ordering)


def diagonal_of(d, name: str = "d") -> np.ndarray:
    d = as_cmatrix(d, name)
    _require_square(d, name)
    diag = np.diagonal(d).copy()
    if fro(d - np.diag(diag)) > 0:
        raise DataError(f"{name} must be diagonal")
    return diag


def generalized_eig(l, d, tol: float = 1e-10) -> EigenPairs:
    """Solve ``l e = lam d e`` for diagonal invertible ``d``.

    The pencil is symmetrized as ``M = d^{-1/2} l d^{-1/2}`` (principal
    square roots), which is similar to ``d^{-1} l``; ``M`` must be normal.
    Eigenvectors are returned as ``d^{-1/2} v`` for the unit eigenvectors
    ``v`` of ``M``, i.e. not yet scaled by any D-normalization.
    """
    l = as_cmatrix(l, "l")
    _require_square(l, "l")
    diag = diagonal_of(d)
    if diag.shape[0] != l.shape[0]:
        raise DataError("l and d differ in size")
    if np.any(diag == 0):
        raise NumericError(f"d is singular at index {int(np.flatnonzero(diag == 0)[0])}")
    inv_sqrt = 1.0 / np.sqrt(diag)
    m = inv_sqrt[:, None] * l * inv_sqrt[None, :]
    if not is_normal(m, tol):
        raise NotNormalError("symmetrized pencil d^-1/2 l d^-1/2 is not normal")
    pairs = normal_eig(m, tol, Ordering.BY_MODULUS)
    return EigenPairs(pairs.values, inv_sqrt[:, None] * pairs.vectors, pairs.ordering)
