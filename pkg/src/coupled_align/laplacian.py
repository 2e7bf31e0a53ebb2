"""Coupled complex weights, the generalized graph Laplacian and its spectrum.

Two datasets on the same index set give real weight matrices ``w1`` and
``w2``.  They are blended into ``h = eta*w1 + mu*w2`` and lifted to the
complex plane as ``w = (alpha + i*beta) * h``; the Laplacian is
``L = D - W`` with ``D`` the (complex) column-sum degree matrix, and the
generalized problem ``L e = lam D e`` is solved with eigenvectors scaled so
that ``(D e, e) = exp(i*theta)``, ``theta = arctan(beta/alpha)``.

The module also carries the numerical probes for the identities the method
rests on: the Dirichlet-energy trace identity, the constrained trace
formula, D-orthogonality of eigenvectors and the constrained spectral
minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .clinalg import EigenPairs, as_cmatrix, fro, generalized_eig
from .errors import ConfigError, DataError, IdentityViolation, NormalizationError, NumericError
from .graph import WeightMatrix, degree_matrix

PHASE_TOL = 1e-10
EIG_TIE_TOL = 1e-8


def _weights(w) -> np.ndarray:
    return w.w if isinstance(w, WeightMatrix) else np.asarray(w, dtype=float)


@dataclass(frozen=True)
class CoupledGraph:
    w1: np.ndarray
    w2: np.ndarray
    eta: float
    mu: float
    alpha: float
    beta: float
    h: np.ndarray
    w: np.ndarray
    d: np.ndarray
    theta: float

    @property
    def n(self) -> int:
        return self.h.shape[0]

    @property
    def coupling(self) -> complex:
        return complex(self.alpha, self.beta)


def _check_mixing(a: float, b: float, names: str) -> None:
    if not (a > 0 and b > 0):
        raise ConfigError(f"{names} must both be positive")
    if abs(a + b - 1.0) > 1e-12:
        raise ConfigError(f"{names} must sum to 1")


def coupled_weight(w1, w2, eta: float, mu: float, alpha: float, beta: float) -> CoupledGraph:
    w1, w2 = _weights(w1), _weights(w2)
    if w1.shape != w2.shape or w1.ndim != 2 or w1.shape[0] != w1.shape[1]:
        raise DataError(f"weight matrices must be square and equal-sized: {w1.shape} vs {w2.shape}")
    _check_mixing(eta, mu, "eta, mu")
    _check_mixing(alpha, beta, "alpha, beta")
    if np.any(w1 < 0) or np.any(w2 < 0):
        raise DataError("coupled weights need nonnegative entries")
    h = eta * w1 + mu * w2
    w = complex(alpha, beta) * h
    d = degree_matrix(w)
    return CoupledGraph(w1, w2, eta, mu, alpha, beta, h, w, d, math.atan2(beta, alpha))


@dataclass(frozen=True)
class GenLaplacian:
    l: np.ndarray
    d: np.ndarray
    l1: np.ndarray
    theta: float | None
    coupled: bool = False

    @property
    def n(self) -> int:
        return self.l.shape[0]

    @property
    def w(self) -> np.ndarray:
        return self.d - self.l

    @property
    def degrees(self) -> np.ndarray:
        return np.diagonal(self.d).copy()

    def check(self, tol: float = 1e-10) -> None:
        """Verify L + W = D, L* = conj(L) and PSD Hermitian components."""
        scale = max(1.0, fro(self.l))
        if fro(self.l.conj().T - self.l.conj()) > 1e-12 * scale:
            raise IdentityViolation("L* = conj(L)", self.l.conj().T, self.l.conj())
        for name, part in (
            ("Re-component", (self.l + self.l.conj().T) / 2),
            ("Im-component", (self.l - self.l.conj().T) / 2j),
        ):
            lowest = float(np.linalg.eigvalsh(part)[0])
            if lowest < -tol * scale:
                raise NumericError(f"{name} of L is not PSD (min eigenvalue {lowest:.3e})")


def _uniform_phase(d: np.ndarray) -> float | None:
    diag = np.diagonal(d)
    ang = np.angle(diag)
    if np.all(np.abs(np.exp(1j * (ang - ang[0])) - 1) <= 1e-12):
        return float(ang[0])
    return None


def build_laplacian(g: CoupledGraph) -> GenLaplacian:
    l = g.d - g.w
    lap = GenLaplacian(l, g.d.astype(np.complex128), np.exp(-1j * g.theta) * l, g.theta, True)
    lap.check()
    return lap


def laplacian_from_weights(w, theta: float | None = None) -> GenLaplacian:
    """Generalized Laplacian of an arbitrary complex weight matrix.

    ``theta`` defaults to the common argument of the degrees when all degrees
    share one phase (this is ``arg (D z, z)`` for every nonzero ``z``), and
    is ``None`` otherwise.
    """
    w = as_cmatrix(w, "w")
    d = degree_matrix(w).astype(np.complex128)
    if theta is None:
        theta = _uniform_phase(d)
    l = d - w
    l1 = l if theta is None else np.exp(-1j * theta) * l
    return GenLaplacian(l, d, l1, theta, False)


def classical_laplacian(w) -> GenLaplacian:
    """Real symmetric ``L = D - W`` of one dataset (the uncoupled baseline)."""
    w = _weights(w)
    d = degree_matrix(w).astype(np.complex128)
    l = d - w
    return GenLaplacian(l, d, l, 0.0, False)


# ---------------------------------------------------------------- identities


def dirichlet_sum(a, w) -> complex:
    """Half the weighted sum of squared row differences, by explicit double sum."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        a = a[:, None]
    diff = a[:, None, :] - a[None, :, :]
    sq = np.sum(np.abs(diff) ** 2, axis=-1)
    return complex(0.5 * np.sum(sq * np.asarray(w)))


def trace_form(a, l) -> complex:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        a = a[:, None]
    return complex(np.trace(a.conj().T @ l @ a))


def dirichlet_energy(a, lap: GenLaplacian, rtol: float = 1e-9) -> complex:
    """``tr(A* L A)``, cross-checked against the row-difference double sum."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        a = a[:, None]
    if a.shape[0] != lap.n:
        raise DataError(f"A needs {lap.n} rows, got {a.shape[0]}")
    side1 = trace_form(a, lap.l)
    side2 = dirichlet_sum(a, lap.w)
    if abs(side1 - side2) > rtol * (1 + abs(side1)):
        raise IdentityViolation("tr(A*LA) = 1/2 sum |a_s - a_j|^2 W_sj", side1, side2)
    return side1


@dataclass(frozen=True)
class TraceProbe:
    constant: float
    constants: np.ndarray
    dispersion: float
    imag_residual: float
    constraint_residual: float
    reference_factor: float = 2.0

    @property
    def agrees_with_reference(self) -> bool:
        return abs(self.constant - self.reference_factor) <= 1e-8


def unitary(rng: np.random.Generator, n: int, m: int | None = None) -> np.ndarray:
    """Haar-distributed matrix with ``m`` orthonormal columns (QR with phase fix)."""
    m = n if m is None else m
    z = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph[None, :]


def trace_formula_probe(lap: GenLaplacian, trials: int, seed: int) -> TraceProbe:
    """Measure ``c`` in ``tr(A* L A) = c exp(i theta) tr(D^-1 L)`` for ``A* D A = exp(i theta) I``.

    Each trial draws a random unitary ``U`` and sets
    ``A = D^{-1/2} U exp(i theta / 2)``, which satisfies the constraint when
    every degree has argument ``theta``.
    """
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    theta = lap.theta if lap.theta is not None else _uniform_phase(lap.d)
    if theta is None or _uniform_phase(lap.d) is None:
        raise NumericError("A* D A = exp(i theta) I needs degrees sharing one argument")
    deg = lap.degrees
    if abs(np.angle(deg[0]) - theta) > 1e-12:
        raise NumericError("degree argument differs from theta")
    tr_dl = complex(np.sum(np.diagonal(lap.l) / deg))
    if abs(tr_dl) == 0:
        raise NumericError("tr(D^-1 L) vanishes; constant is undefined")
    inv_sqrt = 1.0 / np.sqrt(deg)
    phase = np.exp(1j * theta)
    gen = rngmod.stream(seed, "trace-formula-probe")
    consts, constraint = [], 0.0
    for _ in range(trials):
        a = inv_sqrt[:, None] * unitary(gen, lap.n) * np.exp(0.5j * theta)
        constraint = max(constraint, fro(a.conj().T @ lap.d @ a - phase * np.eye(lap.n)))
        consts.append(trace_form(a, lap.l) / (phase * tr_dl))
    consts = np.asarray(consts)
    mean = complex(np.mean(consts))
    return TraceProbe(
        constant=mean.real,
        constants=consts,
        dispersion=float(np.max(np.abs(consts - mean))),
        imag_residual=abs(mean.imag),
        constraint_residual=constraint,
    )


def indicator(w, d, theta: float) -> complex:
    """``exp(i theta) * sum_j (1 - W_jj / D_jj)``."""
    w = as_cmatrix(w, "w")
    d = np.asarray(d)
    deg = np.diagonal(d) if d.ndim == 2 else d
    if np.any(deg == 0):
        raise NumericError("indicator needs nonzero degrees")
    return complex(np.exp(1j * theta) * np.sum(1 - np.diagonal(w) / deg))


# ------------------------------------------------------------------ spectrum


@dataclass(frozen=True)
class Spectrum:
    """Generalized eigenpairs sorted by modulus, eigenvectors D-normalized."""

    values: np.ndarray
    vectors: np.ndarray
    null_mask: np.ndarray
    d: np.ndarray
    theta: float | None
    raw: EigenPairs = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def xi(self) -> int:
        return int(np.count_nonzero(~self.null_mask))

    @property
    def null_dim(self) -> int:
        return int(np.count_nonzero(self.null_mask))

    def indices(self, include_null: bool = False) -> np.ndarray:
        idx = np.arange(self.n)
        return idx if include_null else idx[~self.null_mask]

    def subspace_basis(self, m: int, include_null: bool = False) -> np.ndarray:
        """The first ``m`` eigenvectors (non-null ones unless ``include_null``)."""
        idx = self.indices(include_null)
        if not 1 <= m <= len(idx):
            raise ConfigError(f"m must lie in [1, {len(idx)}], got {m}")
        return self.vectors[:, idx[:m]]

    def gram(self) -> np.ndarray:
        """Matrix of ``(D e_s, e_j)``, indexed ``[j, s]``."""
        v = self.vectors
        return v.conj().T @ (np.diagonal(self.d)[:, None] * v)


def _tie_blocks(values: np.ndarray, tol: float) -> list[list[int]]:
    blocks: list[list[int]] = []
    for i, lam in enumerate(values):
        if blocks and abs(lam - values[blocks[-1][-1]]) <= tol:
            blocks[-1].append(i)
        else:
            blocks.append([i])
    return blocks


def generalized_spectrum(lap: GenLaplacian, null_tol: float = 1e-9) -> Spectrum:
    """Solve ``L e = lam D e``; sort by ``|lam|``; scale to ``(D e, e) = exp(i theta)``.

    Within each block of (numerically) repeated eigenvalues the vectors are
    re-orthonormalized in the D-form so D-orthogonality holds across the
    whole basis.  Raises :class:`NormalizationError` when ``(D e, e)`` is
    zero or its argument is not ``theta``.
    """
    pairs = generalized_eig(lap.l, lap.d)
    values = pairs.values.copy()
    vectors = pairs.vectors.copy()
    deg = lap.degrees
    theta = lap.theta
    scale = max(1.0, float(np.max(np.abs(values))))
    null_mask = np.abs(values) <= null_tol * scale
    values[null_mask] = 0.0
    if lap.coupled:
        worst = float(np.max(np.abs(values.imag)))
        if worst > PHASE_TOL:
            raise NumericError(f"coupled spectrum has |Im lam| = {worst:.3e}")
        values = values.real.astype(np.complex128)
    rot = 1.0 if theta is None else np.exp(-1j * theta)
    for block in _tie_blocks(values, EIG_TIE_TOL):
        for pos, j in enumerate(block):
            e = vectors[:, j]
            for k in block[:pos]:
                e = e - (rot * np.vdot(vectors[:, k], deg * e)) * vectors[:, k]
            q = np.vdot(e, deg * e)
            if abs(q) == 0:
                raise NormalizationError(f"(D e, e) = 0 for eigenvector {j}")
            if theta is not None and abs(np.exp(1j * (np.angle(q) - theta)) - 1) > 1e-6:
                raise NormalizationError(
                    f"arg (D e, e) = {np.angle(q):.6f} cannot be scaled to theta = {theta:.6f}"
                )
            vectors[:, j] = e / np.sqrt(abs(q))
    return Spectrum(values, vectors, null_mask, lap.d, theta, pairs)


def d_orthogonality_residual(spec: Spectrum, tol: float = EIG_TIE_TOL) -> float:
    """Largest ``|(D e_s, e_j) - exp(i theta) delta_sj|`` over distinct-eigenvalue pairs and diagonals."""
    g = spec.gram()
    target = np.exp(1j * spec.theta) if spec.theta is not None else None
    vals = spec.values
    worst = 0.0
    n = spec.n
    for j in range(n):
        for s in range(n):
            if s == j:
                if target is not None:
                    worst = max(worst, abs(g[j, s] - target))
            elif abs(vals[s] - vals[j]) > tol:
                worst = max(worst, abs(g[j, s]))
    return worst


@dataclass(frozen=True)
class SpectralMinReport:
    m: int
    bound_re: float
    bound_im: float
    attained_re: float
    attained_im: float
    min_re: float
    min_im: float
    constraint_residual: float
    trials: int

    @property
    def undercut(self) -> float:
        return max(self.bound_re - self.min_re, self.bound_im - self.min_im, 0.0)

    @property
    def attain_error(self) -> float:
        return max(abs(self.attained_re - self.bound_re), abs(self.attained_im - self.bound_im))

    def passes(self, undercut_tol: float = 1e-8, attain_tol: float = 1e-9) -> bool:
        return self.undercut <= undercut_tol and self.attain_error <= attain_tol


def constrained_objective(a, l1) -> complex:
    """``sum_j (L1 a_j, a_j)`` over the columns of ``a``."""
    return trace_form(a, l1)


def spectral_min_check(
    lap: GenLaplacian,
    m: int,
    trials: int,
    seed: int,
    include_null: bool = False,
    spec: Spectrum | None = None,
) -> SpectralMinReport:
    """Compare random feasible ``A`` against the spectral lower bound.

    Feasible ``A`` are ``G C`` with ``G`` the D-normalized eigenvectors
    (non-null only unless ``include_null``) and ``C`` a random matrix with
    orthonormal columns, so ``A* D A = exp(i theta) I``.  The bound is the
    sum of the ``m`` smallest real parts (resp. imaginary parts) of the
    corresponding eigenvalues; the sorted eigenvectors attain it.
    """
    spec = spec if spec is not None else generalized_spectrum(lap)
    idx = spec.indices(include_null)
    if not 1 <= m <= spec.xi:
        raise ConfigError(f"m must lie in [1, {spec.xi}] (number of nonzero eigenvalues)")
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    vals = spec.values[idx]
    basis = spec.vectors[:, idx]
    by_re = np.argsort(vals.real, kind="stable")
    by_im = np.argsort(vals.imag, kind="stable")
    bound_re = float(np.sum(vals.real[by_re[:m]]))
    bound_im = float(np.sum(vals.imag[by_im[:m]]))
    attained_re = constrained_objective(basis[:, by_re[:m]], lap.l1).real
    attained_im = constrained_objective(basis[:, by_im[:m]], lap.l1).imag
    gen = rngmod.stream(seed, "spectral-min-check")
    phase = np.exp(1j * spec.theta) if spec.theta is not None else 1.0
    min_re = min_im = math.inf
    constraint = 0.0
    for _ in range(trials):
        a = basis @ unitary(gen, len(idx), m)
        val = constrained_objective(a, lap.l1)
        min_re = min(min_re, val.real)
        min_im = min(min_im, val.imag)
        constraint = max(constraint, fro(a.conj().T @ lap.d @ a - phase * np.eye(m)))
    return SpectralMinReport(
        m, bound_re, bound_im, attained_re, attained_im, min_re, min_im, constraint, trials
    )
