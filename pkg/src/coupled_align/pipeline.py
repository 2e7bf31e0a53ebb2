"""End-to-end runs: graphs to coupled embedding to refinement, the baselines, and the benchmark."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .embed import Embedding, align_error, phase_mixer, spectral_embed
from .errors import DataError
from .graph import Dataset, GraphConfig, HeatKernel, KNearest, build_weights, median_sq_distance
from .kernel import AlignConfig, GaussianRBF, KernelModel, align, gram_matrix
from .laplacian import build_laplacian, classical_laplacian, coupled_weight, generalized_spectrum
from .sne import RefineConfig, refine
from .synthetic import circle_views


def heat_knn(data: Dataset, k: int, t: float | None = None) -> GraphConfig:
    """kNN graph with heat weights; ``t`` defaults to the median squared pairwise distance."""
    return GraphConfig(KNearest(k), HeatKernel(median_sq_distance(data) if t is None else t))


def coupled_embedding(
    x1: Dataset,
    x2: Dataset,
    g1: GraphConfig,
    g2: GraphConfig,
    m: int,
    eta: float = 0.5,
    alpha: float = 0.5,
    include_null: bool = False,
    mixer_phase: float | None = np.pi / 4,
) -> Embedding:
    if x1.n != x2.n:
        raise DataError(f"coupled embedding needs equal point counts, got {x1.n} and {x2.n}")
    g = coupled_weight(build_weights(x1, g1), build_weights(x2, g2), eta, 1 - eta, alpha, 1 - alpha)
    spec = generalized_spectrum(build_laplacian(g))
    mixer = None if mixer_phase is None else phase_mixer(m, mixer_phase)
    return spectral_embed(spec, m, include_null, mixer)


def independent_embedding(x: Dataset, g: GraphConfig, m: int) -> np.ndarray:
    """Classical Laplacian eigenmap of one view (real coordinates)."""
    spec = generalized_spectrum(classical_laplacian(build_weights(x, g)))
    return spectral_embed(spec, m).y1


def latent_columns(z: np.ndarray, split: bool | None = None) -> np.ndarray:
    """Latent images as rows; with ``split`` the real parts are followed by the imaginary parts.

    ``split`` defaults to whether ``z`` has any nonzero imaginary part.
    """
    rows = z.T
    if split is None:
        split = bool(np.any(np.imag(rows)))
    return np.hstack([rows.real, rows.imag]) if split else np.real(rows).copy()


def kernel_alignment(x1: Dataset, x2: Dataset, cfg: AlignConfig) -> KernelModel:
    k1 = gram_matrix(x1, GaussianRBF(median_sq_distance(x1)))
    k2 = gram_matrix(x2, GaussianRBF(median_sq_distance(x2)))
    return align(k1, k2, cfg)


@dataclass(frozen=True)
class BenchmarkResult:
    coupled_error: float
    refined_error: float
    independent_error: float
    kernel_error: float
    refined: Embedding
    refine_trace: list[float]
    kernel: KernelModel
    seconds: float


def run_benchmark(seed: int = 0, n: int = 200, k: int = 10, m: int = 2) -> BenchmarkResult:
    start = time.perf_counter()
    views = circle_views(n, seed=seed)
    x1, x2 = views.x1, views.x2
    g1, g2 = heat_knn(x1, k), heat_knn(x2, k)
    e = coupled_embedding(x1, x2, g1, g2, m)
    r = refine(e, x1, x2, RefineConfig(zeta=1.0, perplexity=30.0, max_iters=300))
    independent = align_error(independent_embedding(x1, g1, m), independent_embedding(x2, g2, m))
    model = kernel_alignment(x1, x2, AlignConfig(p=2, seed=seed))
    return BenchmarkResult(
        coupled_error=align_error(e.y1, e.y2),
        refined_error=align_error(r.embedding.y1, r.embedding.y2),
        independent_error=independent,
        kernel_error=align_error(latent_columns(model.z1, False), latent_columns(model.z2, False)),
        refined=r.embedding,
        refine_trace=r.trace,
        kernel=model,
        seconds=time.perf_counter() - start,
    )
