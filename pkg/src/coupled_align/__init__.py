"""Coupled unsupervised manifold alignment.

Two datasets are embedded into one space either through a complex
generalized graph Laplacian (dataset 1 in the real part, dataset 2 in the
imaginary part) refined by a stochastic-neighbor objective, or through
kernel maps into a shared latent space.
"""

from .embed import Embedding, align_error, spectral_embed
from .errors import ConfigError, CoupledAlignError, DataError, NumericError
from .graph import Dataset, GraphConfig, build_weights
from .kernel import AlignConfig, KernelModel, align, gram_matrix
from .laplacian import build_laplacian, coupled_weight, generalized_spectrum
from .sne import RefineConfig, refine

__all__ = [
    "AlignConfig",
    "ConfigError",
    "CoupledAlignError",
    "DataError",
    "Dataset",
    "Embedding",
    "GraphConfig",
    "KernelModel",
    "NumericError",
    "RefineConfig",
    "align",
    "align_error",
    "build_laplacian",
    "build_weights",
    "coupled_weight",
    "generalized_spectrum",
    "gram_matrix",
    "refine",
    "spectral_embed",
]

__version__ = "0.1.0"
