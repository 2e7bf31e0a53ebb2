"""Two noisy linear views of one circle, for the end-to-end benchmark."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .graph import Dataset


@dataclass(frozen=True)
class TwoViews:
    angles: np.ndarray
    x1: Dataset
    x2: Dataset


def circle_views(n: int = 200, dims: tuple[int, int] = (3, 5), noise: float = 0.01, seed: int = 0) -> TwoViews:
    """Row ``j`` of both views is the same latent point on the unit circle.

    Each view applies its own Gaussian linear map ``R^2 -> R^d`` and adds
    isotropic noise of standard deviation ``noise``.
    """
    gen = rngmod.stream(seed, "synthetic-circle")
    angles = gen.uniform(0.0, 2 * np.pi, n)
    latent = np.column_stack([np.cos(angles), np.sin(angles)])
    views = []
    for d in dims:
        lift = gen.standard_normal((2, d))
        x = latent @ lift + noise * gen.standard_normal((n, d))
        views.append(Dataset.from_array(x, prefix="p"))
    return TwoViews(angles, views[0], views[1])
