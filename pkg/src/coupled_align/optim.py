"""Backtracking gradient descent shared by the SNE refinement and kernel alignment."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NumericError

log = logging.getLogger(__name__)

MIN_STEP = 1e-12


@dataclass
class DescentResult:
    x: np.ndarray
    trace: list[float] = field(default_factory=list)
    iterations: int = 0
    stalled: bool = False
    converged: bool = False

    @property
    def objective(self) -> float:
        return self.trace[-1]


def backtracking_descent(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    *,
    max_iters: int,
    initial_step: float,
    tolerance: float,
    retract: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    min_step: float = MIN_STEP,
) -> DescentResult:
    """Minimize by ``x <- retract(x - step * grad)`` with step halving.

    A step is accepted only if it strictly lowers the objective, so the
    recorded trace is non-increasing.  After an accepted step the trial step
    doubles.  Complex ``x`` is treated as pairs of real variables: the
    gradient must be ``d/dRe + i d/dIm``.
    """
    x = np.array(x0, copy=True)
    f = float(objective(x))
    if not math.isfinite(f):
        raise NumericError(f"initial objective is not finite ({f})")
    res = DescentResult(x=x, trace=[f])
    step = float(initial_step)
    for it in range(max_iters):
        g = gradient(x)
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient at iteration {it}")
        if not np.any(g):
            res.converged = True
            break
        while True:
            cand = x - step * g
            if retract is not None:
                cand = retract(cand)
            fc = float(objective(cand))
            if math.isfinite(fc) and fc < f:
                break
            step /= 2
            if step < min_step:
                res.stalled = True
                break
        if res.stalled:
            log.warning("line search stalled at iteration %d (objective %.6g)", it, f)
            break
        rel = (f - fc) / max(abs(f), 1e-300)
        x, f = cand, fc
        res.trace.append(f)
        res.iterations = it + 1
        if rel < tolerance:
            res.converged = True
            break
        step *= 2
    res.x = x
    return res
