"""Synthetic ratings from the one-way random-effects model.

``x_ij = mu + phi_i + eps_ij`` with ``phi_i ~ N(0, sigma2_phi)`` and
``eps_ij ~ N(0, sigma2_eps)``, so the population reliability of a k-rating
mean is known exactly and estimators can be checked against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import RatingTable
from .errors import DegenerateData


@dataclass(frozen=True)
class GeneratorParams:
    mu: float = 0.0
    sigma2_phi: float = 1.0
    sigma2_eps: float = 1.0
    n: int = 100
    k: int = 13
    seed: int = 0
    value_clip: Optional[tuple] = None
    round_step: Optional[float] = None

    def __post_init__(self):
        if self.sigma2_phi < 0 or self.sigma2_eps < 0:
            raise ValueError("variances must be non-negative")
        if self.n < 2 or self.k < 1:
            raise ValueError(f"need n >= 2 and k >= 1, got n={self.n}, k={self.k}")
        if self.value_clip is not None and self.value_clip[0] > self.value_clip[1]:
            raise ValueError("value_clip must be (min, max) with min <= max")
        if self.round_step is not None and self.round_step <= 0:
            raise ValueError("round_step must be positive")


def generate(params: GeneratorParams) -> RatingTable:
    """Draw an ``n x k`` complete table.

    Clipping and rounding, when configured, are applied last; they make the
    ratings look like a bounded Likert instrument but bias the variance
    components away from the Gaussian truth.
    """
    rng = np.random.default_rng(params.seed)
    phi = rng.normal(0.0, np.sqrt(params.sigma2_phi), size=params.n)
    eps = rng.normal(0.0, np.sqrt(params.sigma2_eps), size=(params.n, params.k))
    x = params.mu + phi[:, None] + eps
    if params.round_step is not None:
        origin = params.value_clip[0] if params.value_clip else 0.0
        x = origin + np.round((x - origin) / params.round_step) * params.round_step
    if params.value_clip is not None:
        x = np.clip(x, *params.value_clip)
    width = len(str(params.n - 1))
    ids = [f"item{i:0{width}d}" for i in range(params.n)]
    return RatingTable(tuple(ids), x, "interval")


def true_icc(params: GeneratorParams, k: int) -> float:
    denom = params.sigma2_phi + params.sigma2_eps / k
    if denom <= 0:
        raise DegenerateData("both variance components are zero")
    return params.sigma2_phi / denom
