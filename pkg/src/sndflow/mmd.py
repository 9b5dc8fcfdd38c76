"""Discrete squared maximum mean discrepancy and the flow objective.

For empirical measures with uniform weights the squared MMD is the usual
three-fold double sum over kernel evaluations (V-statistic form, diagonal
terms included).  For kernels that are only conditionally positive definite
of order one the same formula is valid between probability measures, and it
agrees with the squared MMD of the origin-anchored positive definite
companion kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import Kernel

__all__ = ["ParticleCloud", "mmd_squared", "flow_objective"]


@dataclass(frozen=True)
class ParticleCloud:
    """N points in R^d carrying uniform weights 1/N."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points))
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("a particle cloud needs an (N, d) point array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("particle coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def astype(self, dtype) -> "ParticleCloud":
        return ParticleCloud(self.points.astype(dtype))


def _mean_sym(block: np.ndarray) -> float:
    # mean of a kernel block, summed so that transposing the block gives
    # the bit-identical result (keeps mmd_squared exactly symmetric)
    rows = float(np.sum(np.sum(block, axis=0)))
    cols = float(np.sum(np.sum(block, axis=1)))
    return 0.5 * (rows + cols) / block.size


def mmd_squared(kernel: Kernel, mu: ParticleCloud, nu: ParticleCloud) -> float:
    """Squared MMD between two uniform empirical measures."""
    if mu.d != nu.d:
        raise ValueError(f"dimension mismatch: {mu.d} vs {nu.d}")
    x = np.asarray(mu.points, dtype=float)
    y = np.asarray(nu.points, dtype=float)
    k_xx = _mean_sym(kernel.pairwise(x, x))
    k_yy = _mean_sym(kernel.pairwise(y, y))
    k_xy = _mean_sym(kernel.pairwise(x, y))
    return k_xx - 2.0 * k_xy + k_yy


def flow_objective(kernel: Kernel, mu: ParticleCloud, nu: ParticleCloud) -> float:
    """Half the squared MMD, the functional the particle flow descends."""
    return 0.5 * mmd_squared(kernel, mu, nu)
