"""Deterministic generators for flow targets and initializations."""

from __future__ import annotations

import numpy as np

from .mmd import ParticleCloud

__all__ = [
    "gen_three_rings",
    "gen_annulus",
    "gen_bananas",
    "gen_gauss_mixture",
    "gen_init_gaussian",
    "load_csv",
    "save_csv",
]


def _circle(center, radius, n):
    angles = 2.0 * np.pi * np.arange(n) / n
    return np.stack(
        [center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)], 1
    )


def gen_three_rings(n_per_circle: int = 40) -> ParticleCloud:
    """Three unit circles centered at (-2.5, 0), (0, 0), (2.5, 0).

    Equi-angular discretization with n points per circle (canonically 40,
    i.e. 120 points total).
    """
    if n_per_circle < 1:
        raise ValueError("need at least one point per circle")
    pts = np.vstack(
        [_circle(c, 1.0, n_per_circle) for c in ((-2.5, 0.0), (0.0, 0.0), (2.5, 0.0))]
    )
    return ParticleCloud(pts)


def gen_annulus(n_per_circle: int = 50) -> ParticleCloud:
    """Two concentric circles of radius 1 and 0.3 (canonically 50 points each)."""
    if n_per_circle < 1:
        raise ValueError("need at least one point per circle")
    pts = np.vstack(
        [_circle((0.0, 0.0), r, n_per_circle) for r in (1.0, 0.3)]
    )
    return ParticleCloud(pts)


def gen_bananas(n_per_cluster: int = 100, seed: int = 0) -> ParticleCloud:
    """Two mirrored banana-shaped clusters, 2 * n points.

    Cluster k in {+1, -1} follows the parabolic arc (k (s^2 - 1), s) for s
    equispaced in [-1, 1], offset horizontally by k and jittered with
    Gaussian noise of standard deviation 0.05.  The generator is the
    definition; downstream checks are property-based (two jitter-separable
    arcs inside a fixed box).
    """
    if n_per_cluster < 1:
        raise ValueError("need at least one point per cluster")
    rng = np.random.default_rng(seed)
    s = np.linspace(-1.0, 1.0, n_per_cluster)
    clusters = []
    for k in (1.0, -1.0):
        x = k * (s**2 - 1.0) + k + 0.05 * rng.standard_normal(n_per_cluster)
        y = s + 0.05 * rng.standard_normal(n_per_cluster)
        clusters.append(np.stack([x, y], 1))
    return ParticleCloud(np.vstack(clusters))


def gen_gauss_mixture(
    n: int, d: int, modes: int = 10, seed: int = 0, spread: float = 0.05
) -> ParticleCloud:
    """Mixture of isotropic Gaussian bumps with standard normal centers.

    The high-dimensional synthetic target: ``modes`` centers drawn from
    N(0, I_d), points cycled through the centers with per-point jitter of
    standard deviation ``spread``.
    """
    if n < 1 or d < 1 or modes < 1:
        raise ValueError("counts and dimension must be positive")
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((modes, d))
    pts = centers[np.arange(n) % modes] + spread * rng.standard_normal((n, d))
    return ParticleCloud(pts)


def gen_init_gaussian(
    n: int,
    d: int,
    std: float = 1e-4,
    seed: int = 0,
    mean=None,
    uniform: bool = False,
) -> ParticleCloud:
    """Seeded initialization cloud.

    Default: isotropic Gaussian of standard deviation ``std`` around
    ``mean`` (the origin if omitted); the canonical flow start is a highly
    localized blob with std = 1e-4.  With uniform=True returns iid samples
    from the unit cube [0, 1]^d instead (``std`` and ``mean`` ignored),
    the high-dimensional initialization.
    """
    if n < 1 or d < 1:
        raise ValueError("counts and dimension must be positive")
    if std < 0:
        raise ValueError("standard deviation must be nonnegative")
    rng = np.random.default_rng(seed)
    if uniform:
        return ParticleCloud(rng.uniform(0.0, 1.0, (n, d)))
    center = np.zeros(d) if mean is None else np.asarray(mean, dtype=float)
    return ParticleCloud(center + std * rng.standard_normal((n, d)))


def load_csv(path) -> ParticleCloud:
    """Read a headerless CSV, one point per row, into a cloud."""
    pts = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    return ParticleCloud(pts)


def save_csv(path, cloud: ParticleCloud) -> None:
    """Write a cloud as headerless CSV, full double precision."""
    np.savetxt(path, cloud.points, delimiter=",", fmt="%.17g")
