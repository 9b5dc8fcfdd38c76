"""Sliced evaluation of radial kernel sums.

A radial field built from a 1D profile can be written as a spherical average
of 1D sums over projections.  This module provides the direction sets
(rotated regular-simplex vertices), Haar-random rotations, the sliced
gradient-sum estimator, and an exact O((N+M) log(N+M)) path for the inner 1D
sums when the 1D derivative is sign-like outside a finite window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "SliceSet",
    "OneDimDeriv",
    "simplex_directions",
    "random_rotation",
    "rotate_slices",
    "sliced_grad_sum",
    "onedsum_sorted",
]

# Below this many points the dense per-slice sum is used even when a fast
# descriptor is available; sorting overhead is not worth it.
DENSE_CUTOFF = 512


@dataclass(frozen=True)
class SliceSet:
    """P unit directions plus the rotation policy for the sliced estimator.

    policy is "fixed" (directions used as-is, deterministic) or "rotate"
    (caller applies a fresh Haar rotation per iteration).
    """

    directions: np.ndarray  # (P, d), rows unit-norm
    policy: str = "fixed"

    def __post_init__(self):
        if self.policy not in ("fixed", "rotate"):
            raise ValueError(f"unknown rotation policy {self.policy!r}")
        norms = np.linalg.norm(self.directions, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-12):
            raise ValueError("slice directions must be unit vectors")

    @property
    def count(self) -> int:
        return self.directions.shape[0]

    @property
    def dim(self) -> int:
        return self.directions.shape[1]


@dataclass(frozen=True)
class OneDimDeriv:
    """Descriptor of an odd 1D derivative f' for the fast summation path.

    fn is the vectorized derivative; outside [-window, window] it equals
    +-tail (the constant sign-like plateau), which is what makes prefix-sum
    summation exact there.  window = 0 means pure sign (fn(0) must be 0).
    """

    fn: Callable[[np.ndarray], np.ndarray]
    window: float
    tail: float


def simplex_directions(d: int, antipodal: bool = False) -> SliceSet:
    """Vertices of the regular simplex in R^d as unit directions.

    Returns d+1 unit vectors with pairwise inner products exactly -1/d:
    the standard-basis simplex in R^{d+1} is centered and mapped down to the
    hyperplane orthogonal to the all-ones vector by a Householder reflection.
    With antipodal=True the negated copies are appended (2(d+1) directions);
    for odd integrands they duplicate the originals and change nothing.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    n = d + 1
    verts = np.eye(n) - 1.0 / n
    # Householder vector sending ones/sqrt(n) to e_n; the first d output
    # coordinates then span the centered hyperplane.
    w = np.full(n, 1.0 / np.sqrt(n))
    w[-1] -= 1.0
    w /= np.linalg.norm(w)
    reflected = verts - 2.0 * np.outer(verts @ w, w)
    dirs = reflected[:, :d]
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    if antipodal:
        dirs = np.vstack([dirs, -dirs])
    return SliceSet(directions=dirs, policy="fixed")


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix via QR with sign-fixed diagonal."""
    g = rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def rotate_slices(slices: SliceSet, rotation: np.ndarray) -> SliceSet:
    """Apply an orthogonal matrix to every direction."""
    return SliceSet(directions=slices.directions @ rotation.T, policy=slices.policy)


def _dense_onedsum(xs, weights, ys, fn):
    # sum_n w_n f'(y_m - x_n) for every y_m, by brute force
    return fn(ys[:, None] - xs[None, :]) @ weights


def onedsum_sorted(xs, weights, ys, deriv: OneDimDeriv):
    """Exact 1D sums sum_n w_n f'(y_m - x_n) using sorting and prefix sums.

    xs must be sorted ascending.  Points with y - x > window contribute
    tail * w, points with y - x < -window contribute -tail * w; both groups
    reduce to prefix sums.  Only the points inside the window are evaluated
    through deriv.fn.
    """
    xs = np.asarray(xs, dtype=float)
    weights = np.asarray(weights, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(np.diff(xs) < 0):
        raise ValueError("xs must be sorted ascending")
    w = deriv.window
    prefix = np.concatenate([[0.0], np.cumsum(weights)])
    total = prefix[-1]
    lo = np.searchsorted(xs, ys - w, side="left")
    hi = np.searchsorted(xs, ys + w, side="right")
    out = deriv.tail * (prefix[lo] - (total - prefix[hi]))
    for j in range(ys.size):
        if hi[j] > lo[j]:
            near = slice(lo[j], hi[j])
            out[j] += deriv.fn(ys[j] - xs[near]) @ weights[near]
    return out


def sliced_grad_sum(
    f_d1,
    slices: SliceSet,
    queries: np.ndarray,
    sources: np.ndarray,
    weights: np.ndarray,
    chunk: int = 64,
) -> np.ndarray:
    """Sliced estimate of the weighted gradient sums of a radial potential.

    For each query point y_m returns

        (1/P) sum_p  xi_p * sum_n w_n f'(<x_n - y_m, xi_p>),

    which for directions equidistributed on the sphere approximates
    sum_n w_n grad Phi(x_n - y_m) with Phi the radial potential whose sliced
    1D derivative is f'.  f_d1 is either a plain odd callable (dense path)
    or a OneDimDeriv descriptor, which enables the sorted fast path once
    there are enough points.

    Returns an (M, d) array.
    """
    queries = np.asarray(queries, dtype=float)
    sources = np.asarray(sources, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if queries.shape[1] != slices.dim or sources.shape[1] != slices.dim:
        raise ValueError("point dimension does not match slice directions")
    dirs = slices.directions
    n_p = slices.count
    n_src = sources.shape[0]
    n_q = queries.shape[0]

    proj_src = sources @ dirs.T  # (N, P)
    proj_q = queries @ dirs.T  # (M, P)

    use_fast = isinstance(f_d1, OneDimDeriv) and (n_src + n_q) >= DENSE_CUTOFF
    fn = f_d1.fn if isinstance(f_d1, OneDimDeriv) else f_d1

    s_mp = np.empty((n_q, n_p))
    if use_fast:
        order = np.argsort(proj_src, axis=0)
        for p in range(n_p):
            xs = proj_src[order[:, p], p]
            ws = weights[order[:, p]]
            # inner argument is x_n - y_m = -(y - x); use oddness of f'
            s_mp[:, p] = -onedsum_sorted(xs, ws, proj_q[:, p], f_d1)
    else:
        for start in range(0, n_p, chunk):
            sl = slice(start, min(start + chunk, n_p))
            diff = proj_src[None, :, sl] - proj_q[:, None, sl]  # (M, N, c)
            s_mp[:, sl] = np.einsum("mnc,n->mc", fn(diff), weights)
    return (s_mp @ dirs) / n_p
