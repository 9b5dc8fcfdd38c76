"""Backend selection: compiled extension when available, numpy otherwise.

The compiled module implements the two hot kernels (pairwise flow brackets,
batched sorted 1D sums).  Everything here has a vectorized numpy twin with
identical semantics; MMDFLOW_BACKEND=numpy forces the fallback, and
MMDFLOW_THREADS caps the extension's worker count.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly by the import
    from . import _core as _ext
except ImportError:  # pragma: no cover
    _ext = None

__all__ = [
    "backend_name",
    "have_extension",
    "num_threads",
    "pairwise_bracket",
    "sorted_onedsum_batch",
    "RATIO_ND",
    "RATIO_SND2",
    "RATIO_SND4",
    "RATIO_GAUSS",
]

RATIO_ND = 0
RATIO_SND2 = 1
RATIO_SND4 = 2
RATIO_GAUSS = 3


def have_extension() -> bool:
    return _ext is not None and os.environ.get("MMDFLOW_BACKEND", "auto") != "numpy"


def backend_name() -> str:
    return "ext" if have_extension() else "numpy"


def num_threads() -> int:
    raw = os.environ.get("MMDFLOW_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ratio_kind_vals(kind: int, s: np.ndarray, p1: float) -> np.ndarray:
    """Signed kernel ratio F'(s)/s per kind code, vectorized.

    Formula twin of the compiled _ratio; dtype of ``s`` is preserved.
    """
    one = s.dtype.type(1.0)
    if kind == RATIO_ND:
        safe = np.where(s > 0, s, one)
        return np.where(s > 0, -s.dtype.type(0.5) / safe, s.dtype.type(0.0))
    if kind == RATIO_SND2:
        u = s / s.dtype.type(p1)
        inner = -(8.0 - 3.0 * u) / s.dtype.type(12.0 * p1)
        us = np.where(u > 1.0, u, one)
        outer = -(6.0 - 1.0 / us**2) / (s.dtype.type(12.0 * p1) * us)
        return np.where(u <= 1.0, inner, outer).astype(s.dtype, copy=False)
    if kind == RATIO_SND4:
        u = s / s.dtype.type(p1)
        inner = -(15.0 * u**3 - 48.0 * u**2 + 160.0) / s.dtype.type(360.0 * p1)
        um = np.clip(u, 1.0, 2.0)
        mid = -(
            -5.0 * um**4 + 48.0 * um**3 - 180.0 * um**2 + 320.0 * um - 60.0
            + 4.0 / um**2
        ) / (s.dtype.type(360.0 * p1) * um)
        us = np.where(u > 2.0, u, one)
        outer = -(180.0 - 60.0 / us**2) / (s.dtype.type(360.0 * p1) * us)
        out = np.where(u <= 1.0, inner, np.where(u <= 2.0, mid, outer))
        return out.astype(s.dtype, copy=False)
    if kind == RATIO_GAUSS:
        u = s / s.dtype.type(p1)
        return -np.exp(-s.dtype.type(0.5) * u * u) / s.dtype.type(p1 * p1)
    raise ValueError(f"unknown ratio kind {kind}")


def _bracket_half(state, other, kind, p1, sign, out):
    # accumulate sign/len(other) * sum_j r(||x_i - z_j||) (x_i - z_j)
    diff = state[:, None, :] - other[None, :, :]
    s = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    r = ratio_kind_vals(kind, s, p1)
    out += (state.dtype.type(sign / other.shape[0])) * np.einsum(
        "ij,ijk->ik", r, diff
    )


def pairwise_bracket(state, target, kind, p1):
    """Flow bracket (repulsion minus attraction) for every state particle."""
    state = np.ascontiguousarray(state)
    target = np.ascontiguousarray(target, dtype=state.dtype)
    out = np.zeros_like(state)
    if have_extension():
        _ext.pairwise_bracket(state, target, out, kind, state.dtype.type(p1), num_threads())
        return out
    _bracket_half(state, state, kind, p1, 1.0, out)
    _bracket_half(state, target, kind, p1, -1.0, out)
    return out


def sorted_onedsum_batch(xs_sorted, ws_sorted, ys, window, tail, kind, eps):
    """Per-direction 1D sums sum_n w_n f'(y - x_n); xs sorted per row."""
    xs_sorted = np.ascontiguousarray(xs_sorted, dtype=np.float64)
    ws_sorted = np.ascontiguousarray(ws_sorted, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    out = np.empty_like(ys)
    if have_extension():
        _ext.sorted_onedsum_batch(
            xs_sorted, ws_sorted, ys, out, window, tail, kind, eps, num_threads()
        )
        return out
    n_dir = xs_sorted.shape[0]
    prefix = np.concatenate(
        [np.zeros((n_dir, 1)), np.cumsum(ws_sorted, axis=1)], axis=1
    )
    total = prefix[:, -1]
    for p in range(n_dir):
        lo = np.searchsorted(xs_sorted[p], ys[p] - window, side="left")
        hi = np.searchsorted(xs_sorted[p], ys[p] + window, side="right")
        out[p] = tail * (prefix[p, lo] - (total[p] - prefix[p, hi]))
        for j in np.nonzero(hi > lo)[0]:
            t = ys[p, j] - xs_sorted[p, lo[j] : hi[j]]
            out[p, j] += _sliced_deriv_np(kind, t, eps, tail) @ ws_sorted[
                p, lo[j] : hi[j]
            ]
    return out


def _sliced_deriv_np(kind, t, eps, tail):
    sgn = np.sign(t)
    if kind == RATIO_ND:
        return tail * sgn
    u = np.abs(t) / eps
    if kind == RATIO_SND2:
        inner = -sgn * (2.0 * u - u * u)
        return np.where(u >= 1.0, tail * sgn, inner)
    if kind == RATIO_SND4:
        v = 2.0 - np.clip(u, 1.0, 2.0)
        mid = -sgn * (1.0 - v**4 / 12.0)
        inner = -sgn * (0.25 * u**4 - (2.0 / 3.0) * u**3 + (4.0 / 3.0) * u)
        return np.where(u >= 2.0, tail * sgn, np.where(u >= 1.0, mid, inner))
    raise ValueError(f"no sliced derivative for ratio kind {kind}")
