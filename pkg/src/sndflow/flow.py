"""Explicit-Euler MMD particle flow.

Each step moves every particle against the kernel-gradient field of half
the squared MMD to a fixed target:

    x_i <- x_i - tau * [ (1/N) sum_n r(||x_i-x_n||) (x_i-x_n)
                       - (1/M) sum_m r(||x_i-y_m||) (x_i-y_m) ]

with r the signed kernel ratio F'(s)/s (the single negation site lives in
RadialProfile.kernel_ratio).  The bracket can be evaluated densely in
O(N(N+M)d) or through the sliced estimator, which replaces the radial sums
by 1D sums over rotated simplex directions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import _backend as backend
from .kernels import Kernel
from .mmd import ParticleCloud, mmd_squared
from .profiles import GaussianProfile, NdProfile, RadialProfile, SndProfile
from .slicing import random_rotation, simplex_directions, sliced_grad_sum
from .transport import w2_exact

__all__ = [
    "FlowConfig",
    "FlowRecord",
    "FlowTrace",
    "FlowDiverged",
    "flow_step",
    "dirac_step",
    "run_flow",
]

_DTYPES = {"f32": np.float32, "f64": np.float64}


class FlowDiverged(RuntimeError):
    """Raised when a step produces nonfinite coordinates (step too large)."""

    def __init__(self, iteration: int):
        super().__init__(
            f"flow produced nonfinite coordinates at iteration {iteration}; "
            "reduce the step size"
        )
        self.iteration = iteration


@dataclass(frozen=True)
class FlowConfig:
    tau: float = 0.01
    iters: int = 1000
    checkpoints: Optional[Sequence[int]] = None
    precision: str = "f64"
    seed: int = 0
    summation: str = "dense"
    n_slices: int = 0  # 0 -> simplex default (slicing dim + 1)
    rotate_slices: bool = True
    compute_w2: bool = True

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"step size must be positive, got {self.tau}")
        if self.iters < 0:
            raise ValueError(f"iteration count must be >= 0, got {self.iters}")
        if self.precision not in _DTYPES:
            raise ValueError(f"precision must be f32 or f64, got {self.precision!r}")
        if self.summation not in ("dense", "sliced"):
            raise ValueError(f"summation must be dense or sliced, got {self.summation!r}")
        if self.checkpoints is not None:
            pts = list(self.checkpoints)
            if pts != sorted(pts) or (pts and (pts[0] < 0 or pts[-1] > self.iters)):
                raise ValueError("checkpoints must be sorted within [0, iters]")
            object.__setattr__(self, "checkpoints", tuple(pts))

    def checkpoint_set(self) -> set:
        if self.checkpoints is None:
            return {0, self.iters}
        return set(self.checkpoints)


@dataclass(frozen=True)
class FlowRecord:
    iteration: int
    time: float  # flow time tau * k
    mmd2: float
    w2: float
    wall_ms: float


@dataclass
class FlowTrace:
    records: list = field(default_factory=list)
    final: Optional[ParticleCloud] = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def _ratio_code(profile: RadialProfile):
    """Map a profile to the compiled ratio-kind code, or None for generic."""
    if isinstance(profile, NdProfile):
        return backend.RATIO_ND, 1.0
    if isinstance(profile, GaussianProfile):
        return backend.RATIO_GAUSS, profile.sigma
    if isinstance(profile, SndProfile) and profile.d_slice == 3 and profile.m in (2, 4):
        kind = backend.RATIO_SND2 if profile.m == 2 else backend.RATIO_SND4
        return kind, profile.eps
    return None


def _dense_bracket(profile: RadialProfile, state: np.ndarray, target: np.ndarray):
    code = _ratio_code(profile)
    if code is not None:
        return backend.pairwise_bracket(state, target, code[0], code[1])
    # generic profile: vectorized through the python ratio
    out = np.zeros_like(state)
    for other, sign in ((state, 1.0), (target, -1.0)):
        diff = state[:, None, :] - other[None, :, :]
        s = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        r = profile.kernel_ratio(s)
        out += (sign / other.shape[0]) * np.einsum("ij,ijk->ik", r, diff)
    return out


class _SlicedEngine:
    """Per-run state for the sliced bracket: directions, padding, rng."""

    def __init__(self, profile, d_ambient, cfg: FlowConfig):
        self.profile = profile
        self.d_ambient = d_ambient
        self.d_slice = profile.d_slice if profile.d_slice else d_ambient
        if self.d_slice < d_ambient:
            raise ValueError(
                f"slicing dimension {self.d_slice} below data dimension {d_ambient}"
            )
        if isinstance(profile, GaussianProfile):
            raise ValueError("gaussian kernels have no sliced form")
        base = simplex_directions(self.d_slice)
        if cfg.n_slices and cfg.n_slices != base.count:
            raise ValueError(
                f"simplex slicing in dimension {self.d_slice} uses "
                f"{base.count} directions, got n_slices={cfg.n_slices}"
            )
        self.dirs = base.directions
        self.rotate = cfg.rotate_slices
        self.rng = np.random.default_rng(cfg.seed)
        self.desc = profile.sliced_derivative(self.d_slice)
        if isinstance(profile, NdProfile):
            self.code = (backend.RATIO_ND, self.desc.window, self.desc.tail, 1.0)
        elif isinstance(profile, SndProfile) and profile.m in (2, 4):
            kind = backend.RATIO_SND2 if profile.m == 2 else backend.RATIO_SND4
            self.code = (kind, self.desc.window, self.desc.tail, profile.eps)
        else:
            self.code = None

    def _pad(self, pts: np.ndarray) -> np.ndarray:
        if pts.shape[1] == self.d_slice:
            return pts
        out = np.zeros((pts.shape[0], self.d_slice), dtype=pts.dtype)
        out[:, : pts.shape[1]] = pts
        return out

    def bracket(self, state: np.ndarray, target: np.ndarray) -> np.ndarray:
        n, m = state.shape[0], target.shape[0]
        sources = np.vstack([self._pad(state), self._pad(target)]).astype(np.float64)
        weights = np.concatenate([np.full(n, 1.0 / n), np.full(m, -1.0 / m)])
        queries = sources[:n]
        if self.rotate:
            rot = random_rotation(self.d_slice, self.rng)
            rotated = sources @ rot  # projections onto rotated directions
        else:
            rot = None
            rotated = sources
        proj_src = (rotated @ self.dirs.T).T  # (P, N+M)
        proj_q = proj_src[:, :n]
        if self.code is not None:
            kind, window, tail, eps = self.code
            order = np.argsort(proj_src, axis=1)
            xs = np.take_along_axis(proj_src, order, axis=1)
            ws = np.broadcast_to(weights, xs.shape)
            ws = np.take_along_axis(ws, order, axis=1)
            sums = backend.sorted_onedsum_batch(xs, ws, proj_q, window, tail, kind, eps)
        else:
            diff = proj_q[:, :, None] - proj_src[:, None, :]  # (P, N, N+M)
            sums = self.desc.fn(diff) @ weights
        bracket = (sums.T @ self.dirs) / self.dirs.shape[0]
        if rot is not None:
            bracket = bracket @ rot.T
        return bracket[:, : state.shape[1]].astype(state.dtype)


def flow_step(
    profile: RadialProfile,
    state: ParticleCloud,
    target: ParticleCloud,
    tau: float,
) -> ParticleCloud:
    """One dense explicit-Euler step; raises FlowDiverged on blowup."""
    if state.d != target.d:
        raise ValueError(f"dimension mismatch: {state.d} vs {target.d}")
    x = np.asarray(state.points, dtype=float)
    y = np.asarray(target.points, dtype=float)
    new = x - tau * _dense_bracket(profile, x, y)
    if not np.all(np.isfinite(new)):
        raise FlowDiverged(iteration=1)
    return ParticleCloud(new)


def dirac_step(profile: RadialProfile, x, y, tau: float) -> np.ndarray:
    """Single-particle update toward a single target.

    Written in the factored form x' = y + (x - y)(1 + tau r(s)) so that the
    distance recursion ||x'-y|| = ||x-y|| |1 + tau r|| holds to rounding;
    for the plain negative distance kernel this reproduces the exact
    period-2 orbit when ||x-y|| < tau/2.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = float(np.linalg.norm(x - y))
    if s == 0.0:
        return x.copy()
    factor = 1.0 + tau * float(profile.kernel_ratio(s))
    return y + (x - y) * factor


def run_flow(
    profile: RadialProfile,
    init: ParticleCloud,
    target: ParticleCloud,
    cfg: FlowConfig,
    metrics: Optional[Callable[[FlowRecord, ParticleCloud], None]] = None,
) -> FlowTrace:
    """Iterate the explicit Euler scheme, recording metrics at checkpoints.

    Checkpoint records carry iteration, flow time tau*k, the squared MMD of
    the profile's kernel, the exact Wasserstein-2 error to the target, and
    cumulative wall-clock milliseconds.  The whole state is kept in the
    configured precision; metrics are always evaluated in f64.
    """
    if init.d != target.d:
        raise ValueError(f"dimension mismatch: {init.d} vs {target.d}")
    dtype = _DTYPES[cfg.precision]
    state = np.ascontiguousarray(init.points, dtype=dtype)
    target_arr = np.ascontiguousarray(target.points, dtype=dtype)
    marks = cfg.checkpoint_set()
    kernel = Kernel(profile, "cpd")
    target64 = ParticleCloud(np.asarray(target.points, dtype=np.float64))
    engine = None
    if cfg.summation == "sliced":
        engine = _SlicedEngine(profile, init.d, cfg)
    tau = dtype(cfg.tau)

    trace = FlowTrace()
    start = time.perf_counter()

    def record(k: int):
        cloud = ParticleCloud(np.asarray(state, dtype=np.float64))
        rec = FlowRecord(
            iteration=k,
            time=cfg.tau * k,
            mmd2=mmd_squared(kernel, cloud, target64),
            w2=w2_exact(cloud, target64) if cfg.compute_w2 else float("nan"),
            wall_ms=(time.perf_counter() - start) * 1e3,
        )
        trace.records.append(rec)
        if metrics is not None:
            metrics(rec, cloud)

    if 0 in marks:
        record(0)
    for k in range(1, cfg.iters + 1):
        if engine is not None:
            bracket = engine.bracket(state, target_arr)
        else:
            bracket = _dense_bracket(profile, state, target_arr)
        state = state - tau * bracket
        if not np.all(np.isfinite(state)):
            raise FlowDiverged(iteration=k)
        if k in marks:
            record(k)
    trace.final = ParticleCloud(np.asarray(state, dtype=np.float64))
    return trace
