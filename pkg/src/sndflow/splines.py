"""Centered cardinal B-splines and the spline-smoothed absolute value.

The centered cardinal B-spline of order ``m`` is the m-fold self-convolution
of the unit indicator on [-1/2, 1/2].  Convolving ``abs`` with its rescaled
version ``(1/eps) M_m(x/eps)`` yields a convex, even C^m approximation of
``abs`` that equals ``abs`` exactly outside [-m*eps/2, m*eps/2] and whose
second derivative is twice the spline.  These are the 1D building blocks of
the smoothed distance kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, pi, sqrt

import numpy as np

__all__ = [
    "SplineProfile",
    "bspline_eval",
    "bspline_center_value",
    "smoothed_abs",
    "smoothed_abs_d1",
    "smoothed_abs_d2",
    "huber",
]

# Above this order the alternating truncated-power sum loses too many digits
# in f64; fall back to exact rational arithmetic per point.
_MAX_FLOAT_ORDER = 12


@dataclass(frozen=True)
class SplineProfile:
    """Order-m centered cardinal B-spline at scale eps.

    The scaled spline is ``(1/eps) M_m(x/eps)``: support [-m*eps/2, m*eps/2],
    unit mass, even.
    """

    m: int
    eps: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"spline order must be >= 1, got {self.m}")
        if not self.eps > 0:
            raise ValueError(f"scale must be positive, got {self.eps}")

    @property
    def support_radius(self) -> float:
        return 0.5 * self.m * self.eps


def _kahan_sum_terms(y, m, power, scale):
    """Compensated sum of (-1)^k C(m,k) (y - k + m/2)_+^power, times scale.

    ``y`` is a nonnegative array.  Alternating binomial sums cancel badly
    near the support edge for larger m, hence the compensation.
    """
    total = np.zeros_like(y)
    comp = np.zeros_like(y)
    half = m / 2.0
    for k in range(m + 1):
        base = np.maximum(y - k + half, 0.0)
        term = ((-1) ** k * comb(m, k)) * base**power
        if m >= 4:
            t = total + term
            comp += np.where(
                np.abs(total) >= np.abs(term),
                (total - t) + term,
                (term - t) + total,
            )
            total = t
        else:
            total = total + term
    return scale * (total + comp)


def _rational_bspline(m: int, y: float) -> float:
    """Exact-rational spline value at a single point, for large m."""
    yf = Fraction(y)
    half = Fraction(m, 2)
    acc = Fraction(0)
    for k in range(m + 1):
        base = yf - k + half
        if base > 0:
            acc += (-1) ** k * comb(m, k) * base ** (m - 1)
    return float(acc / factorial(m - 1))


def bspline_eval(p: SplineProfile, x):
    """Evaluate the scaled spline ``(1/eps) M_m(x/eps)``.

    Zero outside the support and exactly even (evaluation is canonicalized
    to |x|).  Order 1 is the indicator of [-eps/2, eps/2] with value 1/eps.
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(x) / p.eps
    if p.m == 1:
        out = np.where(y <= 0.5, 1.0 / p.eps, 0.0)
        return out if out.ndim else float(out)

    inside = y < p.m / 2.0
    yc = np.where(inside, y, 0.0)
    if p.m <= _MAX_FLOAT_ORDER:
        vals = _kahan_sum_terms(yc, p.m, p.m - 1, 1.0 / factorial(p.m - 1))
    else:
        vals = np.vectorize(lambda t: _rational_bspline(p.m, t))(yc)
    out = np.where(inside, vals / p.eps, 0.0)
    return out if out.ndim else float(out)


def bspline_center_value(m: int) -> float:
    """Central value M_m(0) by the closed alternating sum, exactly.

    Evaluated in integer arithmetic, so it stays accurate for large m where
    the float truncated-power sum would cancel catastrophically.  For large
    m the value behaves like sqrt(6 / (pi * m)).
    """
    if m < 1:
        raise ValueError(f"spline order must be >= 1, got {m}")
    if m == 1:
        return 1.0
    acc = 0
    for k in range(m // 2 + 1):
        acc += (-1) ** k * comb(m, k) * (m - 2 * k) ** (m - 1)
    return float(Fraction(acc, factorial(m - 1) * 2 ** (m - 1)))


def bspline_center_asymptote(m: int) -> float:
    """Leading-order approximation sqrt(6/(pi*m)) of the central value."""
    return sqrt(6.0 / (pi * m))


def smoothed_abs(p: SplineProfile, x):
    """The smoothed absolute value ``(abs * M_{m,eps})(x)``.

    Equals ``eps * g(x/eps)`` where g is the truncated-power closed form of
    the convolution with the unscaled spline; returns |x| exactly (same
    float) once |x| >= m*eps/2.
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    y = ax / p.eps
    inside = y < p.m / 2.0
    yc = np.where(inside, y, 0.0)
    core = _kahan_sum_terms(yc, p.m, p.m + 1, 2.0 / factorial(p.m + 1)) - yc
    out = np.where(inside, p.eps * core, ax)
    return out if out.ndim else float(out)


def smoothed_abs_d1(p: SplineProfile, x):
    """Derivative of the smoothed absolute value.

    Note the scale invariance: ``(abs*M_{m,eps})'(x) = g'(x/eps)`` with no
    eps prefactor.  Odd, clipped to +-1 outside the smoothing window.
    """
    x = np.asarray(x, dtype=float)
    sgn = np.sign(x)
    y = np.abs(x) / p.eps
    inside = y < p.m / 2.0
    yc = np.where(inside, y, 0.0)
    core = _kahan_sum_terms(yc, p.m, p.m, 2.0 / factorial(p.m)) - 1.0
    out = sgn * np.where(inside, core, 1.0)
    return out if out.ndim else float(out)


def smoothed_abs_d2(p: SplineProfile, x):
    """Second derivative: twice the scaled spline, (2/eps) M_m(x/eps)."""
    out = 2.0 * np.asarray(bspline_eval(p, x))
    return out if out.ndim else float(out)


def huber(x, lam: float = 1.0):
    """Huber function: x^2/2 inside [-lam, lam], lam*(|x| - lam/2) outside.

    Included as the natural-looking smoothing of abs that nevertheless does
    not give a usable (conditionally positive definite) kernel; kept here
    for the falsification tests only.
    """
    if not lam > 0:
        raise ValueError(f"huber threshold must be positive, got {lam}")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.where(ax <= lam, 0.5 * x * x, lam * (ax - 0.5 * lam))
    return out if out.ndim else float(out)
