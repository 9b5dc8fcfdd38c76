"""Self-contained property suites behind the ``verify`` CLI command.

Each suite returns (name, passed, detail) tuples; the CLI renders them as a
table and fails on any false entry.  The suites are fast spot checks of the
same invariants the test suite covers in depth.
"""

from __future__ import annotations

import numpy as np

from .kernels import Kernel, cpd_falsify, cpd_quadratic_form, gram
from .mmd import ParticleCloud, mmd_squared
from .profiles import (
    GaussianProfile,
    NdProfile,
    SndProfile,
    cd_constant,
    power_eigenvalue,
    riemann_liouville_quadrature,
    snd_profile_closed,
    snd_profile_d1,
)
from .slicing import (
    OneDimDeriv,
    onedsum_sorted,
    random_rotation,
    rotate_slices,
    simplex_directions,
)
from .splines import SplineProfile, huber, smoothed_abs, smoothed_abs_d1, smoothed_abs_d2
from .transport import w2_1d, w2_exact
from .flow import dirac_step
from itertools import permutations

SUITES = ("splines", "profiles", "slicing", "cpd", "dirac", "transport")


def _check(results, name, ok, detail=""):
    results.append((name, bool(ok), detail))


def suite_splines(seed: int):
    rng = np.random.default_rng(seed)
    res = []
    p2, p4 = SplineProfile(2), SplineProfile(4)
    _check(res, "unit mass (quadrature)", _spline_mass_ok(p2) and _spline_mass_ok(p4))
    xs = rng.uniform(-3, 3, 200)
    _check(res, "even and positive", np.all(smoothed_abs(p2, xs) > 0)
           and np.all(smoothed_abs(p2, xs) == smoothed_abs(p2, -xs)))
    _check(res, "matches abs outside support",
           np.all(smoothed_abs(p2, xs[np.abs(xs) >= 1]) == np.abs(xs[np.abs(xs) >= 1])))
    _check(res, "convexity (second derivative >= 0)",
           np.all(smoothed_abs_d2(p4, xs) >= 0))
    h = 1e-6
    fd = (smoothed_abs(p2, xs + h) - smoothed_abs(p2, xs - h)) / (2 * h)
    _check(res, "derivative vs finite differences",
           np.max(np.abs(fd - smoothed_abs_d1(p2, xs))) < 1e-6)
    ce = cpd_falsify(lambda r: -huber(r, 1.0), d=1, trials=4000, rng=seed)
    _check(res, "negative Huber falsified", ce is not None,
           "" if ce is None else f"form={ce.value:.2e}")
    none = cpd_falsify(lambda r: -smoothed_abs(p2, r), d=1, trials=2000, rng=seed)
    _check(res, "smoothed abs stays conditionally positive (1D)", none is None)
    return res


def _spline_mass_ok(p):
    from .splines import bspline_eval

    grid = np.linspace(-p.support_radius, p.support_radius, 20001)
    mass = np.trapezoid(np.asarray(bspline_eval(p, grid)), grid)
    return abs(mass - 1.0) < 1e-6


def suite_profiles(seed: int):
    rng = np.random.default_rng(seed)
    res = []
    _check(res, "C_3 = 1/2", abs(cd_constant(3) - 0.5) < 1e-14)
    ok = True
    for beta in (0.5, 1.0, 1.5):
        for d in (2, 3, 5):
            got = riemann_liouville_quadrature(lambda t, b=beta: np.abs(t) ** b, d, 1.3)
            want = power_eigenvalue(beta, d) * 1.3**beta
            ok = ok and abs(got - want) <= 1e-8 * abs(want)
    _check(res, "power eigenfunction identity", ok)
    ok = True
    for m, eps, d in ((2, 1.0, 3), (4, 0.5, 2), (2, 0.1, 5)):
        sp = SplineProfile(m, eps)
        for s in rng.uniform(0, 6, 5):
            got = snd_profile_closed(m, eps, d, s)
            want = riemann_liouville_quadrature(lambda t: smoothed_abs(sp, t), d, s)
            ok = ok and abs(got - want) <= 1e-8 * abs(want)
    _check(res, "closed form vs quadrature", ok)
    h = 1e-6
    s = rng.uniform(-4, 4, 40)
    fd = (snd_profile_closed(2, 1.0, 3, s + h) - snd_profile_closed(2, 1.0, 3, s - h)) / (2 * h)
    _check(res, "profile derivative vs finite differences",
           np.max(np.abs(fd - snd_profile_d1(2, 1.0, 3, s))) < 1e-6)
    prof = SndProfile(2, 1.0, 3)
    _check(res, "ratio limit equals curvature",
           abs(prof.ratio(0.0) - prof.curvature0()) < 1e-12)
    return res


def suite_slicing(seed: int):
    rng = np.random.default_rng(seed)
    res = []
    ss = simplex_directions(5)
    g = ss.directions @ ss.directions.T
    want = np.eye(6) * (1 + 1 / 5) - 1 / 5
    _check(res, "simplex direction gram", np.max(np.abs(g - want)) < 1e-10)
    q = random_rotation(7, rng)
    _check(res, "haar rotation orthogonal", np.max(np.abs(q @ q.T - np.eye(7))) < 1e-10)
    rot = rotate_slices(ss, random_rotation(5, rng))
    g2 = rot.directions @ rot.directions.T
    _check(res, "rotation preserves gram", np.max(np.abs(g2 - want)) < 1e-10)
    nd = NdProfile().sliced_derivative(3)
    xs = np.sort(rng.uniform(-3, 3, 200))
    ws = rng.standard_normal(200)
    ys = rng.uniform(-3, 3, 50)
    dense = nd.fn(ys[:, None] - xs[None, :]) @ ws
    fast = onedsum_sorted(xs, ws, ys, nd)
    _check(res, "sorted 1D sum vs dense",
           np.max(np.abs(fast - dense)) <= 1e-10 * max(1.0, np.max(np.abs(dense))))
    return res


def suite_cpd(seed: int):
    rng = np.random.default_rng(seed)
    res = []
    prof = SndProfile(2, 1.0, 3)
    kernel = Kernel(prof, "cpd")
    worst = 0.0
    for _ in range(25):
        n = int(rng.integers(3, 15))
        pts = rng.uniform(-3, 3, (n, 3))
        a = rng.standard_normal(n)
        a -= a.mean()
        val = cpd_quadratic_form(kernel, pts, a)
        worst = min(worst, val / (a @ a * abs(kernel.profile.kernel_value(0.0))))
    _check(res, "smoothed kernel forms nonnegative", worst >= -1e-10, f"worst={worst:.1e}")
    pd = Kernel(prof, "pd")
    ok = True
    for _ in range(20):
        pts = rng.uniform(-2, 2, (int(rng.integers(2, 25)), 3))
        g = gram(pd, pts)
        ok = ok and np.linalg.eigvalsh(g)[0] >= -1e-8 * np.trace(g)
    _check(res, "positive definite companion gram", ok)
    ce = cpd_falsify(lambda r: -huber(r, 1.0), d=1, trials=4000, rng=seed)
    _check(res, "Huber falsified", ce is not None)
    sp = SplineProfile(2, 1.0)
    ce2 = cpd_falsify(lambda r: -smoothed_abs(sp, r), d=3, trials=4000, rng=seed,
                      max_points=48)
    _check(res, "radialized smoothed abs falsified", ce2 is not None,
           "" if ce2 is None else f"form={ce2.value:.2e}")
    return res


def suite_dirac(seed: int):
    res = []
    nd = NdProfile()
    y = np.zeros(2)
    x0 = np.array([0.2, 0.0])
    x1 = dirac_step(nd, x0, y, tau=1.0)
    x2 = dirac_step(nd, x1, y, tau=1.0)
    d1 = np.linalg.norm(x1 - y)
    _check(res, "period-2 distance relation", abs(d1 - 0.3) <= 2e-16, f"d1={d1!r}")
    _check(res, "period-2 return", np.max(np.abs(x2 - x0)) <= 1e-15)
    snd = SndProfile(2, 1.0, 3)
    tau = 0.1
    x = np.array([0.05, 0.0])
    ok = True
    for _ in range(1000):
        xn = dirac_step(snd, x, y, tau)
        ratio = np.linalg.norm(xn - y) / np.linalg.norm(x - y)
        lo = 1.0 + tau * snd.kernel_curvature0() / 2.0 - 0.05
        ok = ok and (lo <= ratio < 1.0)
        x = xn
    _check(res, "smoothed kernel contraction band", ok)
    _check(res, "coincident pair is fixed",
           np.all(dirac_step(snd, y, y, tau) == y))
    return res


def suite_transport(seed: int):
    rng = np.random.default_rng(seed)
    res = []
    ok = True
    for _ in range(10):
        n = int(rng.integers(2, 7))
        mu = ParticleCloud(rng.standard_normal((n, 2)))
        nu = ParticleCloud(rng.standard_normal((n, 2)))
        costs = ((mu.points[:, None, :] - nu.points[None, :, :]) ** 2).sum(-1)
        brute = min(
            sum(costs[i, p[i]] for i in range(n)) for p in permutations(range(n))
        )
        ok = ok and abs(w2_exact(mu, nu) - np.sqrt(brute / n)) < 1e-10
    _check(res, "assignment vs factorial brute force", ok)
    ok = True
    for _ in range(20):
        n = int(rng.integers(2, 40))
        mu = ParticleCloud(rng.standard_normal((n, 1)))
        nu = ParticleCloud(rng.standard_normal((n, 1)))
        ok = ok and abs(w2_exact(mu, nu) - w2_1d(mu, nu)) < 1e-10
    _check(res, "assignment vs 1D sorting", ok)
    mu = ParticleCloud(rng.standard_normal((6, 2)))
    _check(res, "identity of indiscernibles", w2_exact(mu, mu) < 1e-12)
    return res


_SUITE_FNS = {
    "splines": suite_splines,
    "profiles": suite_profiles,
    "slicing": suite_slicing,
    "cpd": suite_cpd,
    "dirac": suite_dirac,
    "transport": suite_transport,
}


def run_suite(name: str, seed: int = 0):
    """Run one named suite; raises KeyError for unknown names."""
    return _SUITE_FNS[name](seed)
