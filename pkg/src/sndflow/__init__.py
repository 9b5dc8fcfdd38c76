"""Smoothed negative distance kernels and MMD particle gradient flows.

Builds conditionally positive definite radial kernels by pushing a
B-spline-smoothed absolute value through the Riemann-Liouville fractional
integral, and runs explicit-Euler MMD particle flows with them: dense
summation or sliced fast summation, exact Wasserstein-2 evaluation, and a
CLI harness for the 2D and high-dimensional experiments.
"""

from ._backend import backend_name, have_extension
from .flow import FlowConfig, FlowDiverged, FlowRecord, FlowTrace, dirac_step, flow_step, run_flow
from .kernels import Kernel, cpd_falsify, cpd_quadratic_form, gram, kernel_eval
from .mmd import ParticleCloud, flow_objective, mmd_squared
from .profiles import (
    GaussianProfile,
    NdProfile,
    RadialProfile,
    SndProfile,
    cd_constant,
    flow_ratio,
    riemann_liouville_quadrature,
    snd_profile_closed,
    snd_profile_curvature0,
    snd_profile_d1,
)
from .slicing import (
    OneDimDeriv,
    SliceSet,
    onedsum_sorted,
    random_rotation,
    simplex_directions,
    sliced_grad_sum,
)
from .splines import (
    SplineProfile,
    bspline_center_value,
    bspline_eval,
    huber,
    smoothed_abs,
    smoothed_abs_d1,
    smoothed_abs_d2,
)
from .transport import cost_matrix, w2_1d, w2_exact

__version__ = "0.1.0"
