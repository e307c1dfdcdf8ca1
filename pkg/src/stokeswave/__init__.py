"""Numerical laboratory for gravity-driven Stokes internal waves.

Contour dynamics with the x1-periodic Stokeslet, the graph-form interface
equation and its cubic expansion, three 1D damped transport models, and the
blow-up/decay diagnostics that make the analytical predictions checkable at
desk scale.
"""

from .contour import (
    Contour,
    GraphState,
    arc_chord,
    contour_rhs,
    cubic_terms,
    graph_linear_part,
    graph_rhs,
)
from .diagnostics import (
    LagrangianTracker,
    SlopeTracker,
    WeightedTracker,
    analyticity_strip,
    fit_decay,
    functional_J,
    functional_L,
    riccati_blowup_time,
    riccati_comparison,
    riccati_residual,
    symmetry_defect,
    track_min_slope,
)
from .harness import (
    ExperimentConfig,
    ExperimentRecord,
    run_experiment,
    threshold_bisect,
    verify_suite,
)
from .models import ModelState, energy_balance, model_rhs, transport_speed, triple_norm
from .spectral import (
    Grid1D,
    PeriodicField,
    apply_linear_semigroup,
    derivative,
    hilbert,
    lam,
    lambda_inv,
    product,
)
from .stepper import RunVerdict, StepControl, integrate, step_rk4
from .stokeslet import (
    DensityPatch,
    StripPoint,
    kernel_l1_check,
    reduced_kernels,
    stokeslet_matrix,
    velocity_at,
)

__version__ = "0.1.0"
