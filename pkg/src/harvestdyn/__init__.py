"""Ratio-dependent predator-prey harvesting: simulation and analysis toolkit.

Subsystems
----------
model
    Parameters, the original and ratio-transformed vector fields, and
    their analytic Jacobians.
equilibria
    Closed-form equilibria with machine-checkable existence predicates.
stability
    Eigenvalue and Routh-Hurwitz classification, the Lyapunov region test
    and persistence bounds.
bifurcation
    Hopf detection in the harvest fraction and the cost/death-rate region
    map.
dynamics
    Adaptive integration, attractor classification, basin sampling and
    invariant monitors.
optimal
    Steady costates and the optimal harvest fraction.
cli
    Scenario-driven command-line front end.
"""

__version__ = "0.1.0"

from .model import (
    ModelParams,
    SysState,
    BlowupState,
    PartialBlowupState,
    SingularInputError,
    vector_field,
    blowup_field,
    partial_blowup_field,
    jacobian,
    near_singular,
)
from .equilibria import (
    EquilibriumReport,
    ConditionCheck,
    boundary_equilibria,
    interior_equilibrium,
    blowup_equilibria,
    partial_blowup_equilibria,
    verify_equilibrium,
)
from .stability import (
    StabilityVerdict,
    MissingEquilibriumError,
    eigenvalues_3x3,
    routh_hurwitz_cubic,
    classify_origin,
    classify_E1,
    classify_E2,
    classify_E3,
    lyapunov_region_check,
    persistence_check,
)
from .bifurcation import (
    HopfResult,
    RegionLabel,
    hopf_m_star_analytic,
    hopf_scan,
    region_classify,
    region_grid,
    overlay_lines,
)
from .dynamics import (
    Trajectory,
    AttractorVerdict,
    IntegrationError,
    integrate,
    classify_attractor,
    basin_sample,
    boundedness_monitor,
    persistence_witness,
)
from .optimal import (
    AdjointSolution,
    OptimalHarvest,
    DegenerateControlError,
    BracketError,
    adjoint_coefficients,
    steady_adjoints,
    singular_control_residual,
    optimal_m,
)

__all__ = [name for name in dir() if not name.startswith("_")]
