"""cslab: a computational laboratory for coherent-state restricted dynamics.

Builds canonical and affine coherent-state families, maps operator
Hamiltonians to their classical symbols on those sheets, measures the
sheet geometry (Fubini-Study metric, curvature), integrates the resulting
classical flow, benchmarks it against full Crank-Nicolson quantum
evolution, and evaluates the reducible-representation quartic oscillator
exactly through a ladder-operator engine.
"""

__version__ = "0.1.0"

from .grids import (
    FULL_LINE,
    HALF_LINE,
    Grid,
    WaveFunction,
    derivative,
    half_line_grid,
    inner_product,
    uniform_grid,
)
from .states import (
    Fiducial,
    PhasePoint,
    affine_coherent,
    affine_family,
    affine_fiducial,
    canonical_coherent,
    canonical_family,
    gaussian_fiducial,
    sampled_fiducial,
    verify_centering,
)
from .symbols import (
    D,
    OperatorExpr,
    SymbolFn,
    X,
    compute_C,
    hbar_limit_check,
    parse_operator,
    polynomial_symbol,
    weak_symbol,
    weak_symbol_affine,
    weak_symbol_canonical,
)
from .geometry import MetricTensor, fs_metric, ray_distance, scalar_curvature
from .dynamics import (
    CanonicalTransform,
    Trajectory,
    integrate,
    model_one_floor,
    model_one_reference,
    restricted_action,
    transform_invariance_check,
)
from .schrodinger import EvolutionSetup, evolve, track_expectations
from .modeltwo import (
    LadderPolynomial,
    RadialDensity,
    ReducibleRep,
    characteristic_exact_gaussian,
    characteristic_radial,
    displaced_expectation,
    gaussian_radial_density,
    h1_expectation,
    h1_matrix_element,
    match_target,
    measure_superposition,
    overlap_reducible,
)
