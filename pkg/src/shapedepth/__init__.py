"""Tyler shape depth: depth of shape matrices, deepest shapes, tests and MCD trimming."""

__version__ = "0.1.0"

from .depthvalue import DepthValue
from .exceptions import (
    ConvergenceError,
    DegeneracyError,
    DimensionError,
    DomainError,
    ShapeDepthError,
    UnsupportedDimensionError,
)
from .spd import (
    ShapeMatrix,
    expansion_matrix,
    geodesic_distance,
    matrix_exp,
    matrix_invsqrt,
    matrix_log,
    matrix_sqrt,
    normalize_to_shape,
    sign_vector,
    vech,
    vech0,
    wtilde,
)
from .halfspace import (
    DirectionBudget,
    origin_depth,
    origin_depth_approx,
    origin_depth_exact_1d,
    origin_depth_exact_2d,
    tukey_depth,
    tukey_median,
)
from .special import beta_cdf, boxplot_lower_fence
from .samplers import (
    EllipticalModel,
    MixtureSpec,
    make_rng,
    sample_elliptical,
    sample_mixture,
    sample_uniform_sphere,
)
from .tyler import (
    ContourGrid,
    depth_contour_grid,
    elliptical_depth_k2,
    max_depth_value,
    population_contour_grid,
    shape_depth,
    shape_depth_fixed_theta,
    tyler_m_estimator,
)
from .deepest import DeepestShapeOptions, DeepestShapeResult, deepest_shape, deepest_shape_fixed_theta
from .mcd import (
    GammaCurve,
    McdResult,
    gamma_depth_curve,
    mcd_subset,
    principal_direction_mse,
    select_gamma_max_depth,
)
from .inference import (
    Calibration,
    SimulationTable,
    TestOutcome,
    calibrate_critical_values,
    power_simulation,
    robustness_simulation,
    shape_test,
)
from .scan import ScanResult, shape_outlier_scan
from .io import DataSet, read_dataset, write_dataset
