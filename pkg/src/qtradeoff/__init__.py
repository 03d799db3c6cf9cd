"""Local information-disturbance trade-off of a single measurement outcome."""

from .correlation import (
    PRESETS,
    GammaBoundary,
    RegionArc,
    RejectionBudgetError,
    coefficient_range_curves,
    gamma_boundary,
    normalized_changes,
    pearson_check,
    sample_admissible,
    scatter_dataset,
    sigma_ellipse,
)
from .geometry import AngleSet, DirectionSet, angle_set, direction_set, gradients
from .improver import TrajectoryRecord, improvability, improve, improvement_step, law_of_decrease_check
from .measurement import (
    DegeneracyProfile,
    InvalidMeasurementError,
    Measurement,
    canonicalize,
    degeneracy_profile,
    family_m,
    family_p,
    metrics,
    outcome_probability,
    parse_measurement,
)

__version__ = "0.1.0"
