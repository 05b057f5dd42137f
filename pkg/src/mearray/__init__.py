"""Phased arrays of magnetoelectric antennas modelled as oscillating point charges."""

__version__ = "0.1.0"

from .errors import (
    ConfigParseError,
    ConfigValidationError,
    DegenerateGeometryError,
    FarFieldWarning,
    InconsistencyError,
    LowVelocityWarning,
    MeArrayError,
    SolverError,
    ValidationError,
)
from .fieldcore import (
    VACUUM,
    AntennaElement,
    ArrayConfig,
    MediumConstants,
    array_factor,
    far_field_e,
    intensity,
    mean_position,
    transverse_project,
)
from .geometry import (
    IndexedArray,
    PerturbationSpec,
    StentLayoutSpec,
    aperture,
    perturb_layout,
    planar_grid,
    stent_layout,
)
from .phases import (
    FAMILY_A,
    FAMILY_B,
    FAMILY_C,
    OPTIMAL,
    FamilyId,
    PhaseFamily,
    Regime,
    assign_family_phases,
    classify_interference,
    family_phase,
    optimal_phases,
    predicted_partial_af,
)
from .sweeps import (
    GainPattern,
    IntensityMap,
    Peak,
    SweepSpec,
    find_peaks,
    gain_pattern,
    sweep_k1k2,
    verify_deployment,
)
