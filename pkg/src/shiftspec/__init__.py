"""Spectra of diagonally perturbed bilateral weighted shift operators.

The operator T acts on the two-sided basis {e_i} as
T e_i = w_i e_{i+n} + d_i e_i.  Membership of a point lambda in the
spectrum is decided by two window-product growth rates evaluated from
finite descriptions of the coefficient sequences; the package scans
complex-plane regions, extracts spectrum boundaries, builds the explicit
inverse series at resolvent points, and cross-checks everything against
truncated-matrix eigenvalue and pseudospectrum oracles.
"""

from .errors import (
    BudgetExceeded,
    ConfigError,
    DenominatorZero,
    SpecError,
    WeightZero,
)
from .inverse import (
    InverseSeries,
    build_backward,
    build_forward,
    construct_resolvent,
    residual_identity,
    telescoping_residual,
)
from .oracle import (
    OracleReport,
    TruncatedMatrix,
    compare,
    eigenvalues,
    sigma_min_grid,
    smallest_singular_value,
    truncate,
)
from .radii import (
    RadiusEstimate,
    RateField,
    backward_rate,
    forward_rate,
    invertibility_consistency,
    rate_field,
)
from .sequences import (
    Constant,
    Explicit,
    Periodic,
    RandomSpan,
    SequenceSpec,
    Step,
    log_modulus_prefix,
    sequence_from_obj,
)
from .shifts import (
    ShiftModel,
    inner_radius_bounds,
    model_from_obj,
    norm_power,
    normalize_phases,
    shift_invertible,
    spectral_radius_bounds,
)
from .spectrum import (
    BoundaryComponent,
    BoundaryPolyline,
    MembershipResult,
    RegionGrid,
    decompose_union,
    default_box,
    extract_boundary,
    membership,
    scan,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryComponent",
    "BoundaryPolyline",
    "BudgetExceeded",
    "ConfigError",
    "Constant",
    "DenominatorZero",
    "Explicit",
    "InverseSeries",
    "MembershipResult",
    "OracleReport",
    "Periodic",
    "RadiusEstimate",
    "RandomSpan",
    "RateField",
    "RegionGrid",
    "SequenceSpec",
    "ShiftModel",
    "SpecError",
    "Step",
    "TruncatedMatrix",
    "WeightZero",
    "backward_rate",
    "build_backward",
    "build_forward",
    "compare",
    "construct_resolvent",
    "decompose_union",
    "default_box",
    "eigenvalues",
    "extract_boundary",
    "forward_rate",
    "inner_radius_bounds",
    "invertibility_consistency",
    "log_modulus_prefix",
    "membership",
    "model_from_obj",
    "norm_power",
    "normalize_phases",
    "rate_field",
    "residual_identity",
    "scan",
    "sequence_from_obj",
    "shift_invertible",
    "sigma_min_grid",
    "smallest_singular_value",
    "spectral_radius_bounds",
    "telescoping_residual",
    "truncate",
]
