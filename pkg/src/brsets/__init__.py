"""Bounded remainder sets and cut-and-project sets."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BoundaryAmbiguity,
    BRSError,
    CardinalityViolation,
    DegenerateCoefficient,
    EmptyColumn,
    InjectivityViolation,
    NonReturning,
    PrecisionError,
    SingularBasis,
    VerificationFailure,
)
from .lattice import LatticeVector, RotationContext, basis_determinant, embed, last, phys  # noqa: E402
from .region import (  # noqa: E402
    RegionGeometry,
    SpecialBasis,
    check_conditions,
    construct,
    exchange_step,
    geometry,
    initial_basis,
    raw_parallelotope,
    torus_membership,
)
from .dynamics import (  # noqa: E402
    hyperplane_points,
    naive_returns,
    recursion_points,
    remainder_trace,
    renormalized_returns,
    verify_rauzy,
)
from .cutproject import Scheme, bd_pairing, generate_points, special_section  # noqa: E402
