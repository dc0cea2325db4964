"""Numerics for slice regular quaternionic functions on balls.

Truncated power series with quaternion coefficients, the regular (star)
product with conjugation, symmetrization and reciprocal, Moebius
transformations of the unit ball, Schwarz-Pick type inequality harnesses,
Landau injectivity and covering certification, and a constructive
Bloch-Landau search.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateSphereError,
    DomainError,
    HypothesisError,
    ManifestError,
    NonInvertibleError,
    PoleError,
    RadiusMismatchError,
    RealPointError,
    RemainderError,
    SliceRegularError,
    ZeroDivisorError,
)
from .quaternion import (
    DEFAULT_EPS,
    I,
    J,
    K,
    ONE,
    Quaternion,
    SphereRef,
    ZERO,
    as_quaternion,
    imaginary_unit,
    inverse,
    mul,
    same_sphere,
    slice_decompose,
)
from .series import (
    DEFAULT_MAX_ORDER,
    SliceSeries,
    conjugate,
    constant,
    cullen_derivative,
    identity,
    polynomial,
    reciprocal,
    spherical_derivative_at,
    star_divide_linear,
    star_eval_formula,
    star_mul,
    symmetrize,
)
from .moebius import (
    MoebiusSpec,
    classical_eval,
    moebius_bound,
    moebius_inverse_identity_check,
    regular_moebius_series,
)
from .geometry import (
    MultiplicityReport,
    RealDifferential,
    find_zero_on_sphere,
    is_singular,
    quotient_eval,
    real_differential,
    recenter_slice,
    t_map,
)
from .landau import (
    BlochCertificate,
    CoverageReport,
    GridParams,
    InjectivityReport,
    bloch_landau,
    extremal_phi,
    generate_self_map,
    landau_certify,
    landau_rho,
    landaubd_apply,
    verify_covering,
)
from .harness import (
    CheckReport,
    build_schwarz_numerator,
    check_globaltolocal,
    check_minmax,
    check_schwarz_pick,
    check_variant_noninjective,
    default_manifest,
    mutation_canary_manifest,
    run_manifest,
)
