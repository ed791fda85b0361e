"""Transfer-operator toolkit for invariant line fields on Julia sets.

The package evaluates resolvents r = (1 - T)^-1 psi of the weighted
composition operator (Tg)(x) = sum over f(y) = x of g(y)/f'(y)^2, verifies
the exact operator identities behind them numerically, builds grid models
of fundamental sets on the Julia set, and constructs the canonical line
fields sigma = |r|/r together with their integral diagnostics. The one
known family with a genuinely invariant field, the flexible Lattes maps,
doubles as the positive control throughout.

Hot kernels (escape-time grids, quadratic preimage trees, orbit
classification) run through a compiled extension when available and
through a numpy fallback otherwise; `linefield.kernels.BACKEND` names the
active lane and the environment variable LINEFIELD_KERNELS forces one.
"""

from .errors import (
    ConfigError,
    CriticalOrbit,
    CriticalPoint,
    CriticalZ,
    DomainViolation,
    HintRequired,
    IndeterminateAtCommonRoot,
    LinefieldError,
    NearCriticalValue,
    NonConvergence,
    NormalizationImpossible,
    NotLattesLike,
    PoleInRegion,
    ProbeMismatch,
    RadiusInstability,
    SeedNotRepelling,
    SlowDecay,
    UnboundedSupport,
    ZeroOrbitDerivative,
)
from .fields import (
    AnalyticField,
    ConstantField,
    DiagnosticsRow,
    FVector,
    LattesResult,
    LineField,
    SampledField,
    bounded_probe_field,
    divergence_scan,
    f_vector,
    integral_diagnostics,
    invariance_residual,
    lattes_field,
    load_sampled_field,
    pushforward_field,
    save_sampled_field,
    sigma_field,
    sigma_grid,
    sigma_n_field,
)
from .grid import (
    CellMidpoint,
    CellSet,
    FundamentalSetApprox,
    Grid,
    MonteCarlo,
    PartitionResult,
    PolarRefined,
    fundamental_set,
    integrate,
    julia_cells,
    load_cellset,
    pullback_partition,
)
from .kernels import BACKEND
from .poly import Poly, roots
from .ratmap import (
    Mobius,
    NormalizeResult,
    PostcriticalCloud,
    RationalMap,
    SpherePoint,
    load_map,
    normalize,
    parse_map_text,
    postcritical_cloud,
    save_map,
)
from .residues import (
    IDENTITIES,
    ResidueData,
    VerificationReport,
    i_infinity,
    l_coefficients,
    verify_identity,
)
from .transfer import (
    AbelEval,
    CauchyPole,
    Custom,
    InversePower,
    PreimageBranch,
    ResolventControl,
    ResolventEval,
    SphereKernel,
    TestFunction,
    abel_resolvent_quadratic,
    preimages,
    resolvent,
    test_functions,
    transfer_apply,
)

__version__ = "0.1.0"

__all__ = [
    "AbelEval",
    "AnalyticField",
    "BACKEND",
    "CauchyPole",
    "CellMidpoint",
    "CellSet",
    "ConfigError",
    "ConstantField",
    "CriticalOrbit",
    "CriticalPoint",
    "CriticalZ",
    "Custom",
    "DiagnosticsRow",
    "DomainViolation",
    "FVector",
    "FundamentalSetApprox",
    "Grid",
    "HintRequired",
    "IDENTITIES",
    "IndeterminateAtCommonRoot",
    "InversePower",
    "LattesResult",
    "LineField",
    "LinefieldError",
    "Mobius",
    "MonteCarlo",
    "NearCriticalValue",
    "NonConvergence",
    "NormalizationImpossible",
    "NormalizeResult",
    "NotLattesLike",
    "PartitionResult",
    "PolarRefined",
    "PoleInRegion",
    "Poly",
    "PostcriticalCloud",
    "PreimageBranch",
    "ProbeMismatch",
    "RadiusInstability",
    "RationalMap",
    "ResidueData",
    "ResolventControl",
    "ResolventEval",
    "SampledField",
    "SeedNotRepelling",
    "SlowDecay",
    "SphereKernel",
    "SpherePoint",
    "TestFunction",
    "UnboundedSupport",
    "VerificationReport",
    "ZeroOrbitDerivative",
    "abel_resolvent_quadratic",
    "bounded_probe_field",
    "divergence_scan",
    "f_vector",
    "fundamental_set",
    "i_infinity",
    "integral_diagnostics",
    "integrate",
    "invariance_residual",
    "julia_cells",
    "l_coefficients",
    "lattes_field",
    "load_cellset",
    "load_map",
    "load_sampled_field",
    "normalize",
    "parse_map_text",
    "postcritical_cloud",
    "preimages",
    "pullback_partition",
    "pushforward_field",
    "resolvent",
    "roots",
    "save_map",
    "save_sampled_field",
    "sigma_field",
    "sigma_grid",
    "sigma_n_field",
    "test_functions",
    "transfer_apply",
    "verify_identity",
]
