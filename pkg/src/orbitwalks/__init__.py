"""Exact random-walk analysis on symmetric graph families via orbit collapse."""

from .errors import (
    ComplexSpectrum,
    DisconnectedFamily,
    InvalidHold,
    NoPolynomialFit,
    NoRationalFit,
    NotReversible,
    OrbitWalksError,
    PeriodicChain,
    PoleAtPoint,
    SingularMatrix,
    SpecError,
    ToleranceExceeded,
    TooSmallN,
    UnknownFamily,
)
from .exactnum import (
    BigRational,
    Poly,
    RatMatrix,
    RationalFunc,
    SqrtRational,
    fit_polynomial,
    fit_rational,
    fit_rational_auto,
    rf_eval,
    solve_linear,
)
from .fispec import (
    ConcreteGraph,
    EdgeClass,
    FiGraphSpec,
    StableOrbitId,
    VertexOrbitSpec,
    builtin_family,
    classify_pair,
    instantiate,
    orbit_size,
    pair_orbit_size,
    registry_names,
    spec_from_json,
    spec_to_json,
    state_size,
    vertex_orbit_size,
)
from .hitting import (
    GreensTable,
    HittingTable,
    MomentTable,
    RoofedOrbitChain,
    build_roofed_chain,
    greens_oracle,
    greens_symbolic,
    hitting_oracle,
    hitting_symbolic,
    moments_oracle,
    moments_symbolic,
    simulate_hitting,
)
from .mixing import (
    CutoffDiagnostic,
    MixingProfile,
    SpectrumReport,
    adjacency_relation,
    augmented_projection_check,
    chain_period,
    cutoff_diagnostic,
    full_tv_profile,
    laplacian_relation,
    mixing_sweep,
    rho_bound_check,
    spectrum_sweep,
    tv_profile,
)
from .walks import (
    RhoProfile,
    StationaryDist,
    TransitionRelation,
    VirtualRelation,
    check_reversible,
    custom_walk,
    lazy_walk,
    rho,
    simple_walk,
    stationary,
    walk_from_selector,
    weighted_walk,
)

__version__ = "0.1.0"
