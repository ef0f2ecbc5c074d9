"""Exact stability checks for polarized toric manifolds from Delzant polytopes."""

__version__ = "0.1.0"

from .chow import (
    ConvexCertificate,
    Destabilizer,
    StabilityReport,
    Triangulation,
    chow_weight,
    decide_chow,
    decide_membership,
    enumerate_triangulations,
    linear_obstruction,
    stability_functional,
)
from .corpus import fixture_names, load_fixture
from .envelope import (
    AffineFunction,
    ConcavePL,
    WeightVector,
    boundary_integral,
    classify,
    concave_envelope,
    evaluate,
    from_affine_min,
    integral_dv,
    lattice_sum,
)
from .errors import (
    DimensionError,
    DomainError,
    InputError,
    InternalError,
    NotDelzantError,
    ResourceError,
    ToricStabError,
)
from .geometry import (
    DelzantPolytope,
    boundary_volume,
    count_lattice_points,
    ehrhart,
    lattice_points,
    moments,
    verify_delzant,
    volume,
)
from .relative import (
    AsymptoticProfile,
    ConvexPL,
    ExtremalAffine,
    decide_relative_chow,
    donaldson_functional,
    extremal_affine,
    k_semistable_for_toric_degenerations,
    p_leading_check,
    q_functional,
    q_leading_check,
    relative_chow_inequality,
    relative_functional,
    relative_k_semistable,
)
from .search import destabilizer_search
