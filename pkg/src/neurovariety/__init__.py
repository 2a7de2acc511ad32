"""Exact dimension, defect, and activation-threshold analysis for polynomial
neural networks, plus linear-dependence tickets of polynomial powers."""

from .errors import (
    CapacityError,
    ComputationError,
    ConditioningError,
    DegreeMismatchError,
    NeurovarietyError,
    ShapeError,
    SingularScalingError,
    UnsupportedFieldError,
)
from .polycore import (
    COMPLEX,
    MERSENNE61,
    RATIONAL,
    HomPoly,
    MonomialIndexer,
    ScalarField,
    UniPoly,
    basis_size,
    evaluate,
    linear_combination,
    monomial_rank,
    monomial_unrank,
    poly_from_json,
    poly_mul,
    poly_pow,
    poly_to_json,
    prime_field,
    restrict_to_line,
)
from .network import (
    Architecture,
    NetworkOutput,
    WeightSet,
    ambient_dim,
    apply_homogeneity,
    derive_seed,
    forward,
    param_count,
    random_weights,
    vectorize,
)
from .diffrank import (
    RankResult,
    TangentPoly,
    generic_rank,
    jacobian,
    rank,
    row_dependency,
    schwartz_zippel_bound,
)
from .geometry import (
    DimensionReport,
    ThresholdReport,
    ZeroWitness,
    dim,
    edim,
    fiber_check,
    homogeneity_check,
    threshold_bound,
    threshold_probe,
    zero_witness,
)
from .tickets import (
    PolyFamily,
    TicketReport,
    builtin_family,
    ns_bound,
    pairwise_nonproportional,
    powers_dependent,
    random_family,
    ticket,
)

__version__ = "0.1.0"
