"""Exact tools for alternating forms with isotropic decompositions.

Forms carry rational coefficients and are manipulated exactly; only the
Moser flattening flow in :mod:`isodecomp.flatten` is floating point.
"""

__version__ = "0.1.0"

from .errors import (
    DegreeError,
    DimensionMismatch,
    FlattenError,
    InternalCheckError,
    IsoDecompError,
    NotCertified,
    PreconditionError,
    SearchExhausted,
)
from .exterior import AlternatingForm, Subspace, contract, multi_contract, pullback, wedge
from .analysis import (
    classify_isotropy,
    is_decomposable,
    is_k_isotropic,
    is_maximal_isotropic,
    is_maximal_isotropic_decomposable,
    k_orthogonal,
    kernel,
    length_bounds,
    support,
)
from .isotropic import (
    canonical_representation,
    check_canonical_relation,
    check_max_dim_relation,
    complement_n_isotropic,
    frak_N_L,
    index_count,
    principal_class_check,
)

__all__ = [
    "AlternatingForm",
    "DegreeError",
    "DimensionMismatch",
    "FlattenError",
    "InternalCheckError",
    "IsoDecompError",
    "NotCertified",
    "PreconditionError",
    "SearchExhausted",
    "Subspace",
    "canonical_representation",
    "check_canonical_relation",
    "check_max_dim_relation",
    "classify_isotropy",
    "complement_n_isotropic",
    "contract",
    "frak_N_L",
    "index_count",
    "is_decomposable",
    "is_k_isotropic",
    "is_maximal_isotropic",
    "is_maximal_isotropic_decomposable",
    "k_orthogonal",
    "kernel",
    "length_bounds",
    "multi_contract",
    "principal_class_check",
    "pullback",
    "support",
    "wedge",
]
