"""Numerical toolkit for U(p,q), its Iwasawa subgroup, special representations and current groups."""

from .errors import (
    ConfigInvalid,
    DecompositionFailed,
    DimensionMismatch,
    InvalidInput,
    NonFinite,
    NotHermitian,
    NotPositiveDefinite,
    NotSkewHermitian,
    QuadratureUnstable,
    SignatureMismatch,
    SuiteFailed,
    UPQError,
    VariantMismatch,
    WindowTooLarge,
)
from .group import GroupElement, Signature, is_member, lie_algebra_dimension, sigma
from .iwasawa import HeisenbergElement, IwasawaElement, embed, heis_mul, iwasawa_decompose, p_mul
from .measures import Estimate, Window, power_law_measure, right_haar_measure

__version__ = "0.1.0"

__all__ = [
    "ConfigInvalid",
    "DecompositionFailed",
    "DimensionMismatch",
    "Estimate",
    "GroupElement",
    "HeisenbergElement",
    "InvalidInput",
    "IwasawaElement",
    "NonFinite",
    "NotHermitian",
    "NotPositiveDefinite",
    "NotSkewHermitian",
    "QuadratureUnstable",
    "Signature",
    "SignatureMismatch",
    "SuiteFailed",
    "UPQError",
    "VariantMismatch",
    "Window",
    "WindowTooLarge",
    "embed",
    "heis_mul",
    "is_member",
    "iwasawa_decompose",
    "lie_algebra_dimension",
    "p_mul",
    "power_law_measure",
    "right_haar_measure",
    "sigma",
]
