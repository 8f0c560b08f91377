"""Convex functions, subgradients and the Alexandrov Monge-Ampere measure."""

from .functions import (
    FIXTURES,
    BorelBox,
    ClosedFormFn,
    ConvexFn,
    DomainError,
    GridConvexFn,
    Piece,
    SubgradientSet,
    abs_value,
    eguchi_hanson,
    euclidean_norm,
    fixture,
    half_norm_sq,
    l1_kink,
    max_affine,
    quadratic_plus_one,
    radial_kink,
    radial_profile,
)
from .measure import QuadratureDomainError, gradient_image, ma_measure, subgradient, weighted_ma_identity_check

__all__ = [
    "FIXTURES",
    "BorelBox",
    "ClosedFormFn",
    "ConvexFn",
    "DomainError",
    "GridConvexFn",
    "Piece",
    "QuadratureDomainError",
    "SubgradientSet",
    "abs_value",
    "eguchi_hanson",
    "euclidean_norm",
    "fixture",
    "gradient_image",
    "half_norm_sq",
    "l1_kink",
    "ma_measure",
    "max_affine",
    "quadratic_plus_one",
    "radial_kink",
    "radial_profile",
    "subgradient",
    "weighted_ma_identity_check",
]
