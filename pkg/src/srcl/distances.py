"""Per-atom distance vectors used as locality priors.

Each constructor returns a :class:`DistanceVector` whose i-th entry measures
how far the test sample sits from dictionary atom i.  Larger values mean a
stronger penalty on that atom's weight.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import Dictionary, FeatureVector, _frozen_array, validate_problem
from .errors import (
    DimensionMismatch,
    NegativeHistogramEntry,
    NonFiniteData,
    NonPositiveSigma,
)


class DistanceKind(enum.Enum):
    Euclidean = "Euclidean"
    GaussianLocality = "GaussianLocality"
    ChiSquare = "ChiSquare"
    Custom = "Custom"


@dataclass(frozen=True)
class DistanceVector:
    """Nonnegative, finite per-atom distances plus the kind that produced them."""

    values: np.ndarray
    kind: DistanceKind = DistanceKind.Custom

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 1 or values.size == 0:
            raise DimensionMismatch("distances must be a 1-D nonempty vector")
        if not np.all(np.isfinite(values)):
            raise NonFiniteData(
                "distances contain NaN or infinity (for GaussianLocality this "
                "usually means sigma is too small for the data scale)"
            )
        if np.any(values < 0):
            raise NegativeHistogramEntry("distances must be >= 0")
        object.__setattr__(self, "values", values)
        if not isinstance(self.kind, DistanceKind):
            object.__setattr__(self, "kind", DistanceKind(self.kind))

    def __len__(self) -> int:
        return self.values.size


def euclidean_distances(y: FeatureVector, dictionary: Dictionary) -> DistanceVector:
    """d_i = ||y - x_i||_2 for every atom x_i."""
    validate_problem(y, dictionary)
    diffs = dictionary.atoms - y.values[:, None]
    return DistanceVector(
        np.linalg.norm(diffs, axis=0), kind=DistanceKind.Euclidean
    )


def gaussian_locality(
    y: FeatureVector, dictionary: Dictionary, sigma: float
) -> DistanceVector:
    """c_i = exp(||y - x_i||^2 / (2 sigma^2)).

    The exponent is positive, so this grows with distance (an increasing
    penalty on far atoms) and equals exactly 1.0 when y coincides with an
    atom.
    """
    if not np.isfinite(sigma) or sigma <= 0:
        raise NonPositiveSigma(f"sigma must be > 0, got {sigma}")
    validate_problem(y, dictionary)
    diffs = dictionary.atoms - y.values[:, None]
    sq = np.sum(diffs * diffs, axis=0)
    with np.errstate(over="ignore"):  # DistanceVector rejects the inf itself
        values = np.exp(sq / (2.0 * sigma * sigma))
    return DistanceVector(values, kind=DistanceKind.GaussianLocality)


def chi_square_distances(
    y: FeatureVector, dictionary: Dictionary
) -> DistanceVector:
    """d_i = 1/2 * sum_k (y_k - x_ik)^2 / (y_k + x_ik), with 0/0 terms = 0.

    Meant for histogram features; every entry of y and of the atoms must be
    nonnegative.
    """
    validate_problem(y, dictionary)
    if np.any(y.values < 0):
        raise NegativeHistogramEntry("test histogram has a negative entry")
    if np.any(dictionary.atoms < 0):
        raise NegativeHistogramEntry("a dictionary atom has a negative entry")
    diffs = dictionary.atoms - y.values[:, None]
    sums = dictionary.atoms + y.values[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(sums > 0, diffs * diffs / sums, 0.0)
    return DistanceVector(0.5 * np.sum(terms, axis=0), kind=DistanceKind.ChiSquare)


def custom_distances(values) -> DistanceVector:
    """Wrap caller-supplied per-atom distances (validated, kind=Custom)."""
    return DistanceVector(np.asarray(values, dtype=float), kind=DistanceKind.Custom)
