"""Core value types for reference-based grading.

A grading problem pairs a test feature vector with a dictionary of reference
atoms, each carrying a known decimal grade.  Everything here is a plain,
immutable container with its validity checked at construction; the numeric
work lives in :mod:`srcl.solvers` and :mod:`srcl.grading`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyDictionary,
    NegativeGamma,
    NegativeLambda,
    NonFiniteData,
)

# |w_i| above this counts as a nonzero (support membership).
SUPPORT_EPSILON = 1e-10
# Weight sums with absolute value at or below this are degenerate for grading.
DEGENERATE_EPSILON = 1e-12


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FeatureVector:
    """A single sample's feature vector (finite reals, length >= 1)."""

    values: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 1 or values.size == 0:
            raise DimensionMismatch("feature vector must be 1-D and nonempty")
        if not np.all(np.isfinite(values)):
            raise NonFiniteData("feature vector contains NaN or infinity")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class Dictionary:
    """Reference set: `atoms` is m x n (one column per reference sample) and
    `grades` holds the n known decimal grades, aligned with the columns.

    Grades are plain reals; no particular range is assumed or enforced.
    """

    atoms: np.ndarray
    grades: np.ndarray

    def __post_init__(self):
        atoms = _frozen_array(self.atoms)
        grades = _frozen_array(self.grades)
        if atoms.ndim != 2:
            raise DimensionMismatch("atoms must be a 2-D (m x n) matrix")
        if grades.ndim != 1:
            raise DimensionMismatch("grades must be a 1-D vector")
        if atoms.shape[1] < 2:
            raise EmptyDictionary(
                f"need at least 2 reference atoms, got {atoms.shape[1]}"
            )
        if grades.size != atoms.shape[1]:
            raise DimensionMismatch(
                f"{atoms.shape[1]} atoms but {grades.size} grades"
            )
        if not np.all(np.isfinite(atoms)):
            raise NonFiniteData("dictionary atoms contain NaN or infinity")
        if not np.all(np.isfinite(grades)):
            raise NonFiniteData("dictionary grades contain NaN or infinity")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "grades", grades)

    @property
    def n_features(self) -> int:
        return self.atoms.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[1]


@dataclass(frozen=True)
class SparseCoefficients:
    """Reconstruction weights over the dictionary atoms.

    `support` is derived: indices whose magnitude exceeds ``SUPPORT_EPSILON``.
    """

    weights: np.ndarray

    def __post_init__(self):
        weights = _frozen_array(self.weights)
        if weights.ndim != 1:
            raise DimensionMismatch("weights must be a 1-D vector")
        if not np.all(np.isfinite(weights)):
            raise NonFiniteData("weights contain NaN or infinity")
        object.__setattr__(self, "weights", weights)

    @property
    def support(self) -> np.ndarray:
        """Indices i with |w_i| > SUPPORT_EPSILON, ascending."""
        return np.flatnonzero(np.abs(self.weights) > SUPPORT_EPSILON)

    @property
    def support_size(self) -> int:
        return int(self.support.size)


@dataclass(frozen=True)
class GroupPartition:
    """Disjoint index groups covering {0..n-1}, with a positive weight each.

    The conventional group weight is sqrt(group size); see
    :func:`srcl.grading.grade_bin_partition` for the grade-binned default.
    """

    groups: tuple
    group_weights: np.ndarray

    def __post_init__(self):
        groups = tuple(
            _frozen_array(g, dtype=np.intp) for g in self.groups
        )
        weights = _frozen_array(self.group_weights)
        if len(groups) == 0:
            raise DimensionMismatch("partition needs at least one group")
        if weights.ndim != 1 or weights.size != len(groups):
            raise DimensionMismatch("one weight required per group")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise NegativeLambda("group weights must be positive and finite")
        flat = np.concatenate(groups) if groups else np.array([], dtype=np.intp)
        n = flat.size
        if n == 0 or not np.array_equal(np.sort(flat), np.arange(n)):
            raise DimensionMismatch(
                "groups must be disjoint and cover indices 0..n-1 exactly"
            )
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "group_weights", weights)

    @property
    def n_indices(self) -> int:
        return int(sum(g.size for g in self.groups))

    @property
    def n_groups(self) -> int:
        return len(self.groups)


@dataclass(frozen=True)
class RangeConstraint:
    """Quadratic pull of the weighted atom grades toward `current_grade`.

    gamma = 0 turns the constraint off (the augmented rows become zeros).
    """

    gamma: float
    current_grade: float

    def __post_init__(self):
        gamma = float(self.gamma)
        grade = float(self.current_grade)
        if not np.isfinite(gamma) or gamma < 0:
            raise NegativeGamma(f"gamma must be finite and >= 0, got {gamma}")
        if not np.isfinite(grade):
            raise NonFiniteData("current_grade must be finite")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "current_grade", grade)


@dataclass(frozen=True)
class Hyperparameters:
    """Weights and loop controls shared by the method variants.

    lambda1 is the explicit l1 weight used by LLC and SSGL; the LARS-backed
    variants control sparsity through `lars_steps` (the homotopy step budget,
    which plays the inverse role of an l1 weight).
    """

    lambda1: float = 0.0
    lambda2: float = 0.0
    lambda3: float = 0.0
    gamma: float = 0.0
    lars_steps: int = 100
    max_outer_iterations: int = 10
    convergence_tolerance: float = 1e-4

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise NegativeLambda(f"{name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)
        gamma = float(self.gamma)
        if not np.isfinite(gamma) or gamma < 0:
            raise NegativeGamma(f"gamma must be finite and >= 0, got {gamma}")
        object.__setattr__(self, "gamma", gamma)
        if int(self.lars_steps) < 1:
            raise ValueError("lars_steps must be >= 1")
        object.__setattr__(self, "lars_steps", int(self.lars_steps))
        if int(self.max_outer_iterations) < 1:
            raise ValueError("max_outer_iterations must be >= 1")
        object.__setattr__(
            self, "max_outer_iterations", int(self.max_outer_iterations)
        )
        tol = float(self.convergence_tolerance)
        if not np.isfinite(tol) or tol < 0:
            raise ValueError("convergence_tolerance must be finite and >= 0")
        object.__setattr__(self, "convergence_tolerance", tol)


@dataclass(frozen=True)
class TraceEntry:
    """State after one outer iteration: (t, w_t, grade_t, objective)."""

    iteration: int
    weights: np.ndarray
    grade: float
    objective: float

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen_array(self.weights))


@dataclass(frozen=True)
class SolveTrace:
    """Record of an alternating solve.

    `iterations` holds one entry per outer iteration, indices strictly
    increasing from 1.  For range-constrained variants the initialization
    (the plain variant's weights and the grade derived from them) is kept in
    `initial_weights` / `initial_grade`; `objective` per entry is the full
    variant objective at (w_t, grade_t), with the l1 term omitted for
    LARS-backed variants where it is a step budget rather than a weight.
    """

    iterations: tuple
    converged: bool
    final_grade: float
    initial_weights: np.ndarray | None = None
    initial_grade: float | None = None

    def __post_init__(self):
        entries = tuple(self.iterations)
        if not entries:
            raise DimensionMismatch("a trace needs at least one iteration")
        indices = [e.iteration for e in entries]
        if indices != list(range(1, len(indices) + 1)):
            raise DimensionMismatch(
                "iteration indices must run 1, 2, ... with no gaps"
            )
        if float(self.final_grade) != float(entries[-1].grade):
            raise DimensionMismatch(
                "final_grade must equal the last iteration's grade"
            )
        object.__setattr__(self, "iterations", entries)
        if self.initial_weights is not None:
            object.__setattr__(
                self, "initial_weights", _frozen_array(self.initial_weights)
            )


def validate_problem(y: FeatureVector, dictionary: Dictionary) -> None:
    """Check that a test vector and a dictionary form a solvable instance.

    Raises DimensionMismatch / EmptyDictionary / NonFiniteData. The type
    constructors already enforce their own invariants; this re-checks them
    and adds the cross-object dimension test.
    """
    if not isinstance(y, FeatureVector):
        y = FeatureVector(np.asarray(y))
    if not isinstance(dictionary, Dictionary):
        raise DimensionMismatch("expected a Dictionary instance")
    if dictionary.n_atoms < 2:
        raise EmptyDictionary("need at least 2 reference atoms")
    if not np.all(np.isfinite(y.values)):
        raise NonFiniteData("test vector contains NaN or infinity")
    if not (
        np.all(np.isfinite(dictionary.atoms))
        and np.all(np.isfinite(dictionary.grades))
    ):
        raise NonFiniteData("dictionary contains NaN or infinity")
    if len(y) != dictionary.n_features:
        raise DimensionMismatch(
            f"test vector has {len(y)} features, atoms have "
            f"{dictionary.n_features}"
        )
