"""Reference-based decimal grading.

A test sample is reconstructed as a weighted combination of reference atoms
with known grades; the grade estimate is read off the weights.  Seven method
variants share this skeleton and differ only in the regularizer:

========  ==================================================================
SC        l1 (LARS step budget)
LLC       locality-weighted ridge (closed form, dense weights)
SDC       l1 + lambda2 ||d * w||^2   (distance rows folded into the design)
SSGL      SDC + lambda3 * sum_g psi_g ||w_g||_2 over grade-bin groups
*_RC      any of SC/SDC/SSGL plus gamma ||w * (g_hat - g)||^2, solved by
          alternating between w and the scalar grade estimate g_hat
========  ==================================================================

The range-constrained (RC) loop starts from the plain variant's grade, then
alternates: stack the RC rows for the current grade, re-solve for w, update
the grade with the closed-form weighted mean g_hat = sum w_i^2 g_i / sum
w_i^2 (a convex combination, so it can never leave [min g, max g]).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .augment import augment_with_distance, augment_with_rc
from .core import (
    DEGENERATE_EPSILON,
    Dictionary,
    FeatureVector,
    GroupPartition,
    Hyperparameters,
    RangeConstraint,
    SolveTrace,
    SparseCoefficients,
    TraceEntry,
    validate_problem,
)
from .distances import DistanceVector
from .errors import DegenerateWeights, DimensionMismatch
from .solvers import lars_l1, llc_closed_form, sparse_group_lasso


class MethodKind(enum.Enum):
    SC = "sc"
    LLC = "llc"
    SDC = "sdc"
    SSGL = "ssgl"
    SC_RC = "sc+rc"
    SDC_RC = "sdc+rc"
    SSGL_RC = "ssgl+rc"

    @property
    def uses_range_constraint(self) -> bool:
        return self.value.endswith("+rc")

    @property
    def base_kind(self) -> "MethodKind":
        """The plain variant an RC variant is initialized from."""
        return MethodKind(self.value.removesuffix("+rc"))

    @property
    def requires_distances(self) -> bool:
        return self.base_kind in (MethodKind.LLC, MethodKind.SDC, MethodKind.SSGL)

    @property
    def requires_partition(self) -> bool:
        return self.base_kind is MethodKind.SSGL


VARIANT_NAMES = tuple(k.value for k in MethodKind)


@dataclass(frozen=True)
class MethodVariant:
    """A method kind bundled with its hyperparameters and side inputs.

    `distances` carries the locality weights c for LLC and the per-atom
    distances d for SDC/SSGL; `partition` carries the SSGL group structure.
    """

    kind: MethodKind
    hyper: Hyperparameters
    distances: DistanceVector | None = None
    partition: GroupPartition | None = None

    def __post_init__(self):
        if not isinstance(self.kind, MethodKind):
            object.__setattr__(self, "kind", MethodKind(self.kind))
        if self.kind.requires_distances and self.distances is None:
            raise ValueError(f"{self.kind.value} requires a DistanceVector")
        if self.kind.requires_partition and self.partition is None:
            raise ValueError(f"{self.kind.value} requires a GroupPartition")


def default_hyperparameters(
    kind: MethodKind, task: str = "cdr"
) -> Hyperparameters:
    """Published per-task defaults for each variant.

    Task ``"cdr"`` targets decimal grades around [0.2, 0.9] with
    image-intensity features; ``"cataract"`` targets grades in [0.3, 5.0]
    with bag-of-words histogram features.
    """
    kind = MethodKind(kind)
    if task not in ("cdr", "cataract"):
        raise ValueError(f"unknown task {task!r} (expected 'cdr' or 'cataract')")
    iters = {MethodKind.SC_RC: 10, MethodKind.SDC_RC: 8, MethodKind.SSGL_RC: 5}
    base = kind.base_kind
    kw: dict = {"max_outer_iterations": iters.get(kind, 10)}
    if base is MethodKind.SDC:
        kw["lambda2"] = 1e4 if task == "cdr" else 2.0
    elif base is MethodKind.SSGL:
        kw["lambda1"] = 0.01 if task == "cdr" else 0.035
        kw["lambda2"] = 10.0
        kw["lambda3"] = 0.05
    elif base is MethodKind.LLC:
        kw["lambda1"] = 0.01
    if kind.uses_range_constraint:
        if task == "cdr":
            kw["gamma"] = 100.0 if base is MethodKind.SSGL else 200.0
        else:
            kw["gamma"] = 100.0
    return Hyperparameters(**kw)


def grade_bin_partition(grades, n_bins: int = 8) -> GroupPartition:
    """Partition atom indices into equal-width grade bins.

    Empty bins are dropped (every group weight must be positive); group
    weights are sqrt(group size).
    """
    grades = np.asarray(grades, dtype=float)
    if grades.ndim != 1 or grades.size == 0:
        raise DimensionMismatch("grades must be a nonempty 1-D vector")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    lo = float(np.min(grades))
    hi = float(np.max(grades))
    if hi == lo:
        groups = [np.arange(grades.size)]
    else:
        edges = np.linspace(lo, hi, n_bins + 1)
        which = np.clip(
            np.searchsorted(edges, grades, side="right") - 1, 0, n_bins - 1
        )
        groups = [
            np.flatnonzero(which == k)
            for k in range(n_bins)
            if np.any(which == k)
        ]
    weights = np.sqrt([float(g.size) for g in groups])
    return GroupPartition(tuple(groups), weights)


def _weights_of(w) -> np.ndarray:
    if isinstance(w, SparseCoefficients):
        return w.weights
    return np.asarray(w, dtype=float)


def baseline_grade(weights, grades) -> float:
    """Grade estimate g_hat = (w . g) / sum(w): scale-invariant in w."""
    w = _weights_of(weights)
    g = np.asarray(grades, dtype=float)
    if w.shape != g.shape:
        raise DimensionMismatch(f"{w.size} weights for {g.size} grades")
    total = float(np.sum(w))
    if abs(total) <= DEGENERATE_EPSILON:
        raise DegenerateWeights("weight sum is (near) zero; no grade defined")
    return float(w @ g) / total


def rc_grade_update(weights, grades) -> float:
    """Closed-form grade g_hat = sum(w_i^2 g_i) / sum(w_i^2).

    A convex combination of the atom grades, so the result always lies in
    [min g, max g]; a final clamp removes any last-ulp float spill.
    """
    w = _weights_of(weights)
    g = np.asarray(grades, dtype=float)
    if w.shape != g.shape:
        raise DimensionMismatch(f"{w.size} weights for {g.size} grades")
    sq = w * w
    total = float(np.sum(sq))
    if total <= DEGENERATE_EPSILON:
        raise DegenerateWeights("all weights are (near) zero; no grade defined")
    value = float(sq @ g) / total
    return float(min(max(value, float(np.min(g))), float(np.max(g))))


class SolveResult(NamedTuple):
    coefficients: SparseCoefficients
    grade: float
    trace: SolveTrace


def _variant_objective(
    kind: MethodKind,
    y: np.ndarray,
    atoms: np.ndarray,
    grades: np.ndarray,
    w: np.ndarray,
    variant: MethodVariant,
    grade: float,
) -> float:
    """Full variant objective at (w, grade); the l1 term is included only for
    SSGL-family variants, where lambda1 is an explicit weight."""
    hyper = variant.hyper
    r = y - atoms @ w
    obj = float(r @ r)
    base = kind.base_kind
    if base is MethodKind.LLC:
        cw = variant.distances.values * w
        obj += hyper.lambda1 * float(cw @ cw)
    if base in (MethodKind.SDC, MethodKind.SSGL):
        dw = variant.distances.values * w
        obj += hyper.lambda2 * float(dw @ dw)
    if base is MethodKind.SSGL:
        obj += hyper.lambda1 * float(np.sum(np.abs(w)))
        obj += hyper.lambda3 * sum(
            float(p * np.linalg.norm(w[g]))
            for g, p in zip(
                variant.partition.groups, variant.partition.group_weights
            )
        )
    if kind.uses_range_constraint:
        pull = w * (grade - grades)
        obj += hyper.gamma * float(pull @ pull)
    return obj


def _check_side_inputs(dictionary: Dictionary, variant: MethodVariant) -> None:
    if variant.distances is not None and len(variant.distances) != dictionary.n_atoms:
        raise DimensionMismatch(
            f"{len(variant.distances)} distances for {dictionary.n_atoms} atoms"
        )
    if (
        variant.partition is not None
        and variant.partition.n_indices != dictionary.n_atoms
    ):
        raise DimensionMismatch(
            f"partition covers {variant.partition.n_indices} indices for "
            f"{dictionary.n_atoms} atoms"
        )


def _body_solve(
    base: MethodKind,
    target: np.ndarray,
    design: np.ndarray,
    y: FeatureVector,
    dictionary: Dictionary,
    variant: MethodVariant,
    warm_start: np.ndarray | None = None,
) -> tuple[np.ndarray, bool]:
    """Run the plain variant's inner solver on an (optionally stacked) system.

    Returns (weights, inner_ok).  The SSGL objective here carries no 1/2 on
    the data term, while the prox solver's does, so its lambdas are halved on
    the way in (same minimizer, published lambda values stay meaningful).
    `warm_start` seeds the proximal solver; the path and closed-form solvers
    have no use for it and ignore it.
    """
    hyper = variant.hyper
    if base is MethodKind.SC:
        res = lars_l1(design, target, hyper.lars_steps)
        return res.coefficients.weights, not res.breakdown
    if base is MethodKind.LLC:
        coef = llc_closed_form(y, dictionary, variant.distances, hyper.lambda1)
        return coef.weights, True
    if base is MethodKind.SDC:
        target, design = augment_with_distance(
            target, design, variant.distances, hyper.lambda2
        )
        res = lars_l1(design, target, hyper.lars_steps)
        return res.coefficients.weights, not res.breakdown
    if base is MethodKind.SSGL:
        target, design = augment_with_distance(
            target, design, variant.distances, hyper.lambda2
        )
        res = sparse_group_lasso(
            design,
            target,
            hyper.lambda1 / 2.0,
            hyper.lambda3 / 2.0,
            variant.partition,
            x0=warm_start,
        )
        return res.coefficients.weights, res.converged
    raise ValueError(f"no inner solver for {base}")


def solve_variant(
    y: FeatureVector,
    dictionary: Dictionary,
    variant: MethodVariant,
    *,
    stop_on_tolerance: bool = False,
) -> SolveResult:
    """Grade one test sample with the requested method variant.

    Parameters
    ----------
    y, dictionary
        The test feature vector and the reference set.
    variant
        Method kind, hyperparameters and side inputs (distances, partition).
    stop_on_tolerance
        Range-constrained variants run exactly ``max_outer_iterations``
        alternating steps by default.  Set True to stop early once
        ``|g_t - g_{t-1}| < convergence_tolerance``.

    Returns
    -------
    SolveResult
        ``(coefficients, grade, trace)``.  For plain variants the grade is
        the scale-invariant weighted mean of the atom grades; for RC variants
        it is the closed-form squared-weight mean after the final iteration.
        If an RC iteration produces all-zero weights the loop halts, keeps
        the last valid grade and weights, and flags the trace non-converged.

    Raises
    ------
    DegenerateWeights
        If a plain variant's weights sum to (near) zero, no grade is defined.
    """
    validate_problem(y, dictionary)
    _check_side_inputs(dictionary, variant)
    kind = variant.kind
    hyper = variant.hyper
    grades = dictionary.grades

    if not kind.uses_range_constraint:
        w, inner_ok = _body_solve(
            kind, y.values, dictionary.atoms, y, dictionary, variant
        )
        grade = baseline_grade(w, grades)
        obj = _variant_objective(
            kind, y.values, dictionary.atoms, grades, w, variant, grade
        )
        trace = SolveTrace(
            (TraceEntry(1, w, grade, obj),), inner_ok, grade
        )
        return SolveResult(SparseCoefficients(w), grade, trace)

    base = kind.base_kind
    plain = MethodVariant(base, hyper, variant.distances, variant.partition)
    w_init, _ = _body_solve(
        base, y.values, dictionary.atoms, y, dictionary, plain
    )
    grade_prev = baseline_grade(w_init, grades)

    entries: list[TraceEntry] = []
    w_valid = w_init
    degenerate = False
    delta = np.inf
    for t in range(1, hyper.max_outer_iterations + 1):
        rc = RangeConstraint(hyper.gamma, grade_prev)
        target, design = augment_with_rc(y, dictionary, rc)
        w_t, _ = _body_solve(
            base, target, design, y, dictionary, variant,
            warm_start=w_valid,
        )
        if float(np.sum(w_t * w_t)) <= DEGENERATE_EPSILON:
            # No usable weights: keep the last valid grade and stop.
            obj = _variant_objective(
                kind, y.values, dictionary.atoms, grades, w_t, variant,
                grade_prev,
            )
            entries.append(TraceEntry(t, w_t, grade_prev, obj))
            degenerate = True
            break
        grade_t = rc_grade_update(w_t, grades)
        obj = _variant_objective(
            kind, y.values, dictionary.atoms, grades, w_t, variant, grade_t
        )
        entries.append(TraceEntry(t, w_t, grade_t, obj))
        delta = abs(grade_t - grade_prev)
        grade_prev = grade_t
        w_valid = w_t
        if stop_on_tolerance and delta < hyper.convergence_tolerance:
            break

    converged = (not degenerate) and delta < hyper.convergence_tolerance
    trace = SolveTrace(
        tuple(entries),
        converged,
        grade_prev,
        initial_weights=w_init,
        initial_grade=baseline_grade(w_init, grades),
    )
    return SolveResult(SparseCoefficients(w_valid), grade_prev, trace)
