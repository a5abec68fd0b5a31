"""System stacking: fold quadratic penalties into the least-squares data term.

Both penalties used here are diagonal quadratics in w, so each one is exactly
equivalent to appending rows to the design and zeros to the target:

* range constraint  gamma * sum_i (w_i (g_hat - g_i))^2
  -> rows sqrt(gamma) * diag(g_hat - g), target zeros
* weighted distance  lambda2 * sum_i (d_i w_i)^2
  -> rows sqrt(lambda2) * diag(d), target zeros

For every w, || stacked_target - stacked_design @ w ||^2 equals the original
residual plus the penalty, which is what the tests pin down.
"""

from __future__ import annotations

import numpy as np

from .core import Dictionary, FeatureVector, RangeConstraint, validate_problem
from .distances import DistanceVector
from .errors import DimensionMismatch, NegativeLambda, NonFiniteData


def augment_with_rc(
    y: FeatureVector, dictionary: Dictionary, rc: RangeConstraint
) -> tuple[np.ndarray, np.ndarray]:
    """Stack the range-constraint rows under the dictionary.

    Returns ``(target, design)`` with ``target = [y; 0_n]`` and
    ``design = [X; sqrt(gamma) * diag(g_hat - g)]``.
    """
    validate_problem(y, dictionary)
    if not isinstance(rc, RangeConstraint):
        rc = RangeConstraint(*rc)
    n = dictionary.n_atoms
    delta = rc.current_grade - dictionary.grades
    rows = np.zeros((n, n))
    np.fill_diagonal(rows, np.sqrt(rc.gamma) * delta)
    design = np.vstack([dictionary.atoms, rows])
    target = np.concatenate([y.values, np.zeros(n)])
    return target, design


def augment_with_distance(
    target: np.ndarray,
    design: np.ndarray,
    d: DistanceVector,
    lambda2: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Append sqrt(lambda2) * diag(d) rows (and zero targets) to a system.

    Accepts either a raw problem (y, X) or an already-stacked system, so the
    two augmentations compose in any order.
    """
    lambda2 = float(lambda2)
    if not np.isfinite(lambda2) or lambda2 < 0:
        raise NegativeLambda(f"lambda2 must be finite and >= 0, got {lambda2}")
    design = np.asarray(design, dtype=float)
    target = np.asarray(target, dtype=float).reshape(-1)
    if design.ndim != 2:
        raise DimensionMismatch("design must be a 2-D matrix")
    if target.size != design.shape[0]:
        raise DimensionMismatch(
            f"target has {target.size} rows, design has {design.shape[0]}"
        )
    if not isinstance(d, DistanceVector):
        d = DistanceVector(np.asarray(d, dtype=float))
    if len(d) != design.shape[1]:
        raise DimensionMismatch(
            f"{len(d)} distances for {design.shape[1]} columns"
        )
    if not (np.all(np.isfinite(design)) and np.all(np.isfinite(target))):
        raise NonFiniteData("augmentation input contains NaN or infinity")
    n = design.shape[1]
    rows = np.zeros((n, n))
    np.fill_diagonal(rows, np.sqrt(lambda2) * d.values)
    return (
        np.concatenate([target, np.zeros(n)]),
        np.vstack([design, rows]),
    )
