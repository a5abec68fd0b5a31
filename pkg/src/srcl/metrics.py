"""Agreement metrics between true and predicted decimal grades."""

from __future__ import annotations

import numpy as np

from .errors import ConstantVector, EmptyInput, LengthMismatch, NonFiniteData


def _pair(truth, pred):
    t = np.asarray(truth, dtype=float).reshape(-1)
    p = np.asarray(pred, dtype=float).reshape(-1)
    if t.size == 0:
        raise EmptyInput("need at least one sample")
    if t.size != p.size:
        raise LengthMismatch(f"{t.size} truths vs {p.size} predictions")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
        raise NonFiniteData("metric input contains NaN or infinity")
    return t, p


def mean_absolute_error(truth, pred) -> float:
    """Mean of |truth_i - pred_i|."""
    t, p = _pair(truth, pred)
    return float(np.mean(np.abs(t - p)))


def pearson_correlation(truth, pred) -> float:
    """Pearson correlation coefficient; undefined for constant vectors."""
    t, p = _pair(truth, pred)
    td = t - t.mean()
    pd = p - p.mean()
    denom = float(np.sqrt(np.sum(td * td) * np.sum(pd * pd)))
    if denom == 0.0:
        raise ConstantVector("correlation undefined for a zero-variance vector")
    return float(np.sum(td * pd)) / denom


def integral_agreement(truth, pred) -> float:
    """Fraction of samples whose ceiled grades match exactly."""
    t, p = _pair(truth, pred)
    return float(np.mean(np.ceil(p) == np.ceil(t)))


def tolerance_ratio(truth, pred, tol: float, *, ceil_first: bool = True) -> float:
    """Fraction of samples graded within `tol`.

    The reported convention ceils both grades to integral levels first, so
    e.g. tol = 0.5 coincides with exact integral agreement.  Pass
    ``ceil_first=False`` for the raw-decimal companion reading
    |pred - truth| <= tol; the two are never silently interchanged.
    """
    if not np.isfinite(tol) or tol < 0:
        raise ValueError(f"tol must be finite and >= 0, got {tol}")
    t, p = _pair(truth, pred)
    if ceil_first:
        t, p = np.ceil(t), np.ceil(p)
    return float(np.mean(np.abs(p - t) <= tol))
