"""Least-squares refitting on a selected support, and prediction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularGram, SupportTooLarge
from .solver import Dataset, Scaling

#: Gram matrices with reciprocal condition number below this are singular.
GRAM_RCOND_MIN = 1e-12


@dataclass(frozen=True)
class OlsFit:
    """Unpenalized least-squares fit restricted to a support."""

    support: np.ndarray
    coefficients: np.ndarray
    rss: float
    gram_condition_ok: bool


def _checked_support(support, p: int) -> np.ndarray:
    support = np.asarray(support, dtype=np.intp).ravel()
    if support.size:
        if support.min() < 0 or support.max() >= p:
            raise DimensionMismatch("support indices out of range")
        if np.unique(support).size != support.size:
            raise ValueError("support contains duplicate indices")
    return np.sort(support)


def ols_refit(data: Dataset, support) -> OlsFit:
    """Solve the normal equations on the support columns.

    Empty support yields zero coefficients and ``rss = ||y||^2``.  The solve
    goes through the SVD of the support submatrix, which also provides the
    reciprocal condition number of the Gram matrix.

    Raises
    ------
    SupportTooLarge
        If the support has at least as many columns as rows.
    SingularGram
        If the support Gram matrix has reciprocal condition number below
        ``GRAM_RCOND_MIN``.
    """
    support = _checked_support(support, data.p)
    y = data.y
    if support.size == 0:
        return OlsFit(support, np.zeros(0), float(y @ y), True)
    if support.size >= data.n:
        raise SupportTooLarge(
            f"support size {support.size} with only {data.n} rows"
        )
    Xs = data.X[:, support]
    U, s, Vt = np.linalg.svd(Xs, full_matrices=False)
    if s[0] <= 0.0 or (s[-1] / s[0]) ** 2 < GRAM_RCOND_MIN:
        raise SingularGram(
            f"support Gram reciprocal condition below {GRAM_RCOND_MIN:g}"
        )
    coef = Vt.T @ ((U.T @ y) / s)
    resid = y - Xs @ coef
    return OlsFit(support, coef, float(resid @ resid), True)


def predict(X_rows: np.ndarray, fit, scaling: Scaling | None = None) -> np.ndarray:
    """Predict from a fitted support model.

    ``fit`` is anything with ``support`` and ``coefficients`` attributes
    (an :class:`OlsFit` or a path point).  Without ``scaling``, ``X_rows``
    is taken to be on the centered/standardized scale and the prediction is
    ``X_rows[:, support] @ coefficients``.  With ``scaling``, raw rows are
    mapped through the stored affine transform and the response mean is
    added back.
    """
    X_rows = np.asarray(X_rows, dtype=np.float64)
    if X_rows.ndim != 2:
        raise DimensionMismatch("X_rows must be a 2-d array")
    support = np.asarray(fit.support, dtype=np.intp)
    coef = np.asarray(fit.coefficients, dtype=np.float64)
    if support.size != coef.size:
        raise DimensionMismatch("support and coefficients differ in length")
    if scaling is not None and X_rows.shape[1] != scaling.column_means.size:
        raise DimensionMismatch(
            f"expected {scaling.column_means.size} columns, got {X_rows.shape[1]}"
        )
    if support.size and support.max() >= X_rows.shape[1]:
        raise DimensionMismatch("support indices out of range for X_rows")
    if support.size == 0:
        base = np.zeros(X_rows.shape[0])
        return base + scaling.y_mean if scaling is not None else base
    Z = X_rows[:, support]
    if scaling is not None:
        Z = (Z - scaling.column_means[support]) / scaling.column_scales[support]
        return Z @ coef + scaling.y_mean
    return Z @ coef
