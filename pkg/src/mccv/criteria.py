"""Per-split selection criteria and full-data information criteria.

Four cross-validation criteria are evaluated per (split, penalty level):

* ``gamma0`` - validation mean squared error of the penalized fit.
* ``gamma1`` - gamma0 minus the exact shrinkage-bias term
  ``(lam^2 n_c^2 / n_v) * ||M||^2`` with
  ``M = X_v[:, S] (X_c[:, S]' X_c[:, S])^{-1} sign(b_S)``; for a converged
  Lasso point this equals the squared distance between the penalized and
  least-squares predictions on the validation rows, divided by n_v.
* ``gamma2`` - gamma0 minus ``lam^2 * d``, the independence approximation
  of the same term (no matrix work).
* ``gamma3`` - validation mean squared error of the least-squares refit on
  the construction support (the criterion used for general penalties).

AIC/BIC/EBIC are computed from the full-data path with the support size as
degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, SingularGram, SupportTooLarge
from .refit import GRAM_RCOND_MIN
from .solver import Dataset, PathPoint, SolutionPath

CV_CRITERIA = ("gamma0", "gamma1", "gamma2", "gamma3")
INFO_CRITERIA = ("aic", "bic", "ebic")


def gamma0(y_s: np.ndarray, y_hat: np.ndarray) -> float:
    """Mean squared prediction error on the validation rows."""
    y_s = np.asarray(y_s, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y_s.shape != y_hat.shape or y_s.ndim != 1 or y_s.size < 1:
        raise LengthMismatch("validation response and prediction must match")
    diff = y_s - y_hat
    return float(diff @ diff) / y_s.size


class _SupportFactor:
    """SVD-backed quantities for one construction support.

    Factorizes ``X_c[:, S]`` once and exposes everything the exact criteria
    need on a given validation block: the least-squares prediction and, per
    sign vector, the norm of ``M``.
    """

    def __init__(self, Xc_S: np.ndarray, y_c: np.ndarray, Xv_S: np.ndarray):
        U, s, Vt = np.linalg.svd(Xc_S, full_matrices=False)
        self.ok = s[0] > 0.0 and (s[-1] / s[0]) ** 2 >= GRAM_RCOND_MIN
        if not self.ok:
            return
        self.s2 = s * s
        self.Vt = Vt
        # Least-squares coefficients and their validation prediction.
        self.beta_tilde = Vt.T @ ((U.T @ y_c) / s)
        self.lse_prediction = Xv_S @ self.beta_tilde
        # Xv_S V, so that M = (Xv_S V) diag(1/s^2) (V' signs).
        self._XvV = Xv_S @ Vt.T

    def m_norm_sq(self, signs: np.ndarray) -> float:
        M = self._XvV @ ((self.Vt @ signs) / self.s2)
        return float(M @ M)


def shrinkage_correction(
    construction: Dataset,
    validation: Dataset,
    point: PathPoint,
    lam: float,
) -> float:
    """Exact shrinkage-bias term subtracted by ``gamma1``.

    Zero for an empty support (the sign vector is empty, the limit of the
    formula).

    Raises
    ------
    SupportTooLarge
        If the support is not smaller than the construction size.
    SingularGram
        If the construction Gram on the support is numerically singular.
    """
    S = point.support
    if S.size == 0:
        return 0.0
    n_c, n_v = construction.n, validation.n
    if S.size >= n_c:
        raise SupportTooLarge(f"support size {S.size} with n_c={n_c}")
    factor = _SupportFactor(
        construction.X[:, S], construction.y, validation.X[:, S]
    )
    if not factor.ok:
        raise SingularGram("construction Gram singular on support")
    return lam * lam * n_c * n_c / n_v * factor.m_norm_sq(point.signs)


def gamma1(
    construction: Dataset,
    validation: Dataset,
    point: PathPoint,
    lam: float,
) -> float:
    """Validation MSE minus the exact shrinkage-bias term."""
    S = point.support
    y_hat = validation.X[:, S] @ point.coefficients if S.size else np.zeros(validation.n)
    return gamma0(validation.y, y_hat) - shrinkage_correction(
        construction, validation, point, lam
    )


def gamma2(mse: float, lam: float, d: int) -> float:
    """Validation MSE minus ``lam^2 * d``."""
    return mse - lam * lam * d


def gamma3(y_s: np.ndarray, y_tilde: np.ndarray) -> float:
    """Validation MSE of the least-squares refit prediction."""
    return gamma0(y_s, y_tilde)


def lse_validation_prediction(
    construction: Dataset, validation: Dataset, support: np.ndarray
) -> np.ndarray:
    """Refit on the construction support, predict on the validation rows."""
    support = np.asarray(support, dtype=np.intp)
    if support.size == 0:
        return np.zeros(validation.n)
    if support.size >= construction.n:
        raise SupportTooLarge(
            f"support size {support.size} with n_c={construction.n}"
        )
    factor = _SupportFactor(
        construction.X[:, support], construction.y, validation.X[:, support]
    )
    if not factor.ok:
        raise SingularGram("construction Gram singular on support")
    return factor.lse_prediction


def info_criterion(
    data: Dataset,
    path: SolutionPath,
    kind: str,
    ebic_gamma: float = 1.0,
) -> np.ndarray:
    """AIC/BIC/EBIC along a full-data path, one value per grid level.

    Uses the penalized fit's residual sum of squares and the support size as
    degrees of freedom:

        AIC  = n log(RSS/n) + 2 d
        BIC  = n log(RSS/n) + d log n
        EBIC = BIC + 2 gamma d log p

    A degenerate RSS of zero maps to ``-inf``.
    """
    if kind not in INFO_CRITERIA:
        raise ValueError(f"unknown information criterion {kind!r}")
    n, p = data.n, data.p
    out = np.empty(len(path))
    for i, point in enumerate(path):
        resid = data.y - data.X[:, point.support] @ point.coefficients
        rss = float(resid @ resid)
        d = point.d
        if rss <= 0.0:
            out[i] = -np.inf
            continue
        value = n * math.log(rss / n)
        if kind == "aic":
            value += 2.0 * d
        else:
            value += d * math.log(n)
            if kind == "ebic":
                value += 2.0 * ebic_gamma * d * math.log(p)
        out[i] = value
    return out


@dataclass
class SplitEvaluation:
    """Everything one (split, penalty level) cell contributes.

    ``correction_exact`` and ``lse_mse`` are NaN when the exact quantities
    were not computed (not requested, oversized support, or singular Gram);
    ``gram_ok`` records the Gram status when they were attempted.  ``valid``
    is the base requirement shared by all criteria: support smaller than the
    construction size.
    """

    lam: float
    mse: float
    d: int
    correction_exact: float
    lse_mse: float
    valid: bool
    gram_ok: bool
    converged: bool


def evaluate_split_path(
    construction: Dataset,
    validation: Dataset,
    path: SolutionPath,
    exact: bool,
) -> list[SplitEvaluation]:
    """Evaluate one split over an entire construction-set path.

    With ``exact=True`` the shrinkage-bias term and the least-squares
    validation error are computed per cell, caching one factorization per
    distinct support along the path.
    """
    Xv, y_v = validation.X, validation.y
    n_c, n_v = construction.n, validation.n
    empty_mse = float(y_v @ y_v) / n_v
    factors: dict[bytes, _SupportFactor | None] = {}
    corrections: dict[bytes, float] = {}
    out = []
    for point in path:
        S = point.support
        d = point.d
        if d:
            resid = y_v - Xv[:, S] @ point.coefficients
            mse = float(resid @ resid) / n_v
        else:
            mse = empty_mse
        valid = d < n_c
        correction = math.nan
        lse_mse = math.nan
        gram_ok = False
        if d == 0:
            correction = 0.0
            lse_mse = empty_mse
            gram_ok = True
        elif exact and valid:
            skey = S.tobytes()
            factor = factors.get(skey)
            if skey not in factors:
                factor = _SupportFactor(construction.X[:, S], construction.y, Xv[:, S])
                factors[skey] = factor if factor.ok else None
            if factor is not None and factor.ok:
                gram_ok = True
                resid = y_v - factor.lse_prediction
                lse_mse = float(resid @ resid) / n_v
                ckey = skey + point.signs.tobytes()
                m_sq = corrections.get(ckey)
                if m_sq is None:
                    m_sq = factor.m_norm_sq(point.signs)
                    corrections[ckey] = m_sq
                correction = point.lam ** 2 * n_c * n_c / n_v * m_sq
        out.append(
            SplitEvaluation(
                lam=point.lam,
                mse=mse,
                d=d,
                correction_exact=correction,
                lse_mse=lse_mse,
                valid=valid,
                gram_ok=gram_ok,
                converged=point.converged,
            )
        )
    return out


@dataclass
class CriterionSurface:
    """b x L criterion values with a validity mask and column averages.

    ``averaged[l]`` is the mean over valid rows of column ``l``; columns with
    fewer than ``ceil(b/2)`` valid rows are disqualified and their average is
    NaN.
    """

    kind: str
    values: np.ndarray
    valid: np.ndarray
    averaged: np.ndarray
    disqualified: np.ndarray

    def to_csv(self, fp) -> None:
        """Rows are splits, columns are penalty levels, blank means invalid."""
        b, L = self.values.shape
        for i in range(b):
            cells = (
                repr(float(self.values[i, l])) if self.valid[i, l] else ""
                for l in range(L)
            )
            fp.write(",".join(cells) + "\n")


def _cell_value(ev: SplitEvaluation, kind: str) -> tuple[float, bool]:
    if kind == "gamma0":
        return ev.mse, ev.valid
    if kind == "gamma2":
        return gamma2(ev.mse, ev.lam, ev.d), ev.valid
    if kind == "gamma1":
        value = ev.mse - ev.correction_exact
        return value, ev.valid and ev.gram_ok and ev.converged
    if kind == "gamma3":
        return ev.lse_mse, ev.valid and ev.gram_ok
    raise ValueError(f"unknown criterion {kind!r}")


def criterion_surface(
    evaluations: list[list[SplitEvaluation]], kind: str
) -> CriterionSurface:
    """Assemble the surface for one criterion from per-split evaluations."""
    if kind not in CV_CRITERIA:
        raise ValueError(f"unknown criterion {kind!r}")
    b = len(evaluations)
    L = len(evaluations[0])
    values = np.zeros((b, L))
    valid = np.zeros((b, L), dtype=bool)
    for i, row in enumerate(evaluations):
        if len(row) != L:
            raise LengthMismatch("ragged split evaluations")
        for l, ev in enumerate(row):
            value, ok = _cell_value(ev, kind)
            if ok and (kind not in ("gamma1", "gamma3") or math.isfinite(value)):
                values[i, l] = value
                valid[i, l] = True
    counts = valid.sum(axis=0)
    disqualified = counts < math.ceil(b / 2)
    averaged = np.full(L, np.nan)
    live = ~disqualified
    if live.any():
        sums = np.where(valid, values, 0.0).sum(axis=0)
        averaged[live] = sums[live] / counts[live]
    return CriterionSurface(
        kind=kind,
        values=values,
        valid=valid,
        averaged=averaged,
        disqualified=disqualified,
    )
