"""Lasso / Elastic Net solution paths by coordinate descent.

Data are standardized once (columns to mean 0 and mean square 1, response
centered); the penalized objective at level ``lam`` is

    Lasso:        (1 / 2n) * ||y - X b||^2 + lam * ||b||_1
    Elastic Net:  (1 / 2n) * ||y - X b||^2 + alpha * lam * ||b||^2
                  + (1 - alpha) * lam * ||b||_1

where ``alpha`` is the ridge mixing weight of :class:`PenaltySpec` (note this
is not the common convention in which ``alpha`` multiplies the l1 term).
No intercept is fitted; centering metadata stored on :class:`Dataset` maps
coefficients and predictions back to the original scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _cd
from .errors import (
    ConstantColumn,
    DegenerateGrid,
    DimensionMismatch,
    NonFiniteInput,
)

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 100_000

# Relative safety factor applied to the computed top of the grid so that the
# head of a path is exactly empty regardless of float summation order.
_LAMBDA_MAX_PAD = 1e-10


@dataclass(frozen=True)
class Scaling:
    """Affine map recorded by :func:`standardize`.

    ``z_j = (x_j - column_means[j]) / column_scales[j]`` and predictions get
    ``y_mean`` added back when mapping to the original scale.
    """

    column_means: np.ndarray
    column_scales: np.ndarray
    y_mean: float


@dataclass(frozen=True)
class Dataset:
    """Design matrix plus response with standardization metadata.

    ``standardized`` is True only for datasets produced by
    :func:`standardize`; row subsets taken with :func:`take_rows` live on the
    same scale but carry ``standardized=False`` because their columns are no
    longer exactly centered.
    """

    X: np.ndarray
    y: np.ndarray
    standardized: bool = False
    column_means: np.ndarray = None
    column_scales: np.ndarray = None
    y_mean: float = 0.0

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if X.ndim != 2:
            raise DimensionMismatch("X must be a 2-d array")
        n, p = X.shape
        if n < 2 or p < 1:
            raise DimensionMismatch(f"need n >= 2 and p >= 1, got {n} x {p}")
        if y.shape[0] != n:
            raise DimensionMismatch(f"y has length {y.shape[0]}, X has {n} rows")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise NonFiniteInput("X and y must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        means = self.column_means
        scales = self.column_scales
        means = np.zeros(p) if means is None else np.asarray(means, dtype=np.float64)
        scales = np.ones(p) if scales is None else np.asarray(scales, dtype=np.float64)
        if means.shape != (p,) or scales.shape != (p,):
            raise DimensionMismatch("column_means/column_scales must have length p")
        object.__setattr__(self, "column_means", means)
        object.__setattr__(self, "column_scales", scales)
        object.__setattr__(self, "y_mean", float(self.y_mean))
        if self.standardized:
            if np.abs(X.mean(axis=0)).max() > 1e-10:
                raise ValueError("standardized dataset has a non-centered column")
            if np.abs((X * X).mean(axis=0) - 1.0).max() > 1e-8:
                raise ValueError("standardized dataset has a non-unit-scale column")
            if abs(y.mean()) > 1e-10:
                raise ValueError("standardized dataset has a non-centered response")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def scaling(self) -> Scaling:
        return Scaling(self.column_means, self.column_scales, self.y_mean)


def standardize(raw: Dataset) -> Dataset:
    """Center columns and scale them to mean square 1; center the response.

    Idempotent: a dataset that is already standardized is returned unchanged,
    preserving the affine map back to the original scale.

    Raises
    ------
    ConstantColumn
        If some column has zero variance.
    """
    if raw.standardized:
        return raw
    X, y = raw.X, raw.y
    means = X.mean(axis=0)
    centered = X - means
    scales = np.sqrt((centered * centered).mean(axis=0))
    bad = np.flatnonzero(scales <= 1e-12 * (np.abs(means) + 1.0))
    if bad.size:
        raise ConstantColumn(int(bad[0]))
    y_mean = float(y.mean())
    return Dataset(
        centered / scales,
        y - y_mean,
        standardized=True,
        column_means=means,
        column_scales=scales,
        y_mean=y_mean,
    )


def take_rows(data: Dataset, rows: np.ndarray) -> Dataset:
    """Row subset on the same scale, keeping the parent's affine metadata."""
    rows = np.asarray(rows, dtype=np.intp)
    return Dataset(
        data.X[rows],
        data.y[rows],
        standardized=False,
        column_means=data.column_means,
        column_scales=data.column_scales,
        y_mean=data.y_mean,
    )


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family: plain Lasso or the ridge-mixed Elastic Net above."""

    kind: str = "lasso"
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in ("lasso", "elasticnet"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.kind == "elasticnet" and not 0.0 <= self.alpha < 1.0:
            raise ValueError("elastic net alpha must lie in [0, 1)")

    def l1_level(self, lam: float) -> float:
        return (1.0 - self.alpha) * lam if self.kind == "elasticnet" else lam

    def l2_level(self, lam: float) -> float:
        return self.alpha * lam if self.kind == "elasticnet" else 0.0


LASSO = PenaltySpec("lasso")


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly decreasing, log-equispaced penalty levels."""

    values: np.ndarray
    lambda_max: float
    ratio: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("grid needs at least two values")
        if not (np.diff(values) < 0).all() or values[-1] <= 0:
            raise ValueError("grid values must be strictly decreasing and positive")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


def default_grid_ratio(n: int, p: int) -> float:
    """Path depth: 0.01 in the p > n regime, 1e-4 otherwise."""
    return 0.01 if p > n else 1e-4


def lambda_grid(
    data: Dataset,
    num: int = 100,
    ratio: float | None = None,
    penalty: PenaltySpec = LASSO,
) -> LambdaGrid:
    """Log-equispaced grid from the smallest all-zero penalty level downward.

    The top of the grid is ``max_j |x_j' y| / n`` (the level at which the
    stationarity conditions hold with the zero vector), divided by
    ``1 - alpha`` for the Elastic Net so the head of the path stays empty
    under the mixed penalty.  A 1e-10 relative pad guards against summation-
    order ties in the solver.

    Raises
    ------
    DegenerateGrid
        If the response is orthogonal to every column.
    """
    if not data.standardized:
        raise ValueError("lambda_grid requires a standardized dataset")
    if num < 2:
        raise ValueError("grid length must be at least 2")
    if ratio is None:
        ratio = default_grid_ratio(data.n, data.p)
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    corr = np.abs(data.X.T @ data.y) / data.n
    lam_max = float(corr.max())
    if lam_max <= 0.0:
        raise DegenerateGrid("response is orthogonal to all columns")
    lam_max /= 1.0 - penalty.alpha if penalty.kind == "elasticnet" else 1.0
    lam_max *= 1.0 + _LAMBDA_MAX_PAD
    values = np.geomspace(lam_max, ratio * lam_max, num)
    return LambdaGrid(values=values, lambda_max=lam_max, ratio=float(ratio))


@dataclass(frozen=True)
class PathPoint:
    """One solution on the path: sparse coefficients at a penalty level."""

    lam: float
    support: np.ndarray
    coefficients: np.ndarray
    signs: np.ndarray
    iterations: int
    converged: bool

    @property
    def d(self) -> int:
        """Model size."""
        return self.support.size

    def dense(self, p: int) -> np.ndarray:
        beta = np.zeros(p)
        beta[self.support] = self.coefficients
        return beta


@dataclass(frozen=True)
class SolutionPath:
    """Path points aligned one-to-one with a grid, in decreasing-lam order."""

    grid: LambdaGrid
    points: tuple[PathPoint, ...]
    p: int

    def __post_init__(self):
        if len(self.points) != len(self.grid):
            raise ValueError("one path point per grid value required")
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i: int) -> PathPoint:
        return self.points[i]


def soft_threshold(z, t):
    """Shrink ``z`` toward zero by ``t``: sign(z) * max(|z| - t, 0)."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def _point_from_beta(lam, beta, sweeps, converged) -> PathPoint:
    support = np.flatnonzero(beta)
    coef = beta[support].copy()
    return PathPoint(
        lam=float(lam),
        support=support,
        coefficients=coef,
        signs=np.sign(coef),
        iterations=int(sweeps),
        converged=bool(converged),
    )


def fit_path(
    data: Dataset,
    grid: LambdaGrid,
    penalty: PenaltySpec = LASSO,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SolutionPath:
    """Fit the whole path in decreasing-lam order with warm starts.

    ``data`` must be standardized or a row subset of a standardized dataset
    (column mean squares may then deviate slightly from 1; the solver uses the
    actual column norms).  Hitting ``max_iter`` is recorded per point as
    ``converged=False``, never raised.
    """
    Xf = np.asfortranarray(data.X)
    col_ms = (Xf * Xf).sum(axis=0) / data.n
    beta = np.zeros(data.p)
    r = data.y.copy()
    points = []
    for lam in grid.values:
        sweeps, converged = _cd.solve(
            Xf, r, beta, col_ms, penalty.l1_level(lam), penalty.l2_level(lam),
            tol, max_iter,
        )
        points.append(_point_from_beta(lam, beta, sweeps, converged))
    return SolutionPath(grid=grid, points=tuple(points), p=data.p)


def fit_point(
    data: Dataset,
    lam: float,
    penalty: PenaltySpec = LASSO,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start: np.ndarray | None = None,
) -> PathPoint:
    """Solve a single penalty level, optionally from a warm start."""
    Xf = np.asfortranarray(data.X)
    col_ms = (Xf * Xf).sum(axis=0) / data.n
    beta = np.zeros(data.p) if start is None else np.array(start, dtype=np.float64)
    if beta.shape != (data.p,):
        raise DimensionMismatch("start vector must have length p")
    r = data.y - data.X @ beta
    sweeps, converged = _cd.solve(
        Xf, r, beta, col_ms, penalty.l1_level(lam), penalty.l2_level(lam),
        tol, max_iter,
    )
    return _point_from_beta(lam, beta, sweeps, converged)


def penalized_objective(
    data: Dataset, beta: np.ndarray, lam: float, penalty: PenaltySpec = LASSO
) -> float:
    """Objective value at a dense coefficient vector."""
    r = data.y - data.X @ beta
    value = 0.5 * (r @ r) / data.n + penalty.l1_level(lam) * np.abs(beta).sum()
    value += penalty.l2_level(lam) * (beta @ beta)
    return float(value)


@dataclass(frozen=True)
class ViolationReport:
    """Stationarity residuals of a path point.

    ``active_violations[k]`` is the absolute stationarity residual of the
    k-th support coordinate; ``inactive_violations`` holds, for coordinates
    off the support, the excess of the gradient magnitude over the l1 level
    (clipped at zero).  ``offending`` lists coordinates violating ``tol``.
    """

    max_violation: float
    active_violations: np.ndarray
    inactive_violations: np.ndarray
    offending: np.ndarray
    tol: float

    @property
    def ok(self) -> bool:
        return self.max_violation <= self.tol


def kkt_check(
    data: Dataset,
    lam: float,
    point: PathPoint,
    tol: float = 1e-6,
    penalty: PenaltySpec = LASSO,
) -> ViolationReport:
    """Verify the stationarity conditions of a (claimed) solution.

    With ``r = y - X b``: every support coordinate must satisfy
    ``x_j'r / n = 2 * l2 * b_j + l1 * sign(b_j)`` and every other coordinate
    ``|x_j'r / n| <= l1``, where l1/l2 are the penalty levels at ``lam``.
    """
    S = point.support
    if S.size and (S.min() < 0 or S.max() >= data.p):
        raise DimensionMismatch("support indices out of range")
    r = data.y - data.X[:, S] @ point.coefficients if S.size else data.y.copy()
    corr = data.X.T @ r / data.n
    l1 = penalty.l1_level(lam)
    l2 = penalty.l2_level(lam)
    active = np.abs(corr[S] - 2.0 * l2 * point.coefficients - l1 * point.signs)
    mask = np.ones(data.p, dtype=bool)
    mask[S] = False
    inactive = np.maximum(np.abs(corr[mask]) - l1, 0.0)
    offenders = np.concatenate(
        [S[active > tol], np.flatnonzero(mask)[inactive > tol]]
    )
    worst = max(
        active.max() if active.size else 0.0,
        inactive.max() if inactive.size else 0.0,
    )
    return ViolationReport(
        max_violation=float(worst),
        active_violations=active,
        inactive_violations=inactive,
        offending=np.sort(offenders),
        tol=float(tol),
    )
