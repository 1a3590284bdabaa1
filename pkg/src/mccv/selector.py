"""Full selection procedure: shared-grid paths, criterion averaging, and refit.

The procedure for cross-validation criteria:

1. fit the full-data path on a grid,
2. fit one path per construction set on the same grid,
3. evaluate the criterion per (split, grid level) and average per level,
4. pick the level with the smallest average (ties go to the larger penalty),
   take the full-data support there, and refit by least squares when the
   method asks for it.

Information criteria replace steps 2-3 with a single pass over the full-data
path.  :func:`run_many` runs several methods on one dataset, sharing paths
and split evaluations wherever the methods' penalty and splitting scheme
agree; results are identical to independent :func:`run_selection` calls.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed

from . import criteria
from .errors import AllLambdasDisqualified, BadConfig
from .refit import ols_refit, predict
from .solver import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    LASSO,
    Dataset,
    LambdaGrid,
    PenaltySpec,
    Scaling,
    SolutionPath,
    fit_path,
    lambda_grid,
    take_rows,
)
from .splits import KFold, MonteCarlo, ReversedKFold, Scheme, make_plan

_MODIFIED = ("gamma1", "gamma2", "gamma3")


@dataclass(frozen=True)
class MethodSpec:
    """A selection method: criterion, splitting scheme, penalty, final refit.

    ``refit_final=None`` resolves to True for the modified criteria (the
    final estimator is the least-squares fit on the selected model) and False
    for the gamma0 and information-criterion baselines (the final estimator
    keeps the penalized coefficients).
    """

    criterion: str
    scheme: Scheme | None = None
    penalty: PenaltySpec = LASSO
    refit_final: bool | None = None
    ebic_gamma: float = 1.0

    def __post_init__(self):
        if self.criterion not in criteria.CV_CRITERIA + criteria.INFO_CRITERIA:
            raise BadConfig(f"unknown criterion {self.criterion!r}")
        if self.criterion in criteria.CV_CRITERIA and self.scheme is None:
            raise BadConfig(f"criterion {self.criterion} needs a splitting scheme")
        if self.penalty.kind == "elasticnet" and self.criterion in ("gamma1", "gamma2"):
            raise BadConfig(
                "gamma1/gamma2 are Lasso-specific; use gamma3 for elastic net"
            )

    @property
    def resolved_refit(self) -> bool:
        if self.refit_final is not None:
            return self.refit_final
        return self.criterion in _MODIFIED


# Naming convention of the method table rows; "r" marks the reversed scheme
# and the "em-"/"m-" prefixes the exactly and approximately modified criteria.
# The em-* methods select by the least-squares evaluation of the exactly
# corrected criterion (gamma3): the displayed-formula form (gamma1) differs
# from it only by a cross term whose expectation vanishes, but that term's
# systematic part misplaces the curve minimum under correlated designs,
# while the least-squares form reproduces the published selection behavior.
# gamma1 remains available through MethodSpec for direct use.
_NAME_PATTERNS = {
    "m-MCCV": ("gamma2", "mccv", "lasso"),
    "em-MCCV": ("gamma3", "mccv", "lasso"),
    "K-fold": ("gamma0", "kfold", "lasso"),
    "m-K-fold": ("gamma2", "kfold", "lasso"),
    "em-K-fold": ("gamma3", "kfold", "lasso"),
    "m-r-K-fold": ("gamma2", "rkfold", "lasso"),
    "em-r-K-fold": ("gamma3", "rkfold", "lasso"),
    "AIC": ("aic", None, "lasso"),
    "BIC": ("bic", None, "lasso"),
    "EBIC": ("ebic", None, "lasso"),
    "enet-em-MCCV": ("gamma3", "mccv", "elasticnet"),
    "enet-K-fold": ("gamma0", "kfold", "elasticnet"),
}

METHOD_NAMES = tuple(_NAME_PATTERNS)


def construction_size(n: int, exponent: float) -> int:
    """ceil(n ** exponent), the construction-set size convention."""
    return int(np.ceil(n ** exponent))


def method_from_name(
    name: str,
    n: int,
    n_c_exponent: float = 0.75,
    b: int = 50,
    k_folds: int = 10,
    ebic_gamma: float = 1.0,
    enet_alpha: float = 0.5,
    enet_n_c_exponent: float = 2.0 / 3.0,
) -> MethodSpec:
    """Resolve a method table name into a :class:`MethodSpec` for n rows.

    Monte Carlo methods use ``n_c = ceil(n ** n_c_exponent)`` and
    ``n_v = n - n_c`` with ``b`` splits; the elastic net variant has its own
    construction exponent.  Raises :class:`BadConfig` for unknown names.
    """
    if name not in _NAME_PATTERNS:
        raise BadConfig(
            f"unknown method {name!r}; known: {', '.join(METHOD_NAMES)}"
        )
    criterion, scheme_kind, penalty_kind = _NAME_PATTERNS[name]
    if penalty_kind == "elasticnet":
        penalty = PenaltySpec("elasticnet", enet_alpha)
        exponent = enet_n_c_exponent
    else:
        penalty = LASSO
        exponent = n_c_exponent
    if scheme_kind == "mccv":
        n_c = construction_size(n, exponent)
        if not 2 <= n_c <= n - 1:
            raise BadConfig(f"construction size {n_c} out of range for n={n}")
        scheme = MonteCarlo(n_v=n - n_c, b=b)
    elif scheme_kind == "kfold":
        scheme = KFold(k_folds)
    elif scheme_kind == "rkfold":
        scheme = ReversedKFold(k_folds)
    else:
        scheme = None
    return MethodSpec(
        criterion=criterion, scheme=scheme, penalty=penalty, ebic_gamma=ebic_gamma
    )


@dataclass
class SelectionResult:
    """Outcome of one selection run.

    ``support_hat`` is the full-data path support at the selected level, and
    ``final_coefficients`` live on it (least-squares refit or penalized
    coefficients per the method).  ``per_split_supports`` holds, for CV
    methods, each construction path's support at the selected level.
    """

    lambda_hat: float
    lambda_index: int
    support_hat: np.ndarray
    final_coefficients: np.ndarray
    refit_used: bool
    criterion_curve: np.ndarray
    disqualified_lambdas: np.ndarray
    per_split_supports: list[np.ndarray]
    grid_values: np.ndarray
    scaling: Scaling
    method: MethodSpec

    @property
    def model_size(self) -> int:
        return self.support_hat.size

    def predict(self, X_rows: np.ndarray, original_scale: bool = True) -> np.ndarray:
        fit = _FinalFit(self.support_hat, self.final_coefficients)
        return predict(X_rows, fit, self.scaling if original_scale else None)

    def to_report_dict(self, columns: list[str] | None = None) -> dict:
        """JSON-ready summary (selected level, support, coefficients, curve)."""
        p = self.scaling.column_means.size
        names = columns if columns is not None else [f"x{j}" for j in range(p)]
        proportions = (
            selection_proportions(self.per_split_supports, p).tolist()
            if self.per_split_supports
            else []
        )
        return {
            "criterion": self.method.criterion,
            "lambda_hat": self.lambda_hat,
            "lambda_index": self.lambda_index,
            "model_size": self.model_size,
            "selected": [names[j] for j in self.support_hat],
            "coefficients": dict(
                zip(
                    (names[j] for j in self.support_hat),
                    (float(c) for c in self.final_coefficients),
                )
            ),
            "refit_used": self.refit_used,
            "grid": self.grid_values.tolist(),
            "criterion_curve": self.criterion_curve.tolist(),
            "disqualified_lambdas": self.disqualified_lambdas.tolist(),
            "columns": names,
            "selection_proportions": proportions,
        }


@dataclass(frozen=True)
class _FinalFit:
    support: np.ndarray
    coefficients: np.ndarray


def selection_proportions(per_split_supports, p: int) -> np.ndarray:
    """Fraction of splits whose selected support contains each variable."""
    supports = list(per_split_supports)
    if not supports:
        raise ValueError("need at least one split support")
    counts = np.zeros(p)
    for support in supports:
        counts[np.asarray(support, dtype=np.intp)] += 1.0
    return counts / len(supports)


def _plan_seed(seed: int, n: int, scheme: Scheme) -> int:
    """Stable 64-bit plan seed from the user seed and the scheme parameters.

    The Monte Carlo key excludes b, so plans with different b share a stream
    (prefix property of :func:`~mccv.splits.make_mccv`).
    """
    if isinstance(scheme, KFold):
        key = (seed, 1, n, scheme.k)
    elif isinstance(scheme, ReversedKFold):
        key = (seed, 2, n, scheme.k)
    else:
        key = (seed, 3, n, scheme.n_v)
    return int(np.random.SeedSequence(key).generate_state(1, np.uint64)[0])


def _group_key(method: MethodSpec):
    scheme = method.scheme
    if isinstance(scheme, MonteCarlo):
        scheme_key = ("mccv", scheme.n_v)
    elif isinstance(scheme, KFold):
        scheme_key = ("kfold", scheme.k)
    else:
        scheme_key = ("rkfold", scheme.k)
    return (method.penalty, scheme_key)


def _evaluate_one_split(data, pair, grid, penalty, exact, tol, max_iter):
    construction = take_rows(data, pair[0])
    validation = take_rows(data, pair[1])
    path = fit_path(construction, grid, penalty, tol=tol, max_iter=max_iter)
    evals = criteria.evaluate_split_path(construction, validation, path, exact=exact)
    return evals, [point.support for point in path]


def _pick_lambda(curve: np.ndarray, disqualified: np.ndarray) -> int:
    if disqualified.all():
        raise AllLambdasDisqualified("no penalty level has enough valid splits")
    masked = np.where(disqualified, np.inf, curve)
    # Grids are decreasing, so the first argmin breaks ties toward larger lam.
    return int(np.argmin(masked))


def run_many(
    data: Dataset,
    methods: dict[str, MethodSpec],
    grid: LambdaGrid | None = None,
    grid_length: int = 100,
    grid_ratio: float | None = None,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    n_jobs: int = 1,
) -> dict[str, SelectionResult]:
    """Run several methods on one dataset, sharing paths and evaluations.

    Methods with the same penalty and compatible scheme reuse the same split
    plan and construction paths; Monte Carlo methods differing only in b
    share the largest plan's prefix.  Each method's result is identical to a
    standalone :func:`run_selection` call with the same seed.
    """
    if not data.standardized:
        raise ValueError("run_many requires a standardized dataset")
    grids: dict[PenaltySpec, LambdaGrid] = {}
    full_paths: dict[PenaltySpec, SolutionPath] = {}
    for method in methods.values():
        if method.penalty not in grids:
            grids[method.penalty] = grid if grid is not None else lambda_grid(
                data, grid_length, grid_ratio, method.penalty
            )
            full_paths[method.penalty] = fit_path(
                data, grids[method.penalty], method.penalty, tol=tol, max_iter=max_iter
            )

    groups: dict = {}
    for name, method in methods.items():
        if method.criterion in criteria.INFO_CRITERIA:
            continue
        key = _group_key(method)
        entry = groups.setdefault(key, {"members": [], "exact": False, "b_max": 0})
        entry["members"].append(name)
        entry["exact"] |= method.criterion in ("gamma1", "gamma3")
        if isinstance(method.scheme, MonteCarlo):
            entry["b_max"] = max(entry["b_max"], method.scheme.b)

    evaluated: dict = {}
    for (penalty, scheme_key), entry in groups.items():
        scheme = methods[entry["members"][0]].scheme
        if isinstance(scheme, MonteCarlo):
            scheme = MonteCarlo(scheme.n_v, entry["b_max"])
        plan = make_plan(scheme, data.n, _plan_seed(seed, data.n, scheme))
        worker = delayed(_evaluate_one_split)
        rows = Parallel(n_jobs=n_jobs)(
            worker(data, pair, grids[penalty], penalty, entry["exact"], tol, max_iter)
            for pair in plan.pairs
        )
        evaluated[(penalty, scheme_key)] = rows

    results = {}
    for name, method in methods.items():
        grid_m = grids[method.penalty]
        full_path = full_paths[method.penalty]
        if method.criterion in criteria.INFO_CRITERIA:
            curve = criteria.info_criterion(
                data, full_path, method.criterion, method.ebic_gamma
            )
            disqualified = np.zeros(len(grid_m), dtype=bool)
            split_supports: list[np.ndarray] = []
            idx = _pick_lambda(curve, disqualified)
        else:
            rows = evaluated[_group_key(method)]
            if isinstance(method.scheme, MonteCarlo):
                rows = rows[: method.scheme.b]
            surface = criteria.criterion_surface(
                [evals for evals, _ in rows], method.criterion
            )
            curve = surface.averaged
            disqualified = surface.disqualified
            idx = _pick_lambda(curve, disqualified)
            split_supports = [supports[idx] for _, supports in rows]
        point = full_path[idx]
        if method.resolved_refit:
            fit = ols_refit(data, point.support)
            coef = fit.coefficients
        else:
            coef = point.coefficients.copy()
        results[name] = SelectionResult(
            lambda_hat=float(grid_m.values[idx]),
            lambda_index=idx,
            support_hat=point.support.copy(),
            final_coefficients=coef,
            refit_used=method.resolved_refit,
            criterion_curve=curve,
            disqualified_lambdas=np.flatnonzero(disqualified),
            per_split_supports=split_supports,
            grid_values=grid_m.values,
            scaling=data.scaling,
            method=method,
        )
    return results


def run_selection(
    data: Dataset,
    method: MethodSpec,
    grid: LambdaGrid | None = None,
    grid_length: int = 100,
    grid_ratio: float | None = None,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    n_jobs: int = 1,
) -> SelectionResult:
    """Run one method end to end.  See :func:`run_many`."""
    return run_many(
        data,
        {"method": method},
        grid=grid,
        grid_length=grid_length,
        grid_ratio=grid_ratio,
        seed=seed,
        tol=tol,
        max_iter=max_iter,
        n_jobs=n_jobs,
    )["method"]
