"""Synthetic benchmark generator and the experiment runner.

Designs are Gaussian with one of three covariance structures (independent,
exponential-decay, equal-correlation); responses follow a sparse linear
model with unit-variance noise.  Experiments replicate the whole pipeline
(sample, standardize, select, refit) over repetitions and report false
negatives, false positives, and prediction error on a fresh test set of the
same size, formatted as "mean(sd)" tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from io import StringIO

import numpy as np
from joblib import Parallel, delayed

from .errors import BadConfig, NotPositiveDefinite
from .selector import (
    MethodSpec,
    SelectionResult,
    method_from_name,
    run_many,
)
from .solver import Dataset, standardize
from .splits import MonteCarlo

COV_KINDS = ("independent", "expdecay", "equalcorr")


@dataclass(frozen=True)
class TrueModel:
    """Ground-truth coefficients, their support, and the noise level."""

    beta: np.ndarray
    oracle: np.ndarray
    d0: int
    sigma: float

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.float64)
        oracle = np.sort(np.asarray(self.oracle, dtype=np.intp))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "oracle", oracle)
        if not np.array_equal(np.flatnonzero(beta), oracle):
            raise ValueError("oracle must be the nonzero positions of beta")
        if self.d0 != oracle.size:
            raise ValueError("d0 must equal the oracle size")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class CovSpec:
    """Covariance structure of the design rows.

    ``independent`` is the identity; ``expdecay`` has entries rho^|j-k|;
    ``equalcorr`` has ones on the diagonal and rho off it.
    """

    kind: str = "independent"
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in COV_KINDS:
            raise ValueError(f"unknown covariance kind {self.kind!r}")
        if self.kind != "independent" and not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")

    def matrix(self, p: int) -> np.ndarray:
        if self.kind == "independent":
            return np.eye(p)
        if self.kind == "expdecay":
            idx = np.arange(p)
            return self.rho ** np.abs(np.subtract.outer(idx, idx))
        return np.full((p, p), self.rho) + (1.0 - self.rho) * np.eye(p)


@dataclass(frozen=True)
class Metrics:
    """Selection and prediction quality against the truth."""

    fn: int
    fp: int
    pe: float


_factor_cache: dict[tuple[int, str, float], np.ndarray] = {}


def make_covariance(p: int, spec: CovSpec) -> np.ndarray:
    """Lower-triangular factor F with F F' equal to the covariance.

    The exponential-decay factor is available in closed form; the others use
    a Cholesky factorization.
    """
    if p < 1:
        raise ValueError("p must be positive")
    key = (p, spec.kind, float(spec.rho))
    cached = _factor_cache.get(key)
    if cached is not None:
        return cached
    if spec.kind == "independent":
        F = np.eye(p)
    elif spec.kind == "expdecay":
        idx = np.arange(p)
        F = np.tril(spec.rho ** np.subtract.outer(idx, idx).astype(float))
        F[:, 1:] *= math.sqrt(1.0 - spec.rho**2)
    else:
        try:
            F = np.linalg.cholesky(spec.matrix(p))
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(str(exc)) from exc
    _factor_cache[key] = F
    return F


def sample_dataset(n: int, truth: TrueModel, spec: CovSpec, seed: int) -> Dataset:
    """Draw n rows from the design and the linear model, deterministically."""
    if n < 2:
        raise ValueError("n must be at least 2")
    p = truth.beta.size
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, p))
    X = Z if spec.kind == "independent" else Z @ make_covariance(p, spec).T
    y = X @ truth.beta + truth.sigma * rng.standard_normal(n)
    return Dataset(X, y)


def standard_betas(
    example: str, p: int, random_position: bool = False, seed: int = 0
) -> TrueModel:
    """The two benchmark signal patterns.

    Ex1 puts (4, 3, 2, 0, 0, -4, 3, -2) on the first eight coordinates;
    Ex2 uses the weaker (1.2, 0.8, 0.4), either on the first three
    coordinates or at seeded random distinct positions.
    """
    if p < 8:
        raise ValueError("p must be at least 8")
    beta = np.zeros(p)
    if example == "Ex1":
        beta[:8] = (4.0, 3.0, 2.0, 0.0, 0.0, -4.0, 3.0, -2.0)
    elif example == "Ex2":
        values = (1.2, 0.8, 0.4)
        if random_position:
            positions = np.sort(
                np.random.default_rng(seed).choice(p, size=3, replace=False)
            )
        else:
            positions = np.arange(3)
        beta[positions] = values
    else:
        raise ValueError(f"unknown example {example!r}")
    oracle = np.flatnonzero(beta)
    return TrueModel(beta=beta, oracle=oracle, d0=oracle.size, sigma=1.0)


def evaluate(result: SelectionResult, truth: TrueModel, test: Dataset) -> Metrics:
    """FN/FP of the selected support and test mean squared prediction error."""
    selected = result.support_hat
    fn = np.setdiff1d(truth.oracle, selected).size
    fp = np.setdiff1d(selected, truth.oracle).size
    resid = test.y - result.predict(test.X)
    return Metrics(fn=int(fn), fp=int(fp), pe=float(resid @ resid) / test.n)


def _as_exponent(value) -> float:
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


@dataclass
class ExperimentConfig:
    """Everything one simulation experiment needs.

    ``n_c_exponent`` may be a list (one result table per value) and ``b`` may
    be a list (one row per value for the Monte Carlo methods).  ``rep_seeds``
    overrides the per-repetition seeds derived from ``master_seed``.
    """

    design: CovSpec
    n: int
    p: int
    methods: tuple[str, ...]
    reps: int
    example: str = "Ex1"
    random_position: bool = False
    n_c_exponent: float | tuple[float, ...] = 0.75
    b: int | tuple[int, ...] = 50
    k_folds: int = 10
    master_seed: int = 0
    rep_seeds: tuple[int, ...] | None = None
    grid_length: int = 100
    grid_ratio: float | None = None
    ebic_gamma: float = 1.0
    enet_alpha: float = 0.5
    enet_n_c_exponent: float = 2.0 / 3.0

    def validate(self) -> None:
        if self.reps < 1:
            raise BadConfig("reps must be at least 1")
        if self.n < 4 or self.p < 8:
            raise BadConfig("need n >= 4 and p >= 8")
        if self.example not in ("Ex1", "Ex2"):
            raise BadConfig(f"unknown example {self.example!r}")
        if not self.methods:
            raise BadConfig("at least one method required")
        for name in self.methods:
            method_from_name(name, n=self.n)  # raises BadConfig when unknown
        if self.rep_seeds is not None and len(self.rep_seeds) != self.reps:
            raise BadConfig("rep_seeds must have one entry per repetition")
        for b in self.b_values():
            if b < 1:
                raise BadConfig("b must be positive")

    def exponents(self) -> tuple[float, ...]:
        value = self.n_c_exponent
        if isinstance(value, (list, tuple)):
            return tuple(_as_exponent(v) for v in value)
        return (_as_exponent(value),)

    def b_values(self) -> tuple[int, ...]:
        return tuple(self.b) if isinstance(self.b, (list, tuple)) else (self.b,)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        data = dict(raw)
        design = data.pop("design", "independent")
        if isinstance(design, str):
            design = CovSpec(design)
        elif isinstance(design, dict):
            design = CovSpec(design["kind"], float(design.get("rho", 0.0)))
        data["design"] = design
        for key in ("methods", "rep_seeds"):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        if isinstance(data.get("n_c_exponent"), (list, tuple)):
            data["n_c_exponent"] = tuple(
                _as_exponent(v) for v in data["n_c_exponent"]
            )
        elif "n_c_exponent" in data:
            data["n_c_exponent"] = _as_exponent(data["n_c_exponent"])
        if isinstance(data.get("b"), (list, tuple)):
            data["b"] = tuple(int(v) for v in data["b"])
        if "enet_n_c_exponent" in data:
            data["enet_n_c_exponent"] = _as_exponent(data["enet_n_c_exponent"])
        known = cls.__dataclass_fields__
        unknown = set(data) - set(known)
        if unknown:
            raise BadConfig(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise BadConfig(str(exc)) from exc

    def to_dict(self) -> dict:
        out = {
            "design": {"kind": self.design.kind, "rho": self.design.rho},
            "n": self.n,
            "p": self.p,
            "methods": list(self.methods),
            "reps": self.reps,
            "example": self.example,
            "random_position": self.random_position,
            "n_c_exponent": (
                list(self.n_c_exponent)
                if isinstance(self.n_c_exponent, tuple)
                else self.n_c_exponent
            ),
            "b": list(self.b) if isinstance(self.b, tuple) else self.b,
            "k_folds": self.k_folds,
            "master_seed": self.master_seed,
            "rep_seeds": list(self.rep_seeds) if self.rep_seeds else None,
            "grid_length": self.grid_length,
            "grid_ratio": self.grid_ratio,
            "ebic_gamma": self.ebic_gamma,
            "enet_alpha": self.enet_alpha,
            "enet_n_c_exponent": self.enet_n_c_exponent,
        }
        return out


@dataclass
class MethodSummary:
    """Mean and standard deviation of FN/FP/PE for one method row."""

    label: str
    fn_mean: float
    fn_sd: float
    fp_mean: float
    fp_sd: float
    pe_mean: float
    pe_sd: float

    def formatted(self) -> tuple[str, str, str]:
        return (
            f"{self.fn_mean:.2f}({self.fn_sd:.2f})",
            f"{self.fp_mean:.2f}({self.fp_sd:.2f})",
            f"{self.pe_mean:.2f}({self.pe_sd:.2f})",
        )


@dataclass
class ExperimentTable:
    """One results table: a labeled list of method rows."""

    label: str
    rows: list[MethodSummary]

    def row(self, label: str) -> MethodSummary:
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)

    def to_markdown(self) -> str:
        out = StringIO()
        out.write(f"### {self.label}\n\n")
        out.write("| Method | FN | FP | PE |\n|---|---|---|---|\n")
        for row in self.rows:
            fn, fp, pe = row.formatted()
            out.write(f"| {row.label} | {fn} | {fp} | {pe} |\n")
        return out.getvalue()

    def to_csv(self) -> str:
        out = StringIO()
        out.write("method,fn_mean,fn_sd,fp_mean,fp_sd,pe_mean,pe_sd\n")
        for row in self.rows:
            out.write(
                f"{row.label},{row.fn_mean!r},{row.fn_sd!r},{row.fp_mean!r},"
                f"{row.fp_sd!r},{row.pe_mean!r},{row.pe_sd!r}\n"
            )
        return out.getvalue()


def _table_methods(config: ExperimentConfig, exponent: float) -> dict[str, MethodSpec]:
    """Resolve the method rows for one table, expanding a b sweep."""
    b_values = config.b_values()
    rows: dict[str, MethodSpec] = {}
    for name in config.methods:
        base = method_from_name(
            name,
            n=config.n,
            n_c_exponent=exponent,
            b=b_values[0],
            k_folds=config.k_folds,
            ebic_gamma=config.ebic_gamma,
            enet_alpha=config.enet_alpha,
            enet_n_c_exponent=config.enet_n_c_exponent,
        )
        if isinstance(base.scheme, MonteCarlo) and len(b_values) > 1:
            for b in b_values:
                scheme = MonteCarlo(base.scheme.n_v, b)
                rows[f"{name}[b={b}]"] = MethodSpec(
                    criterion=base.criterion,
                    scheme=scheme,
                    penalty=base.penalty,
                    ebic_gamma=base.ebic_gamma,
                )
        else:
            rows[name] = base
    return rows


def _rep_seed(master_seed: int, rep: int) -> int:
    return int(
        np.random.SeedSequence((master_seed, rep)).generate_state(1, np.uint64)[0]
    )


def run_replication(
    config: ExperimentConfig,
    methods: dict[str, MethodSpec],
    rep_seed: int,
) -> dict[str, Metrics]:
    """One repetition: sample, standardize, select with every method, score."""
    seeds = np.random.SeedSequence(rep_seed).generate_state(4, np.uint64)
    seed_truth, seed_train, seed_test, seed_splits = (int(s) for s in seeds)
    truth = standard_betas(
        config.example, config.p, config.random_position, seed_truth
    )
    train = sample_dataset(config.n, truth, config.design, seed_train)
    test = sample_dataset(config.n, truth, config.design, seed_test)
    data = standardize(train)
    results = run_many(
        data,
        methods,
        grid_length=config.grid_length,
        grid_ratio=config.grid_ratio,
        seed=seed_splits,
    )
    return {label: evaluate(res, truth, test) for label, res in results.items()}


def run_experiment(config: ExperimentConfig, n_jobs: int = 1) -> list[ExperimentTable]:
    """Run the configured experiment; one table per construction exponent.

    Repetitions are independent jobs with seeds derived from
    ``(master_seed, repetition)``, so results do not depend on scheduling or
    on ``n_jobs``.
    """
    config.validate()
    rep_seeds = config.rep_seeds or tuple(
        _rep_seed(config.master_seed, rep) for rep in range(config.reps)
    )
    tables = []
    exponents = config.exponents()
    for exponent in exponents:
        methods = _table_methods(config, exponent)
        per_rep = Parallel(n_jobs=n_jobs)(
            delayed(run_replication)(config, methods, seed) for seed in rep_seeds
        )
        rows = []
        for label in methods:
            fn = np.array([rep[label].fn for rep in per_rep], dtype=float)
            fp = np.array([rep[label].fp for rep in per_rep], dtype=float)
            pe = np.array([rep[label].pe for rep in per_rep], dtype=float)
            sd = (lambda v: float(v.std(ddof=1)) if v.size > 1 else 0.0)
            rows.append(
                MethodSummary(
                    label=label,
                    fn_mean=float(fn.mean()),
                    fn_sd=sd(fn),
                    fp_mean=float(fp.mean()),
                    fp_sd=sd(fp),
                    pe_mean=float(pe.mean()),
                    pe_sd=sd(pe),
                )
            )
        label = (
            f"n_c_exponent={exponent:g}" if len(exponents) > 1 else "results"
        )
        tables.append(ExperimentTable(label=label, rows=rows))
    return tables
