"""Deterministic, seeded construction/validation split plans."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadK, BadSizes


@dataclass(frozen=True)
class KFold:
    """One fold validates, the remaining K-1 construct."""

    k: int


@dataclass(frozen=True)
class ReversedKFold:
    """One fold constructs, the remaining K-1 validate."""

    k: int


@dataclass(frozen=True)
class MonteCarlo:
    """b uniform draws of validation sets of size n_v."""

    n_v: int
    b: int


Scheme = KFold | ReversedKFold | MonteCarlo


@dataclass(frozen=True)
class SplitPlan:
    """Ordered (construction, validation) index pairs plus provenance.

    Every pair partitions ``range(n)``: the two index sets are disjoint,
    sorted, and together cover all rows.
    """

    scheme: Scheme
    seed: int
    n: int
    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def to_text(self) -> str:
        """One line per pair: the validation indices, space-separated."""
        return "\n".join(
            " ".join(str(i) for i in validation) for _, validation in self.pairs
        ) + "\n"


def _pair(n: int, validation: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mask = np.ones(n, dtype=bool)
    mask[validation] = False
    return np.flatnonzero(mask), np.sort(validation)


def _folds(n: int, k: int, seed: int) -> list[np.ndarray]:
    if not 2 <= k <= n:
        raise BadK(f"need 2 <= K <= n, got K={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, k)


def make_kfold(n: int, k: int, seed: int) -> SplitPlan:
    """Random permutation chopped into K folds; fold i validates."""
    pairs = tuple(_pair(n, fold) for fold in _folds(n, k, seed))
    return SplitPlan(KFold(k), seed, n, pairs)


def make_reversed_kfold(n: int, k: int, seed: int) -> SplitPlan:
    """Same fold partition as K-fold with the same seed, roles swapped."""
    pairs = tuple(_pair(n, fold)[::-1] for fold in _folds(n, k, seed))
    return SplitPlan(ReversedKFold(k), seed, n, pairs)


def make_mccv(n: int, n_v: int, b: int, seed: int) -> SplitPlan:
    """b independent uniform validation draws of size n_v.

    Draws come from a single seeded stream, so the plan for a smaller ``b``
    is a prefix of the plan for a larger one at the same seed.  Repeated
    subsets may occur across draws, never within one.
    """
    if not 1 <= n_v <= n - 2:
        raise BadSizes(f"need 1 <= n_v <= n - 2, got n_v={n_v}, n={n}")
    if b < 1:
        raise BadSizes(f"need b >= 1, got {b}")
    rng = np.random.default_rng(seed)
    pairs = tuple(
        _pair(n, rng.choice(n, size=n_v, replace=False)) for _ in range(b)
    )
    return SplitPlan(MonteCarlo(n_v, b), seed, n, pairs)


def make_plan(scheme: Scheme, n: int, seed: int) -> SplitPlan:
    """Build the plan for any scheme value."""
    if isinstance(scheme, KFold):
        return make_kfold(n, scheme.k, seed)
    if isinstance(scheme, ReversedKFold):
        return make_reversed_kfold(n, scheme.k, seed)
    if isinstance(scheme, MonteCarlo):
        return make_mccv(n, scheme.n_v, scheme.b, seed)
    raise TypeError(f"unknown scheme {scheme!r}")
