"""Shared problem generators and independent oracles for the test suite."""

import numpy as np
import pytest

from mccv import CovSpec, Dataset, TrueModel, sample_dataset, standardize


def gaussian_problem(seed, n, p, beta=None, kind="independent", rho=0.0, sigma=1.0):
    """Standardized dataset from a seeded Gaussian design, plus the truth."""
    full_beta = np.zeros(p)
    if beta is not None:
        beta = np.asarray(beta, dtype=float)
        full_beta[: beta.size] = beta
    truth = TrueModel(
        beta=full_beta,
        oracle=np.flatnonzero(full_beta),
        d0=int(np.count_nonzero(full_beta)),
        sigma=sigma,
    )
    raw = sample_dataset(n, truth, CovSpec(kind, rho), seed)
    return standardize(raw), truth


def orthonormal_problem(seed, n, p, beta, sigma=0.5):
    """Dataset whose columns satisfy X'X / n = I exactly (requires p <= n).

    Columns are built from a QR factorization and rescaled so each has
    squared norm n; the response is a sparse signal plus noise.  The dataset
    is standardized by construction up to centering, so it is returned with
    the flag off and exact orthonormality instead.
    """
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, p + 1))
    A[:, 0] = 1.0  # orthogonalize against the constant so columns are centered
    Q, _ = np.linalg.qr(A)
    X = Q[:, 1:] * np.sqrt(n)
    full_beta = np.zeros(p)
    beta = np.asarray(beta, dtype=float)
    full_beta[: beta.size] = beta
    y = X @ full_beta + sigma * rng.standard_normal(n)
    y = y - y.mean()
    return Dataset(X, y), full_beta


def brute_force_lasso_2d(X, y, lam, resolution=1e-3):
    """Grid minimizer of the two-column l1-penalized least squares objective.

    Expands the quadratic so the grid sweep works on scalars only.  The
    search box is the l1 ball of the unpenalized solution (the penalized
    minimizer always has a smaller l1 norm) plus a margin.
    """
    n = X.shape[0]
    x1, x2 = X[:, 0], X[:, 1]
    yy = y @ y
    c1, c2 = x1 @ y, x2 @ y
    g11, g22, g12 = x1 @ x1, x2 @ x2, x1 @ x2
    ols = np.linalg.solve(np.array([[g11, g12], [g12, g22]]), np.array([c1, c2]))
    radius = np.abs(ols).sum() + 10 * resolution
    m = int(np.ceil(radius / resolution))
    axis = np.arange(-m, m + 1) * resolution
    best = (np.inf, 0.0, 0.0)
    pen2 = lam * np.abs(axis)
    quad2 = 0.5 * g22 / n * axis * axis - c2 / n * axis
    for lo in range(0, axis.size, 512):
        b1 = axis[lo : lo + 512][:, None]
        obj = (
            0.5 * yy / n
            + 0.5 * g11 / n * b1 * b1
            - c1 / n * b1
            + lam * np.abs(b1)
            + (g12 / n) * b1 * axis[None, :]
            + (quad2 + pen2)[None, :]
        )
        flat = np.argmin(obj)
        i, j = np.unravel_index(flat, obj.shape)
        if obj[i, j] < best[0]:
            best = (obj[i, j], float(b1[i, 0]), float(axis[j]))
    return np.array(best[1:])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
