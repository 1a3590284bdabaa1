"""Criterion tests: the four CV criteria, information criteria, surfaces."""

import io
import math

import numpy as np
import pytest

from mccv import (
    Dataset,
    criterion_surface,
    evaluate_split_path,
    fit_path,
    gamma0,
    gamma1,
    gamma2,
    gamma3,
    info_criterion,
    lambda_grid,
    make_mccv,
    shrinkage_correction,
    take_rows,
)
from mccv.criteria import SplitEvaluation, lse_validation_prediction
from mccv.errors import LengthMismatch, SingularGram, SupportTooLarge
from mccv.solver import PathPoint, SolutionPath

from conftest import gaussian_problem


def make_point(lam, support, coefficients, converged=True):
    support = np.asarray(support, dtype=np.intp)
    coefficients = np.asarray(coefficients, dtype=float)
    return PathPoint(
        lam=lam,
        support=support,
        coefficients=coefficients,
        signs=np.sign(coefficients),
        iterations=1,
        converged=converged,
    )


def test_gamma0_basics():
    assert gamma0(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0
    assert gamma0(np.array([1.0, -1.0]), np.zeros(2)) == 1.0
    y = np.array([3.0, -1.0, 2.0])
    assert gamma0(y, np.zeros(3)) == pytest.approx(float(y @ y) / 3)
    with pytest.raises(LengthMismatch):
        gamma0(np.zeros(3), np.zeros(2))


def test_gamma1_hand_computed_correction():
    construction = Dataset(np.array([[1.0], [1.0]]), np.array([0.7, 1.3]))
    validation = Dataset(np.array([[1.0], [-1.0]]), np.array([0.2, -0.1]))
    point = make_point(0.5, [0], [0.3])
    # Gram = 2, sign +1, M = (0.5, -0.5)', so the correction is
    # (0.25 * 4 / 2) * 0.5 = 0.25
    assert shrinkage_correction(construction, validation, point, 0.5) == pytest.approx(0.25)
    base = gamma0(validation.y, validation.X[:, [0]] @ point.coefficients)
    assert gamma1(construction, validation, point, 0.5) == pytest.approx(base - 0.25)


def test_gamma1_empty_support_equals_gamma0():
    construction = Dataset(np.eye(3), np.array([1.0, 2.0, 0.5]))
    validation = Dataset(np.eye(3), np.array([0.3, -0.2, 0.9]))
    point = make_point(0.4, [], [])
    expected = gamma0(validation.y, np.zeros(3))
    assert gamma1(construction, validation, point, 0.4) == pytest.approx(expected)


def test_gamma1_error_cases():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((4, 6))
    X[:, 2] = X[:, 1]
    construction = Dataset(X, rng.standard_normal(4))
    validation = Dataset(rng.standard_normal((3, 6)), rng.standard_normal(3))
    with pytest.raises(SingularGram):
        gamma1(construction, validation, make_point(0.1, [1, 2], [0.5, 0.5]), 0.1)
    big = make_point(0.1, [0, 1, 3, 4], [1.0, 1.0, 1.0, 1.0])
    with pytest.raises(SupportTooLarge):
        gamma1(construction, validation, big, 0.1)


def test_exact_correction_matches_prediction_gap():
    # gamma0 - gamma1 must equal the squared distance between the penalized
    # and least-squares validation predictions, divided by n_v.
    data, _ = gaussian_problem(
        seed=21, n=140, p=80, beta=[4.0, 3.0, 2.0, 0.0, 0.0, -4.0, 3.0, -2.0],
        kind="expdecay", rho=0.5,
    )
    grid = lambda_grid(data, 25)
    plan = make_mccv(data.n, 60, 3, seed=5)
    checked = 0
    for rows_c, rows_v in plan.pairs:
        con, val = take_rows(data, rows_c), take_rows(data, rows_v)
        path = fit_path(con, grid, tol=1e-9)
        for point in path:
            if not 0 < point.d <= con.n // 3:
                continue
            y_hat = val.X[:, point.support] @ point.coefficients
            y_tilde = lse_validation_prediction(con, val, point.support)
            gap = float((y_hat - y_tilde) @ (y_hat - y_tilde)) / val.n
            g1 = gamma1(con, val, point, point.lam)
            assert abs(gamma0(val.y, y_hat) - g1 - gap) < 1e-6
            # cross-term expansion linking the LSE criterion to the exact one
            cross = float((val.y - y_tilde) @ (y_hat - y_tilde)) / val.n
            g3 = gamma3(val.y, y_tilde)
            assert g1 == pytest.approx(g3 - 2.0 * cross, abs=1e-6)
            checked += 1
    assert checked >= 20


def test_gamma2_arithmetic():
    assert gamma2(1.0, 0.1, 5) == pytest.approx(0.95)
    assert gamma2(0.8, 0.3, 0) == pytest.approx(0.8)
    assert gamma2(0.8, 0.0, 7) == pytest.approx(0.8)
    assert gamma2(1.0, 0.2, 3) <= 1.0


def test_gamma3_basics():
    y = np.array([1.0, -2.0])
    assert gamma3(y, y) == 0.0
    assert gamma3(y, np.zeros(2)) == pytest.approx(2.5)


def test_gamma3_empty_support():
    construction = Dataset(np.eye(2), np.array([1.0, -1.0]))
    validation = Dataset(np.eye(2), np.array([2.0, 0.0]))
    pred = lse_validation_prediction(construction, validation, np.array([], dtype=int))
    assert gamma3(validation.y, pred) == pytest.approx(2.0)


def test_info_criterion_values():
    rng = np.random.default_rng(31)
    n, p = 100, 1000
    X = rng.standard_normal((n, p))
    y = rng.standard_normal(n)
    y = y / np.sqrt((y * y).mean())  # RSS/n = 1 for the zero fit
    data = Dataset(X, y)
    from mccv.solver import LambdaGrid

    grid = LambdaGrid(values=np.array([1.0, 0.5]), lambda_max=1.0, ratio=0.5)
    # a zero fit on a 3-column support leaves RSS/n = 1 exactly
    points = (
        make_point(1.0, [], []),
        make_point(0.5, [0, 1, 2], [0.0, 0.0, 0.0]),
    )
    path = SolutionPath(grid=grid, points=points, p=p)
    aic = info_criterion(data, path, "aic")
    bic = info_criterion(data, path, "bic")
    ebic = info_criterion(data, path, "ebic", ebic_gamma=1.0)
    base = n * math.log(float(y @ y) / n)
    assert aic[0] == pytest.approx(base)
    assert bic[0] == pytest.approx(base)
    assert ebic[0] == pytest.approx(base)
    assert aic[1] == pytest.approx(6.0)
    assert bic[1] == pytest.approx(3 * math.log(100), abs=1e-9)
    assert ebic[1] == pytest.approx(3 * math.log(100) + 6 * math.log(1000), abs=1e-3)


def test_ebic_gamma_zero_is_bic():
    data, _ = gaussian_problem(seed=33, n=60, p=40, beta=[2.0, -1.0])
    grid = lambda_grid(data, 15)
    path = fit_path(data, grid)
    bic = info_criterion(data, path, "bic")
    ebic0 = info_criterion(data, path, "ebic", ebic_gamma=0.0)
    assert np.array_equal(bic, ebic0)


def test_info_criterion_permutation_invariant():
    data, _ = gaussian_problem(seed=35, n=50, p=30, beta=[2.0, -1.0, 1.0])
    grid = lambda_grid(data, 10)
    path = fit_path(data, grid)
    rng = np.random.default_rng(1)
    perm = rng.permutation(data.p)
    inverse = np.argsort(perm)
    permuted_data = Dataset(data.X[:, perm], data.y)
    points = []
    for point in path:
        mapped = inverse[point.support]
        order = np.argsort(mapped)
        points.append(
            make_point(point.lam, mapped[order], point.coefficients[order])
        )
    permuted_path = SolutionPath(grid=grid, points=tuple(points), p=data.p)
    for kind in ("aic", "bic", "ebic"):
        a = info_criterion(data, path, kind)
        b = info_criterion(permuted_data, permuted_path, kind)
        assert np.allclose(a, b, rtol=1e-12)


def _toy_evaluations():
    # three columns: all valid / half valid / nearly none valid
    rows = []
    for i in range(4):
        row = [
            SplitEvaluation(1.0, 1.0 + i, 1, 0.1, 1.0, True, True, True),
            SplitEvaluation(0.5, 2.0 + i, 2, 0.2, 2.0, i < 2, i < 2, True),
            SplitEvaluation(0.1, 3.0 + i, 3, 0.3, 3.0, i == 0, i == 0, True),
        ]
        rows.append(row)
    return rows


def test_surface_averages_and_disqualification():
    surface = criterion_surface(_toy_evaluations(), "gamma0")
    assert surface.averaged[0] == pytest.approx(np.mean([1.0, 2.0, 3.0, 4.0]))
    assert surface.averaged[1] == pytest.approx(np.mean([2.0, 3.0]))
    assert np.isnan(surface.averaged[2])
    assert surface.disqualified.tolist() == [False, False, True]


def test_surface_csv_blanks_invalid_cells():
    surface = criterion_surface(_toy_evaluations(), "gamma0")
    buf = io.StringIO()
    surface.to_csv(buf)
    lines = buf.getvalue().strip().split("\n")
    assert len(lines) == 4
    assert lines[3].split(",")[1] == ""  # split 4 is invalid in column 2


def test_gamma1_surface_requires_converged_points():
    rows = [[
        SplitEvaluation(1.0, 1.0, 1, 0.1, 1.0, True, True, False),
        SplitEvaluation(0.5, 1.0, 1, 0.1, 1.0, True, True, True),
    ]]
    surface = criterion_surface(rows, "gamma1")
    assert not surface.valid[0, 0]
    assert surface.valid[0, 1]


def test_modified_average_never_exceeds_plain_average():
    data, _ = gaussian_problem(seed=41, n=100, p=60, beta=[3.0, -2.0])
    grid = lambda_grid(data, 20)
    plan = make_mccv(data.n, 40, 6, seed=3)
    rows = [
        evaluate_split_path(
            take_rows(data, c), take_rows(data, v),
            fit_path(take_rows(data, c), grid), exact=False,
        )
        for c, v in plan.pairs
    ]
    plain = criterion_surface(rows, "gamma0")
    modified = criterion_surface(rows, "gamma2")
    both = ~plain.disqualified & ~modified.disqualified
    assert (modified.averaged[both] <= plain.averaged[both] + 1e-12).all()


def test_approximation_tracks_exact_correction_for_independent_design():
    # With independent standardized covariates and a large construction set,
    # the lam^2 * d approximation stays close to the exact correction.
    data, _ = gaussian_problem(
        seed=43, n=500, p=120, beta=[4.0, 3.0, 2.0, 0.0, 0.0, -4.0, 3.0, -2.0]
    )
    grid = lambda_grid(data, 30)
    full = fit_path(data, grid)
    target = next(i for i, pt in enumerate(full) if 4 < pt.d <= 8)
    plan = make_mccv(data.n, 200, 20, seed=9)  # n_c = 300
    diffs, sizes, lam = [], [], grid.values[target]
    for c, v in plan.pairs:
        con, val = take_rows(data, c), take_rows(data, v)
        path = fit_path(con, grid)
        evals = evaluate_split_path(con, val, path, exact=True)
        cell = evals[target]
        if cell.valid and cell.gram_ok and 0 < cell.d <= 8:
            g1 = cell.mse - cell.correction_exact
            g2 = gamma2(cell.mse, lam, cell.d)
            diffs.append(abs(g1 - g2))
            sizes.append(cell.d)
    assert len(diffs) >= 10
    assert np.median(diffs) <= 0.2 * lam * lam * np.median(sizes)
