import logging
import typing

import numpy as np
import scipy.linalg

from fertcast import constants
from fertcast.exceptions import (
    ConvergenceException,
    FertcastException,
    SingularDesignException,
)
from fertcast.models.regression_models import (
    DesignMatrix,
    FamilySpec,
    FittedModel,
    LassoConfig,
)
from fertcast.models.series_models import RegionSeries
from fertcast.series import prediction_correlation

__logger = logging.getLogger(__name__)

INTERCEPT_COLUMN = "(intercept)"


def fit_constant(y: RegionSeries) -> FittedModel:
    if len(y) == 0:
        raise FertcastException(f"Cannot fit a constant model on empty '{y.variable_name}'")
    return FittedModel(
        family=constants.MODEL_FAMILY_CONSTANT,
        intercept=float(np.mean(y.vector())),
        variable=y.variable_name,
    )


def fit_ols(
    x: DesignMatrix,
    y: RegionSeries,
    columns: typing.Sequence[str] = None,
    family: str = None,
) -> FittedModel:
    columns = list(x.columns if columns is None else columns)
    target = x.target_vector(y)
    if x.n_rows < len(columns) + 1:
        raise FertcastException(
            f"Least squares needs at least {len(columns) + 1} rows, got {x.n_rows}"
        )

    design = np.column_stack(
        [np.ones(x.n_rows)] + [x.values[:, x.column_index(name)] for name in columns]
    )
    q_matrix, r_matrix, pivots = scipy.linalg.qr(design, mode="economic", pivoting=True)
    diagonal = np.abs(np.diag(r_matrix))
    threshold = max(design.shape) * np.finfo(float).eps * (diagonal[0] if diagonal.size else 0.0)
    rank = int(np.sum(diagonal > threshold))
    if rank < design.shape[1]:
        names = [INTERCEPT_COLUMN] + columns
        raise SingularDesignException([names[index] for index in pivots[rank:]])

    solution = np.empty(design.shape[1])
    solution[pivots] = scipy.linalg.solve_triangular(r_matrix, q_matrix.T @ target)

    if family is None:
        family = (
            constants.MODEL_FAMILY_OLS_SINGLE
            if len(columns) == 1
            else constants.MODEL_FAMILY_OLS_MULTI
        )
    return FittedModel(
        family=family,
        intercept=float(solution[0]),
        coefficients=dict(zip(columns, (float(coef) for coef in solution[1:]))),
        variable=y.variable_name,
    )


class _CenteredProblem:
    """Centered Gram form of the lasso problem on one training set."""

    def __init__(
        self, columns: typing.Sequence[str], values: np.ndarray, target: np.ndarray
    ):
        self.columns = tuple(columns)
        self.n_rows = values.shape[0]
        self.x_mean = values.mean(axis=0) if self.n_rows else np.zeros(len(self.columns))
        self.y_mean = float(target.mean())
        centered_x = values - self.x_mean
        centered_y = target - self.y_mean
        self.gram = centered_x.T @ centered_x / self.n_rows
        self.correlations = centered_x.T @ centered_y / self.n_rows
        self.y_energy = float(centered_y @ centered_y) / self.n_rows

    @classmethod
    def from_design(cls, x: DesignMatrix, y: RegionSeries) -> "_CenteredProblem":
        return cls(x.columns, x.values, x.target_vector(y))

    def max_lambda(self) -> float:
        if not len(self.correlations):
            return 0.0
        return float(np.max(np.abs(self.correlations)))

    def objective(self, beta: np.ndarray, lambda_value: float) -> float:
        return (
            0.5 * self.y_energy
            - float(self.correlations @ beta)
            + 0.5 * float(beta @ self.gram @ beta)
            + lambda_value * float(np.sum(np.abs(beta)))
        )

    def intercept(self, beta: np.ndarray) -> float:
        return self.y_mean - float(self.x_mean @ beta)


def lasso_max_lambda(x: DesignMatrix, y: RegionSeries) -> float:
    """Smallest penalty at which every slope is zero."""
    return _CenteredProblem.from_design(x, y).max_lambda()


def _solve_on_support(
    problem: _CenteredProblem, active: np.ndarray, signs: np.ndarray, lambda_value: float
) -> np.ndarray:
    rhs = problem.correlations[active] - lambda_value * signs
    gram_active = problem.gram[np.ix_(active, active)]
    if not active.size:
        return np.zeros(0)
    try:
        return np.linalg.solve(gram_active, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(gram_active, rhs, rcond=None)[0]


def _refine_on_support(
    problem: _CenteredProblem, beta: np.ndarray, lambda_value: float, config: LassoConfig
) -> typing.Optional[np.ndarray]:
    """Exact solution on the current support and signs, None unless it passes KKT.

    Terms whose closed form solution changes sign leave the support.
    """
    active = np.flatnonzero(beta)
    signs = np.sign(beta[active])
    while True:
        solution = _solve_on_support(problem, active, signs, lambda_value)
        leaving = (np.abs(solution) < constants.LASSO_ZERO_SNAP) | (
            np.sign(solution) != signs
        )
        if not np.any(leaving):
            break
        active, signs = active[~leaving], signs[~leaving]

    refined = np.zeros_like(beta)
    refined[active] = solution
    gradient = problem.correlations - problem.gram @ refined
    tolerance = config.tolerance * max(1.0, problem.max_lambda())
    inactive = np.ones(beta.size, dtype=bool)
    inactive[active] = False
    if np.any(np.abs(gradient[active] - lambda_value * signs) > tolerance):
        return None
    if np.any(np.abs(gradient[inactive]) > lambda_value + tolerance):
        return None
    return refined


def _coordinate_descent(
    problem: _CenteredProblem,
    lambda_value: float,
    config: LassoConfig,
    initial: np.ndarray = None,
    check_objective: bool = False,
) -> np.ndarray:
    n_columns = len(problem.columns)
    beta = np.zeros(n_columns) if initial is None else np.array(initial, dtype=float)
    if n_columns == 0:
        return beta

    gram = problem.gram
    correlations = problem.correlations
    diagonal = np.diag(gram)
    previous_objective = problem.objective(beta, lambda_value) if check_objective else None
    previous_signs = np.sign(beta)
    max_change = float("inf")
    for sweep in range(1, config.max_sweeps + 1):
        max_change = 0.0
        # Fixed column order per sweep
        for index in range(n_columns):
            if diagonal[index] <= 0.0:
                new_value = 0.0
            else:
                rho = (
                    correlations[index]
                    - gram[index] @ beta
                    + diagonal[index] * beta[index]
                )
                new_value = (
                    np.sign(rho) * max(abs(rho) - lambda_value, 0.0) / diagonal[index]
                )
            max_change = max(max_change, abs(new_value - beta[index]))
            beta[index] = new_value

        if check_objective:
            current_objective = problem.objective(beta, lambda_value)
            if current_objective > previous_objective + 1e-12 * max(
                1.0, abs(previous_objective)
            ):
                raise FertcastException(
                    f"Lasso objective increased at sweep {sweep}: "
                    f"{previous_objective!r} -> {current_objective!r}"
                )
            previous_objective = current_objective

        if max_change < config.tolerance * max(1.0, float(np.max(np.abs(beta)))):
            __logger.debug(
                "Coordinate descent converged in %d sweeps (lambda %s)",
                sweep,
                lambda_value,
            )
            break

        # Once the signs settle the support problem has a closed form
        signs = np.sign(beta)
        if np.array_equal(signs, previous_signs):
            refined = _refine_on_support(problem, beta, lambda_value, config)
            if refined is not None:
                __logger.debug(
                    "Support settled after %d sweeps (lambda %s)", sweep, lambda_value
                )
                beta = refined
                break
        previous_signs = signs
    else:
        raise ConvergenceException(config.max_sweeps, max_change, lambda_value)

    beta[np.abs(beta) < constants.LASSO_ZERO_SNAP] = 0.0
    return beta


def _lasso_model(
    problem: _CenteredProblem, beta: np.ndarray, lambda_value: float, variable: str
) -> FittedModel:
    return FittedModel(
        family=constants.MODEL_FAMILY_LASSO,
        intercept=problem.intercept(beta),
        coefficients=dict(zip(problem.columns, (float(coef) for coef in beta))),
        lambda_value=float(lambda_value),
        variable=variable,
    )


def fit_lasso(
    x: DesignMatrix,
    y: RegionSeries,
    lambda_value: float,
    config: LassoConfig = LassoConfig(),
    initial: typing.Mapping[str, float] = None,
    check_objective: bool = False,
) -> FittedModel:
    """Cyclic coordinate descent for the lasso with an unpenalized intercept.

    Minimizes ``1/(2n) * ||y - b0 - X b||^2 + lambda * |b|_1``.
    """
    if lambda_value < 0:
        raise FertcastException(f"Lambda must be non negative, got {lambda_value}")
    if x.n_rows == 0:
        raise FertcastException("Cannot fit a lasso model without rows")
    problem = _CenteredProblem.from_design(x, y)
    start = (
        np.array([initial.get(name, 0.0) for name in x.columns])
        if initial is not None
        else None
    )
    beta = _coordinate_descent(
        problem, lambda_value, config, initial=start, check_objective=check_objective
    )
    return _lasso_model(problem, beta, lambda_value, y.variable_name)


def lambda_grid(
    x: DesignMatrix,
    y: RegionSeries,
    n_points: int = constants.DEFAULT_LAMBDA_POINTS,
    ratio: float = constants.DEFAULT_LAMBDA_RATIO,
) -> typing.List[float]:
    """Log-spaced penalties from the null-model penalty downwards."""
    lambda_max = lasso_max_lambda(x, y)
    if lambda_max <= 0.0:
        return [0.0]
    if n_points == 1:
        return [lambda_max]
    return [float(value) for value in np.geomspace(lambda_max, ratio * lambda_max, n_points)]


def _path_coefficients(
    problem: _CenteredProblem,
    descending: typing.Sequence[float],
    config: LassoConfig,
    check_objective: bool = False,
) -> typing.List[np.ndarray]:
    beta = np.zeros(len(problem.columns))
    path = []
    for lambda_value in descending:
        beta = _coordinate_descent(
            problem, lambda_value, config, initial=beta, check_objective=check_objective
        )
        path.append(beta.copy())
    return path


def lasso_path(
    x: DesignMatrix,
    y: RegionSeries,
    grid: typing.Sequence[float],
    config: LassoConfig = LassoConfig(),
    check_objective: bool = False,
) -> typing.List[FittedModel]:
    """Warm-started fits from the largest penalty down."""
    problem = _CenteredProblem.from_design(x, y)
    descending = sorted(grid, reverse=True)
    return [
        _lasso_model(problem, beta, lambda_value, y.variable_name)
        for lambda_value, beta in zip(
            descending, _path_coefficients(problem, descending, config, check_objective)
        )
    ]


def select_lambda(
    x: DesignMatrix,
    y: RegionSeries,
    grid: typing.Sequence[float],
    config: LassoConfig = LassoConfig(),
) -> float:
    """Penalty with the lowest inner leave-one-out RMSE; ties go to the larger one."""
    descending = sorted(grid, reverse=True)
    if not descending:
        raise FertcastException("Cannot select a penalty from an empty grid")
    if len(descending) == 1:
        return float(descending[0])

    target = x.target_vector(y)
    squared_errors = np.zeros((x.n_rows, len(descending)))
    for row_index in range(x.n_rows):
        keep = np.arange(x.n_rows) != row_index
        problem = _CenteredProblem(x.columns, x.values[keep], target[keep])
        held_out = x.values[row_index]
        path = np.array(_path_coefficients(problem, descending, config))
        intercepts = problem.y_mean - path @ problem.x_mean
        errors = intercepts + path @ held_out - target[row_index]
        squared_errors[row_index, :] = errors * errors

    rmse_values = np.sqrt(squared_errors.mean(axis=0))
    best = float(np.min(rmse_values))
    chosen = next(
        index
        for index, value in enumerate(rmse_values)
        if value <= best * (1.0 + 1e-12)
    )
    __logger.debug(
        "Selected lambda %s (inner RMSE %s) for '%s'",
        descending[chosen],
        rmse_values[chosen],
        y.variable_name,
    )
    return float(descending[chosen])


def predict(model: FittedModel, x: DesignMatrix) -> RegionSeries:
    terms = [term for term, coef in model.coefficients.items() if coef != 0.0]
    missing = [term for term in terms if term not in x.columns]
    if missing:
        raise FertcastException(f"Design matrix lacks model terms {missing}")
    predictions = np.full(x.n_rows, model.intercept)
    if terms:
        coefficients = np.array([model.coefficients[term] for term in terms])
        columns = x.values[:, [x.column_index(term) for term in terms]]
        predictions = predictions + columns @ coefficients
    return RegionSeries.from_vector(model.variable or "prediction", x.rows, predictions)


def _drop_region(y: RegionSeries, region: str) -> RegionSeries:
    return RegionSeries(
        y.variable_name, {key: value for key, value in y.values.items() if key != region}
    )


def choose_single_term(
    x: DesignMatrix, y: RegionSeries, mode: str = constants.SINGLE_TERM_MODE_CV
) -> str:
    if not x.columns:
        raise FertcastException("Single term models need at least one term")
    if mode == constants.SINGLE_TERM_MODE_TOP:
        return x.columns[0]
    if mode != constants.SINGLE_TERM_MODE_CV:
        raise FertcastException(f"Unknown single term mode '{mode}'")

    best_term, best_r = None, None
    for term in x.columns:
        column = x.select_columns([term])
        predictions = []
        truths = []
        for region in x.rows:
            model = fit_ols(column.without_row(region), _drop_region(y, region), [term])
            predictions.append(predict(model, column.only_row(region)).values[region])
            truths.append(y.values[region])
        r_value = prediction_correlation(predictions, truths)
        # Ties keep the earlier (higher ranked) term
        if best_r is None or r_value > best_r:
            best_term, best_r = term, r_value
    __logger.debug("Single term chosen for '%s': %s (r %s)", y.variable_name, best_term, best_r)
    return best_term


def fit_family(spec: FamilySpec, x: DesignMatrix, y: RegionSeries) -> FittedModel:
    if spec.family == constants.MODEL_FAMILY_CONSTANT:
        return fit_constant(y)
    if spec.family == constants.MODEL_FAMILY_OLS_MULTI:
        return fit_ols(x, y, x.columns, family=constants.MODEL_FAMILY_OLS_MULTI)
    if spec.family == constants.MODEL_FAMILY_OLS_SINGLE:
        term = choose_single_term(x, y, spec.single_term_mode)
        return fit_ols(x, y, [term], family=constants.MODEL_FAMILY_OLS_SINGLE)
    if spec.family == constants.MODEL_FAMILY_LASSO:
        grid = lambda_grid(x, y, spec.lasso.grid_size, spec.lasso.ratio)
        lambda_value = select_lambda(x, y, grid, spec.lasso)
        return fit_lasso(x, y, lambda_value, spec.lasso)
    raise FertcastException(f"Unknown model family '{spec.family}'")


def sparsification(model: FittedModel) -> typing.List[str]:
    """Candidate terms the fit assigned exactly zero."""
    return model.removed_terms
