"""Provides the regression test that asks whether a selective-measurement state can be written as a mixture of
unitarily post-processed non-selective states, and certifies the answer with least squares"""

import numpy as np
import pandas as pd
from scipy.optimize import nnls
from measuretherm import utils
from measuretherm.exceptions import ConfigurationError

LOGGER = utils.get_logger(__name__)

SOLVABLE_TOLERANCE = 1e-10
UNSOLVABLE_THRESHOLD = 1e-3
SUBSTANTIAL_WEIGHT = 0.05
NORMALIZATION_TOLERANCE = 1e-10
SUM_ROW_WEIGHT = 1e4


class RegressionInstance:

    def __init__(self, coefficients, target_outcome, chi, pointer_labels=None):
        """
        :param coefficients: Complex amplitudes c_n of the measured state
        :param target_outcome: Index m of the selected outcome (must have nonzero Born weight)
        :param chi: Probabilities chi_r of the pointer states after reading outcome m
        :param pointer_labels: Labels of the pointer states (default 1..R)
        """
        self._coefficients = np.asarray(coefficients, dtype=complex).reshape(-1)
        self._chi = np.asarray(chi, dtype=float).reshape(-1)
        self._target_outcome = int(target_outcome)
        weights = np.abs(self._coefficients) ** 2
        if not np.any(weights > 0):
            raise ConfigurationError("At least one coefficient must be nonzero", field="coefficients")
        if abs(weights.sum() - 1) > NORMALIZATION_TOLERANCE:
            raise ConfigurationError(f"Coefficients are not normalized (sum |c_n|^2 = {weights.sum()!r})",
                                     field="coefficients")
        if not 0 <= self._target_outcome < self._coefficients.size:
            raise ConfigurationError(f"Target outcome {self._target_outcome} out of range", field="target_outcome")
        if weights[self._target_outcome] == 0:
            raise ConfigurationError("The target outcome has zero Born weight", field="target_outcome")
        if self._chi.size == 0 or np.any(self._chi < 0) or abs(self._chi.sum() - 1) > NORMALIZATION_TOLERANCE:
            raise ConfigurationError("chi must be a probability vector", field="chi")
        if pointer_labels is None:
            pointer_labels = list(range(1, self._chi.size + 1))
        if len(pointer_labels) != self._chi.size:
            raise ConfigurationError("One pointer label is needed per chi entry", field="pointer_labels")
        self._pointer_labels = list(pointer_labels)

    @property
    def coefficients(self):
        return self._coefficients

    @property
    def weights(self):
        return np.abs(self._coefficients) ** 2

    @property
    def target_outcome(self):
        return self._target_outcome

    @property
    def chi(self):
        return self._chi

    @property
    def pointer_labels(self):
        return self._pointer_labels

    @property
    def nonzero_outcomes(self):
        return int(np.count_nonzero(self.weights > 0))

    def is_substantial(self):
        """ At least two coefficients and one chi atom carry weight SUBSTANTIAL_WEIGHT or more """
        return np.count_nonzero(self.weights >= SUBSTANTIAL_WEIGHT) >= 2 and self._chi.max() >= SUBSTANTIAL_WEIGHT


class LinearSystem:

    def __init__(self, matrix, rhs, row_labels):
        self.matrix = np.asarray(matrix, dtype=float)
        self.rhs = np.asarray(rhs, dtype=float)
        self.row_labels = list(row_labels)

    @property
    def shape(self):
        return self.matrix.shape

    def scaled(self, factor):
        return LinearSystem(self.matrix, self.rhs * factor, self.row_labels)


class ResidualReport:

    def __init__(self, best_u, residual, constrained_u=None, constrained_residual=None):
        """
        :param best_u: Unconstrained least-squares solution
        :param residual: Minimum residual norm ||Au - b||
        :param constrained_u: Solution restricted to mixtures (u >= 0, sum u = 1)
        :param constrained_residual: Residual norm of the constrained solution
        """
        self.best_u = np.asarray(best_u, dtype=float)
        self.residual = float(residual)
        self.constrained_u = constrained_u
        self.constrained_residual = constrained_residual

    @property
    def squared_residual(self):
        return self.residual ** 2

    @property
    def solvable(self):
        return self.residual < SOLVABLE_TOLERANCE

    def to_dict(self):
        return {"residual": self.residual, "squared_residual": self.squared_residual, "solvable": self.solvable,
                "constrained_residual": self.constrained_residual}


"""
OPERATIONS
"""


def build_constraints(instance):
    """ One equation u_r |c_n|^2 = delta_mn chi_r per pointer r and outcome n with nonzero |c_n|^2 """
    weights = instance.weights
    outcomes = np.flatnonzero(weights > 0)
    pointers = instance.chi.size
    matrix = np.zeros((pointers * outcomes.size, pointers))
    rhs = np.zeros(pointers * outcomes.size)
    labels = []
    row = 0
    for r in range(pointers):
        for n in outcomes:
            matrix[row, r] = weights[n]
            rhs[row] = instance.chi[r] if n == instance.target_outcome else 0.0
            labels.append((instance.pointer_labels[r], int(n)))
            row += 1
    return LinearSystem(matrix, rhs, labels)


def solve_least_squares(system):
    """ Minimizes ||Au - b|| over real u; the residual norm is recomputed from the solution so it is defined for
    rank-deficient systems too """
    if system.matrix.size == 0:
        raise ConfigurationError("The constraint system is empty")
    solution = np.linalg.lstsq(system.matrix, system.rhs, rcond=None)[0]
    residual = float(np.linalg.norm(system.matrix @ solution - system.rhs))
    return ResidualReport(solution, residual)


def solve_mixture(system):
    """ Nonnegative least squares with the normalization sum u = 1 appended as a heavily weighted row """
    columns = system.matrix.shape[1]
    matrix = np.vstack([system.matrix, SUM_ROW_WEIGHT * np.ones((1, columns))])
    rhs = np.concatenate([system.rhs, [SUM_ROW_WEIGHT]])
    solution, _ = nnls(matrix, rhs)
    return solution, float(np.linalg.norm(system.matrix @ solution - system.rhs))


def verify_regression(instance):
    """ Builds and solves the constraint system; reports both the unconstrained and the mixture-constrained fit """
    system = build_constraints(instance)
    report = solve_least_squares(system)
    report.constrained_u, report.constrained_residual = solve_mixture(system)
    LOGGER.debug("Regression with %i nonzero outcomes: residual=%r", instance.nonzero_outcomes, report.residual)
    return report


def closed_form_residual(instance):
    """ Exact minimum of the squared residual: sum_r chi_r^2 (sum_{n != m} a_n^2)/(sum_n a_n^2), a_n = |c_n|^2 """
    weights = instance.weights
    total = float(np.sum(weights ** 2))
    off_target = total - weights[instance.target_outcome] ** 2
    return float(np.sum(instance.chi ** 2) * off_target / total)


def random_instance(rng, outcomes=3, pointers=3, substantial=True, max_attempts=1000):
    """ Random coefficients and chi; with substantial=True the draw is repeated until is_substantial() holds """
    for _ in range(max_attempts):
        amplitudes = rng.normal(size=outcomes) + 1j * rng.normal(size=outcomes)
        amplitudes = amplitudes / np.linalg.norm(amplitudes)
        chi = rng.dirichlet(np.ones(pointers))
        target = int(rng.integers(outcomes))
        instance = RegressionInstance(amplitudes, target, chi)
        if not substantial or instance.is_substantial():
            return instance
    raise ConfigurationError(f"No substantial instance found in {max_attempts} draws")


def regression_sweep(rng, count, outcomes=3, pointers=3):
    """
    Verifies `count` random substantial instances
    :return: pandas DataFrame with one row per instance
    """
    rows = []
    for index in range(count):
        instance = random_instance(rng, outcomes, pointers)
        report = verify_regression(instance)
        rows.append({"instance": index, "coefficients": utils.format_number_list(instance.coefficients.tolist()),
                     "chi": utils.format_number_list(instance.chi.tolist()), "residual": report.residual,
                     "closed_form": np.sqrt(closed_form_residual(instance)), "solvable": report.solvable,
                     "constrained_residual": report.constrained_residual})
    return pd.DataFrame(rows)
