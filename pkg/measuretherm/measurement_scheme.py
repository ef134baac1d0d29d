"""Provides the four-step selective measurement scheme on S0 + A + M: preparation, non-selective measurement,
entangling with the pointer, and event reading"""

from enum import Enum
import numpy as np
import pandas as pd
from scipy.stats import chi2, chisquare
from tqdm import tqdm
from measuretherm import utils
from measuretherm.exceptions import ConfigurationError, InvariantViolationError, ProtocolError
from measuretherm.operators import (DensityMatrix, StateVector, born_probabilities, computational_family, dephase,
                                    lift_family)

LOGGER = utils.get_logger(__name__)

NORMALIZATION_TOLERANCE = 1e-12


class Stage(str, Enum):
    INITIAL = "initial"
    POST_NONSELECTIVE = "post_nonselective"
    POST_ENTANGLING = "post_entangling"
    POST_READING = "post_reading"

    @classmethod
    def list(cls):
        return list(map(lambda c: c.value, cls))


class SchemeConfig:

    def __init__(self, coefficients, eigenvalues=None, apparatus_dimension=1, pointer_dimension=None, seed=42,
                 lambda_A=1.0, lambda_M=1.0):
        """
        :param coefficients: Complex amplitudes c_n of the measured system in the eigenbasis of the observable
        :param eigenvalues: Distinct real eigenvalues x_n (default 0..n-1)
        :param apparatus_dimension: Dimension of the apparatus A, held in its reference state |A_0>
        :param pointer_dimension: Dimension of the pointer space M; must exceed the number of outcomes
            (default: number of outcomes + 1)
        :param seed: Seed of the event-reading generator used by run_scheme
        :param lambda_A: Apparatus coupling strength (absorbed into the unit of time)
        :param lambda_M: Pointer coupling strength (absorbed into the unit of time)
        """
        self._coefficients = np.asarray(coefficients, dtype=complex).reshape(-1)
        outcomes = self._coefficients.size
        if outcomes == 0:
            raise ConfigurationError("At least one coefficient is required", field="coefficients")
        norm = float(np.sum(np.abs(self._coefficients) ** 2))
        if abs(norm - 1) > NORMALIZATION_TOLERANCE:
            raise ConfigurationError(f"Coefficients are not normalized (sum |c_n|^2 = {norm!r})", field="coefficients")
        if eigenvalues is None:
            eigenvalues = np.arange(outcomes, dtype=float)
        self._eigenvalues = np.asarray(eigenvalues, dtype=float).reshape(-1)
        if self._eigenvalues.size != outcomes:
            raise ConfigurationError("One eigenvalue is needed per coefficient", field="eigenvalues")
        if len(np.unique(self._eigenvalues)) != outcomes:
            raise ConfigurationError("Eigenvalues must be pairwise distinct", field="eigenvalues")
        if pointer_dimension is None:
            pointer_dimension = outcomes + 1
        if pointer_dimension <= outcomes:
            raise ConfigurationError(f"Pointer dimension {pointer_dimension} must exceed the number of outcomes "
                                     f"{outcomes}", field="pointer_dimension")
        if apparatus_dimension < 1:
            raise ConfigurationError("Apparatus dimension must be positive", field="apparatus_dimension")
        if lambda_A <= 0 or lambda_M <= 0:
            raise ConfigurationError("Coupling strengths must be positive", field="lambda_A/lambda_M")
        self._apparatus_dimension = int(apparatus_dimension)
        self._pointer_dimension = int(pointer_dimension)
        self._seed = int(seed)
        self._lambda_A = float(lambda_A)
        self._lambda_M = float(lambda_M)
        self._shift_unitary = None
        self._system_family = None
        self._pointer_family = None

    @property
    def coefficients(self):
        return self._coefficients

    @property
    def eigenvalues(self):
        return self._eigenvalues

    @property
    def outcomes(self):
        return self._coefficients.size

    @property
    def born_weights(self):
        return np.abs(self._coefficients) ** 2

    @property
    def apparatus_dimension(self):
        return self._apparatus_dimension

    @property
    def pointer_dimension(self):
        return self._pointer_dimension

    @property
    def seed(self):
        return self._seed

    @property
    def lambda_A(self):
        return self._lambda_A

    @property
    def lambda_M(self):
        return self._lambda_M

    @property
    def dims(self):
        """ Subsystem dimensions in tensor order S0, A, M """
        return [self.outcomes, self._apparatus_dimension, self._pointer_dimension]

    @property
    def dimension(self):
        return int(np.prod(self.dims))

    @property
    def system_family(self):
        """ The family {|x_n><x_n| x 1^A x 1^M} """
        if self._system_family is None:
            self._system_family = lift_family(computational_family(self.outcomes), self.dims, 0)
        return self._system_family

    @property
    def pointer_family(self):
        """ The family {1^S0 x 1^A x |M_k><M_k|}, k = 0..pointer_dimension-1 """
        if self._pointer_family is None:
            self._pointer_family = lift_family(computational_family(self._pointer_dimension), self.dims, 2)
        return self._pointer_family

    @property
    def pointer_shift_unitary(self):
        if self._shift_unitary is None:
            self._shift_unitary = pointer_shift_unitary(self)
        return self._shift_unitary

    def with_seed(self, seed):
        return SchemeConfig(self._coefficients, self._eigenvalues, self._apparatus_dimension, self._pointer_dimension,
                            seed, self._lambda_A, self._lambda_M)


class SchemeState:

    def __init__(self, stage, rho, config, outcome=None):
        self._stage = Stage(stage)
        self._rho = rho
        self._config = config
        if (outcome is not None) != (self._stage == Stage.POST_READING):
            raise InvariantViolationError("outcome-presence", "an outcome is present iff the stage is post_reading")
        self._outcome = outcome

    @property
    def stage(self):
        return self._stage

    @property
    def rho(self):
        return self._rho

    @property
    def config(self):
        return self._config

    @property
    def outcome(self):
        return self._outcome

    def to_dict(self):
        record = {"stage": self._stage.value, "trace": self._rho.trace, "purity": self._rho.purity,
                  "outcome": -1 if self._outcome is None else self._outcome}
        for index, value in enumerate(self._rho.diagonal):
            record[f"diag_{index}"] = value
        return record

    def __repr__(self):
        return f"<SchemeState stage:{self._stage.value} outcome:{self._outcome}>"


class SchemeTranscript:

    def __init__(self, config, states):
        self._config = config
        self._states = list(states)

    @property
    def config(self):
        return self._config

    @property
    def states(self):
        return self._states

    @property
    def outcome(self):
        return self._states[-1].outcome

    def state(self, stage):
        for state in self._states:
            if state.stage == Stage(stage):
                return state
        raise KeyError(stage)

    def to_dataframe(self):
        return pd.DataFrame([s.to_dict() for s in self._states])


class SchemeStatistics:

    def __init__(self, counts, expected, chi_squared, critical_value):
        self._counts = np.asarray(counts, dtype=int)
        self._expected = np.asarray(expected, dtype=float)
        self._chi_squared = float(chi_squared)
        self._critical_value = float(critical_value)

    @property
    def counts(self):
        return self._counts

    @property
    def runs(self):
        return int(self._counts.sum())

    @property
    def frequencies(self):
        return self._counts / self.runs

    @property
    def expected(self):
        return self._expected

    @property
    def chi_squared(self):
        return self._chi_squared

    @property
    def critical_value(self):
        return self._critical_value

    def consistent(self):
        return self._chi_squared < self._critical_value

    def to_dataframe(self):
        return pd.DataFrame({"outcome": np.arange(self._counts.size), "count": self._counts,
                             "frequency": self.frequencies, "born_probability": self._expected})


"""
SCHEME STEPS
"""


def prepare_initial(config):
    """ Step (i): the pure ensemble (sum_n c_n |x_n, A_0>)|M_0> """
    amplitudes = np.zeros(config.dimension, dtype=complex)
    for index, coefficient in enumerate(config.coefficients):
        amplitudes[_basis_index(config, index, 0)] = coefficient
    rho = StateVector(amplitudes).projector()
    return SchemeState(Stage.INITIAL, rho, config)


def apply_nonselective(state):
    """ Step (ii): dephasing in the eigenbasis of the measured observable; the pure ensemble becomes an exclusive
    mixture with Born weights |c_n|^2 """
    _require_stage(state, Stage.INITIAL)
    return SchemeState(Stage.POST_NONSELECTIVE, dephase(state.rho, state.config.system_family), state.config)


def apply_entangling(state):
    """ Step (iii): the controlled pointer shift |x_n>|M_0> -> |x_n>|M_{n+1}> correlates M with the outcomes """
    _require_stage(state, Stage.POST_NONSELECTIVE)
    unitary = state.config.pointer_shift_unitary
    entries = unitary @ state.rho.entries @ unitary.conj().T
    return SchemeState(Stage.POST_ENTANGLING, DensityMatrix((entries + entries.conj().T) / 2), state.config)


def read_event(state, rng):
    """ Step (iv): samples one pointer reading with the Born rule and collapses onto the pure branch """
    _require_stage(state, Stage.POST_ENTANGLING)
    config = state.config
    probabilities = np.clip(born_probabilities(state.rho, config.pointer_family), 0, None)
    probabilities = probabilities / probabilities.sum()
    pointer = int(rng.choice(len(probabilities), p=probabilities))
    if pointer == 0:
        raise InvariantViolationError("pointer-ready-state", "the ready pointer state was read after entangling")
    projector = config.pointer_family.projectors[pointer]
    collapsed = projector @ state.rho.entries @ projector / probabilities[pointer]
    return SchemeState(Stage.POST_READING, DensityMatrix((collapsed + collapsed.conj().T) / 2), config,
                       outcome=pointer - 1)


def run_scheme(config, rng=None):
    """
    Runs the four steps in order; deterministic for a given config seed
    :return: SchemeTranscript with the four stage states and the sampled outcome
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    initial = prepare_initial(config)
    nonselective = apply_nonselective(initial)
    entangled = apply_entangling(nonselective)
    read = read_event(entangled, rng)
    LOGGER.debug("Scheme run finished with outcome %i", read.outcome)
    return SchemeTranscript(config, [initial, nonselective, entangled, read])


def pointer_shift_unitary(config):
    """ U_fb = sum_n |x_n><x_n| x 1^A x S^{n+1}, with S the modular shift |k> -> |k+1 mod D> on the pointer space """
    shift = np.roll(np.eye(config.pointer_dimension, dtype=complex), 1, axis=0)
    apparatus = np.eye(config.apparatus_dimension, dtype=complex)
    unitary = np.zeros((config.dimension, config.dimension), dtype=complex)
    for index in range(config.outcomes):
        outcome_projector = np.zeros((config.outcomes, config.outcomes), dtype=complex)
        outcome_projector[index, index] = 1
        unitary += np.kron(np.kron(outcome_projector, apparatus), np.linalg.matrix_power(shift, index + 1))
    return unitary


def scheme_statistics(config, runs, master_seed=None, progress=False):
    """
    Repeats the scheme with per-run seeds derived from the master seed and compares the outcome histogram with
    the Born weights through a chi-squared statistic
    :param runs: Number of independent runs
    :param master_seed: Master seed (defaults to the config seed)
    :param progress: Show a tqdm progress bar
    :return: SchemeStatistics
    """
    master_seed = config.seed if master_seed is None else master_seed
    counts = np.zeros(config.outcomes, dtype=int)
    for run in tqdm(range(runs), total=runs, disable=not progress):
        transcript = run_scheme(config, rng=utils.make_rng(master_seed, f"scheme-run-{run}"))
        counts[transcript.outcome] += 1
    expected = config.born_weights
    support = expected > 0
    observed = counts[support]
    chi_squared = float(chisquare(observed, observed.sum() * expected[support] / expected[support].sum()).statistic)
    degrees = max(int(support.sum()) - 1, 1)
    return SchemeStatistics(counts, expected, chi_squared, chi2.ppf(0.999, degrees))


"""
PRIVATE/HELPER FUNCTIONS
"""


def _basis_index(config, outcome, pointer):
    return (outcome * config.apparatus_dimension) * config.pointer_dimension + pointer


def _require_stage(state, expected):
    if state.stage != expected:
        raise ProtocolError(f"Expected a state at stage '{expected.value}', got '{state.stage.value}'")
