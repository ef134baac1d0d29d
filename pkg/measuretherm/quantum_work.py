"""Provides two-point-measurement work statistics of a driven system: the work distribution, the Jarzynski equality
with and without event readings, average work, the Crooks ratio and the definition-time renewal of the moment
generating function"""

from enum import Enum
import time
import numpy as np
import pandas as pd
from scipy.special import logsumexp
from tqdm import tqdm
from measuretherm import utils
from measuretherm.exceptions import ConfigurationError, InvariantViolationError
from measuretherm.operators import (HermitianOperator, as_hermitian, boltzmann_operator, canonical_state,
                                    log_partition_function, random_hermitian, random_real_symmetric,
                                    spectral_projectors)

LOGGER = utils.get_logger(__name__)

ATOM_TOLERANCE = 1e-9
NONDEGENERACY_TOLERANCE = 1e-10
JARZYNSKI_TOLERANCE = 1e-10
CROOKS_TOLERANCE = 1e-8
CROOKS_PROBABILITY_FLOOR = 1e-6
RANDOM_HAMILTONIAN_SCALE = 0.5


class StepRule(str, Enum):
    LEFT = "left"
    RIGHT = "right"

    def flipped(self):
        return StepRule.RIGHT if self == StepRule.LEFT else StepRule.LEFT


class DrivingProtocol:

    def __init__(self, hamiltonians, step, beta, rule=StepRule.LEFT):
        """
        Piecewise-constant driving H(t_0), ..., H(t_N) on the grid t_k = k * step
        :param hamiltonians: N + 1 Hermitian matrices
        :param step: Grid spacing delta_t > 0
        :param beta: Inverse temperature > 0
        :param rule: Which endpoint of [t_k, t_k+1] supplies the Hamiltonian of that step
        """
        self._hamiltonians = [as_hermitian(h) for h in hamiltonians]
        if len(self._hamiltonians) < 2:
            raise ConfigurationError("A protocol needs at least one step (two Hamiltonians)", field="steps")
        dimensions = {h.dimension for h in self._hamiltonians}
        if len(dimensions) != 1:
            raise ConfigurationError(f"Hamiltonians of mixed dimensions {sorted(dimensions)}", field="dimension")
        if step <= 0:
            raise ConfigurationError("The time step must be positive", field="step")
        if beta <= 0:
            raise ConfigurationError("beta must be positive", field="beta")
        self._step = float(step)
        self._beta = float(beta)
        self._rule = StepRule(rule)
        self._step_unitaries = {}
        self._prefix_unitaries = None

    @property
    def hamiltonians(self):
        return self._hamiltonians

    @property
    def steps(self):
        return len(self._hamiltonians) - 1

    @property
    def step(self):
        return self._step

    @property
    def duration(self):
        return self._step * self.steps

    @property
    def beta(self):
        return self._beta

    @property
    def rule(self):
        return self._rule

    @property
    def dimension(self):
        return self._hamiltonians[0].dimension

    @property
    def initial(self):
        return self._hamiltonians[0]

    @property
    def final(self):
        return self._hamiltonians[-1]

    def step_unitary(self, k):
        """ e^{-i H delta_t} of the step [t_k, t_k+1] """
        if k not in self._step_unitaries:
            index = k if self._rule == StepRule.LEFT else k + 1
            eigenvalues, eigenvectors = self._hamiltonians[index].eigh()
            self._step_unitaries[k] = (eigenvectors * np.exp(-1j * eigenvalues * self._step)) @ eigenvectors.conj().T
        return self._step_unitaries[k]

    def evolution(self, k):
        """ U(t_k) = U(t_k, t_0), cached for every k """
        if self._prefix_unitaries is None:
            unitaries = [np.eye(self.dimension, dtype=complex)]
            for index in range(self.steps):
                unitaries.append(self.step_unitary(index) @ unitaries[-1])
            self._prefix_unitaries = unitaries
        return self._prefix_unitaries[k]

    def heisenberg_hamiltonian(self, k):
        unitary = self.evolution(k)
        return unitary.conj().T @ self._hamiltonians[k].entries @ unitary

    def reversed(self):
        """ The time-reversed protocol H(t_N), ..., H(t_0) with the step rule flipped, so that each reversed step uses
        the Hamiltonian of the forward step it undoes """
        return DrivingProtocol(self._hamiltonians[::-1], self._step, self._beta, self._rule.flipped())

    def __repr__(self):
        return f"<DrivingProtocol dimension:{self.dimension} steps:{self.steps} beta:{self._beta}>"


class EventReadingSchedule:

    def __init__(self, reading_steps=()):
        steps = set()
        for value in reading_steps:
            if int(value) != value or value < 0:
                raise ConfigurationError(f"Reading step {value!r} is not a nonnegative grid index",
                                         field="reading_steps")
            steps.add(int(value))
        self._reading_steps = sorted(steps)

    @property
    def reading_steps(self):
        return self._reading_steps

    def __len__(self):
        return len(self._reading_steps)

    def __contains__(self, step):
        return step in self._reading_steps

    def validate_for(self, protocol):
        for step in self._reading_steps:
            if step > protocol.steps:
                raise ConfigurationError(f"Reading step {step} is outside the grid [0, {protocol.steps}]",
                                         field="reading_steps")
        return self


class WorkDistribution:

    def __init__(self, values, probabilities, samples=None):
        """
        :param values: Work values W of the atoms, ascending
        :param probabilities: Atom probabilities p(W)
        :param samples: Raw sampled work values, for empirical distributions
        """
        self._values = np.asarray(values, dtype=float)
        self._probabilities = np.asarray(probabilities, dtype=float)
        if self._probabilities.size and self._probabilities.min() < -1e-12:
            raise InvariantViolationError("positivity", f"negative work probability {self._probabilities.min()!r}")
        if abs(self._probabilities.sum() - 1) > 1e-10:
            raise InvariantViolationError("normalization", f"work probabilities sum to {self._probabilities.sum()!r}")
        self._samples = None if samples is None else np.asarray(samples, dtype=float)

    @property
    def values(self):
        return self._values

    @property
    def probabilities(self):
        return self._probabilities

    @property
    def atoms(self):
        return list(zip(self._values.tolist(), self._probabilities.tolist()))

    @property
    def samples(self):
        return self._samples

    def mean(self):
        return float(np.dot(self._values, self._probabilities))

    def mgf(self, beta):
        """ Average of e^{-beta W} """
        return float(np.dot(self._probabilities, np.exp(-beta * self._values)))

    def probability_of(self, value, tol=ATOM_TOLERANCE):
        matches = np.abs(self._values - value) <= tol
        return float(self._probabilities[matches].sum())

    def mgf_standard_error(self, beta):
        """ Sample standard error of the e^{-beta W} estimator; needs raw samples """
        if self._samples is None:
            raise ConfigurationError("Standard errors need a sampled distribution")
        weights = np.exp(-beta * self._samples)
        return float(np.std(weights, ddof=1) / np.sqrt(weights.size)) if weights.size > 1 else float("inf")

    def to_dataframe(self):
        return pd.DataFrame({"W": self._values, "p": self._probabilities})


class JarzynskiRecord:

    def __init__(self, beta, free_energy, mgf, lhs, rhs, work_shift, n_readings, alternative_lhs=None):
        self.beta = beta
        self.free_energy = free_energy
        self.mgf = mgf
        self.lhs = lhs
        self.rhs = rhs
        self.work_shift = work_shift
        self.n_readings = n_readings
        self.alternative_lhs = alternative_lhs

    @property
    def max_error(self):
        return max(abs(self.lhs - self.rhs), abs(self.mgf - self.rhs))

    def holds(self, tol=JARZYNSKI_TOLERANCE):
        return self.max_error < tol

    def to_dict(self):
        record = {"beta": self.beta, "dF": self.free_energy, "mgf": self.mgf, "lhs": self.lhs, "rhs": self.rhs,
                  "work_shift": self.work_shift, "n_readings": self.n_readings, "max_error": self.max_error}
        if self.alternative_lhs is not None:
            record["alternative_lhs"] = self.alternative_lhs
        return record


class CrooksReport:

    def __init__(self, shared_atoms, max_relative_error, tolerance=CROOKS_TOLERANCE):
        self.shared_atoms = shared_atoms
        self.max_relative_error = max_relative_error
        self.tolerance = tolerance

    def passed(self):
        return self.shared_atoms > 0 and self.max_relative_error < self.tolerance


"""
OPERATIONS
"""


def propagator(protocol, from_step, to_step):
    """ U(t_to, t_from): ordered product of step unitaries, the earliest step rightmost """
    if not 0 <= from_step <= to_step <= protocol.steps:
        raise ConfigurationError(f"Invalid step range [{from_step}, {to_step}] for {protocol.steps} steps")
    unitary = np.eye(protocol.dimension, dtype=complex)
    for k in range(from_step, to_step):
        unitary = protocol.step_unitary(k) @ unitary
    return unitary


def work_distribution(protocol):
    """
    Two-point-measurement work statistics: W = E_m(t_f) - E_n(0) with probability
    tr[P_m U P_n U^dagger] e^{-beta E_n(0)}/Z_0, built from spectral projectors so degenerate spectra are handled
    without choosing eigenvectors; atoms closer than ATOM_TOLERANCE are merged
    """
    values, probabilities = _transition_atoms(protocol)
    return _merge_atoms(values, probabilities)


def free_energy_difference(protocol):
    """ dF = -ln(Z_f/Z_0)/beta """
    beta = protocol.beta
    return -(log_partition_function(protocol.final, beta) - log_partition_function(protocol.initial, beta)) / beta


def mgf_work(protocol):
    """ Average of e^{-beta W} over the work distribution """
    return work_distribution(protocol).mgf(protocol.beta)


def mgf_trace(protocol):
    """ tr[e^{-beta H_H(t_f)}]/Z_0, the Heisenberg-picture form of the work average """
    beta = protocol.beta
    unitary = protocol.evolution(protocol.steps)
    operator = unitary.conj().T @ boltzmann_operator(protocol.final, beta) @ unitary
    return float(np.trace(operator).real / np.exp(log_partition_function(protocol.initial, beta)))


def average_work(protocol):
    """ tr[H_H(t_f) rho_can(0)] - tr[H(0) rho_can(0)] """
    rho = canonical_state(protocol.initial, protocol.beta).entries
    final = protocol.heisenberg_hamiltonian(protocol.steps)
    return float(np.trace(final @ rho).real - np.trace(protocol.initial.entries @ rho).real)


def jarzynski_equality(protocol):
    """ Jarzynski check with no event reading """
    free_energy = free_energy_difference(protocol)
    mgf = mgf_work(protocol)
    rhs = float(np.exp(-protocol.beta * free_energy))
    return JarzynskiRecord(protocol.beta, free_energy, mgf, mgf, rhs, 0.0, 0)


def modified_jarzynski(protocol, schedule, family):
    """
    Event-reading form of the Jarzynski equality. The Boltzmann operator e^{-beta H(0)}/Z_0 is carried forward one
    step at a time as e^{-beta H_H(t_n+1)} e^{+beta H_H(t_n)} A_n. At every scheduled step the operator between
    e^{+beta H_H(t_n)} and A_n is dephased in the Heisenberg-picture family and multiplied by e^{sigma_M->S} = e^{-1};
    the paired factor e^{sigma_S->M} = e^{+1} multiplies the initial Boltzmann operator. The alternative placement
    that dephases A_n itself is evaluated alongside and reported as alternative_lhs
    :param schedule: EventReadingSchedule with steps in [0, N]
    :param family: Complete ProjectorFamily (Schrodinger picture) on the protocol's space
    :return: JarzynskiRecord whose work_shift is |S|/beta
    """
    schedule.validate_for(protocol)
    if family.dimension != protocol.dimension:
        raise ConfigurationError(f"Family dimension {family.dimension} differs from protocol dimension "
                                 f"{protocol.dimension}")
    if not family.is_complete():
        raise InvariantViolationError("completeness", "event readings need a complete projector family")
    beta = protocol.beta
    rho = canonical_state(protocol.initial, beta)
    if len(schedule) > 0 and rho.eigenvalues()[0] <= NONDEGENERACY_TOLERANCE:
        raise InvariantViolationError("nondegenerate-state", "the canonical state is not invertible "
                                                             f"(smallest eigenvalue {rho.eigenvalues()[0]!r})")
    readings = len(schedule)
    transfer_to_m = np.exp(1.0) ** readings
    accumulated = transfer_to_m * rho.entries
    alternative = accumulated.copy()
    for n in range(protocol.steps + 1):
        forward = _heisenberg_boltzmann(protocol, n, -beta)
        backward = _heisenberg_boltzmann(protocol, n, beta)
        if n in schedule:
            heisenberg_family = family.conjugated(protocol.evolution(n))
            accumulated = np.exp(-1.0) * forward @ _dephase_operator(backward @ accumulated, heisenberg_family)
            alternative = np.exp(-1.0) * forward @ backward @ _dephase_operator(alternative, heisenberg_family)
        if n < protocol.steps:
            following = _heisenberg_boltzmann(protocol, n + 1, -beta)
            accumulated = following @ backward @ accumulated
            alternative = following @ backward @ alternative
    lhs = float(np.trace(accumulated).real)
    alternative_lhs = float(np.trace(alternative).real)
    free_energy = free_energy_difference(protocol)
    rhs = float(np.exp(-beta * free_energy))
    LOGGER.debug("Modified Jarzynski with %i readings: lhs=%r rhs=%r", readings, lhs, rhs)
    return JarzynskiRecord(beta, free_energy, mgf_work(protocol), lhs, rhs, readings / beta, readings,
                           alternative_lhs)


def renew_definition_time(protocol, pivot):
    """
    Moves the definition time of the density matrix to t_p:
    tr[U(t_f, t_p)^dagger e^{-beta H(t_f)} U(t_f, t_p) e^{beta H(t_p)} rho_can(t_p)] Z_p/Z_0
    """
    if not 0 <= pivot <= protocol.steps:
        raise ConfigurationError(f"Pivot {pivot} is outside the grid [0, {protocol.steps}]", field="pivot")
    beta = protocol.beta
    pivot_hamiltonian = protocol.hamiltonians[pivot]
    unitary = propagator(protocol, pivot, protocol.steps)
    final = unitary.conj().T @ boltzmann_operator(protocol.final, beta) @ unitary
    operator = final @ boltzmann_operator(pivot_hamiltonian, -beta) @ canonical_state(pivot_hamiltonian, beta).entries
    ratio = np.exp(log_partition_function(pivot_hamiltonian, beta) - log_partition_function(protocol.initial, beta))
    return float(np.trace(operator).real * ratio)


def thermodynamic_inequality(protocol, schedule):
    """
    dF + |S|/beta <= <W> + work_shift, the Jensen consequence of the modified equality
    :return: (left side, right side, holds)
    """
    schedule.validate_for(protocol)
    shift = len(schedule) / protocol.beta
    left = free_energy_difference(protocol) + shift
    right = average_work(protocol) + shift
    return left, right, left <= right + JARZYNSKI_TOLERANCE


def sample_work(protocol, trials, rng):
    """
    Monte Carlo two-point measurement: n from the initial canonical weights, then m from the transition
    probabilities out of eigenspace n; trials are drawn in blocks per initial eigenspace
    :return: empirical WorkDistribution carrying the raw samples
    """
    if trials < 1:
        raise ConfigurationError("At least one trial is required", field="trials")
    initial_energies, initial_projectors = spectral_projectors(protocol.initial)
    final_energies, final_projectors = spectral_projectors(protocol.final)
    unitary = protocol.evolution(protocol.steps)
    initial_weights = np.array([np.trace(p).real for p in initial_projectors])
    log_weights = np.log(initial_weights) - protocol.beta * np.array(initial_energies)
    initial_probabilities = np.exp(log_weights - logsumexp(log_weights))
    initial_choices = rng.choice(len(initial_energies), size=int(trials), p=initial_probabilities)
    samples = np.empty(int(trials))
    for n in range(len(initial_energies)):
        block = np.flatnonzero(initial_choices == n)
        if block.size == 0:
            continue
        evolved = unitary @ initial_projectors[n] @ unitary.conj().T
        transitions = np.array([np.trace(p @ evolved).real for p in final_projectors]) / initial_weights[n]
        transitions = np.clip(transitions, 0, None)
        final_choices = rng.choice(len(final_energies), size=block.size, p=transitions / transitions.sum())
        samples[block] = np.array(final_energies)[final_choices] - initial_energies[n]
    values, counts = np.unique(samples, return_counts=True)
    empirical = _merge_atoms(values, counts / counts.sum())
    return WorkDistribution(empirical.values, empirical.probabilities, samples=samples)


def crooks_ratio_check(protocol, tol=CROOKS_TOLERANCE):
    """
    Compares p_F(W)/p_R(-W) with e^{beta (W - dF)} on every atom shared by the forward and reversed distributions
    with both probabilities above CROOKS_PROBABILITY_FLOOR. Exact for real symmetric Hamiltonians
    """
    forward = work_distribution(protocol)
    backward = work_distribution(protocol.reversed())
    free_energy = free_energy_difference(protocol)
    shared, worst = 0, 0.0
    for value, probability in forward.atoms:
        reverse_probability = backward.probability_of(-value)
        if probability <= CROOKS_PROBABILITY_FLOOR or reverse_probability <= CROOKS_PROBABILITY_FLOOR:
            continue
        expected = np.exp(protocol.beta * (value - free_energy))
        worst = max(worst, abs(probability / reverse_probability / expected - 1))
        shared += 1
    return CrooksReport(shared, worst, tol)


def random_protocol(rng, dimension, steps, beta, family=None, real=False, duration=1.0):
    """
    Linear interpolation between two random Hamiltonians. With a family, both endpoints are block diagonal in it so
    every H(t_k) commutes with the family; with real=True the Hamiltonians are real symmetric
    """
    generator = random_real_symmetric if real else random_hermitian
    endpoints = []
    for _ in range(2):
        entries = generator(rng, dimension, RANDOM_HAMILTONIAN_SCALE).entries
        if family is not None:
            entries = _dephase_operator(entries, family)
        endpoints.append(entries)
    hamiltonians = [HermitianOperator((1 - k / steps) * endpoints[0] + (k / steps) * endpoints[1], validate=False)
                    for k in range(steps + 1)]
    return DrivingProtocol(hamiltonians, duration / steps, beta)


def jarzynski_sweep(rng, count, max_dimension=8, max_steps=200, beta_range=(0.1, 5.0), progress=False):
    """
    Checks the Jarzynski equality and the second law on `count` random protocols
    :return: pandas DataFrame with one row per protocol
    """
    LOGGER.info("Checking the Jarzynski equality on %i random protocols", count)
    start = time.time()
    rows = []
    for index in tqdm(range(count), total=count, disable=not progress):
        dimension = int(rng.integers(2, max_dimension + 1))
        steps = int(rng.integers(1, max_steps + 1))
        beta = float(rng.uniform(*beta_range))
        protocol = random_protocol(rng, dimension, steps, beta)
        record = jarzynski_equality(protocol)
        work = average_work(protocol)
        rows.append({"protocol": index, "dimension": dimension, "steps": steps, "beta": beta,
                     "dF": record.free_energy, "mgf": record.mgf, "rhs": record.rhs,
                     "error": abs(record.mgf - record.rhs), "average_work": work,
                     "second_law": work >= record.free_energy - JARZYNSKI_TOLERANCE})
    LOGGER.info("...done (sweep time: %.2fs)", time.time() - start)
    return pd.DataFrame(rows)


"""
PRIVATE/HELPER FUNCTIONS
"""


def _transition_atoms(protocol):
    beta = protocol.beta
    initial_energies, initial_projectors = spectral_projectors(protocol.initial)
    final_energies, final_projectors = spectral_projectors(protocol.final)
    unitary = protocol.evolution(protocol.steps)
    log_z = log_partition_function(protocol.initial, beta)
    values, probabilities = [], []
    for initial_energy, initial_projector in zip(initial_energies, initial_projectors):
        evolved = unitary @ initial_projector @ unitary.conj().T
        weight = np.exp(-beta * initial_energy - log_z)
        for final_energy, final_projector in zip(final_energies, final_projectors):
            values.append(final_energy - initial_energy)
            probabilities.append(np.trace(final_projector @ evolved).real * weight)
    return np.array(values), np.array(probabilities)


def _merge_atoms(values, probabilities, tol=ATOM_TOLERANCE):
    order = np.argsort(values, kind="stable")
    merged_values, merged_probabilities = [], []
    for index in order:
        if merged_values and values[index] - merged_values[-1][0] <= tol:
            merged_values[-1].append(values[index])
            merged_probabilities[-1] += probabilities[index]
        else:
            merged_values.append([values[index]])
            merged_probabilities.append(probabilities[index])
    return WorkDistribution([float(np.mean(group)) for group in merged_values], merged_probabilities)


def _heisenberg_boltzmann(protocol, k, exponent):
    """ U(t_k)^dagger e^{exponent H(t_k)} U(t_k) """
    unitary = protocol.evolution(k)
    return unitary.conj().T @ boltzmann_operator(protocol.hamiltonians[k], -exponent) @ unitary


def _dephase_operator(operator, family):
    return sum(p @ operator @ p for p in family.projectors)
