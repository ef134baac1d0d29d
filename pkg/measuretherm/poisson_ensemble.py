"""Provides the enlarged statistical ensemble in which every member undergoes one non-selective measurement at a
random occurrence time drawn from the one-time Poisson law, and the closed-form average it converges to"""

import time
import numpy as np
import pandas as pd
from scipy.stats import kstest, kstwo
from tqdm import tqdm
from measuretherm import utils
from measuretherm.exceptions import ConfigurationError, InvariantViolationError, ProtocolError
from measuretherm.operators import DensityMatrix, as_hermitian, dephase

LOGGER = utils.get_logger(__name__)

GRID_TOLERANCE = 1e-12
KS_SIGNIFICANCE = 0.01


class EnsembleMember:

    def __init__(self, rho, occurrence_time, measured):
        self._rho = rho
        self._occurrence_time = occurrence_time
        self._measured = measured

    @property
    def rho(self):
        return self._rho

    @property
    def occurrence_time(self):
        return self._occurrence_time

    @property
    def measured(self):
        return self._measured

    def __repr__(self):
        return f"<EnsembleMember occurrence:{self._occurrence_time} measured:{self._measured}>"


class EnlargedEnsemble:

    def __init__(self, states, occurrence_times, characteristic_time, family, clock=0.0):
        """
        Ensemble whose members are stored as one stacked array so they can be evolved together. The clock is the
        simulation time the member states refer to; a member is measured once the clock reaches its occurrence time
        :param states: Array of shape (N, d, d) with the member density matrices
        :param occurrence_times: Array of N occurrence times
        :param characteristic_time: The mean occurrence time delta_tau
        :param family: ProjectorFamily of the non-selective measurement
        :param clock: Current simulation time
        """
        self._states = np.array(states, dtype=complex)
        self._occurrence_times = np.asarray(occurrence_times, dtype=float).reshape(-1)
        if characteristic_time <= 0:
            raise ConfigurationError("The characteristic time must be positive", field="delta_tau")
        if self._states.ndim != 3 or self._states.shape[0] == 0:
            raise ConfigurationError(f"Expected at least one member state, got shape {self._states.shape}")
        if self._states.shape[0] != self._occurrence_times.size:
            raise ConfigurationError("One occurrence time is needed per member")
        if np.any(self._occurrence_times < 0):
            raise InvariantViolationError("occurrence-time", "occurrence times must be nonnegative")
        if family.dimension != self._states.shape[1]:
            raise ConfigurationError(f"Family dimension {family.dimension} differs from member dimension "
                                     f"{self._states.shape[1]}")
        self._characteristic_time = float(characteristic_time)
        self._family = family
        self._clock = float(clock)
        self._measured = self._occurrence_times <= self._clock
        if np.any(self._measured):
            self._states[self._measured] = _dephase_stack(self._states[self._measured], family)

    @classmethod
    def prepare(cls, rho, family, delta_tau, count, rng):
        """ N copies of rho with occurrence times sampled from the one-time Poisson law """
        times = sample_occurrence_times(count, delta_tau, rng)
        states = np.broadcast_to(rho.entries, (count, rho.dimension, rho.dimension))
        return cls(states, times, delta_tau, family)

    @property
    def states(self):
        return self._states

    @property
    def occurrence_times(self):
        return self._occurrence_times

    @property
    def measured(self):
        return self._measured

    @property
    def characteristic_time(self):
        return self._characteristic_time

    @property
    def family(self):
        return self._family

    @property
    def clock(self):
        return self._clock

    @property
    def size(self):
        return self._occurrence_times.size

    @property
    def dimension(self):
        return self._states.shape[1]

    @property
    def members(self):
        return [EnsembleMember(DensityMatrix(self._states[index], validate=False), self._occurrence_times[index],
                               bool(self._measured[index])) for index in range(self.size)]

    def average(self):
        """ Member average rho(tau) at the current clock, summed in fixed member order """
        entries = np.sum(self._states, axis=0) / self.size
        return DensityMatrix((entries + entries.conj().T) / 2, validate=False)

    def advance(self, dt, hamiltonian=None):
        """
        Evolves every member over [clock, clock + dt] under a constant Hamiltonian; members whose occurrence time
        falls inside the interval are evolved up to it, dephased once, then evolved for the rest of the interval
        """
        if dt < 0:
            raise ConfigurationError("Time steps must be nonnegative")
        end = self._clock + dt
        hitting = (~self._measured) & (self._occurrence_times <= end)
        passing = ~hitting
        if hamiltonian is None:
            self._states[hitting] = _dephase_stack(self._states[hitting], self._family)
        else:
            eigenvalues, eigenvectors = as_hermitian(hamiltonian).eigh()
            self._states[passing] = _evolve_stack(self._states[passing], eigenvalues, eigenvectors,
                                                  np.full(int(passing.sum()), dt))
            before = self._occurrence_times[hitting] - self._clock
            states = _evolve_stack(self._states[hitting], eigenvalues, eigenvectors, before)
            states = _dephase_stack(states, self._family)
            self._states[hitting] = _evolve_stack(states, eigenvalues, eigenvectors, dt - before)
        self._measured = self._measured | hitting
        self._clock = end


class Trajectory:

    def __init__(self, times, states, survival_fractions=None):
        """
        :param times: Ascending grid of tau values
        :param states: One DensityMatrix per grid point
        :param survival_fractions: Fraction of unmeasured members at each grid point (all 1 for an unmeasured
            Schrodinger trajectory)
        """
        self._times = np.asarray(times, dtype=float)
        self._states = list(states)
        if len(self._states) != self._times.size:
            raise ConfigurationError("One state is needed per grid point")
        if survival_fractions is None:
            survival_fractions = np.ones(self._times.size)
        self._survival_fractions = np.asarray(survival_fractions, dtype=float)

    @property
    def times(self):
        return self._times

    @property
    def states(self):
        return self._states

    @property
    def survival_fractions(self):
        return self._survival_fractions

    def index_of(self, tau):
        matches = np.flatnonzero(np.abs(self._times - tau) <= GRID_TOLERANCE * max(1.0, abs(tau)))
        if matches.size == 0:
            raise ConfigurationError(f"tau = {tau!r} is not on the trajectory grid", field="tau")
        return int(matches[0])

    def state_at(self, tau):
        return self._states[self.index_of(tau)]

    def to_dataframe(self):
        rows = []
        for tau, rho, survival in zip(self._times, self._states, self._survival_fractions):
            record = {"tau": tau, "survival_fraction": survival, "max_abs_offdiagonal": rho.max_abs_offdiagonal()}
            for index, value in enumerate(rho.diagonal):
                record[f"diag_{index}"] = value
            rows.append(record)
        return pd.DataFrame(rows)


class OccurrenceTimeTest:

    def __init__(self, statistic, p_value, critical_value, sample_mean, standard_error):
        self.statistic = statistic
        self.p_value = p_value
        self.critical_value = critical_value
        self.sample_mean = sample_mean
        self.standard_error = standard_error

    def passed(self):
        return self.statistic < self.critical_value

    def __repr__(self):
        return f"<OccurrenceTimeTest D:{self.statistic:.5f} critical:{self.critical_value:.5f}>"


"""
OPERATIONS
"""


def sample_occurrence_times(count, delta_tau, rng):
    """ Independent draws from the density (1/delta_tau) e^{-tau/delta_tau} """
    if count < 1:
        raise ConfigurationError("At least one member is required", field="members")
    if delta_tau <= 0:
        raise ConfigurationError("delta_tau must be positive", field="delta_tau")
    return rng.exponential(scale=delta_tau, size=int(count))


def evolve_ensemble(ensemble, schedule, hamiltonian=None, progress=False):
    """
    Advances the ensemble along the schedule and records the member average at each grid point. The Hamiltonian
    is held constant on each interval at its value on the left endpoint
    :param ensemble: EnlargedEnsemble whose clock equals schedule[0]
    :param schedule: Ascending grid of tau values
    :param hamiltonian: Callable tau -> Hermitian matrix, a constant Hermitian matrix, or None for no evolution
    :param progress: Show a tqdm progress bar
    :return: Trajectory of averaged states
    """
    schedule = _check_schedule(schedule)
    if abs(schedule[0] - ensemble.clock) > GRID_TOLERANCE:
        raise ProtocolError(f"The schedule starts at {schedule[0]!r} but the ensemble clock is at {ensemble.clock!r}")
    LOGGER.info("Evolving an ensemble of %i members over %i grid points", ensemble.size, schedule.size)
    start = time.time()
    states = [ensemble.average()]
    survival = [survival_fraction(ensemble, schedule[0])]
    for left, right in tqdm(zip(schedule[:-1], schedule[1:]), total=schedule.size - 1, disable=not progress):
        ensemble.advance(right - left, _hamiltonian_at(hamiltonian, left))
        states.append(ensemble.average())
        survival.append(survival_fraction(ensemble, right))
    LOGGER.info("...done (ensemble evolution time: %.2fs)", time.time() - start)
    return Trajectory(schedule, states, survival)


def schrodinger_trajectory(rho, schedule, hamiltonian=None):
    """ The unmeasured trajectory rho_Sch(tau) on the same piecewise-constant grid evolution """
    schedule = _check_schedule(schedule)
    states = [rho]
    current = rho.entries[np.newaxis].copy()
    for left, right in zip(schedule[:-1], schedule[1:]):
        operator = _hamiltonian_at(hamiltonian, left)
        if operator is not None:
            eigenvalues, eigenvectors = as_hermitian(operator).eigh()
            current = _evolve_stack(current, eigenvalues, eigenvectors, np.array([right - left]))
        states.append(DensityMatrix(current[0], nominal_trace=rho.nominal_trace, validate=False))
    return Trajectory(schedule, states)


def analytic_solution(rho_sch, family, tau):
    """
    Closed-form average at the cut-off: the family-diagonal part of rho_Sch(tau) is kept and the family-off-diagonal
    part is multiplied by e^{-1}, for every tau >= 0
    :param rho_sch: Trajectory of the unmeasured state (tau must lie on its grid) or a single DensityMatrix
    """
    if tau < 0:
        raise ConfigurationError("tau must be nonnegative", field="tau")
    rho = rho_sch.state_at(tau) if isinstance(rho_sch, Trajectory) else rho_sch
    return _damp_offdiagonal(rho, family, np.exp(-1.0))


def survival_solution(rho_sch, family, tau, delta_tau):
    """ Exact finite-delta_tau member average for Hamiltonians commuting with the family: D + e^{-tau/delta_tau}(rho - D) """
    if delta_tau <= 0:
        raise ConfigurationError("delta_tau must be positive", field="delta_tau")
    rho = rho_sch.state_at(tau) if isinstance(rho_sch, Trajectory) else rho_sch
    return _damp_offdiagonal(rho, family, np.exp(-tau / delta_tau))


def survival_fraction(ensemble, tau):
    """ Fraction of members still unmeasured at tau """
    if tau > ensemble.clock + GRID_TOLERANCE:
        raise ProtocolError(f"The ensemble has only been evolved to {ensemble.clock!r}, not to {tau!r}")
    return float(np.mean(ensemble.occurrence_times > tau))


def conditioned_average(ensemble, tau):
    """ Average over the members whose occurrence time is at most tau, taken at the current clock """
    if tau > ensemble.clock + GRID_TOLERANCE:
        raise ProtocolError(f"The ensemble has only been evolved to {ensemble.clock!r}, not to {tau!r}")
    selected = ensemble.occurrence_times <= tau
    if not np.any(selected):
        raise ConfigurationError(f"No member occurred by tau = {tau!r}", field="tau")
    entries = np.sum(ensemble.states[selected], axis=0) / int(selected.sum())
    return DensityMatrix((entries + entries.conj().T) / 2, validate=False)


def ks_statistic(times, delta_tau, significance=KS_SIGNIFICANCE):
    """
    Kolmogorov-Smirnov comparison of sampled occurrence times with the CDF 1 - e^{-tau/delta_tau}
    :return: OccurrenceTimeTest with the statistic, its p-value and the exact critical value at `significance`
    """
    times = np.asarray(times, dtype=float)
    result = kstest(times, "expon", args=(0, delta_tau))
    critical = float(kstwo.ppf(1 - significance, times.size))
    return OccurrenceTimeTest(float(result.statistic), float(result.pvalue), critical, float(np.mean(times)),
                              delta_tau / np.sqrt(times.size))


def default_schedule(delta_tau, horizon=3.0, points=61):
    """ Uniform grid over [0, horizon*delta_tau] merged with the reference times delta_tau, delta_tau ln 2 and
    3 delta_tau """
    grid = np.linspace(0, horizon * delta_tau, points)
    return np.union1d(grid, [delta_tau, delta_tau * np.log(2), 3 * delta_tau])


"""
PRIVATE/HELPER FUNCTIONS
"""


def _check_schedule(schedule):
    schedule = np.asarray(schedule, dtype=float).reshape(-1)
    if schedule.size == 0:
        raise ConfigurationError("The schedule is empty", field="schedule")
    if np.any(np.diff(schedule) < 0):
        raise ConfigurationError("The schedule must be sorted ascending", field="schedule")
    return schedule


def _hamiltonian_at(hamiltonian, tau):
    if hamiltonian is None:
        return None
    if callable(hamiltonian):
        return hamiltonian(tau)
    return hamiltonian


def _evolve_stack(states, eigenvalues, eigenvectors, durations):
    if states.shape[0] == 0:
        return states
    phases = np.exp(-1j * np.outer(durations, eigenvalues))
    unitaries = (eigenvectors[np.newaxis] * phases[:, np.newaxis, :]) @ eigenvectors.conj().T
    return unitaries @ states @ np.conj(np.transpose(unitaries, (0, 2, 1)))


def _dephase_stack(states, family):
    if states.shape[0] == 0:
        return states
    projectors = np.stack(family.projectors)
    return np.einsum("pij,kjl,plm->kim", projectors, states, projectors)


def _damp_offdiagonal(rho, family, factor):
    diagonal = dephase(rho, family)
    entries = diagonal.entries + factor * (rho.entries - diagonal.entries)
    return DensityMatrix(entries, nominal_trace=rho.nominal_trace, validate=False)
