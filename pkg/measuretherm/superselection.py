"""Provides the decoherence of S0 + A under a von Neumann coupling to a discretized continuous superselection
momentum: sector-wise phase evolution, the off-diagonal kernel and its Riemann-Lebesgue decay"""

import numpy as np
import pandas as pd
from measuretherm import utils
from measuretherm.exceptions import ConfigurationError, InvariantViolationError
from measuretherm.operators import DensityMatrix

LOGGER = utils.get_logger(__name__)

WEIGHT_TOLERANCE = 1e-10
DEFAULT_GRID_SIZE = 4001
DEFAULT_SPAN = 6.0


class SectorField:

    def __init__(self, momenta, weights, coefficients, eigenvalues, time=0.0):
        """
        Discretized apparatus wave packet |phi(p)|^2 with the S0 state carried by every momentum sector
        :param momenta: Grid of momentum values p (ascending)
        :param weights: Quadrature weights |phi(p)|^2 dp, nonnegative and summing to 1
        :param coefficients: Amplitudes c_n of the S0 state in the eigenbasis of the measured observable
        :param eigenvalues: Eigenvalues x_n of the measured observable
        :param time: Coupling time already elapsed (sector states carry the phases e^{i t x_n p})
        """
        self._momenta = np.asarray(momenta, dtype=float).reshape(-1)
        self._weights = np.asarray(weights, dtype=float).reshape(-1)
        self._coefficients = np.asarray(coefficients, dtype=complex).reshape(-1)
        self._eigenvalues = np.asarray(eigenvalues, dtype=float).reshape(-1)
        self._time = float(time)
        if self._momenta.size == 0 or self._momenta.size != self._weights.size:
            raise ConfigurationError("Momenta and weights must be non-empty and of equal length")
        if self._coefficients.size != self._eigenvalues.size:
            raise ConfigurationError("One eigenvalue is needed per coefficient")
        if np.any(self._weights < 0):
            raise InvariantViolationError("weight-positivity", "sector weights must be nonnegative")
        if abs(self._weights.sum() - 1) > WEIGHT_TOLERANCE:
            raise InvariantViolationError("weight-normalization", f"weights sum to {self._weights.sum()!r}")

    @property
    def momenta(self):
        return self._momenta

    @property
    def weights(self):
        return self._weights

    @property
    def coefficients(self):
        return self._coefficients

    @property
    def eigenvalues(self):
        return self._eigenvalues

    @property
    def time(self):
        return self._time

    @property
    def dimension(self):
        return self._coefficients.size

    @property
    def sector_states(self):
        """ Matrix whose row k is the S0 state vector of the sector at momentum p_k """
        phases = np.exp(1j * self._time * np.outer(self._momenta, self._eigenvalues))
        return phases * self._coefficients

    @property
    def grid_step(self):
        """ Spacing of a uniform momentum grid """
        if self._momenta.size < 2:
            raise ConfigurationError("A grid step needs at least two momenta")
        steps = np.diff(self._momenta)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ConfigurationError("The momentum grid is not uniform")
        return float(steps[0])

    def at_time(self, time):
        return SectorField(self._momenta, self._weights, self._coefficients, self._eigenvalues, time)


class DecayRecord:

    def __init__(self, times, pairs, kernel_values):
        """
        :param times: Sampled times
        :param pairs: List of (m, n) index pairs
        :param kernel_values: Complex array of shape (len(pairs), len(times))
        """
        self._times = np.asarray(times, dtype=float)
        self._pairs = list(pairs)
        self._kernel_values = np.asarray(kernel_values, dtype=complex).reshape(len(self._pairs), self._times.size)

    @property
    def times(self):
        return self._times

    @property
    def pairs(self):
        return self._pairs

    @property
    def kernel_values(self):
        return self._kernel_values

    def kernel(self, m, n):
        return self._kernel_values[self._pairs.index((m, n))]

    def to_dataframe(self):
        rows = []
        for t_index, t in enumerate(self._times):
            for p_index, (m, n) in enumerate(self._pairs):
                value = self._kernel_values[p_index, t_index]
                rows.append({"t": t, "m": m, "n": n, "re_kernel": value.real, "im_kernel": value.imag,
                             "abs_kernel": abs(value)})
        return pd.DataFrame(rows, columns=["t", "m", "n", "re_kernel", "im_kernel", "abs_kernel"])


"""
FIELD CONSTRUCTORS
"""


def gaussian_field(coefficients, eigenvalues, sigma_p, grid_size=DEFAULT_GRID_SIZE, span=DEFAULT_SPAN):
    """
    Gaussian apparatus weights of standard deviation sigma_p on a uniform grid over [-span*sigma_p, span*sigma_p],
    trapezoidal quadrature renormalized to 1
    """
    if sigma_p <= 0:
        raise ConfigurationError("sigma_p must be positive", field="sigma_p")
    momenta = np.linspace(-span * sigma_p, span * sigma_p, grid_size)
    density = np.exp(-momenta ** 2 / (2 * sigma_p ** 2))
    return SectorField(momenta, _trapezoid_weights(momenta, density), coefficients, eigenvalues)


def box_field(coefficients, eigenvalues, half_width, grid_size=DEFAULT_GRID_SIZE):
    """ Uniform apparatus weights on [-half_width, half_width] """
    if half_width <= 0:
        raise ConfigurationError("half_width must be positive", field="half_width")
    momenta = np.linspace(-half_width, half_width, grid_size)
    return SectorField(momenta, _trapezoid_weights(momenta, np.ones_like(momenta)), coefficients, eigenvalues)


def discrete_field(momenta, weights, coefficients, eigenvalues):
    """ A field made of a few explicit sectors with the given probabilities """
    weights = np.asarray(weights, dtype=float)
    return SectorField(momenta, weights / weights.sum(), coefficients, eigenvalues)


"""
OPERATIONS
"""


def evolve_sectors(field, t):
    """ Advances the coupling by time t: each sector component n picks up e^{i t x_n p}; weights are unchanged """
    return field.at_time(field.time + t)


def offdiagonal_kernel(field, m, n, t):
    """ Returns sum_p e^{i t (x_m - x_n) p} w(p), summed in fixed grid order """
    _check_indices(field, m, n)
    frequency = t * (field.eigenvalues[m] - field.eigenvalues[n])
    return complex(np.dot(field.weights, np.exp(1j * frequency * field.momenta)))


def averaged_state(field):
    """ Returns sum_p w(p) |Psi(p)><Psi(p)| on S0 """
    states = field.sector_states
    entries = (states.T * field.weights) @ states.conj()
    return DensityMatrix((entries + entries.conj().T) / 2)


def decay_scan(field, times, pairs=None):
    """
    Tabulates the off-diagonal kernel over the given times
    :param times: Ascending times
    :param pairs: (m, n) pairs to tabulate (default: every m < n)
    :return: DecayRecord
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    if np.any(np.diff(times) < 0):
        raise ConfigurationError("Scan times must be sorted ascending", field="times")
    if pairs is None:
        pairs = [(m, n) for m in range(field.dimension) for n in range(m + 1, field.dimension)]
    values = np.zeros((len(pairs), times.size), dtype=complex)
    for p_index, (m, n) in enumerate(pairs):
        for t_index, t in enumerate(times):
            values[p_index, t_index] = offdiagonal_kernel(field, m, n, t)
    LOGGER.debug("Scanned %i kernel values", values.size)
    return DecayRecord(times, pairs, values)


def recurrence_time(field, m, n):
    """
    First revival of the kernel on a uniform grid of spacing dp: at t = 2 pi / (|x_m - x_n| dp) every sector phase
    returns to a common value, so |kernel| = 1 again. A finite sector set never decoheres for good
    """
    _check_indices(field, m, n)
    gap = abs(field.eigenvalues[m] - field.eigenvalues[n])
    if gap == 0:
        raise ConfigurationError("Equal eigenvalues have no recurrence")
    return 2 * np.pi / (gap * field.grid_step)


def gaussian_envelope(sigma_p, gap, t):
    """ Closed-form |kernel| of the Gaussian packet: exp(-sigma_p^2 gap^2 t^2 / 2) """
    return np.exp(-(sigma_p * gap * np.asarray(t)) ** 2 / 2)


def box_kernel(half_width, gap, t):
    """ Closed-form kernel of the box packet: sin(a gap t)/(a gap t) """
    return np.sinc(half_width * gap * np.asarray(t) / np.pi)


"""
PRIVATE/HELPER FUNCTIONS
"""


def _trapezoid_weights(momenta, density):
    step = momenta[1] - momenta[0]
    weights = density * step
    weights[0] /= 2
    weights[-1] /= 2
    return weights / weights.sum()


def _check_indices(field, m, n):
    if not (0 <= m < field.dimension and 0 <= n < field.dimension):
        raise ConfigurationError(f"Outcome indices ({m}, {n}) out of range for {field.dimension} outcomes")
