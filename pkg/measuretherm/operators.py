"""Provides dense finite-dimensional operator algebra: state vectors, Hermitian operators, density matrices,
projector families, superoperators, and the operations every other module is built on (natural units, hbar = 1)"""

from enum import Enum
import numpy as np
import scipy.linalg
from scipy.special import logsumexp, xlogy
from scipy.stats import unitary_group
from measuretherm.exceptions import ConfigurationError, InvariantViolationError

NORM_TOLERANCE = 1e-12
HERMITIAN_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-10
PROJECTOR_TOLERANCE = 1e-10
EIGENVALUE_CLIP = 1e-10
ENTROPY_EIGENVALUE_FLOOR = 1e-8
DEGENERACY_TOLERANCE = 1e-9


class StateVector:

    def __init__(self, amplitudes, normalized=True):
        """
        :param amplitudes: Sequence of complex amplitudes
        :param normalized: When true, the squared norm must equal 1 within 1e-12
        """
        self._amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if self._amplitudes.size == 0:
            raise ConfigurationError("A state vector needs a positive dimension")
        self._normalized = normalized
        if normalized:
            norm = np.vdot(self._amplitudes, self._amplitudes).real
            if abs(norm - 1) > NORM_TOLERANCE:
                raise InvariantViolationError("unit-norm", f"squared norm is {norm!r}")

    @property
    def amplitudes(self):
        return self._amplitudes

    @property
    def dimension(self):
        return self._amplitudes.size

    @property
    def normalized(self):
        return self._normalized

    def projector(self):
        """ Returns the pure density matrix |psi><psi| """
        return DensityMatrix(np.outer(self._amplitudes, self._amplitudes.conj()),
                             nominal_trace=np.vdot(self._amplitudes, self._amplitudes).real)

    @classmethod
    def basis(cls, dimension, index):
        amplitudes = np.zeros(dimension, dtype=complex)
        amplitudes[index] = 1
        return cls(amplitudes)


class HermitianOperator:

    def __init__(self, entries, validate=True):
        """
        :param entries: Complex square matrix
        :param validate: Check the Hermiticity invariant (entries equal their conjugate transpose within 1e-12)
        """
        self._entries = _square(entries)
        if validate and not np.allclose(self._entries, self._entries.conj().T, rtol=0, atol=HERMITIAN_TOLERANCE):
            raise InvariantViolationError("hermiticity", "operator differs from its conjugate transpose")
        self._spectrum = None

    @property
    def entries(self):
        return self._entries

    @property
    def dimension(self):
        return self._entries.shape[0]

    def eigh(self):
        """ Returns (eigenvalues ascending, eigenvectors as columns), computed once """
        if self._spectrum is None:
            self._spectrum = scipy.linalg.eigh(self._entries)
        return self._spectrum

    def shifted(self, constant):
        return HermitianOperator(self._entries + constant * np.eye(self.dimension), validate=False)

    def scaled(self, factor):
        return HermitianOperator(factor * self._entries, validate=False)

    def commutes_with(self, other, tol=1e-10):
        other = _as_array(other)
        return np.allclose(self._entries @ other, other @ self._entries, rtol=0, atol=tol)

    @classmethod
    def identity(cls, dimension):
        return cls(np.eye(dimension, dtype=complex), validate=False)


class DensityMatrix:

    def __init__(self, entries, nominal_trace=1.0, validate=True):
        """
        :param entries: Complex square matrix
        :param nominal_trace: Expected trace; 1 for ordinary states, e^{-sigma} for entropy-transferred states
        :param validate: Check Hermiticity (1e-12), positivity (eigenvalues >= -1e-10) and trace (1e-10)
        """
        self._entries = _square(entries)
        self._nominal_trace = float(nominal_trace)
        if validate:
            self.validate()

    def validate(self):
        if not np.allclose(self._entries, self._entries.conj().T, rtol=0, atol=HERMITIAN_TOLERANCE):
            raise InvariantViolationError("hermiticity", "density matrix differs from its conjugate transpose")
        smallest = self.eigenvalues()[0]
        if smallest < -EIGENVALUE_CLIP:
            raise InvariantViolationError("positivity", f"eigenvalue {smallest!r} below -{EIGENVALUE_CLIP}")
        if abs(self.trace - self._nominal_trace) > TRACE_TOLERANCE:
            raise InvariantViolationError("trace", f"trace {self.trace!r} differs from nominal "
                                                   f"{self._nominal_trace!r}")

    @property
    def entries(self):
        return self._entries

    @property
    def dimension(self):
        return self._entries.shape[0]

    @property
    def nominal_trace(self):
        return self._nominal_trace

    @property
    def trace(self):
        return float(np.trace(self._entries).real)

    @property
    def purity(self):
        return float(np.trace(self._entries @ self._entries).real)

    @property
    def diagonal(self):
        return np.diagonal(self._entries).real.copy()

    def eigenvalues(self):
        return scipy.linalg.eigvalsh(self._entries)

    def max_abs_offdiagonal(self):
        offdiagonal = self._entries - np.diag(np.diagonal(self._entries))
        return float(np.max(np.abs(offdiagonal))) if self.dimension > 1 else 0.0

    def scaled(self, factor):
        return DensityMatrix(factor * self._entries, nominal_trace=factor * self._nominal_trace, validate=False)

    def __repr__(self):
        return f"<DensityMatrix dimension:{self.dimension} trace:{self.trace:.12g}>"

    @classmethod
    def maximally_mixed(cls, dimension):
        return cls(np.eye(dimension, dtype=complex) / dimension)


class ProjectorFamily:

    def __init__(self, projectors, labels=None, validate=True):
        """
        Complete orthogonal family {P(y)}: idempotent, pairwise orthogonal, summing to identity (within 1e-10)
        :param projectors: Sequence of square matrices of equal dimension
        :param labels: Outcome labels y (defaults to 0..len-1)
        """
        self._projectors = [_square(p) for p in projectors]
        if len(self._projectors) == 0:
            raise ConfigurationError("A projector family needs at least one projector")
        self._labels = list(labels) if labels is not None else list(range(len(self._projectors)))
        if len(self._labels) != len(self._projectors):
            raise ConfigurationError("The number of labels differs from the number of projectors")
        if len({p.shape for p in self._projectors}) != 1:
            raise ConfigurationError("Projectors in a family must share their dimension")
        if validate:
            self.validate()

    def validate(self):
        identity = np.eye(self.dimension)
        total = np.zeros_like(self._projectors[0])
        for i, p in enumerate(self._projectors):
            if not np.allclose(p @ p, p, rtol=0, atol=PROJECTOR_TOLERANCE):
                raise InvariantViolationError("idempotence", f"projector {self._labels[i]!r} is not idempotent")
            for j in range(i + 1, len(self._projectors)):
                if not np.allclose(p @ self._projectors[j], 0, rtol=0, atol=PROJECTOR_TOLERANCE):
                    raise InvariantViolationError("orthogonality", f"projectors {self._labels[i]!r} and "
                                                                   f"{self._labels[j]!r} overlap")
            total = total + p
        if not np.allclose(total, identity, rtol=0, atol=PROJECTOR_TOLERANCE):
            raise InvariantViolationError("completeness", "projectors do not sum to the identity")

    def is_complete(self, tol=PROJECTOR_TOLERANCE):
        return np.allclose(sum(self._projectors), np.eye(self.dimension), rtol=0, atol=tol)

    @property
    def projectors(self):
        return self._projectors

    @property
    def labels(self):
        return self._labels

    @property
    def dimension(self):
        return self._projectors[0].shape[0]

    def __len__(self):
        return len(self._projectors)

    def __iter__(self):
        return iter(zip(self._labels, self._projectors))

    def conjugated(self, unitary):
        """ Returns the family {U^dagger P U}, ie the family carried into the Heisenberg frame of U """
        unitary = _as_array(unitary)
        return ProjectorFamily([unitary.conj().T @ p @ unitary for p in self._projectors], self._labels,
                               validate=False)

    def commutes_with(self, operator, tol=1e-10):
        operator = _as_array(operator)
        return all(np.allclose(p @ operator, operator @ p, rtol=0, atol=tol) for p in self._projectors)


class SuperoperatorKind(str, Enum):
    DEPHASING = "dephasing"
    UNITARY_CONJUGATION = "unitary-conjugation"
    COMPOSITION = "composition"


class Superoperator:
    """ A map from density matrices to density matrices, tagged with its kind """

    def __init__(self, action, kind):
        self._action = action
        self._kind = SuperoperatorKind(kind)

    @property
    def kind(self):
        return self._kind

    def __call__(self, rho):
        return self._action(rho)

    def then(self, other):
        """ Returns the composition that applies this map first and `other` second """
        return Superoperator(lambda rho: other(self(rho)), SuperoperatorKind.COMPOSITION)

    @classmethod
    def dephasing(cls, family):
        return cls(lambda rho: dephase(rho, family), SuperoperatorKind.DEPHASING)

    @classmethod
    def unitary_conjugation(cls, unitary):
        unitary = _as_array(unitary)

        def conjugate(rho):
            entries = unitary @ rho.entries @ unitary.conj().T
            return DensityMatrix(_hermitian_part(entries), nominal_trace=rho.nominal_trace, validate=False)
        return cls(conjugate, SuperoperatorKind.UNITARY_CONJUGATION)


"""
OPERATIONS
"""


def tensor_product(a, b):
    """
    Kronecker product with the left factor as the slow index. Two operands of the same class give a result of that
    class; otherwise a plain array is returned
    """
    entries = np.kron(_as_array(a), _as_array(b))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(entries, nominal_trace=a.nominal_trace * b.nominal_trace, validate=False)
    if isinstance(a, HermitianOperator) and isinstance(b, HermitianOperator):
        return HermitianOperator(entries, validate=False)
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(entries, normalized=a.normalized and b.normalized)
    return entries


def partial_trace(rho, dims, keep):
    """
    Traces out every subsystem except `keep`
    :param rho: DensityMatrix on the composite space
    :param dims: List of subsystem dimensions (product must equal rho.dimension)
    :param keep: Index of the subsystem to keep
    :return: DensityMatrix of dimension dims[keep]
    """
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.dimension:
        raise ConfigurationError(f"Subsystem dimensions {dims} do not multiply to {rho.dimension}")
    if not 0 <= keep < len(dims):
        raise ConfigurationError(f"Subsystem index {keep} out of range for {len(dims)} subsystems")
    count = len(dims)
    tensor = rho.entries.reshape(dims + dims)
    tensor = np.moveaxis(tensor, [keep, keep + count], [0, 1])
    rest = rho.dimension // dims[keep]
    tensor = tensor.reshape(dims[keep], dims[keep], rest, rest)
    reduced = np.trace(tensor, axis1=2, axis2=3)
    return DensityMatrix(_hermitian_part(reduced), nominal_trace=rho.nominal_trace, validate=False)


def dephase(rho, family):
    """ Non-selective measurement: returns sum_y P(y) rho P(y) """
    _check_family_dimension(rho, family)
    if not family.is_complete():
        raise InvariantViolationError("completeness", "dephasing needs a complete projector family")
    entries = sum(p @ rho.entries @ p for p in family.projectors)
    return DensityMatrix(_hermitian_part(entries), nominal_trace=rho.nominal_trace, validate=False)


def unitary_evolve(rho, hamiltonian, dt):
    """
    Returns e^{-iH dt} rho e^{+iH dt}
    :param hamiltonian: HermitianOperator (a plain array is validated and rejected when not Hermitian)
    :param dt: Elapsed time in natural units
    """
    hamiltonian = as_hermitian(hamiltonian)
    if hamiltonian.dimension != rho.dimension:
        raise ConfigurationError(f"Hamiltonian dimension {hamiltonian.dimension} differs from state dimension "
                                 f"{rho.dimension}")
    unitary = expm_hermitian(hamiltonian, dt)
    entries = unitary @ rho.entries @ unitary.conj().T
    return DensityMatrix(_hermitian_part(entries), nominal_trace=rho.nominal_trace, validate=False)


def von_neumann_entropy(rho):
    """ Returns -tr(rho ln rho) in nats, with 0 ln 0 = 0 """
    if abs(rho.trace - 1) > ENTROPY_EIGENVALUE_FLOOR:
        raise InvariantViolationError("unit-trace", f"entropy needs a unit-trace state, got trace {rho.trace!r}")
    eigenvalues = clipped_eigenvalues(rho, floor=ENTROPY_EIGENVALUE_FLOOR)
    return float(-np.sum(xlogy(eigenvalues, eigenvalues)))


def born_probabilities(rho, family):
    """ Returns the vector p_y = tr(P(y) rho) in family order """
    _check_family_dimension(rho, family)
    probabilities = np.array([np.trace(p @ rho.entries).real for p in family.projectors])
    if probabilities.min() < -NORM_TOLERANCE:
        raise InvariantViolationError("positivity", f"negative outcome probability {probabilities.min()!r}")
    if abs(probabilities.sum() - rho.trace) > TRACE_TOLERANCE:
        raise InvariantViolationError("normalization", f"outcome probabilities sum to {probabilities.sum()!r}, "
                                                       f"trace is {rho.trace!r}")
    return probabilities


"""
SUPPORTING CONSTRUCTIONS
"""


def as_hermitian(operator):
    if isinstance(operator, HermitianOperator):
        return operator
    return HermitianOperator(operator)


def expm_hermitian(hamiltonian, t):
    """ Returns e^{-iHt} computed through the eigendecomposition of the Hermitian H """
    eigenvalues, eigenvectors = as_hermitian(hamiltonian).eigh()
    return (eigenvectors * np.exp(-1j * eigenvalues * t)) @ eigenvectors.conj().T


def log_partition_function(hamiltonian, beta):
    eigenvalues, _ = as_hermitian(hamiltonian).eigh()
    return float(logsumexp(-beta * eigenvalues))


def partition_function(hamiltonian, beta):
    return float(np.exp(log_partition_function(hamiltonian, beta)))


def canonical_state(hamiltonian, beta):
    """ Returns e^{-beta H}/Z as a DensityMatrix """
    eigenvalues, eigenvectors = as_hermitian(hamiltonian).eigh()
    log_weights = -beta * eigenvalues
    weights = np.exp(log_weights - logsumexp(log_weights))
    entries = (eigenvectors * weights) @ eigenvectors.conj().T
    return DensityMatrix(_hermitian_part(entries), validate=False)


def boltzmann_operator(hamiltonian, beta):
    """ Returns the unnormalized operator e^{-beta H} """
    eigenvalues, eigenvectors = as_hermitian(hamiltonian).eigh()
    return (eigenvectors * np.exp(-beta * eigenvalues)) @ eigenvectors.conj().T


def spectral_projectors(hamiltonian, tol=DEGENERACY_TOLERANCE):
    """
    Groups the spectrum of a Hermitian operator into eigenspaces, merging eigenvalues within `tol`
    :return: (list of eigenvalues, list of spectral projectors), ascending
    """
    eigenvalues, eigenvectors = as_hermitian(hamiltonian).eigh()
    groups = [[0]]
    for index in range(1, len(eigenvalues)):
        if eigenvalues[index] - eigenvalues[groups[-1][-1]] <= tol:
            groups[-1].append(index)
        else:
            groups.append([index])
    energies, projectors = [], []
    for group in groups:
        vectors = eigenvectors[:, group]
        energies.append(float(np.mean(eigenvalues[group])))
        projectors.append(vectors @ vectors.conj().T)
    return energies, projectors


def clipped_eigenvalues(rho, floor=EIGENVALUE_CLIP):
    """ Eigenvalues with rounding noise in [-floor, 0) clipped to 0; anything more negative is an error """
    eigenvalues = rho.eigenvalues()
    if eigenvalues[0] < -floor:
        raise InvariantViolationError("positivity", f"eigenvalue {eigenvalues[0]!r} below -{floor}")
    return np.clip(eigenvalues, 0.0, None)


def log_hermitian(rho, floor=1e-12):
    """ Matrix logarithm of a full-rank density matrix """
    eigenvalues, eigenvectors = scipy.linalg.eigh(rho.entries)
    if eigenvalues[0] <= floor:
        raise ConfigurationError(f"Logarithm needs a full-rank state; smallest eigenvalue is {eigenvalues[0]!r}")
    return (eigenvectors * np.log(eigenvalues)) @ eigenvectors.conj().T


def computational_family(dimension):
    """ The rank-1 family {|k><k|} """
    return ProjectorFamily([np.diag(np.eye(dimension)[k]).astype(complex) for k in range(dimension)],
                           validate=False)


def block_family(block_sizes, labels=None):
    """ The family of projectors onto consecutive blocks of the computational basis """
    dimension = int(sum(block_sizes))
    projectors, start = [], 0
    for size in block_sizes:
        projector = np.zeros((dimension, dimension), dtype=complex)
        projector[start:start + size, start:start + size] = np.eye(size)
        projectors.append(projector)
        start += size
    return ProjectorFamily(projectors, labels, validate=False)


def projector_family_from_basis(basis, groups=None):
    """
    :param basis: Unitary matrix whose columns are the basis vectors
    :param groups: Optional list of lists of column indices, one list per projector (default: one column each)
    """
    basis = _square(basis)
    if groups is None:
        groups = [[k] for k in range(basis.shape[1])]
    projectors = [basis[:, group] @ basis[:, group].conj().T for group in groups]
    return ProjectorFamily(projectors)


def lift_family(family, dims, position):
    """ Embeds a family acting on subsystem `position` of a composite into the full space: P -> 1 x .. P .. x 1 """
    if dims[position] != family.dimension:
        raise ConfigurationError(f"Family dimension {family.dimension} differs from subsystem dimension "
                                 f"{dims[position]}")
    before = int(np.prod(dims[:position]))
    after = int(np.prod(dims[position + 1:]))
    projectors = [np.kron(np.kron(np.eye(before), p), np.eye(after)) for p in family.projectors]
    return ProjectorFamily(projectors, family.labels, validate=False)


def random_hermitian(rng, dimension, scale=1.0):
    matrix = rng.normal(size=(dimension, dimension)) + 1j * rng.normal(size=(dimension, dimension))
    return HermitianOperator(scale * (matrix + matrix.conj().T) / 2, validate=False)


def random_real_symmetric(rng, dimension, scale=1.0):
    matrix = rng.normal(size=(dimension, dimension))
    return HermitianOperator(scale * (matrix + matrix.T).astype(complex) / 2, validate=False)


def random_density_matrix(rng, dimension, rank=None):
    """ Random state from the induced (Ginibre) measure; `rank` defaults to full rank """
    rank = dimension if rank is None else rank
    matrix = rng.normal(size=(dimension, rank)) + 1j * rng.normal(size=(dimension, rank))
    entries = matrix @ matrix.conj().T
    return DensityMatrix(_hermitian_part(entries / np.trace(entries).real), validate=False)


def random_unitary(rng, dimension):
    if dimension == 1:
        return np.exp(1j * rng.uniform(0, 2 * np.pi)) * np.ones((1, 1), dtype=complex)
    return unitary_group.rvs(dimension, random_state=rng)


def random_state_vector(rng, dimension):
    amplitudes = rng.normal(size=dimension) + 1j * rng.normal(size=dimension)
    return StateVector(amplitudes / np.linalg.norm(amplitudes))


"""
PRIVATE/HELPER FUNCTIONS
"""


def _as_array(value):
    if isinstance(value, (DensityMatrix, HermitianOperator)):
        return value.entries
    if isinstance(value, StateVector):
        return value.amplitudes
    return np.asarray(value, dtype=complex)


def _square(entries):
    matrix = np.array(_as_array(entries), dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise ConfigurationError(f"Expected a non-empty square matrix, got shape {matrix.shape}")
    return matrix


def _hermitian_part(entries):
    return (entries + entries.conj().T) / 2


def _check_family_dimension(rho, family):
    if family.dimension != rho.dimension:
        raise ConfigurationError(f"Projector family dimension {family.dimension} differs from state dimension "
                                 f"{rho.dimension}")
