"""Provides the Landauer identity over a block-structured memory and the Klein-inequality bound against a canonical
reference state"""

import numpy as np
from scipy.linalg import block_diag
from scipy.special import xlogy
from measuretherm import utils
from measuretherm.exceptions import ConfigurationError, InvariantViolationError
from measuretherm.operators import (DensityMatrix, block_family, canonical_state, log_hermitian, random_density_matrix,
                                    von_neumann_entropy)

LOGGER = utils.get_logger(__name__)

IDENTITY_TOLERANCE = 1e-10
EMBEDDING_TOLERANCE = 1e-10
SUPPORT_TOLERANCE = 1e-12


class MemoryState:

    def __init__(self, block_dimensions, blocks, probabilities, beta=1.0):
        """
        Memory whose state space is the direct sum of blocks; block 0 is the standard (erased) block
        :param block_dimensions: Dimensions d_n, n = 0..K
        :param blocks: One unit-trace DensityMatrix per block
        :param probabilities: Block probabilities p_n
        :param beta: Inverse temperature of the canonical reference on block 0
        """
        self._block_dimensions = [int(d) for d in block_dimensions]
        self._blocks = list(blocks)
        self._probabilities = np.asarray(probabilities, dtype=float).reshape(-1)
        if len(self._block_dimensions) == 0 or min(self._block_dimensions) < 1:
            raise ConfigurationError("Block dimensions must be positive", field="block_dimensions")
        if len(self._blocks) != len(self._block_dimensions) or self._probabilities.size != len(self._blocks):
            raise ConfigurationError("One block and one probability are needed per block dimension")
        for index, (dimension, block) in enumerate(zip(self._block_dimensions, self._blocks)):
            if block.dimension != dimension:
                raise ConfigurationError(f"Block {index} has dimension {block.dimension}, expected {dimension}")
            if abs(block.trace - 1) > 1e-10:
                raise InvariantViolationError("unit-trace", f"block {index} has trace {block.trace!r}")
        if np.any(self._probabilities < 0) or abs(self._probabilities.sum() - 1) > 1e-12:
            raise InvariantViolationError("normalization", "block probabilities must form a probability vector")
        if beta <= 0:
            raise ConfigurationError("beta must be positive", field="beta")
        self._beta = float(beta)

    @property
    def block_dimensions(self):
        return self._block_dimensions

    @property
    def blocks(self):
        return self._blocks

    @property
    def probabilities(self):
        return self._probabilities

    @property
    def beta(self):
        return self._beta

    @property
    def dimension(self):
        return sum(self._block_dimensions)

    @property
    def standard_dimension(self):
        return self._block_dimensions[0]

    @property
    def family(self):
        return block_family(self._block_dimensions)

    def mixture(self):
        """ sum_n p_n rho_n on the direct sum """
        entries = block_diag(*[p * block.entries for p, block in zip(self._probabilities, self._blocks)])
        return DensityMatrix(entries, validate=False)

    @classmethod
    def random(cls, rng, block_dimensions, beta=1.0, ranks=None):
        """ Random blocks of the given ranks (default: full rank) with Dirichlet block probabilities """
        ranks = block_dimensions if ranks is None else ranks
        blocks = [random_density_matrix(rng, d, rank=r) for d, r in zip(block_dimensions, ranks)]
        return cls(block_dimensions, blocks, rng.dirichlet(np.ones(len(block_dimensions))), beta)


class IdentityRecord:

    def __init__(self, lhs, rhs, tolerance=IDENTITY_TOLERANCE):
        self.lhs = lhs
        self.rhs = rhs
        self.tolerance = tolerance

    @property
    def difference(self):
        return abs(self.lhs - self.rhs)

    @property
    def holds(self):
        return self.difference < self.tolerance

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "difference": self.difference, "holds": self.holds}


class KleinRecord:

    def __init__(self, cross_entropy, entropy):
        self.cross_entropy = cross_entropy
        self.entropy = entropy

    @property
    def holds(self):
        return self.cross_entropy >= self.entropy - IDENTITY_TOLERANCE

    def to_dict(self):
        return {"cross_entropy": self.cross_entropy, "entropy": self.entropy,
                "difference": self.cross_entropy - self.entropy, "holds": self.holds}


"""
OPERATIONS
"""


def shannon_entropy(p):
    """ -sum p_n ln p_n in nats, with 0 ln 0 = 0 """
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-10:
        raise ConfigurationError("Shannon entropy needs a probability vector", field="probabilities")
    p = np.clip(p, 0, None)
    return float(-np.sum(xlogy(p, p)))


def default_embedding(memory):
    """
    Unitary that sends the eigenvectors of the mixture, in order of descending eigenvalue, onto the first basis
    states; the support therefore lands in block 0 whenever d_0 is at least the rank of the mixture
    """
    eigenvalues, eigenvectors = np.linalg.eigh(memory.mixture().entries)
    order = np.argsort(-eigenvalues, kind="stable")
    rank = int(np.count_nonzero(eigenvalues > SUPPORT_TOLERANCE))
    if rank > memory.standard_dimension:
        raise ConfigurationError(f"The mixture has rank {rank} but block 0 only has dimension "
                                 f"{memory.standard_dimension}", field="block_dimensions")
    return eigenvectors[:, order].conj().T


def permutation_embedding(dimension, permutation):
    """ Unitary |k> -> |permutation[k]> """
    if sorted(permutation) != list(range(dimension)):
        raise ConfigurationError(f"{permutation} is not a permutation of 0..{dimension - 1}")
    unitary = np.zeros((dimension, dimension), dtype=complex)
    for source, target in enumerate(permutation):
        unitary[target, source] = 1
    return unitary


def embedded_standard_state(memory, embedding_unitary=None):
    """ The block-0 state U (sum_n p_n rho_n) U^dagger; fails when weight is left outside block 0 """
    unitary = default_embedding(memory) if embedding_unitary is None else np.asarray(embedding_unitary, dtype=complex)
    if unitary.shape != (memory.dimension, memory.dimension):
        raise ConfigurationError(f"Embedding shape {unitary.shape} does not match memory dimension {memory.dimension}")
    if not np.allclose(unitary.conj().T @ unitary, np.eye(memory.dimension), atol=1e-10):
        raise ConfigurationError("The embedding is not unitary")
    embedded = unitary @ memory.mixture().entries @ unitary.conj().T
    standard = memory.standard_dimension
    outside = float(np.trace(embedded).real - np.trace(embedded[:standard, :standard]).real)
    if outside > EMBEDDING_TOLERANCE:
        raise ConfigurationError(f"The embedding leaves weight {outside!r} outside block 0")
    block = embedded[:standard, :standard]
    return DensityMatrix((block + block.conj().T) / 2, validate=False)


def landauer_identity(memory, embedding_unitary=None):
    """ H({p_n}) against S(rho_0') - sum_n p_n S(rho_n) """
    lhs = shannon_entropy(memory.probabilities)
    standard = embedded_standard_state(memory, embedding_unitary)
    block_entropies = sum(p * von_neumann_entropy(block) for p, block in zip(memory.probabilities, memory.blocks))
    return IdentityRecord(lhs, von_neumann_entropy(standard) - block_entropies)


def cross_entropy(rho, reference):
    """ -tr(rho ln reference); the reference must be full rank """
    return float(-np.trace(rho.entries @ log_hermitian(reference)).real)


def klein_bound(memory, embedding_unitary=None, hamiltonian=None):
    """
    Klein's inequality -tr(rho_0' ln rho_can) >= S(rho_0') with rho_can the canonical state of a block-0
    Hamiltonian at the memory temperature (zero Hamiltonian: the maximally mixed state of block 0)
    """
    standard = embedded_standard_state(memory, embedding_unitary)
    if hamiltonian is None:
        hamiltonian = np.zeros((memory.standard_dimension, memory.standard_dimension), dtype=complex)
    reference = canonical_state(hamiltonian, memory.beta)
    if reference.dimension != memory.standard_dimension:
        raise ConfigurationError(f"The block-0 Hamiltonian has dimension {reference.dimension}, expected "
                                 f"{memory.standard_dimension}", field="hamiltonian")
    return KleinRecord(cross_entropy(standard, reference), von_neumann_entropy(standard))


def block_additivity(memory):
    """ S(sum_n p_n rho_n) against H({p_n}) + sum_n p_n S(rho_n) for orthogonal blocks """
    mixture_entropy = von_neumann_entropy(memory.mixture())
    rhs = shannon_entropy(memory.probabilities) + sum(p * von_neumann_entropy(block)
                                                      for p, block in zip(memory.probabilities, memory.blocks))
    return IdentityRecord(mixture_entropy, rhs)


def landauer_bound(memory, free_energy_change=0.0):
    """ Lower bound k_B T H({p_n}) + dF on the work needed to erase the memory into block 0 (k_B = 1) """
    return shannon_entropy(memory.probabilities) / memory.beta + free_energy_change
