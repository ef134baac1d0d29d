import unittest
import numpy as np
from measuretherm.exceptions import ConfigurationError, InvariantViolationError
from measuretherm.information_thermo import (MemoryState, block_additivity, default_embedding,
                                             embedded_standard_state, klein_bound, landauer_bound,
                                             landauer_identity, permutation_embedding, shannon_entropy)
from measuretherm.operators import DensityMatrix, random_hermitian


class InformationThermoTestSuite(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        super(InformationThermoTestSuite, cls).setUpClass()
        print("Setting up test suite global variables...")
        cls.PURE_QUBIT = DensityMatrix(np.diag([1.0, 0.0]).astype(complex))
        cls.ONE = DensityMatrix(np.ones((1, 1), dtype=complex))
        cls.COIN = MemoryState([2, 1], [cls.PURE_QUBIT, cls.ONE], [0.5, 0.5])

    def test_shannon_entropy(self):
        assert abs(shannon_entropy([0.5, 0.5]) - np.log(2)) < 1e-15
        assert shannon_entropy([1.0, 0.0]) == 0.0
        with self.assertRaises(ConfigurationError):
            shannon_entropy([0.5, 0.6])

    def test_one_bit_erasure(self):
        embedding = permutation_embedding(3, [0, 2, 1])
        record = landauer_identity(self.COIN, embedding)
        assert abs(record.lhs - np.log(2)) < 1e-12
        assert abs(record.rhs - np.log(2)) < 1e-12
        assert record.holds
        standard = embedded_standard_state(self.COIN, embedding)
        assert np.allclose(standard.entries, np.eye(2) / 2)
        assert abs(landauer_bound(self.COIN) - np.log(2)) < 1e-15

    def test_identity_on_random_memories(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            memory = MemoryState.random(rng, [6, 1, 2], beta=float(rng.uniform(0.5, 2.0)), ranks=[1, 1, 2])
            record = landauer_identity(memory)
            assert record.difference < 1e-10
            assert block_additivity(memory).holds

    def test_klein_inequality(self):
        rng = np.random.default_rng(32)
        for _ in range(50):
            memory = MemoryState.random(rng, [4, 1, 1], ranks=[2, 1, 1])
            assert klein_bound(memory).holds
            record = klein_bound(memory, hamiltonian=random_hermitian(rng, 4).entries)
            assert record.holds
            assert record.to_dict()["difference"] >= -1e-10
        flat = klein_bound(self.COIN, permutation_embedding(3, [0, 2, 1]))
        assert abs(flat.cross_entropy - flat.entropy) < 1e-12

    def test_default_embedding_is_unitary(self):
        memory = MemoryState.random(np.random.default_rng(33), [3, 2], ranks=[1, 2])
        unitary = default_embedding(memory)
        assert np.allclose(unitary.conj().T @ unitary, np.eye(5), atol=1e-10)
        assert abs(embedded_standard_state(memory).trace - 1) < 1e-10

    def test_embedding_errors(self):
        with self.assertRaises(ConfigurationError):
            embedded_standard_state(self.COIN, np.eye(3))
        with self.assertRaises(ConfigurationError):
            embedded_standard_state(self.COIN, np.eye(2))
        with self.assertRaises(ConfigurationError):
            embedded_standard_state(self.COIN, 2 * np.eye(3))
        with self.assertRaises(ConfigurationError):
            permutation_embedding(3, [0, 0, 1])
        full = MemoryState.random(np.random.default_rng(34), [1, 2])
        with self.assertRaises(ConfigurationError):
            landauer_identity(full)

    def test_memory_validation(self):
        with self.assertRaises(InvariantViolationError):
            MemoryState([2, 1], [self.PURE_QUBIT, self.ONE], [0.7, 0.7])
        with self.assertRaises(ConfigurationError):
            MemoryState([2, 2], [self.PURE_QUBIT, self.ONE], [0.5, 0.5])
        with self.assertRaises(ConfigurationError):
            MemoryState([2, 1], [self.PURE_QUBIT, self.ONE], [0.5, 0.5], beta=0.0)
        assert self.COIN.family.dimension == 3


if __name__ == '__main__':
    unittest.main()
