import unittest
import numpy as np
from measuretherm.exceptions import ConfigurationError, InvariantViolationError
from measuretherm.operators import (DensityMatrix, HermitianOperator, ProjectorFamily, StateVector, Superoperator,
                                    block_family, born_probabilities, canonical_state, computational_family, dephase,
                                    expm_hermitian, lift_family, log_hermitian, partial_trace, partition_function,
                                    projector_family_from_basis, random_density_matrix, random_hermitian,
                                    random_unitary, spectral_projectors, tensor_product, unitary_evolve,
                                    von_neumann_entropy)


class OperatorsTestSuite(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        super(OperatorsTestSuite, cls).setUpClass()
        print("Setting up test suite global variables...")
        cls.RNG_SEED = 20240611
        cls.PLUS = StateVector(np.array([1, 1]) / np.sqrt(2))

    def setUp(self):
        self.rng = np.random.default_rng(self.RNG_SEED)

    def test_state_vector_normalization(self):
        with self.assertRaises(InvariantViolationError):
            StateVector([1.0, 1.0])
        unnormalized = StateVector([1.0, 1.0], normalized=False)
        assert unnormalized.dimension == 2

    def test_density_matrix_validation(self):
        with self.assertRaises(InvariantViolationError):
            DensityMatrix(np.array([[1.0, 1.0], [0.0, 0.0]]))
        with self.assertRaises(InvariantViolationError):
            DensityMatrix(np.diag([1.5, -0.5]))
        with self.assertRaises(InvariantViolationError):
            DensityMatrix(np.diag([0.5, 0.4]))
        scaled = DensityMatrix(np.diag([0.5, 0.5]) * np.exp(-1.0), nominal_trace=np.exp(-1.0))
        assert abs(scaled.trace - np.exp(-1.0)) < 1e-12

    def test_hermitian_operator_rejects_non_hermitian(self):
        with self.assertRaises(InvariantViolationError):
            HermitianOperator(np.array([[0, 1], [0, 0]]))

    def test_projector_family_validation(self):
        family = computational_family(3)
        assert family.is_complete()
        with self.assertRaises(InvariantViolationError):
            ProjectorFamily([np.diag([1.0, 0.0]), np.diag([1.0, 1.0])])
        incomplete = ProjectorFamily([np.diag([1.0, 0.0, 0.0]).astype(complex)], validate=False)
        assert not incomplete.is_complete()

    def test_dephase_plus_state(self):
        dephased = dephase(self.PLUS.projector(), computational_family(2))
        assert np.allclose(dephased.entries, np.eye(2) / 2, atol=1e-12)

    def test_dephase_is_idempotent_and_trace_preserving(self):
        family = block_family([2, 1, 2])
        for _ in range(20):
            rho = random_density_matrix(self.rng, 5)
            once = dephase(rho, family)
            twice = dephase(once, family)
            assert abs(once.trace - 1) < 1e-12
            assert np.max(np.abs(once.entries - twice.entries)) < 1e-12

    def test_dephase_rejects_incomplete_family(self):
        incomplete = ProjectorFamily([np.diag([1.0, 0.0]).astype(complex)], validate=False)
        with self.assertRaises(InvariantViolationError):
            dephase(self.PLUS.projector(), incomplete)

    def test_dephase_rejects_dimension_mismatch(self):
        with self.assertRaises(ConfigurationError):
            dephase(self.PLUS.projector(), computational_family(3))

    def test_partial_trace_of_product(self):
        for _ in range(20):
            rho_a = random_density_matrix(self.rng, 2)
            rho_b = random_density_matrix(self.rng, 3)
            product = tensor_product(rho_a, rho_b)
            assert np.max(np.abs(partial_trace(product, [2, 3], 0).entries - rho_a.entries)) < 1e-12
            assert np.max(np.abs(partial_trace(product, [2, 3], 1).entries - rho_b.entries)) < 1e-12

    def test_partial_trace_of_bell_state(self):
        bell = StateVector(np.array([1, 0, 0, 1]) / np.sqrt(2)).projector()
        reduced = partial_trace(bell, [2, 2], 0)
        assert np.allclose(reduced.entries, np.eye(2) / 2, atol=1e-12)
        with self.assertRaises(ConfigurationError):
            partial_trace(bell, [2, 3], 0)

    def test_unitary_evolve_preserves_spectrum(self):
        for _ in range(10):
            rho = random_density_matrix(self.rng, 4)
            hamiltonian = random_hermitian(self.rng, 4)
            evolved = unitary_evolve(rho, hamiltonian, 0.7)
            assert abs(evolved.trace - 1) < 1e-10
            assert np.max(np.abs(np.sort(evolved.eigenvalues()) - np.sort(rho.eigenvalues()))) < 1e-10

    def test_unitary_evolve_zero_time(self):
        rho = random_density_matrix(self.rng, 3)
        evolved = unitary_evolve(rho, random_hermitian(self.rng, 3), 0.0)
        assert np.max(np.abs(evolved.entries - rho.entries)) < 1e-12

    def test_unitary_evolve_rejects_non_hermitian(self):
        with self.assertRaises(InvariantViolationError):
            unitary_evolve(self.PLUS.projector(), np.array([[0, 1], [0, 0]]), 1.0)

    def test_von_neumann_entropy(self):
        assert abs(von_neumann_entropy(self.PLUS.projector())) < 1e-12
        assert abs(von_neumann_entropy(DensityMatrix.maximally_mixed(2)) - np.log(2)) < 1e-12
        assert abs(von_neumann_entropy(DensityMatrix.maximally_mixed(5)) - np.log(5)) < 1e-12

    def test_born_probabilities(self):
        rho = StateVector([0.6, 0.8]).projector()
        probabilities = born_probabilities(rho, computational_family(2))
        assert np.allclose(probabilities, [0.36, 0.64], atol=1e-12)
        for _ in range(10):
            rho = random_density_matrix(self.rng, 4)
            assert abs(born_probabilities(rho, block_family([1, 3])).sum() - rho.trace) < 1e-10

    def test_tensor_product_against_index_loops(self):
        identity = tensor_product(np.eye(2), np.eye(3))
        assert np.array_equal(identity, np.eye(6))
        diagonal = tensor_product(np.diag([2.0, 5.0]), np.eye(2))
        assert np.array_equal(diagonal, np.diag([2.0, 2.0, 5.0, 5.0]))
        a = self.rng.normal(size=(2, 2)) + 1j * self.rng.normal(size=(2, 2))
        b = self.rng.normal(size=(3, 3)) + 1j * self.rng.normal(size=(3, 3))
        expected = np.zeros((6, 6), dtype=complex)
        for i in range(2):
            for j in range(2):
                for k in range(3):
                    for m in range(3):
                        expected[3 * i + k, 3 * j + m] = a[i, j] * b[k, m]
        assert np.max(np.abs(tensor_product(a, b) - expected)) < 1e-15

    def test_partial_trace_against_index_sums(self):
        rho = random_density_matrix(self.rng, 6)
        tensor = rho.entries.reshape(2, 3, 2, 3)
        keep_first = np.zeros((2, 2), dtype=complex)
        keep_second = np.zeros((3, 3), dtype=complex)
        for i in range(2):
            for j in range(2):
                keep_first[i, j] = sum(tensor[i, k, j, k] for k in range(3))
        for k in range(3):
            for m in range(3):
                keep_second[k, m] = sum(tensor[i, k, i, m] for i in range(2))
        assert np.max(np.abs(partial_trace(rho, [2, 3], 0).entries - keep_first)) < 1e-12
        assert np.max(np.abs(partial_trace(rho, [2, 3], 1).entries - keep_second)) < 1e-12

    def test_dephase_against_projector_loop(self):
        family = block_family([1, 2, 1])
        rho = random_density_matrix(self.rng, 4)
        expected = np.zeros((4, 4), dtype=complex)
        for projector in family.projectors:
            expected += projector @ rho.entries @ projector
        assert np.max(np.abs(dephase(rho, family).entries - expected)) < 1e-12

    def test_unitary_evolve_flips_and_keeps(self):
        sigma_x = np.array([[0, 1], [1, 0]], dtype=complex)
        up = DensityMatrix(np.diag([1.0, 0.0]).astype(complex))
        flipped = unitary_evolve(up, sigma_x, np.pi / 2)
        assert np.max(np.abs(flipped.entries - np.diag([0.0, 1.0]))) < 1e-12
        diagonal = DensityMatrix(np.diag([0.2, 0.3, 0.5]).astype(complex))
        kept = unitary_evolve(diagonal, np.diag([1.0, -2.0, 4.0]), 1.7)
        assert np.max(np.abs(kept.entries - diagonal.entries)) < 1e-12

    def test_von_neumann_entropy_of_diagonal_state(self):
        rho = DensityMatrix(np.diag([0.25, 0.75]).astype(complex))
        expected = -(0.25 * np.log(0.25) + 0.75 * np.log(0.75))
        assert abs(von_neumann_entropy(rho) - expected) < 1e-12

    def test_born_probabilities_against_trace_loop(self):
        eigenstate = StateVector([0.0, 1.0, 0.0]).projector()
        assert np.array_equal(born_probabilities(eigenstate, computational_family(3)), [0.0, 1.0, 0.0])
        family = block_family([2, 1, 3])
        rho = random_density_matrix(self.rng, 6)
        expected = [np.trace(projector @ rho.entries).real for projector in family.projectors]
        assert np.max(np.abs(born_probabilities(rho, family) - expected)) < 1e-12

    def test_born_probabilities_reject_missing_weight(self):
        incomplete = ProjectorFamily([np.diag([1.0, 0.0]).astype(complex)], validate=False)
        with self.assertRaises(InvariantViolationError):
            born_probabilities(self.PLUS.projector(), incomplete)

    def test_canonical_state_and_partition_function(self):
        hamiltonian = np.diag([0.0, 1.0])
        rho = canonical_state(hamiltonian, 2.0)
        z = partition_function(hamiltonian, 2.0)
        assert abs(z - (1 + np.exp(-2.0))) < 1e-12
        assert abs(rho.entries[1, 1].real - np.exp(-2.0) / z) < 1e-12
        # large beta stays finite
        assert abs(canonical_state(np.diag([0.0, 1000.0]), 10.0).entries[0, 0].real - 1) < 1e-12

    def test_expm_hermitian_is_unitary(self):
        unitary = expm_hermitian(random_hermitian(self.rng, 5), 1.3)
        assert np.allclose(unitary.conj().T @ unitary, np.eye(5), atol=1e-12)

    def test_spectral_projectors_group_degeneracies(self):
        energies, projectors = spectral_projectors(np.diag([1.0, 0.0, 1.0]))
        assert np.allclose(energies, [0.0, 1.0])
        assert np.allclose(projectors[1], np.diag([1.0, 0.0, 1.0]))

    def test_log_hermitian_requires_full_rank(self):
        with self.assertRaises(ConfigurationError):
            log_hermitian(self.PLUS.projector())
        mixed = DensityMatrix.maximally_mixed(2)
        assert np.allclose(log_hermitian(mixed), np.log(0.5) * np.eye(2))

    def test_lift_and_conjugate_family(self):
        lifted = lift_family(computational_family(2), [2, 3], 0)
        assert lifted.dimension == 6 and lifted.is_complete()
        unitary = random_unitary(self.rng, 3)
        conjugated = computational_family(3).conjugated(unitary)
        assert conjugated.is_complete()
        rotated = projector_family_from_basis(unitary)
        assert rotated.is_complete()

    def test_superoperator_composition(self):
        family = computational_family(2)
        hamiltonian = np.array([[0, 1], [1, 0]], dtype=complex)
        channel = Superoperator.dephasing(family).then(Superoperator.unitary_conjugation(expm_hermitian(
            hamiltonian, 0.3)))
        output = channel(self.PLUS.projector())
        assert abs(output.trace - 1) < 1e-10


if __name__ == '__main__':
    unittest.main()
