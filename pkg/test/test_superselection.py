import unittest
import numpy as np
from measuretherm.exceptions import ConfigurationError, InvariantViolationError
from measuretherm.superselection import (SectorField, averaged_state, box_field, box_kernel, decay_scan,
                                         discrete_field, evolve_sectors, gaussian_envelope, gaussian_field,
                                         offdiagonal_kernel, recurrence_time)


class SuperselectionTestSuite(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        super(SuperselectionTestSuite, cls).setUpClass()
        print("Setting up test suite global variables...")
        cls.HALF = 1 / np.sqrt(2)
        cls.COEFFICIENTS = [cls.HALF, cls.HALF]
        cls.EIGENVALUES = [0.0, 1.0]
        cls.TIMES = np.linspace(0, 3, 50)
        cls.GAUSSIAN = gaussian_field(cls.COEFFICIENTS, cls.EIGENVALUES, 1.0)

    def test_field_validation(self):
        with self.assertRaises(InvariantViolationError):
            SectorField([0.0, 1.0], [0.7, 0.7], self.COEFFICIENTS, self.EIGENVALUES)
        with self.assertRaises(InvariantViolationError):
            SectorField([0.0, 1.0], [1.5, -0.5], self.COEFFICIENTS, self.EIGENVALUES)
        with self.assertRaises(ConfigurationError):
            SectorField([0.0], [1.0], self.COEFFICIENTS, [0.0])

    def test_kernel_at_time_zero(self):
        assert abs(offdiagonal_kernel(self.GAUSSIAN, 0, 1, 0.0) - 1) < 1e-12
        assert abs(offdiagonal_kernel(self.GAUSSIAN, 1, 0, 0.0) - 1) < 1e-12

    def test_gaussian_envelope(self):
        record = decay_scan(self.GAUSSIAN, self.TIMES)
        assert record.pairs == [(0, 1)]
        envelope = gaussian_envelope(1.0, 1.0, self.TIMES)
        assert np.max(np.abs(np.abs(record.kernel(0, 1)) - envelope)) < 1e-6

    def test_box_kernel(self):
        field = box_field(self.COEFFICIENTS, self.EIGENVALUES, 1.0)
        record = decay_scan(field, self.TIMES)
        assert np.max(np.abs(record.kernel(0, 1) - box_kernel(1.0, 1.0, self.TIMES))) < 1e-6

    def test_single_sector_keeps_coherence(self):
        field = discrete_field([0.7], [1.0], self.COEFFICIENTS, self.EIGENVALUES)
        state = averaged_state(evolve_sectors(field, 2.5))
        assert abs(abs(state.entries[0, 1]) - 0.5) < 1e-12

    def test_factorization_and_diagonal_invariance(self):
        initial = averaged_state(self.GAUSSIAN)
        for t in (0.4, 1.5, 2.9):
            state = averaged_state(evolve_sectors(self.GAUSSIAN, t))
            expected = 0.5 * offdiagonal_kernel(self.GAUSSIAN, 0, 1, t)
            assert abs(state.entries[0, 1] - expected) < 1e-12
            assert np.max(np.abs(state.diagonal - initial.diagonal)) < 1e-12
            assert abs(state.trace - 1) < 1e-10

    def test_asymptotic_state_is_dephased(self):
        wide = gaussian_field(self.COEFFICIENTS, self.EIGENVALUES, 1.0, span=10.0)
        state = averaged_state(evolve_sectors(wide, 10.0))
        assert state.max_abs_offdiagonal() < 1e-12
        assert np.max(np.abs(state.diagonal - 0.5)) < 1e-12

    def test_three_outcome_scan(self):
        field = gaussian_field([0.6, 0.0, 0.8], [0.0, 1.0, 2.5], 0.5)
        record = decay_scan(field, self.TIMES)
        assert record.pairs == [(0, 1), (0, 2), (1, 2)]
        table = record.to_dataframe()
        assert list(table.columns) == ["t", "m", "n", "re_kernel", "im_kernel", "abs_kernel"]
        assert len(table) == 3 * len(self.TIMES)
        assert np.max(np.abs(np.abs(record.kernel(0, 2)) - gaussian_envelope(0.5, 2.5, self.TIMES))) < 1e-6

    def test_finite_grid_recurs(self):
        field = discrete_field([-1.0, 1.0], [0.5, 0.5], self.COEFFICIENTS, self.EIGENVALUES)
        revival = recurrence_time(field, 0, 1)
        assert abs(revival - np.pi) < 1e-12
        assert abs(abs(offdiagonal_kernel(field, 0, 1, revival)) - 1) < 1e-12
        assert abs(offdiagonal_kernel(field, 0, 1, revival / 2)) < 1e-12

    def test_scan_rejects_unsorted_times(self):
        with self.assertRaises(ConfigurationError):
            decay_scan(self.GAUSSIAN, [1.0, 0.5])


if __name__ == '__main__':
    unittest.main()
