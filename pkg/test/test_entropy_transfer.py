import unittest
import numpy as np
from measuretherm.entropy_transfer import (CLOSED_SYSTEM_REJECTION, INDEPENDENCE_VIOLATION, EntropyLedger,
                                           FactorizationScenario, ScenarioKind, TransferredState, apply_transfer,
                                           check_pairing, ledger_for_scenario, pairing_trace,
                                           reduced_state_no_transfer, star_observable)
from measuretherm.exceptions import ConfigurationError, InvariantViolationError
from measuretherm.operators import (DensityMatrix, StateVector, computational_family, lift_family,
                                    random_density_matrix, random_hermitian)


class EntropyTransferTestSuite(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        super(EntropyTransferTestSuite, cls).setUpClass()
        print("Setting up test suite global variables...")
        cls.DIMS = [2, 2]
        cls.FAMILY = computational_family(2)
        cls.STATES = [random_density_matrix(np.random.default_rng(seed), 4) for seed in range(100)]

    def test_reduced_state_is_normalized(self):
        for rho in self.STATES:
            for keep in (0, 1):
                reduced = reduced_state_no_transfer(rho, self.FAMILY, keep, self.DIMS)
                assert abs(reduced.trace - 1) < 1e-10
                assert reduced.eigenvalues()[0] > -1e-10

    def test_reduced_state_damps_system_coherence(self):
        bell = StateVector(np.array([1, 0, 0, 1]) / np.sqrt(2)).projector()
        plus_zero = StateVector(np.array([1, 0, 1, 0]) / np.sqrt(2)).projector()
        reduced = reduced_state_no_transfer(plus_zero, self.FAMILY, 0, self.DIMS)
        assert abs(reduced.entries[0, 1] - 0.5 * np.exp(-1)) < 1e-12
        lifted = lift_family(self.FAMILY, self.DIMS, 0)
        assert np.allclose(reduced_state_no_transfer(bell, lifted, 1, self.DIMS).entries, np.eye(2) / 2)

    def test_reduced_state_rejects_bad_dims(self):
        with self.assertRaises(ConfigurationError):
            reduced_state_no_transfer(self.STATES[0], self.FAMILY, 0, [2, 3])

    def test_transferred_state_trace(self):
        rho = DensityMatrix.maximally_mixed(2)
        for sigma in (-2.0, 0.0, 0.5, 3.0):
            transferred = apply_transfer(rho, sigma)
            assert abs(transferred.rho.trace - np.exp(-sigma)) < 1e-10
        with self.assertRaises(InvariantViolationError):
            TransferredState(rho, 1.0)
        with self.assertRaises(InvariantViolationError):
            apply_transfer(rho.scaled(0.5), 1.0)

    def test_starred_expectation_is_invariant(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            rho = random_density_matrix(rng, 3)
            observable = random_hermitian(rng, 3)
            sigma = float(rng.uniform(-3, 3))
            transferred = apply_transfer(rho, sigma)
            plain = np.trace(observable.entries @ rho.entries).real
            assert abs(transferred.expectation(star_observable(observable, sigma)) - plain) < 1e-12

    def test_pairing(self):
        for sigma in np.linspace(-3, 3, 13):
            assert check_pairing(self.STATES[0], sigma, -sigma, self.DIMS)
            assert not check_pairing(self.STATES[0], sigma, -sigma + 1e-5, self.DIMS)
        assert check_pairing(self.STATES[1], 0.0, 0.0)
        assert abs(pairing_trace(self.STATES[2], 1.0, 1.0, self.DIMS) - np.exp(2.0)) < 1e-10

    def test_ledgers(self):
        type_i = ledger_for_scenario(FactorizationScenario(ScenarioKind.TYPE_I))
        type_ii = ledger_for_scenario(FactorizationScenario("type_II", tau_et=0.5))
        assert (type_i.sigma_M_to_S, type_i.sigma_S_to_M) == (-1, 1)
        assert (type_ii.sigma_M_to_S, type_ii.sigma_S_to_M) == (0, 0)
        assert type_ii.to_dict()["tau_et"] == 0.5
        assert type_i.net_production == 0

    def test_disqualified_family(self):
        closed = ledger_for_scenario(FactorizationScenario(ScenarioKind.DISQUALIFIED, 0.0))
        assert not closed.accepted and closed.reason == CLOSED_SYSTEM_REJECTION
        full = ledger_for_scenario(FactorizationScenario(ScenarioKind.DISQUALIFIED, 1.0))
        assert full.accepted and (full.sigma_M_to_S, full.sigma_S_to_M) == (-1, 1)
        for alpha in (0.25, 0.5, 0.9):
            split = ledger_for_scenario(FactorizationScenario(ScenarioKind.DISQUALIFIED, alpha))
            assert not split.accepted and split.reason == INDEPENDENCE_VIOLATION
            assert split.to_dict()["accepted"] is False
        with self.assertRaises(ConfigurationError):
            FactorizationScenario(ScenarioKind.DISQUALIFIED)

    def test_unbalanced_ledger_is_rejected(self):
        with self.assertRaises(InvariantViolationError):
            EntropyLedger(-1, 2, FactorizationScenario(ScenarioKind.TYPE_I))


if __name__ == '__main__':
    unittest.main()
