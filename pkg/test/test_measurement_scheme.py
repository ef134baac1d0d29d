import unittest
import numpy as np
from measuretherm.exceptions import ConfigurationError, ProtocolError
from measuretherm.measurement_scheme import (SchemeConfig, Stage, apply_entangling, apply_nonselective,
                                             prepare_initial, read_event, run_scheme, scheme_statistics)
from measuretherm.operators import dephase, partial_trace


class MeasurementSchemeTestSuite(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        super(MeasurementSchemeTestSuite, cls).setUpClass()
        print("Setting up test suite global variables...")
        cls.HALF = 1 / np.sqrt(2)
        cls.CONFIG = SchemeConfig([0.6, 0.8])
        cls.BALANCED = SchemeConfig([cls.HALF, cls.HALF], apparatus_dimension=2)

    def test_config_validation(self):
        with self.assertRaises(ConfigurationError):
            SchemeConfig([0.6, 0.6])
        with self.assertRaises(ConfigurationError):
            SchemeConfig([0.6, 0.8], eigenvalues=[1.0, 1.0])
        with self.assertRaises(ConfigurationError):
            SchemeConfig([0.6, 0.8], pointer_dimension=2)
        assert self.CONFIG.pointer_dimension == 3
        assert self.CONFIG.dims == [2, 1, 3]

    def test_pointer_shift_is_unitary(self):
        for config in (self.CONFIG, self.BALANCED, SchemeConfig([0.6, 0.0, 0.8], pointer_dimension=5)):
            unitary = config.pointer_shift_unitary
            assert np.max(np.abs(unitary.conj().T @ unitary - np.eye(config.dimension))) < 1e-12

    def test_initial_state_is_pure(self):
        initial = prepare_initial(self.CONFIG)
        assert initial.stage == Stage.INITIAL
        assert abs(initial.rho.purity - 1) < 1e-12
        assert abs(initial.rho.trace - 1) < 1e-10

    def test_nonselective_matches_dephasing(self):
        initial = prepare_initial(self.BALANCED)
        nonselective = apply_nonselective(initial)
        expected = dephase(initial.rho, self.BALANCED.system_family)
        assert np.max(np.abs(nonselective.rho.entries - expected.entries)) < 1e-12
        reduced = partial_trace(nonselective.rho, self.BALANCED.dims, 0)
        assert np.allclose(reduced.entries, np.eye(2) / 2, atol=1e-12)

    def test_single_outcome_is_trivial(self):
        config = SchemeConfig([1.0])
        initial = prepare_initial(config)
        nonselective = apply_nonselective(initial)
        assert np.max(np.abs(nonselective.rho.entries - initial.rho.entries)) < 1e-12
        transcript = run_scheme(config)
        assert transcript.outcome == 0

    def test_entangling_preserves_system_marginal(self):
        nonselective = apply_nonselective(prepare_initial(self.CONFIG))
        entangled = apply_entangling(nonselective)
        before = partial_trace(nonselective.rho, self.CONFIG.dims, 0)
        after = partial_trace(entangled.rho, self.CONFIG.dims, 0)
        assert np.max(np.abs(before.entries - after.entries)) < 1e-12
        pointer = partial_trace(entangled.rho, self.CONFIG.dims, 2)
        assert np.allclose(pointer.diagonal, [0.0, 0.36, 0.64], atol=1e-12)

    def test_stage_order_is_enforced(self):
        initial = prepare_initial(self.CONFIG)
        with self.assertRaises(ProtocolError):
            apply_entangling(initial)
        with self.assertRaises(ProtocolError):
            read_event(initial, np.random.default_rng(1))
        with self.assertRaises(ProtocolError):
            apply_nonselective(apply_nonselective(initial))

    def test_run_scheme_is_deterministic(self):
        first = run_scheme(self.CONFIG.with_seed(7))
        second = run_scheme(self.CONFIG.with_seed(7))
        assert first.outcome == second.outcome
        assert [s.stage for s in first.states] == [Stage(s) for s in Stage.list()]
        final = first.state(Stage.POST_READING).rho
        assert np.max(np.abs(final.entries @ final.entries - final.entries)) < 1e-12
        for state in first.states:
            assert abs(state.rho.trace - 1) < 1e-10

    def test_zero_weight_outcome_never_read(self):
        config = SchemeConfig([0.0, 1.0])
        for seed in range(20):
            assert run_scheme(config.with_seed(seed)).outcome == 1

    def test_transcript_table(self):
        table = run_scheme(self.CONFIG).to_dataframe()
        assert list(table["stage"]) == Stage.list()
        assert table.iloc[-1]["outcome"] in (0, 1)

    def test_born_statistics(self):
        statistics = scheme_statistics(self.BALANCED, 10000, master_seed=42)
        sigma = 0.005
        assert statistics.runs == 10000
        assert abs(statistics.frequencies[0] - 0.5) <= 3 * sigma
        assert statistics.consistent()

    def test_chi_squared_statistic(self):
        config = SchemeConfig([0.6, 0.0, 0.8])
        statistics = scheme_statistics(config, 2000, master_seed=3)
        assert statistics.counts[1] == 0
        expected = 2000 * np.array([0.36, 0.64])
        observed = statistics.counts[[0, 2]]
        assert abs(statistics.chi_squared - np.sum((observed - expected) ** 2 / expected)) < 1e-9
        assert statistics.chi_squared < statistics.critical_value


if __name__ == '__main__':
    unittest.main()
