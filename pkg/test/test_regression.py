import unittest
import numpy as np
from measuretherm.exceptions import ConfigurationError
from measuretherm.regression import (RegressionInstance, build_constraints, closed_form_residual, random_instance,
                                     regression_sweep, solve_least_squares, verify_regression)


class RegressionTestSuite(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        super(RegressionTestSuite, cls).setUpClass()
        print("Setting up test suite global variables...")
        cls.HALF = 1 / np.sqrt(2)
        cls.UNIFORM = RegressionInstance([cls.HALF, cls.HALF], 0, [1.0])

    def test_single_outcome_is_solvable(self):
        report = verify_regression(RegressionInstance([1.0, 0.0], 0, [1.0]))
        assert report.solvable
        assert report.residual < 1e-10
        assert abs(report.best_u[0] - 1) < 1e-10

    def test_uniform_instance(self):
        report = verify_regression(self.UNIFORM)
        assert not report.solvable
        assert abs(report.squared_residual - 0.5) < 1e-12
        assert abs(closed_form_residual(self.UNIFORM) - 0.5) < 1e-12
        assert report.to_dict()["solvable"] is False

    def test_constraint_rows(self):
        instance = RegressionInstance([0.6, 0.0, 0.8], 2, [0.25, 0.75], pointer_labels=["a", "b"])
        system = build_constraints(instance)
        assert system.shape == (4, 2)
        assert system.row_labels == [("a", 0), ("a", 2), ("b", 0), ("b", 2)]
        assert np.allclose(system.rhs, [0.0, 0.25, 0.0, 0.75])

    def test_closed_form_matches_least_squares(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            instance = random_instance(rng, outcomes=int(rng.integers(2, 5)), pointers=int(rng.integers(1, 5)))
            report = solve_least_squares(build_constraints(instance))
            assert abs(report.squared_residual - closed_form_residual(instance)) < 1e-10

    def test_substantial_instances_are_unsolvable(self):
        sweep = regression_sweep(np.random.default_rng(22), 200)
        assert len(sweep) == 200
        assert sweep["residual"].min() > 1e-3
        assert not sweep["solvable"].any()
        assert np.max(np.abs(sweep["residual"] - sweep["closed_form"])) < 1e-10
        assert (sweep["constrained_residual"] >= sweep["residual"] - 1e-10).all()

    def test_instance_validation(self):
        with self.assertRaises(ConfigurationError):
            RegressionInstance([1.0, 0.0], 1, [1.0])
        with self.assertRaises(ConfigurationError):
            RegressionInstance([0.0, 0.0], 0, [1.0])
        with self.assertRaises(ConfigurationError):
            RegressionInstance([1.0, 1.0], 0, [1.0])
        with self.assertRaises(ConfigurationError):
            RegressionInstance([1.0], 0, [0.5, 0.6])
        with self.assertRaises(ConfigurationError):
            RegressionInstance([1.0], 0, [1.0], pointer_labels=[1, 2])

    def test_substantial_predicate(self):
        assert self.UNIFORM.is_substantial()
        assert not RegressionInstance([1.0, 0.0], 0, [1.0]).is_substantial()
        assert RegressionInstance([1.0, 0.0], 0, [1.0]).nonzero_outcomes == 1


if __name__ == '__main__':
    unittest.main()
