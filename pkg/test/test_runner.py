import json
import os
import shutil
import tempfile
import unittest
from measuretherm.__main__ import EXIT_CONFIGURATION_ERROR, main
from measuretherm.checks import CheckResult
from measuretherm.runner import (FAILURES_FILE, MANIFEST_FILE, SUMMARY_FILE, ScenarioResult, emit_report,
                                 evaluate_scenario, run_scenario)
from measuretherm.scenario import Scenario
from measuretherm.scenario_config import parse_config
from measuretherm.utils import file_digest


class RunnerTestSuite(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        super(RunnerTestSuite, cls).setUpClass()
        print("Setting up test suite global variables...")
        cls.TEST_DIR = tempfile.mkdtemp(prefix="measuretherm-runner-")
        cls.REGRESSION = "[scenario]\nname = regression\n\n[regression]\nrandom_instances = 5\n"
        cls.JARZYNSKI = "[scenario]\nname = jarzynski\n\n[jarzynski]\ndimension = 3\nsteps = 20\n" \
                        "random_protocols = 3\nmax_dimension = 4\nmax_steps = 20\ntrials = 20000\n"
        cls.LANDAUER = "[scenario]\nname = landauer\nseed = 11\n\n[landauer]\nrandom_memories = 5\n"

    @classmethod
    def tearDownClass(cls):
        super(RunnerTestSuite, cls).tearDownClass()
        shutil.rmtree(cls.TEST_DIR, ignore_errors=True)

    def output(self, name):
        return os.path.join(self.TEST_DIR, name)

    def write_config(self, name, text):
        path = self.output(name)
        with open(path, "w") as config_file:
            config_file.write(text)
        return path

    def read_summary(self, directory):
        with open(os.path.join(directory, SUMMARY_FILE)) as summary_file:
            return json.load(summary_file)

    def test_trivial_regression_is_solvable(self):
        path = self.write_config("regression.ini", self.REGRESSION)
        out = self.output("regression")
        assert main(["run", path, "--out", out]) == 0
        summary = self.read_summary(out)
        assert summary["values"]["solvable"] is True
        assert summary["passed"] is True
        assert os.path.exists(os.path.join(out, "checks.csv"))
        assert not os.path.exists(os.path.join(out, FAILURES_FILE))

    def test_jarzynski_summary(self):
        config = parse_config(self.JARZYNSKI).with_overrides(output_path=self.output("jarzynski"))
        assert run_scenario(config) == 0
        summary = self.read_summary(config.output_path)
        assert summary["values"]["max_error"] < 1e-10
        assert summary["beta"] == 1.0 and summary["temperature"] == 1.0
        for table in ("work_distribution", "renewal", "sweep"):
            assert os.path.exists(os.path.join(config.output_path, f"{table}.csv"))

    def test_runs_are_reproducible(self):
        path = self.write_config("landauer.ini", self.LANDAUER)
        first, second = self.output("landauer-1"), self.output("landauer-2")
        assert main(["run", path, "--out", first]) == 0
        assert main(["run", path, "--out", second]) == 0
        assert file_digest(os.path.join(first, MANIFEST_FILE)) == file_digest(os.path.join(second, MANIFEST_FILE))
        with open(os.path.join(first, MANIFEST_FILE)) as manifest_file:
            manifest = json.load(manifest_file)
        assert manifest["scenario"] == "landauer"
        assert [entry["path"] for entry in manifest["files"]] == sorted(entry["path"] for entry in manifest["files"])

    def test_seed_override_changes_output(self):
        path = self.write_config("landauer-seeded.ini", self.LANDAUER)
        first, second = self.output("landauer-seed-1"), self.output("landauer-seed-2")
        assert main(["run", path, "--out", first]) == 0
        assert main(["run", path, "--out", second, "--seed", "12"]) == 0
        assert self.read_summary(second)["seed"] == 12
        memories = [file_digest(os.path.join(directory, "memories.csv")) for directory in (first, second)]
        assert memories[0] != memories[1]

    def test_list_scenarios(self):
        assert main(["list-scenarios"]) == 0

    def test_configuration_errors(self):
        path = self.write_config("negative-beta.ini", "[scenario]\nname = jarzynski\n\n[jarzynski]\nbeta = -1\n")
        assert main(["run", path]) == EXIT_CONFIGURATION_ERROR
        with self.assertRaises(SystemExit):
            main(["run", self.output("missing.ini")])
        with self.assertRaises(SystemExit):
            main(["teleport"])

    def test_failed_checks_are_reported(self):
        result = ScenarioResult(Scenario.ENTROPY, 42)
        result.checks.add(CheckResult("always_fails", "entropy-pairing", 1.0, 0.5, False))
        out = self.output("failed")
        written = emit_report(result, out)
        assert FAILURES_FILE in written and MANIFEST_FILE in written
        with open(os.path.join(out, FAILURES_FILE)) as failures_file:
            failures = json.load(failures_file)
        assert failures == [{"check": "always_fails", "anchor": "entropy-pairing", "value": 1.0, "threshold": 0.5,
                             "passed": False, "scenario": "entropy"}]

    def test_poisson_convergence_check(self):
        config = parse_config("[scenario]\nname = poisson\nseed = 5\n\n[poisson]\nmembers = 20000\n"
                              "convergence_members = 1000, 100000\n")
        result = evaluate_scenario(config)
        table = result.tables["convergence"]
        assert list(table["members"]) == [1000, 100000]
        assert (table["max_abs_error"] <= 5 * table["monte_carlo_scale"]).all()
        scale = [check for check in result.checks if check.name == "convergence_scale"]
        assert len(scale) == 1 and scale[0].passed

    def test_unnormalized_coefficients_exit_with_configuration_error(self):
        path = self.write_config("unnormalized.ini", "[scenario]\nname = poisson\n\n[poisson]\ncoefficients = 1, 1\n")
        assert main(["run", path, "--out", self.output("unnormalized")]) == EXIT_CONFIGURATION_ERROR
        assert not os.path.exists(os.path.join(self.output("unnormalized"), SUMMARY_FILE))

    def test_evaluate_regression_without_writing(self):
        config = parse_config(self.REGRESSION)
        result = evaluate_scenario(config)
        assert result.passed()
        assert set(result.tables) == {"instance", "sweep"}
        assert abs(result.values["uniform_squared_residual"] - 0.5) < 1e-12


if __name__ == '__main__':
    unittest.main()
