"""Runs scenarios end to end and writes their reports: CSV tables, summary.json, report.txt and a manifest of
SHA-256 digests"""

import json
import shutil
import tempfile
import time
from pathlib import Path
import numpy as np
import pandas as pd
from measuretherm import utils
from measuretherm.checks import CheckCollection, CheckResult
from measuretherm.config import VERSION
from measuretherm.exceptions import ConfigurationError, InvariantViolationError
from measuretherm.scenario import Scenario
from measuretherm.scenario_config import DEFAULT_SEED, DEFAULTS, ScenarioConfig
from measuretherm.operators import (DensityMatrix, StateVector, born_probabilities, canonical_state,
                                    computational_family, dephase, partial_trace, random_density_matrix,
                                    random_hermitian)
from measuretherm.measurement_scheme import SchemeConfig, Stage, run_scheme, scheme_statistics
from measuretherm.superselection import (averaged_state, box_field, box_kernel, decay_scan, discrete_field,
                                         evolve_sectors, gaussian_envelope, gaussian_field, offdiagonal_kernel,
                                         recurrence_time)
from measuretherm.poisson_ensemble import (EnlargedEnsemble, analytic_solution, conditioned_average, default_schedule,
                                           evolve_ensemble, ks_statistic, schrodinger_trajectory, survival_solution)
from measuretherm.entropy_transfer import (CLOSED_SYSTEM_REJECTION, INDEPENDENCE_VIOLATION, FactorizationScenario,
                                           ScenarioKind, apply_transfer, check_pairing, ledger_for_scenario,
                                           reduced_state_no_transfer, star_observable)
from measuretherm.quantum_work import (EventReadingSchedule, average_work, crooks_ratio_check, jarzynski_equality,
                                       jarzynski_sweep, mgf_trace, modified_jarzynski, propagator, random_protocol,
                                       renew_definition_time, sample_work, thermodynamic_inequality, work_distribution)
from measuretherm.regression import (RegressionInstance, closed_form_residual, regression_sweep, verify_regression)
from measuretherm.information_thermo import (MemoryState, block_additivity, klein_bound, landauer_bound,
                                             landauer_identity, permutation_embedding)

LOGGER = utils.get_logger(__name__)

CSV_FLOAT_FORMAT = "%.17g"
SUMMARY_FILE = "summary.json"
REPORT_FILE = "report.txt"
MANIFEST_FILE = "manifest.json"
FAILURES_FILE = "failures.json"
CHECKS_TABLE = "checks"

EXACT = 1e-12
IDENTITY = 1e-10
MONTE_CARLO_SCALE = 5.0


class ScenarioResult:

    def __init__(self, scenario, seed, parameters=None, beta=None):
        self.scenario = Scenario(scenario)
        self.seed = seed
        self.parameters = parameters or {}
        self.beta = beta
        self.tables = {}
        self.values = {}
        self.checks = CheckCollection()
        self.children = []

    def passed(self):
        return self.checks.passed() and all(child.passed() for child in self.children)

    def failures(self):
        records = [dict(check.to_dict(), scenario=self.scenario.value) for check in self.checks.failures()]
        for child in self.children:
            records.extend(child.failures())
        return records

    def summary(self):
        record = {"scenario": self.scenario.value, "version": VERSION, "seed": self.seed,
                  "parameters": _format_parameters(self.scenario, self.parameters),
                  "values": {key: _plain(value) for key, value in self.values.items()},
                  "checks": [check.to_dict() for check in self.checks], "passed": self.passed()}
        if self.beta is not None:
            record["beta"] = self.beta
            record["temperature"] = 1 / self.beta
        if self.children:
            record["components"] = {child.scenario.value: child.summary() for child in self.children}
        return record


def evaluate_scenario(config, progress=False):
    """
    Runs the computations and checks of a scenario without writing anything
    :param config: ScenarioConfig
    :param progress: Show tqdm progress bars for long sweeps
    :return: ScenarioResult
    """
    if config.scenario == Scenario.FULL_PIPELINE:
        result = ScenarioResult(Scenario.FULL_PIPELINE, config.seed)
        for component in Scenario.components():
            result.children.append(_evaluate(component, config, progress))
        return result
    return _evaluate(config.scenario, config, progress)


def run_scenario(config, progress=False):
    """
    Evaluates the scenario and writes its report into config.output_path
    :return: Exit status: 0 when every check passed, 1 otherwise (failures.json names each failed check)
    """
    LOGGER.info("Running scenario '%s' (seed %i)", config.scenario.value, config.seed)
    start = time.time()
    try:
        result = evaluate_scenario(config, progress)
    except InvariantViolationError as error:
        LOGGER.error("Scenario '%s' stopped on a violated invariant: %s", config.scenario.value, error)
        output = Path(config.output_path)
        output.mkdir(parents=True, exist_ok=True)
        _write_json(output / FAILURES_FILE, [{"scenario": config.scenario.value, "check": "invariant",
                                              "anchor": error.invariant, "value": str(error), "threshold": None,
                                              "passed": False}])
        return 1
    emit_report(result, config.output_path)
    LOGGER.info("...done (scenario time: %.2fs)", time.time() - start)
    if not result.passed():
        for failure in result.failures():
            LOGGER.warning("Check failed: %s/%s [%s]", failure["scenario"], failure["check"], failure["anchor"])
        return 1
    return 0


def emit_report(result, output_path):
    """
    Writes the tables, checks, summary and report of a result (components of full_pipeline go to subdirectories),
    then a manifest listing every file with its SHA-256 digest
    :return: List of written file paths relative to output_path
    """
    root = Path(output_path)
    written = _emit(result, root, root)
    if not result.passed():
        _write_json(root / FAILURES_FILE, result.failures())
        written.append(FAILURES_FILE)
    manifest = {"version": VERSION, "scenario": result.scenario.value,
                "files": [{"path": path, "sha256": utils.file_digest(root / path)} for path in sorted(written)]}
    _write_json(root / MANIFEST_FILE, manifest)
    return written + [MANIFEST_FILE]


def selftest(seed=DEFAULT_SEED, repeat=2, output_path=None, progress=False):
    """
    Runs the full pipeline `repeat` times into separate directories and compares their manifests byte for byte
    :return: 0 when every run passed and all output trees are identical, 1 otherwise
    """
    if repeat < 1:
        raise ConfigurationError("repeat must be at least 1", field="repeat")
    scratch = Path(output_path) if output_path else Path(tempfile.mkdtemp(prefix="measuretherm-selftest-"))
    statuses, manifests = [], []
    try:
        for index in range(repeat):
            LOGGER.info("Self-test run %i of %i", index + 1, repeat)
            config = ScenarioConfig(Scenario.FULL_PIPELINE, seed=seed, output_path=str(scratch / f"run-{index}"))
            statuses.append(run_scenario(config, progress))
            manifest = scratch / f"run-{index}" / MANIFEST_FILE
            manifests.append(manifest.read_bytes() if manifest.exists() else b"")
    finally:
        if output_path is None:
            shutil.rmtree(scratch, ignore_errors=True)
    identical = all(manifest == manifests[0] for manifest in manifests)
    if not identical:
        LOGGER.error("Self-test runs produced different output trees")
    return 0 if identical and all(status == 0 for status in statuses) else 1


"""
SCENARIOS
"""


def _evaluate(scenario, config, progress):
    parameters = config.section(scenario)
    LOGGER.info("Evaluating %s...", scenario.value)
    start = time.time()
    result = _SCENARIOS[scenario](parameters, config.seed, progress)
    LOGGER.info("...done (%s time: %.2fs)", scenario.value, time.time() - start)
    return result


def _scheme(parameters, seed, progress):
    result = ScenarioResult(Scenario.SCHEME, seed, parameters)
    config = SchemeConfig(parameters["coefficients"], parameters["eigenvalues"] or None,
                          parameters["apparatus_dimension"], parameters["pointer_dimension"] or None,
                          seed=utils.derive_seed(seed, "scheme-single-run"))
    transcript = run_scheme(config)
    result.tables["stages"] = transcript.to_dataframe()
    checks = result.checks
    traces = [abs(state.rho.trace - 1) for state in transcript.states]
    checks.below("stage_traces", "trace-preservation", max(traces), IDENTITY)
    checks.below("initial_purity", "pure-preparation", abs(transcript.state(Stage.INITIAL).rho.purity - 1), IDENTITY)
    marginals = [partial_trace(transcript.state(stage).rho, config.dims, 0).diagonal
                 for stage in (Stage.INITIAL, Stage.POST_NONSELECTIVE, Stage.POST_ENTANGLING)]
    drift = max(float(np.max(np.abs(m - marginals[0]))) for m in marginals)
    checks.below("marginal_preservation", "nonselective-marginals", drift, IDENTITY)
    dephased = partial_trace(transcript.state(Stage.POST_NONSELECTIVE).rho, config.dims, 0)
    checks.below("dephased_coherence", "non-selective-measurement", dephased.max_abs_offdiagonal(), IDENTITY)
    pointer = born_probabilities(transcript.state(Stage.POST_ENTANGLING).rho, config.pointer_family)
    correlation = float(np.max(np.abs(pointer[1:config.outcomes + 1] - config.born_weights)))
    checks.below("pointer_correlation", "pointer-entangling", correlation, IDENTITY)
    checks.below("reading_purity", "event-reading", abs(transcript.state(Stage.POST_READING).rho.purity - 1), IDENTITY)
    statistics = scheme_statistics(config, parameters["runs"], master_seed=seed, progress=progress)
    result.tables["outcomes"] = statistics.to_dataframe()
    born = float(config.born_weights[0])
    sigma = np.sqrt(born * (1 - born) / statistics.runs)
    frequency = float(statistics.frequencies[0])
    checks.add(CheckResult("outcome_0_frequency", "born-rule", abs(frequency - born), 3 * sigma,
                           abs(frequency - born) <= 3 * sigma))
    checks.below("outcome_chi_squared", "born-rule", statistics.chi_squared, statistics.critical_value)
    result.values.update({"outcome": transcript.outcome, "frequency_0": frequency, "born_0": born,
                          "sigma_0": sigma, "chi_squared": statistics.chi_squared, "runs": statistics.runs})
    return result


def _decohere(parameters, seed, progress):
    result = ScenarioResult(Scenario.DECOHERE, seed, parameters)
    coefficients = np.asarray(parameters["coefficients"])
    eigenvalues = np.asarray(parameters["eigenvalues"], dtype=float)
    if coefficients.size < 2 or coefficients.size != eigenvalues.size:
        raise ConfigurationError("decohere needs at least two coefficients and one eigenvalue per coefficient",
                                 field="decohere.eigenvalues")
    sigma = parameters["sigma_p"]
    times = np.linspace(0, parameters["t_max"], parameters["points"])
    checks = result.checks
    field = gaussian_field(coefficients, eigenvalues, sigma, parameters["grid_size"], parameters["span"])
    record = decay_scan(field, times)
    result.tables["decay_gaussian"] = record.to_dataframe()
    envelope_error = max(float(np.max(np.abs(np.abs(record.kernel(m, n)) - gaussian_envelope(
        sigma, abs(eigenvalues[m] - eigenvalues[n]), times)))) for m, n in record.pairs)
    checks.below("gaussian_envelope", "riemann-lebesgue-decay", envelope_error, 1e-6)
    half_width = parameters["box_half_width"]
    box = box_field(coefficients, eigenvalues, half_width, parameters["grid_size"])
    box_record = decay_scan(box, times)
    result.tables["decay_box"] = box_record.to_dataframe()
    box_error = max(float(np.max(np.abs(box_record.kernel(m, n) - box_kernel(
        half_width, abs(eigenvalues[m] - eigenvalues[n]), times)))) for m, n in box_record.pairs)
    checks.below("box_sinc", "riemann-lebesgue-decay", box_error, 1e-6)
    middle = times[len(times) // 2]
    state = averaged_state(evolve_sectors(field, middle))
    factorization = max(abs(state.entries[m, n] - coefficients[m] * np.conj(coefficients[n])
                            * offdiagonal_kernel(field, m, n, middle)) for m, n in record.pairs)
    checks.below("kernel_factorization", "sector-average", factorization, EXACT)
    initial = averaged_state(field)
    final = averaged_state(evolve_sectors(field, times[-1]))
    checks.below("diagonal_invariance", "sector-average", float(np.max(np.abs(final.diagonal - initial.diagonal))),
                 EXACT)
    checks.below("averaged_trace", "sector-average", abs(final.trace - 1), IDENTITY)
    gaps = np.abs(np.subtract.outer(eigenvalues, eigenvalues))
    smallest_gap = float(np.min(gaps[np.triu_indices(eigenvalues.size, 1)]))
    asymptotic_time = 10.0 / (sigma * smallest_gap)
    wide = gaussian_field(coefficients, eigenvalues, sigma, parameters["grid_size"], parameters["asymptotic_span"])
    asymptotic = averaged_state(evolve_sectors(wide, asymptotic_time))
    checks.below("asymptotic_coherence", "superselection-dephasing", asymptotic.max_abs_offdiagonal(), EXACT)
    born = np.abs(coefficients) ** 2
    checks.below("asymptotic_diagonal", "superselection-dephasing",
                 float(np.max(np.abs(asymptotic.diagonal - born))), EXACT)
    two_point = discrete_field([-sigma, sigma], [0.5, 0.5], coefficients, eigenvalues)
    revival = recurrence_time(two_point, 0, 1)
    revival_kernel = abs(offdiagonal_kernel(two_point, 0, 1, revival))
    checks.above("finite_sector_recurrence", "finite-sector-obstruction", revival_kernel, 1e-3)
    result.values.update({"max_envelope_error": envelope_error, "max_box_error": box_error,
                          "asymptotic_time": asymptotic_time,
                          "asymptotic_offdiagonal": asymptotic.max_abs_offdiagonal(),
                          "recurrence_time": revival, "recurrence_kernel": revival_kernel})
    return result


def _poisson(parameters, seed, progress):
    result = ScenarioResult(Scenario.POISSON, seed, parameters)
    coefficients = np.asarray(parameters["coefficients"])
    dimension = coefficients.size
    rho = StateVector(coefficients).projector()
    family = computational_family(dimension)
    delta_tau = parameters["delta_tau"]
    members = parameters["members"]
    schedule = default_schedule(delta_tau, parameters["horizon"], parameters["points"])
    hamiltonian = None
    if parameters["energy_gap"] != 0:
        hamiltonian = np.diag(parameters["energy_gap"] * np.arange(dimension)).astype(complex)
    ensemble = EnlargedEnsemble.prepare(rho, family, delta_tau, members, utils.make_rng(seed, "poisson-occurrence"))
    trajectory = evolve_ensemble(ensemble, schedule, hamiltonian, progress)
    unmeasured = schrodinger_trajectory(rho, schedule, hamiltonian)
    result.tables["trajectory"] = trajectory.to_dataframe()
    checks = result.checks
    tolerance = 3 / np.sqrt(members)
    survival = float(trajectory.survival_fractions[trajectory.index_of(delta_tau)])
    checks.below("survival_at_delta_tau", "one-time-poisson-survival", abs(survival - np.exp(-1)), 0.01)
    half_life = float(trajectory.survival_fractions[trajectory.index_of(delta_tau * np.log(2))])
    checks.below("survival_at_half_life", "one-time-poisson-survival", abs(half_life - 0.5), tolerance)
    averaged = trajectory.state_at(delta_tau)
    closed_form = analytic_solution(unmeasured, family, delta_tau)
    offdiagonal = _offdiagonal_mask(dimension)
    reference = float(np.max(np.abs(closed_form.entries[offdiagonal]))) if dimension > 1 else 0.0
    deviation = float(np.max(np.abs(averaged.entries - closed_form.entries)))
    relative = deviation / reference if reference > 0 else deviation
    relative_bound = max(0.01, 3 * np.sqrt((np.e - 1) / members))
    checks.below("cut_off_damping", "cut-off-average", relative, relative_bound)
    late = survival_solution(unmeasured, family, 3 * delta_tau, delta_tau)
    late_deviation = float(np.max(np.abs(trajectory.state_at(3 * delta_tau).entries - late.entries)))
    checks.below("survival_law_damping", "one-time-poisson-survival", late_deviation, tolerance)
    diagonals = np.array([state.diagonal for state in trajectory.states])
    checks.below("diagonal_conservation", "non-selective-measurement",
                 float(np.max(np.abs(diagonals - diagonals[0]))), tolerance)
    traces = np.einsum("kii->k", ensemble.states).real
    checks.below("member_traces", "trace-preservation", float(np.max(np.abs(traces - 1))), IDENTITY)
    single = dephase(unmeasured.states[-1], family)
    conditioned = conditioned_average(ensemble, delta_tau)
    checks.below("single_dephasing_equivalence", "ensemble-equivalence",
                 float(np.max(np.abs(conditioned.entries - single.entries))), IDENTITY)
    occurrence = ks_statistic(ensemble.occurrence_times, delta_tau)
    checks.below("occurrence_time_ks", "occurrence-time-law", occurrence.statistic, occurrence.critical_value)
    checks.below("mean_occurrence_time", "occurrence-time-law", abs(occurrence.sample_mean - delta_tau),
                 3 * occurrence.standard_error)
    rows = []
    for count in parameters["convergence_members"]:
        sample = EnlargedEnsemble.prepare(rho, family, delta_tau, count,
                                          utils.make_rng(seed, f"poisson-convergence-{count}"))
        short = evolve_ensemble(sample, [0.0, delta_tau], hamiltonian)
        short_unmeasured = schrodinger_trajectory(rho, [0.0, delta_tau], hamiltonian)
        target = analytic_solution(short_unmeasured, family, delta_tau)
        rows.append({"members": count, "max_abs_error": float(np.max(np.abs(short.states[-1].entries - target.entries))),
                     "monte_carlo_scale": 1 / np.sqrt(count)})
    result.tables["convergence"] = _frame(rows, ["members", "max_abs_error", "monte_carlo_scale"])
    if rows:
        scaled = max(row["max_abs_error"] / row["monte_carlo_scale"] for row in rows)
        checks.below("convergence_scale", "monte-carlo-convergence", scaled, MONTE_CARLO_SCALE)
    result.values.update({"survival_at_delta_tau": survival, "offdiagonal_relative_error": relative,
                          "ks_statistic": occurrence.statistic, "ks_p_value": occurrence.p_value,
                          "mean_occurrence_time": occurrence.sample_mean})
    return result


def _jarzynski(parameters, seed, progress):
    beta = parameters["beta"]
    result = ScenarioResult(Scenario.JARZYNSKI, seed, parameters, beta=beta)
    protocol = random_protocol(utils.make_rng(seed, "jarzynski-protocol"), parameters["dimension"],
                               parameters["steps"], beta)
    record = jarzynski_equality(protocol)
    distribution = work_distribution(protocol)
    result.tables["work_distribution"] = distribution.to_dataframe()
    checks = result.checks
    checks.below("jarzynski_equality", "jarzynski-equality", record.max_error, IDENTITY)
    checks.below("heisenberg_trace", "jarzynski-equality", abs(mgf_trace(protocol) - record.rhs), IDENTITY)
    unitary = propagator(protocol, 0, protocol.steps)
    checks.below("unitarity", "time-ordered-propagator",
                 float(np.max(np.abs(unitary.conj().T @ unitary - np.eye(protocol.dimension)))), IDENTITY)
    work = average_work(protocol)
    checks.below("average_work", "average-work", abs(work - distribution.mean()), IDENTITY)
    checks.true("second_law", "thermodynamic-inequality", work >= record.free_energy - IDENTITY)
    renewals = [renew_definition_time(protocol, pivot) for pivot in range(protocol.steps + 1)]
    result.tables["renewal"] = _frame([{"pivot": pivot, "mgf": value} for pivot, value in enumerate(renewals)],
                                      ["pivot", "mgf"])
    checks.below("definition_time_renewal", "definition-time-renewal",
                 float(np.max(np.abs(np.array(renewals) - record.mgf))), IDENTITY)
    real_protocol = random_protocol(utils.make_rng(seed, "jarzynski-crooks"), parameters["dimension"],
                                    parameters["steps"], beta, real=True)
    crooks = crooks_ratio_check(real_protocol)
    checks.add(CheckResult("crooks_ratio", "crooks-relation", crooks.max_relative_error, crooks.tolerance,
                           crooks.passed()))
    sampled = sample_work(protocol, parameters["trials"], utils.make_rng(seed, "jarzynski-sampling"))
    estimate = sampled.mgf(beta)
    error = sampled.mgf_standard_error(beta)
    checks.add(CheckResult("sampled_jarzynski", "two-point-measurement", abs(estimate - record.rhs), 4 * error,
                           abs(estimate - record.rhs) <= 4 * error))
    sweep = jarzynski_sweep(utils.make_rng(seed, "jarzynski-sweep"), parameters["random_protocols"],
                            parameters["max_dimension"], parameters["max_steps"],
                            (parameters["beta_min"], parameters["beta_max"]), progress)
    result.tables["sweep"] = sweep
    if len(sweep) > 0:
        checks.below("jarzynski_sweep", "jarzynski-equality", float(sweep["error"].max()), IDENTITY)
        checks.true("second_law_sweep", "thermodynamic-inequality", bool(sweep["second_law"].all()))
    result.values.update(record.to_dict())
    result.values.update({"average_work": work, "sampled_mgf": estimate, "sampled_standard_error": error,
                          "crooks_shared_atoms": crooks.shared_atoms})
    return result


def _jarzynski_readings(parameters, seed, progress):
    beta = parameters["beta"]
    result = ScenarioResult(Scenario.JARZYNSKI_READINGS, seed, parameters, beta=beta)
    dimension = parameters["dimension"]
    family = computational_family(dimension)
    schedule = EventReadingSchedule(parameters["reading_steps"])
    compatible = random_protocol(utils.make_rng(seed, "readings-protocol"), dimension, parameters["steps"], beta,
                                 family=family)
    generic = random_protocol(utils.make_rng(seed, "readings-generic"), dimension, parameters["steps"], beta)
    record = modified_jarzynski(compatible, schedule, family)
    checks = result.checks
    checks.below("event_reading_jarzynski", "modified-jarzynski", abs(record.lhs - record.rhs), IDENTITY)
    checks.true("work_shift", "event-reading-work", record.work_shift == len(schedule) / beta)
    rows = []
    for kind, protocol in (("compatible", compatible), ("generic", generic)):
        for count in range(len(schedule) + 1):
            partial = modified_jarzynski(protocol, EventReadingSchedule(schedule.reading_steps[:count]), family)
            rows.append({"protocol": kind, "n_readings": count, "lhs": partial.lhs,
                         "alternative_lhs": partial.alternative_lhs, "rhs": partial.rhs,
                         "work_shift": partial.work_shift})
    table = _frame(rows, ["protocol", "n_readings", "lhs", "alternative_lhs", "rhs", "work_shift"])
    result.tables["readings"] = table
    compatible_rows = table[table["protocol"] == "compatible"]
    checks.below("reading_invariance", "modified-jarzynski",
                 float(np.max(np.abs(compatible_rows["lhs"] - record.lhs))), IDENTITY)
    generic_rows = table[table["protocol"] == "generic"]
    checks.below("event_reading_jarzynski_generic", "modified-jarzynski",
                 float(np.max(np.abs(generic_rows["lhs"] - generic_rows["rhs"]))), IDENTITY)
    left, right, holds = thermodynamic_inequality(compatible, schedule)
    checks.true("thermodynamic_inequality", "thermodynamic-inequality", holds)
    result.values.update(record.to_dict())
    result.values.update({"inequality_left": left, "inequality_right": right})
    return result


def _regression(parameters, seed, progress):
    result = ScenarioResult(Scenario.REGRESSION, seed, parameters)
    instance = RegressionInstance(parameters["coefficients"], parameters["target_outcome"], parameters["chi"])
    report = verify_regression(instance)
    checks = result.checks
    trivial = instance.nonzero_outcomes == 1
    if trivial:
        checks.below("trivial_residual", "regression-solvability", report.residual, EXACT)
    checks.true("solvability", "regression-solvability", report.solvable == trivial)
    rotated = RegressionInstance(instance.coefficients * np.exp(1j * np.arange(instance.coefficients.size)),
                                 instance.target_outcome, instance.chi)
    checks.below("phase_invariance", "regression-solvability",
                 abs(verify_regression(rotated).residual - report.residual), EXACT)
    half = 1 / np.sqrt(2)
    uniform = verify_regression(RegressionInstance([half, half], 0, [1.0, 0.0]))
    checks.below("uniform_closed_form", "regression-residual", abs(uniform.squared_residual - 0.5), EXACT)
    result.tables["instance"] = _frame([dict(report.to_dict(), coefficients=utils.format_number_list(
        instance.coefficients.tolist()), chi=utils.format_number_list(instance.chi.tolist()),
        closed_form=np.sqrt(closed_form_residual(instance)))],
        ["coefficients", "chi", "residual", "squared_residual", "closed_form", "solvable", "constrained_residual"])
    sweep = regression_sweep(utils.make_rng(seed, "regression-sweep"), parameters["random_instances"],
                             parameters["outcomes"], parameters["pointers"])
    result.tables["sweep"] = sweep
    if len(sweep) > 0:
        checks.above("substantial_unsolvable", "regression-solvability", float(sweep["residual"].min()), 1e-3)
        checks.below("sweep_closed_form", "regression-residual",
                     float(np.max(np.abs(sweep["residual"] - sweep["closed_form"]))), IDENTITY)
    result.values.update({"residual": report.residual, "squared_residual": report.squared_residual,
                          "solvable": report.solvable, "constrained_residual": report.constrained_residual,
                          "uniform_squared_residual": uniform.squared_residual})
    return result


def _landauer(parameters, seed, progress):
    beta = parameters["beta"]
    result = ScenarioResult(Scenario.LANDAUER, seed, parameters, beta=beta)
    checks = result.checks
    pure = DensityMatrix(np.diag([1.0, 0.0]).astype(complex))
    memory = MemoryState([2, 1], [pure, DensityMatrix(np.ones((1, 1)))], [0.5, 0.5], beta)
    record = landauer_identity(memory, permutation_embedding(3, [0, 2, 1]))
    checks.below("landauer_ln2", "landauer-identity", max(abs(record.lhs - np.log(2)), abs(record.rhs - np.log(2))),
                 EXACT)
    dimensions = parameters["block_dimensions"]
    rng = utils.make_rng(seed, "landauer-memories")
    rows = []
    for index in range(parameters["random_memories"]):
        sample = MemoryState.random(rng, dimensions, beta, parameters["block_ranks"])
        identity = landauer_identity(sample)
        additivity = block_additivity(sample)
        klein = klein_bound(sample, hamiltonian=random_hermitian(rng, dimensions[0]).entries)
        rows.append({"memory": index, "lhs": identity.lhs, "rhs": identity.rhs, "difference": identity.difference,
                     "additivity_difference": additivity.difference, "cross_entropy": klein.cross_entropy,
                     "entropy": klein.entropy, "klein_holds": klein.holds})
    table = _frame(rows, ["memory", "lhs", "rhs", "difference", "additivity_difference", "cross_entropy", "entropy",
                          "klein_holds"])
    result.tables["memories"] = table
    if len(table) > 0:
        checks.below("landauer_identity", "landauer-identity", float(table["difference"].max()), IDENTITY)
        checks.below("block_additivity", "landauer-identity", float(table["additivity_difference"].max()), IDENTITY)
        checks.true("klein_inequality", "klein-inequality", bool(table["klein_holds"].all()))
    hamiltonian = random_hermitian(utils.make_rng(seed, "landauer-canonical"), dimensions[0]).entries
    reference = MemoryState([dimensions[0]], [canonical_state(hamiltonian, beta)], [1.0], beta)
    saturated = klein_bound(reference, np.eye(dimensions[0]), hamiltonian)
    checks.below("klein_saturation", "klein-inequality", abs(saturated.cross_entropy - saturated.entropy), IDENTITY)
    result.values.update({"ln2_lhs": record.lhs, "ln2_rhs": record.rhs, "erasure_work_bound": landauer_bound(memory)})
    return result


def _entropy(parameters, seed, progress):
    result = ScenarioResult(Scenario.ENTROPY, seed, parameters)
    dims = [parameters["system_dimension"], parameters["memory_dimension"]]
    family = computational_family(dims[0])
    rng = utils.make_rng(seed, "entropy-states")
    trace_error, positivity, expectation_error = 0.0, 0.0, 0.0
    states = []
    for _ in range(parameters["random_states"]):
        rho = random_density_matrix(rng, dims[0] * dims[1])
        states.append(rho)
        for keep in (0, 1):
            reduced = reduced_state_no_transfer(rho, family, keep, dims)
            trace_error = max(trace_error, abs(reduced.trace - 1))
            positivity = max(positivity, -float(reduced.eigenvalues()[0]))
        reduced = reduced_state_no_transfer(rho, family, 0, dims)
        observable = random_hermitian(rng, dims[0])
        sigma = float(rng.uniform(-3, 3))
        transferred = apply_transfer(reduced, sigma)
        plain = float(np.trace(observable.entries @ reduced.entries).real)
        expectation_error = max(expectation_error, abs(transferred.expectation(star_observable(observable, sigma))
                                                       - plain))
    checks = result.checks
    checks.below("no_transfer_trace", "no-transfer-normalization", trace_error, IDENTITY)
    checks.below("no_transfer_positivity", "no-transfer-normalization", positivity, IDENTITY)
    checks.below("starred_expectation", "starred-observables", expectation_error, EXACT)
    sigmas = np.linspace(-parameters["sigma_max"], parameters["sigma_max"], parameters["sigma_points"])
    paired = all(check_pairing(states[0], s, -s, dims) for s in sigmas)
    unpaired = not any(check_pairing(states[0], s, -s + 1e-5, dims) for s in sigmas)
    checks.true("pairing_balanced", "entropy-pairing", paired)
    checks.true("pairing_unbalanced", "entropy-pairing", unpaired)
    scenarios = [FactorizationScenario(ScenarioKind.TYPE_I), FactorizationScenario(ScenarioKind.TYPE_II),
                 FactorizationScenario(ScenarioKind.DISQUALIFIED, parameters["alpha"]),
                 FactorizationScenario(ScenarioKind.DISQUALIFIED, 0.0),
                 FactorizationScenario(ScenarioKind.DISQUALIFIED, 1.0)]
    ledgers = [ledger_for_scenario(scenario) for scenario in scenarios]
    result.tables["ledgers"] = _frame([ledger.to_dict() for ledger in ledgers],
                                      ["scenario", "sigma_M_to_S", "sigma_S_to_M", "accepted", "reason", "tau_et"])
    type_i, type_ii, chosen, closed, full = ledgers
    checks.true("type_I_ledger", "entropy-transfer-ledger", (type_i.sigma_M_to_S, type_i.sigma_S_to_M) == (-1, 1))
    checks.true("type_II_ledger", "entropy-transfer-ledger", (type_ii.sigma_M_to_S, type_ii.sigma_S_to_M) == (0, 0))
    checks.true("closed_system_rejection", "entropy-transfer-ledger",
                not closed.accepted and closed.reason == CLOSED_SYSTEM_REJECTION)
    checks.true("full_factorization", "entropy-transfer-ledger", full.accepted and full.net_production == 0)
    alpha = parameters["alpha"]
    if alpha not in (0.0, 1.0):
        checks.true("independence_rejection", "entropy-transfer-ledger",
                    not chosen.accepted and chosen.reason == INDEPENDENCE_VIOLATION)
    result.values.update({"max_trace_error": trace_error, "max_expectation_error": expectation_error,
                          "sigma_M_to_S": type_i.sigma_M_to_S, "sigma_S_to_M": type_i.sigma_S_to_M})
    return result


_SCENARIOS = {
    Scenario.SCHEME: _scheme,
    Scenario.DECOHERE: _decohere,
    Scenario.POISSON: _poisson,
    Scenario.JARZYNSKI: _jarzynski,
    Scenario.JARZYNSKI_READINGS: _jarzynski_readings,
    Scenario.REGRESSION: _regression,
    Scenario.LANDAUER: _landauer,
    Scenario.ENTROPY: _entropy,
}


"""
PRIVATE/HELPER FUNCTIONS
"""


def _emit(result, directory, root):
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    tables = dict(result.tables)
    tables[CHECKS_TABLE] = result.checks.checks_df()
    for name, table in tables.items():
        path = directory / f"{name}.csv"
        _write(path, lambda handle, table=table: table.to_csv(handle, index=False, float_format=CSV_FLOAT_FORMAT,
                                                              lineterminator="\n"))
        written.append(path.relative_to(root).as_posix())
    _write_json(directory / SUMMARY_FILE, result.summary())
    written.append((directory / SUMMARY_FILE).relative_to(root).as_posix())
    _write(directory / REPORT_FILE, lambda handle: handle.write(_report_text(result)))
    written.append((directory / REPORT_FILE).relative_to(root).as_posix())
    for child in result.children:
        written.extend(_emit(child, directory / child.scenario.value, root))
    return written


def _report_text(result):
    lines = [f"# measuretherm version: {VERSION}",
             f"# Scenario: {result.scenario.value}",
             f"# Seed: {result.seed}"]
    if result.beta is not None:
        lines.append(f"# Beta: {result.beta!r}")
        lines.append(f"# Temperature: {1 / result.beta!r}")
    for key, value in sorted(result.values.items()):
        lines.append(f"# {key}: {_plain(value)!r}")
    checks = list(result.checks)
    passed = sum(1 for check in checks if check.passed)
    lines.append(f"# Of {len(checks)} checks, {passed} passed")
    lines.extend(str(check) for check in checks)
    for child in result.children:
        lines.append(f"# Component {child.scenario.value}: {'passed' if child.passed() else 'FAILED'}")
    return "\n".join(lines) + "\n"


def _write(path, writer):
    try:
        with open(path, "w", encoding="ascii", newline="\n") as handle:
            writer(handle)
    except OSError as error:
        raise OSError(f"Could not write {path}: {error}") from error


def _write_json(path, record):
    _write(path, lambda handle: handle.write(json.dumps(_plain(record), sort_keys=True, indent=2) + "\n"))


def _plain(value):
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, complex):
        return utils.format_number_list([value])
    return value


def _format_parameters(scenario, parameters):
    if scenario not in DEFAULTS:
        return {}
    return {key: DEFAULTS[scenario][key].format(value) for key, value in parameters.items()}


def _frame(rows, columns):
    return pd.DataFrame(rows, columns=columns)


def _offdiagonal_mask(dimension):
    return ~np.eye(dimension, dtype=bool)
