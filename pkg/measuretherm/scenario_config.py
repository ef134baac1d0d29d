"""Provides the scenario configuration grammar: an INI document with a [scenario] header section and one section of
key = value parameters per scenario, every key backed by a typed, range-checked default"""

import configparser
import re
from measuretherm import utils
from measuretherm.exceptions import ConfigurationError
from measuretherm.scenario import Scenario

HEADER_SECTION = "scenario"
DEFAULT_SEED = 42
MAX_SEED = (1 << 64) - 1
NORM_TOLERANCE = 1e-10

_SECTION_PATTERN = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_PATTERN = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


class Parameter:

    def __init__(self, kind, default, minimum=None, maximum=None, positive=False, description=""):
        """
        :param kind: One of 'int', 'float', 'str', 'float_list', 'int_list', 'complex_list'
        :param default: Default value, already of the parsed type
        :param minimum: Inclusive lower bound (for lists: applied to every entry)
        :param maximum: Inclusive upper bound
        :param positive: Value must be strictly positive
        """
        self.kind = kind
        self.default = default
        self.minimum = minimum
        self.maximum = maximum
        self.positive = positive
        self.description = description

    def parse(self, text):
        text = text.strip()
        if self.kind == "int":
            return int(text)
        if self.kind == "float":
            return float(text)
        if self.kind == "float_list":
            return utils.parse_float_list(text)
        if self.kind == "int_list":
            return utils.parse_int_list(text)
        if self.kind == "complex_list":
            return utils.parse_complex_list(text)
        return text

    def format(self, value):
        if self.kind in ("float_list", "int_list", "complex_list"):
            return utils.format_number_list(value)
        if self.kind == "float":
            return repr(float(value))
        return str(value)

    def check(self, value):
        """ Returns an error message, or None when the value is in range """
        values = value if isinstance(value, list) else [value]
        if self.kind in ("str", "complex_list"):
            return None
        for item in values:
            if self.positive and not item > 0:
                return f"must be positive, got {item!r}"
            if self.minimum is not None and item < self.minimum:
                return f"must be at least {self.minimum!r}, got {item!r}"
            if self.maximum is not None and item > self.maximum:
                return f"must be at most {self.maximum!r}, got {item!r}"
        return None


_HALF = 0.7071067811865476
_STATE_SCENARIOS = (Scenario.SCHEME, Scenario.DECOHERE, Scenario.POISSON)

DEFAULTS = {
    Scenario.SCHEME: {
        "coefficients": Parameter("complex_list", [complex(0.6), complex(0.8)]),
        "eigenvalues": Parameter("float_list", []),
        "apparatus_dimension": Parameter("int", 1, minimum=1),
        "pointer_dimension": Parameter("int", 0, minimum=0),
        "runs": Parameter("int", 10000, minimum=1),
    },
    Scenario.DECOHERE: {
        "coefficients": Parameter("complex_list", [complex(_HALF), complex(_HALF)]),
        "eigenvalues": Parameter("float_list", [0.0, 1.0]),
        "sigma_p": Parameter("float", 1.0, positive=True),
        "grid_size": Parameter("int", 4001, minimum=3),
        "span": Parameter("float", 6.0, positive=True),
        "asymptotic_span": Parameter("float", 10.0, positive=True),
        "t_max": Parameter("float", 3.0, positive=True),
        "points": Parameter("int", 50, minimum=2),
        "box_half_width": Parameter("float", 1.0, positive=True),
    },
    Scenario.POISSON: {
        "coefficients": Parameter("complex_list", [complex(_HALF), complex(_HALF)]),
        "members": Parameter("int", 100000, minimum=1),
        "delta_tau": Parameter("float", 1.0, positive=True),
        "horizon": Parameter("float", 3.0, positive=True),
        "points": Parameter("int", 31, minimum=2),
        "energy_gap": Parameter("float", 0.0),
        "convergence_members": Parameter("int_list", [1000, 10000, 100000], minimum=1),
    },
    Scenario.JARZYNSKI: {
        "dimension": Parameter("int", 4, minimum=1),
        "beta": Parameter("float", 1.0, positive=True),
        "steps": Parameter("int", 100, minimum=1),
        "random_protocols": Parameter("int", 200, minimum=0),
        "max_dimension": Parameter("int", 8, minimum=2),
        "max_steps": Parameter("int", 200, minimum=1),
        "beta_min": Parameter("float", 0.1, positive=True),
        "beta_max": Parameter("float", 5.0, positive=True),
        "trials": Parameter("int", 100000, minimum=1),
    },
    Scenario.JARZYNSKI_READINGS: {
        "dimension": Parameter("int", 4, minimum=1),
        "beta": Parameter("float", 1.0, positive=True),
        "steps": Parameter("int", 100, minimum=1),
        "reading_steps": Parameter("int_list", [0, 50, 100], minimum=0),
    },
    Scenario.REGRESSION: {
        "coefficients": Parameter("complex_list", [complex(1.0), complex(0.0)]),
        "target_outcome": Parameter("int", 0, minimum=0),
        "chi": Parameter("float_list", [1.0], minimum=0.0),
        "random_instances": Parameter("int", 200, minimum=0),
        "outcomes": Parameter("int", 3, minimum=2),
        "pointers": Parameter("int", 3, minimum=1),
    },
    Scenario.LANDAUER: {
        "block_dimensions": Parameter("int_list", [6, 2, 2], minimum=1),
        "block_ranks": Parameter("int_list", [2, 2, 2], minimum=1),
        "beta": Parameter("float", 1.0, positive=True),
        "random_memories": Parameter("int", 200, minimum=0),
    },
    Scenario.ENTROPY: {
        "system_dimension": Parameter("int", 2, minimum=1),
        "memory_dimension": Parameter("int", 2, minimum=1),
        "random_states": Parameter("int", 100, minimum=1),
        "sigma_max": Parameter("float", 3.0, minimum=0.0),
        "sigma_points": Parameter("int", 13, minimum=1),
        "alpha": Parameter("float", 0.5),
    },
}


class ScenarioConfig:

    def __init__(self, scenario, parameters=None, seed=DEFAULT_SEED, output_path=None):
        """
        :param scenario: Scenario (or its value)
        :param parameters: Dict section -> dict key -> value; missing sections and keys take their defaults
        :param seed: Unsigned 64-bit master seed
        :param output_path: Output directory (default 'measuretherm-<scenario>')
        """
        self._scenario = Scenario(scenario)
        if not 0 <= int(seed) <= MAX_SEED:
            raise ConfigurationError(f"The seed must be an unsigned 64-bit integer, got {seed!r}", field="scenario.seed")
        self._seed = int(seed)
        self._output_path = output_path if output_path else f"measuretherm-{self._scenario.value}"
        given = parameters or {}
        self._parameters = {}
        for section in sections_for(self._scenario):
            values = dict(given.get(section, given.get(section.value, {})))
            filled = {}
            for key, parameter in DEFAULTS[section].items():
                value = values.pop(key, parameter.default)
                problem = parameter.check(value)
                if problem is not None:
                    raise ConfigurationError(f"Parameter {problem}", field=f"{section.value}.{key}")
                filled[key] = value
            if values:
                unknown = sorted(values)[0]
                raise ConfigurationError(f"Unknown parameter '{unknown}'", field=f"{section.value}.{unknown}")
            self._parameters[section] = filled
        _check_consistency(self)

    @property
    def scenario(self):
        return self._scenario

    @property
    def seed(self):
        return self._seed

    @property
    def output_path(self):
        return self._output_path

    @property
    def parameters(self):
        return self._parameters

    def section(self, scenario):
        return self._parameters[Scenario(scenario)]

    def with_overrides(self, seed=None, output_path=None):
        return ScenarioConfig(self._scenario, self._parameters, self._seed if seed is None else seed,
                              self._output_path if output_path is None else output_path)

    def __eq__(self, other):
        if isinstance(other, ScenarioConfig):
            return (self._scenario == other.scenario and self._seed == other.seed
                    and self._output_path == other.output_path and self._parameters == other.parameters)
        return False

    def __repr__(self):
        return f"<ScenarioConfig {self._scenario.value} seed:{self._seed} output:{self._output_path}>"


def sections_for(scenario):
    scenario = Scenario(scenario)
    if scenario == Scenario.FULL_PIPELINE:
        return Scenario.components()
    return [scenario]


def parse_config(text, scenario=None):
    """
    Parses a configuration document
    :param text: INI text; may be empty when `scenario` is given
    :param scenario: Scenario to use when the document has no [scenario] name
    :return: ScenarioConfig with defaults filled
    """
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=None,
                                       empty_lines_in_values=False)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as error:
        raise ConfigurationError("Key outside of any section", line=error.lineno) from error
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as error:
        raise ConfigurationError(error.message, line=error.lineno) from error
    except configparser.ParsingError as error:
        line = error.errors[0][0] if error.errors else None
        raise ConfigurationError("Malformed configuration line", line=line) from error
    header = dict(parser[HEADER_SECTION]) if parser.has_section(HEADER_SECTION) else {}
    for key in header:
        if key not in ("name", "seed", "output"):
            raise ConfigurationError(f"Unknown key '{key}'", field=f"{HEADER_SECTION}.{key}",
                                     line=_locate(text, HEADER_SECTION, key))
    name = header.get("name", scenario.value if isinstance(scenario, Scenario) else scenario)
    if name is None:
        raise ConfigurationError("No scenario named: add 'name' to the [scenario] section", field="scenario.name")
    if name.strip() not in Scenario.list():
        raise ConfigurationError(f"Unknown scenario '{name}', expected one of {Scenario.list()}",
                                 field="scenario.name", line=_locate(text, HEADER_SECTION, "name"))
    selected = Scenario(name.strip())
    try:
        seed = int(header.get("seed", DEFAULT_SEED))
    except ValueError as error:
        raise ConfigurationError(f"Seed is not an integer: {header['seed']!r}", field="scenario.seed",
                                 line=_locate(text, HEADER_SECTION, "seed")) from error
    allowed = {s.value for s in sections_for(selected)}
    parameters = {}
    for section in parser.sections():
        if section == HEADER_SECTION:
            continue
        if section not in allowed:
            raise ConfigurationError(f"Section [{section}] does not belong to scenario '{selected.value}'",
                                     field=section, line=_section_line(text, section))
        values = {}
        for key, raw in parser[section].items():
            field = f"{section}.{key}"
            line = _locate(text, section, key)
            parameter = DEFAULTS[Scenario(section)].get(key)
            if parameter is None:
                raise ConfigurationError(f"Unknown parameter '{key}'", field=field, line=line)
            try:
                value = parameter.parse(raw)
            except ValueError as error:
                raise ConfigurationError(f"Cannot read {raw!r} as {parameter.kind}", field=field, line=line) from error
            problem = parameter.check(value)
            if problem is not None:
                raise ConfigurationError(f"Parameter {problem}", field=field, line=line)
            values[key] = value
        parameters[Scenario(section)] = values
    try:
        return ScenarioConfig(selected, parameters, seed, header.get("output", "").strip() or None)
    except ConfigurationError as error:
        if error.line is not None or error.field is None:
            raise
        section, key = error.field.split(".", 1)
        raise ConfigurationError(error.message, field=error.field, line=_locate(text, section, key)) from error


def serialize_config(config):
    """ Writes a document that parses back to an equal ScenarioConfig """
    lines = [f"[{HEADER_SECTION}]", f"name = {config.scenario.value}", f"seed = {config.seed}",
             f"output = {config.output_path}"]
    for section, values in config.parameters.items():
        lines.append("")
        lines.append(f"[{section.value}]")
        for key, value in values.items():
            lines.append(f"{key} = {DEFAULTS[section][key].format(value)}")
    return "\n".join(lines) + "\n"


def read_config(config_path, scenario=None):
    try:
        with open(config_path, encoding="ascii") as config_file:
            text = config_file.read()
    except UnicodeDecodeError as error:
        raise ConfigurationError(f"{config_path} is not an ASCII document") from error
    return parse_config(text, scenario)


"""
PRIVATE/HELPER FUNCTIONS
"""


def _check_consistency(config):
    scenario_sections = config.parameters
    for scenario in _STATE_SCENARIOS:
        if scenario in scenario_sections:
            norm = sum(abs(c) ** 2 for c in scenario_sections[scenario]["coefficients"])
            if abs(norm - 1) > NORM_TOLERANCE:
                raise ConfigurationError(f"Coefficients have squared norm {norm!r}, expected 1",
                                         field=f"{scenario.value}.coefficients")
    if Scenario.REGRESSION in scenario_sections:
        values = scenario_sections[Scenario.REGRESSION]
        if values["target_outcome"] >= len(values["coefficients"]):
            raise ConfigurationError("target_outcome exceeds the number of coefficients",
                                     field="regression.target_outcome")
    if Scenario.LANDAUER in scenario_sections:
        values = scenario_sections[Scenario.LANDAUER]
        if len(values["block_ranks"]) != len(values["block_dimensions"]):
            raise ConfigurationError("One rank is needed per block", field="landauer.block_ranks")
        if any(r > d for r, d in zip(values["block_ranks"], values["block_dimensions"])):
            raise ConfigurationError("A block rank exceeds its block dimension", field="landauer.block_ranks")
        if sum(values["block_ranks"]) > values["block_dimensions"][0]:
            raise ConfigurationError("The ranks do not fit into block 0", field="landauer.block_ranks")
    if Scenario.JARZYNSKI in scenario_sections:
        values = scenario_sections[Scenario.JARZYNSKI]
        if values["beta_min"] > values["beta_max"]:
            raise ConfigurationError("beta_min exceeds beta_max", field="jarzynski.beta_min")


def _section_line(text, section):
    for number, line in enumerate(text.splitlines(), start=1):
        match = _SECTION_PATTERN.match(line)
        if match and match.group(1).strip() == section:
            return number
    return None


def _locate(text, section, key):
    current = None
    for number, line in enumerate(text.splitlines(), start=1):
        match = _SECTION_PATTERN.match(line)
        if match:
            current = match.group(1).strip()
            continue
        match = _KEY_PATTERN.match(line)
        if match and current == section and match.group(1).strip() == key:
            return number
    return None
