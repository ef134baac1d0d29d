from .config import VERSION
from .exceptions import MeasurementThermoError
from .exceptions import ConfigurationError
from .exceptions import InvariantViolationError
from .exceptions import ProtocolError
from .operators import StateVector
from .operators import HermitianOperator
from .operators import DensityMatrix
from .operators import ProjectorFamily
from .operators import Superoperator
from .operators import tensor_product
from .operators import partial_trace
from .operators import dephase
from .operators import unitary_evolve
from .operators import von_neumann_entropy
from .operators import born_probabilities
from .measurement_scheme import SchemeConfig
from .measurement_scheme import run_scheme
from .superselection import SectorField
from .superselection import decay_scan
from .poisson_ensemble import EnlargedEnsemble
from .poisson_ensemble import evolve_ensemble
from .entropy_transfer import FactorizationScenario
from .entropy_transfer import ledger_for_scenario
from .quantum_work import DrivingProtocol
from .quantum_work import EventReadingSchedule
from .quantum_work import jarzynski_equality
from .quantum_work import modified_jarzynski
from .regression import RegressionInstance
from .regression import verify_regression
from .information_thermo import MemoryState
from .information_thermo import landauer_identity
from .information_thermo import klein_bound
from .scenario import Scenario
from .scenario_config import ScenarioConfig
from .scenario_config import parse_config
from .scenario_config import read_config
from .runner import run_scenario
from .runner import emit_report
from .runner import selftest
