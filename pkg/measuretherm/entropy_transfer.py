"""Provides the entropy-transfer bookkeeping of a selective measurement: the no-transfer reduced state, transferred
states with a non-unit trace, starred observables and the factorization scenario ledgers"""

from enum import Enum
import numpy as np
from measuretherm import utils
from measuretherm.exceptions import ConfigurationError, InvariantViolationError
from measuretherm.operators import DensityMatrix, HermitianOperator, as_hermitian, dephase, lift_family, partial_trace

LOGGER = utils.get_logger(__name__)

TRACE_TOLERANCE = 1e-10
PAIRING_TOLERANCE = 1e-10

INDEPENDENCE_VIOLATION = "violates independence condition B1"
CLOSED_SYSTEM_REJECTION = "S closed, M disqualified"


class ScenarioKind(str, Enum):
    TYPE_I = "type_I"
    DISQUALIFIED = "disqualified_alpha"
    TYPE_II = "type_II"

    @classmethod
    def list(cls):
        return list(map(lambda c: c.value, cls))


class FactorizationScenario:

    def __init__(self, kind, alpha=None, tau_et=None):
        """
        :param kind: ScenarioKind (or its value)
        :param alpha: Share of the factor e^{-(1-Delta)} attributed to M, required by the disqualified family
        :param tau_et: Entropy-transfer time, kept as metadata only
        """
        self._kind = ScenarioKind(kind)
        if self._kind == ScenarioKind.DISQUALIFIED and alpha is None:
            raise ConfigurationError("The disqualified scenario family needs alpha", field="alpha")
        self._alpha = None if alpha is None else float(alpha)
        self._tau_et = tau_et

    @property
    def kind(self):
        return self._kind

    @property
    def alpha(self):
        return self._alpha

    @property
    def tau_et(self):
        return self._tau_et

    @property
    def label(self):
        if self._kind == ScenarioKind.DISQUALIFIED:
            return f"{self._kind.value}({self._alpha!r})"
        return self._kind.value

    def __repr__(self):
        return f"<FactorizationScenario {self.label}>"


class EntropyLedger:

    def __init__(self, sigma_M_to_S, sigma_S_to_M, scenario):
        if sigma_M_to_S + sigma_S_to_M != 0:
            raise InvariantViolationError("ledger-balance", f"transfers {sigma_M_to_S} and {sigma_S_to_M} do not cancel")
        self._sigma_M_to_S = sigma_M_to_S
        self._sigma_S_to_M = sigma_S_to_M
        self._scenario = scenario

    @property
    def sigma_M_to_S(self):
        return self._sigma_M_to_S

    @property
    def sigma_S_to_M(self):
        return self._sigma_S_to_M

    @property
    def scenario(self):
        return self._scenario

    @property
    def accepted(self):
        return True

    @property
    def net_production(self):
        return self._sigma_M_to_S + self._sigma_S_to_M

    def to_dict(self):
        return {"scenario": self._scenario.label, "sigma_M_to_S": self._sigma_M_to_S,
                "sigma_S_to_M": self._sigma_S_to_M, "accepted": True, "reason": "",
                "tau_et": self._scenario.tau_et}

    def __repr__(self):
        return f"<EntropyLedger {self._scenario.label} M->S:{self._sigma_M_to_S} S->M:{self._sigma_S_to_M}>"


class ScenarioRejection:

    def __init__(self, scenario, reason):
        self._scenario = scenario
        self._reason = reason

    @property
    def scenario(self):
        return self._scenario

    @property
    def reason(self):
        return self._reason

    @property
    def accepted(self):
        return False

    def to_dict(self):
        return {"scenario": self._scenario.label, "sigma_M_to_S": None, "sigma_S_to_M": None, "accepted": False,
                "reason": self._reason, "tau_et": self._scenario.tau_et}

    def __repr__(self):
        return f"<ScenarioRejection {self._scenario.label}: {self._reason}>"


class TransferredState:

    def __init__(self, rho, sigma):
        """
        State after an entropy transfer sigma: its trace is e^{-sigma}, so it only gives meaningful averages against
        starred observables e^{sigma} O
        """
        self._rho = rho
        self._sigma = float(sigma)
        if abs(rho.trace - np.exp(-self._sigma)) > TRACE_TOLERANCE * max(1.0, np.exp(-self._sigma)):
            raise InvariantViolationError("transferred-trace", f"trace {rho.trace!r} differs from e^(-{self._sigma})")

    @property
    def rho(self):
        return self._rho

    @property
    def sigma(self):
        return self._sigma

    @property
    def base_observables_scale(self):
        return float(np.exp(self._sigma))

    def expectation(self, starred_observable):
        return float(np.trace(as_hermitian(starred_observable).entries @ self._rho.entries).real)


"""
OPERATIONS
"""


def reduced_state_no_transfer(rho_sch, family, keep, dims):
    """
    Applies e^{-(1-Delta)} (family-off-diagonal blocks scaled by e^{-1}) and traces out every subsystem but `keep`
    :param rho_sch: DensityMatrix on S x M
    :param family: ProjectorFamily on S (or already lifted to S x M)
    :param keep: Index of the subsystem kept (0 for S, 1 for M)
    :param dims: Subsystem dimensions [d_S, d_M]
    """
    if int(np.prod(dims)) != rho_sch.dimension:
        raise ConfigurationError(f"Subsystem dimensions {list(dims)} do not multiply to {rho_sch.dimension}",
                                 field="dims")
    if family.dimension != rho_sch.dimension:
        family = lift_family(family, list(dims), 0)
    diagonal = dephase(rho_sch, family)
    damped = diagonal.entries + np.exp(-1.0) * (rho_sch.entries - diagonal.entries)
    return partial_trace(DensityMatrix(damped, nominal_trace=rho_sch.nominal_trace, validate=False), dims, keep)


def apply_transfer(rho0, sigma):
    """ rho^y = e^{-sigma} rho0^y """
    if abs(rho0.trace - 1) > TRACE_TOLERANCE:
        raise InvariantViolationError("unit-trace", f"the untransferred state has trace {rho0.trace!r}")
    factor = float(np.exp(-sigma))
    return TransferredState(DensityMatrix(rho0.entries * factor, nominal_trace=factor, validate=False), sigma)


def star_observable(obs, sigma):
    """ O* = e^{sigma} O """
    return HermitianOperator(np.exp(sigma) * as_hermitian(obs).entries, validate=False)


def pairing_trace(rho, sigma_S, sigma_M, dims):
    """ Returns tr[(1_S* x 1_M*) rho] """
    identity_s = star_observable(HermitianOperator.identity(dims[0]), sigma_S)
    identity_m = star_observable(HermitianOperator.identity(dims[1]), sigma_M)
    return float(np.trace(np.kron(identity_s.entries, identity_m.entries) @ rho.entries).real)


def check_pairing(rho, sigma_S, sigma_M, dims=None):
    """ True iff the starred identities of S and M pair to a unit average on rho, i.e. iff sigma_S + sigma_M = 0 """
    if abs(rho.trace - 1) > TRACE_TOLERANCE:
        raise InvariantViolationError("unit-trace", f"pairing needs a unit-trace state, got {rho.trace!r}")
    if dims is None:
        dims = [rho.dimension, 1]
    return abs(pairing_trace(rho, sigma_S, sigma_M, dims) - 1) <= PAIRING_TOLERANCE


def ledger_for_scenario(scenario):
    """
    Type I moves one unit of entropy from M to S; type II transfers nothing. In the disqualified family alpha = 0
    leaves S closed and M without a factor, alpha = 1 is the full factorization onto M and coincides with type I,
    every other alpha splits the factor and breaks the independence of the two subsystems
    :return: EntropyLedger, or ScenarioRejection for an invalid scenario
    """
    if scenario.kind == ScenarioKind.TYPE_I:
        return EntropyLedger(-1, 1, scenario)
    if scenario.kind == ScenarioKind.TYPE_II:
        return EntropyLedger(0, 0, scenario)
    if scenario.alpha == 0:
        LOGGER.debug("Rejected %s: %s", scenario.label, CLOSED_SYSTEM_REJECTION)
        return ScenarioRejection(scenario, CLOSED_SYSTEM_REJECTION)
    if scenario.alpha == 1:
        return EntropyLedger(-1, 1, scenario)
    LOGGER.debug("Rejected %s: %s", scenario.label, INDEPENDENCE_VIOLATION)
    return ScenarioRejection(scenario, INDEPENDENCE_VIOLATION)
