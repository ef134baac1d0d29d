"""Provides the exception hierarchy raised by measuretherm"""


class MeasurementThermoError(Exception):
    """ Base class of every error raised by the library """


class ConfigurationError(MeasurementThermoError, ValueError):

    def __init__(self, message, field=None, line=None):
        """
        :param message: Description of the problem
        :param field: Name of the offending parameter (eg 'jarzynski.beta'), if known
        :param line: 1-based line number in the configuration document, if known
        """
        self.message = message
        self.field = field
        self.line = line
        location = ""
        if field is not None:
            location += f" [field: {field}]"
        if line is not None:
            location += f" [line: {line}]"
        super().__init__(message + location)


class InvariantViolationError(MeasurementThermoError, ValueError):

    def __init__(self, invariant, message):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}")


class ProtocolError(MeasurementThermoError, RuntimeError):
    """ Raised when an operation is applied in the wrong order (eg a measurement stage run twice) """
