"""Provides CheckResult and CheckCollection classes"""

import numpy as np
import pandas as pd


class CheckResult:
    NAME = "check"
    ANCHOR = "anchor"
    VALUE = "value"
    THRESHOLD = "threshold"
    PASSED = "passed"

    def __init__(self, name, anchor, value, threshold, passed):
        """
        :param name: Short identifier of the assertion (eg 'survival_at_delta_tau')
        :param anchor: Name of the identity or law the assertion checks (eg 'jarzynski-equality')
        :param value: Measured quantity (an error, a statistic or a flag)
        :param threshold: Bound the value is compared against
        :param passed: Outcome of the comparison
        """
        self._name = name
        self._anchor = anchor
        self._value = _plain(value)
        self._threshold = _plain(threshold)
        self._passed = bool(passed)

    @property
    def name(self):
        return self._name

    @property
    def anchor(self):
        return self._anchor

    @property
    def value(self):
        return self._value

    @property
    def threshold(self):
        return self._threshold

    @property
    def passed(self):
        return self._passed

    def to_dict(self):
        return {
            self.NAME: self.name,
            self.ANCHOR: self.anchor,
            self.VALUE: self.value,
            self.THRESHOLD: self.threshold,
            self.PASSED: self.passed
        }

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} [{self.anchor}] value={self.value!r} threshold={self.threshold!r}"


class CheckCollection:

    def __init__(self, checks=None):
        self._checks = list(checks) if checks is not None else []

    @property
    def checks(self):
        return self._checks

    def add(self, check):
        self._checks.append(check)
        return check

    def below(self, name, anchor, value, threshold):
        """ Passes when value < threshold """
        return self.add(CheckResult(name, anchor, value, threshold, value < threshold))

    def above(self, name, anchor, value, threshold):
        """ Passes when value > threshold """
        return self.add(CheckResult(name, anchor, value, threshold, value > threshold))

    def true(self, name, anchor, flag):
        return self.add(CheckResult(name, anchor, bool(flag), True, bool(flag)))

    def extend(self, other):
        self._checks.extend(other.checks)

    def passed(self):
        return all(check.passed for check in self._checks)

    def failures(self):
        return [check for check in self._checks if not check.passed]

    def __len__(self):
        return len(self._checks)

    def __iter__(self):
        return iter(self._checks)

    def checks_df(self):
        return pd.DataFrame([c.to_dict() for c in self._checks],
                            columns=[CheckResult.NAME, CheckResult.ANCHOR, CheckResult.VALUE, CheckResult.THRESHOLD,
                                     CheckResult.PASSED])


def _plain(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value
