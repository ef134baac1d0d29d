"""Provides Scenario enum"""

from enum import Enum


class Scenario(str, Enum):
    """ Enumeration of the experiments the runner can execute """
    SCHEME = 'scheme'
    DECOHERE = 'decohere'
    POISSON = 'poisson'
    JARZYNSKI = 'jarzynski'
    JARZYNSKI_READINGS = 'jarzynski_readings'
    REGRESSION = 'regression'
    LANDAUER = 'landauer'
    ENTROPY = 'entropy'
    FULL_PIPELINE = 'full_pipeline'

    @classmethod
    def list(cls):
        return list(map(lambda c: c.value, cls))

    @classmethod
    def components(cls):
        """ The scenarios run by full_pipeline, in run order """
        return [s for s in cls if s != cls.FULL_PIPELINE]
