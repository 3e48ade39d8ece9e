"""
Error hierarchy for ShadowLab
Each error carries the CLI exit code it maps to.
"""


class ShadowLabError(Exception):
    """Base class for every error raised by the lab"""
    exit_code = 1


# Symbol errors (exit 2)

class DegenerateCoefficients(ShadowLabError):
    exit_code = 2


class IdentityMap(ShadowLabError):
    exit_code = 2


class NotSelfMap(ShadowLabError):
    exit_code = 2


# Configuration / parameter errors (exit 3)

class ConfigError(ShadowLabError, ValueError):
    exit_code = 3


class InvalidParameter(ShadowLabError, ValueError):
    exit_code = 3


class OutsideDisk(InvalidParameter):
    pass


class PoleEvaluation(InvalidParameter):
    pass


class PoleTooClose(InvalidParameter):
    pass


class WrongClass(InvalidParameter):
    pass


class ZeroVector(InvalidParameter):
    pass


class ZeroAtFixedPoint(InvalidParameter):
    pass


class NotInN(InvalidParameter):
    pass


# Invariant violations (exit 4)

class NotPseudoOrbit(ShadowLabError):
    exit_code = 4


class InvariantViolation(ShadowLabError):
    exit_code = 4


# Reported, not raised: numeric routines attach these as warnings

class NoConvergence(ShadowLabError):
    exit_code = 4


class IllConditioned(ShadowLabError):
    exit_code = 4
