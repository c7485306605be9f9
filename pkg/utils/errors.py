#!/usr/bin/env python3

from typing import Optional, Sequence


class AcylError(Exception):
    """Base class for every error raised by the library"""

    exit_code = 2


class InputError(AcylError, ValueError):
    """Malformed or structurally invalid input"""

    exit_code = 1


class ComputationError(AcylError, ArithmeticError):
    """Mathematical inconsistency detected while computing"""

    exit_code = 2


# Input errors

class MalformedInput(InputError):
    pass


class SchemaError(InputError):
    """Descriptor schema violation, carrying the offending key path"""

    def __init__(self, message: str, path: Optional[Sequence] = None):
        self.path = list(path or [])
        where = "/".join(str(p) for p in self.path)
        super().__init__(f"{where}: {message}" if where else message)


class NotFullDimensional(InputError):
    pass


class DependentRows(InputError):
    pass


class RankMismatch(InputError):
    pass


class OddDegree(InputError):
    pass


# Computation errors

class ComputationOverflow(ComputationError):
    pass


class NonIntegralDual(ComputationError):
    pass


class DegenerateAmbient(ComputationError):
    pass


class NotEmbeddable(ComputationError):
    pass


class NoE8Found(ComputationError):
    pass


class NegativeDefect(ComputationError):
    pass


class NegativeBetti(ComputationError):
    pass


class RankNullityViolation(ComputationError):
    pass


class InconsistentC2(ComputationError):
    pass


class NotReflexive(ComputationError):
    pass


class NotTerminal(ComputationError):
    pass


class NotSmooth(ComputationError):
    pass


class InconsistentReport(ComputationError):
    pass


class SearchTooLarge(ComputationError):
    pass


# Warnings

class AcylWarning(UserWarning):
    pass


class NonIntegralChi(AcylWarning):
    pass


class NonFanoWarning(AcylWarning):
    pass


class TorsionUnknown(AcylWarning):
    pass


class DegreeMismatch(AcylWarning):
    pass
