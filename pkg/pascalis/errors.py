"""
pascalis - Error hierarchy

Every failure the engine can report is a PascalisError. The CLI maps the
`exit_code` attribute onto the process exit status:
  1 = bad input (unparsable file, singular linear part, unknown example, ...)
  2 = resource ceiling exceeded
"""

from typing import Any, Optional


class PascalisError(Exception):
    """Base class of all pascalis errors."""

    exit_code = 1


# =========================================================================
# Input errors (exit 1)
# =========================================================================

class InputError(PascalisError):
    """The user supplied something we cannot work with."""


class ConfigError(InputError):
    """Malformed configuration value (file or environment)."""


class InvalidField(InputError):
    """Field specification is not Q or GF(p) with p prime."""


class UnknownExample(InputError):
    """Requested built-in example does not exist."""

    def __init__(self, name: str):
        super().__init__(f"unknown built-in example: {name!r}")
        self.name = name


class MapFileError(InputError):
    """Error inside a map file; always carries a 1-based position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class MapSyntaxError(MapFileError):
    def __init__(self, line: int, column: int, expected: str, found: str = ""):
        found_txt = f", found {found!r}" if found else ""
        super().__init__(f"syntax error: expected {expected}{found_txt}", line, column)
        self.expected = expected
        self.found = found


class UnknownVariable(MapFileError):
    def __init__(self, name: str, line: int, column: int):
        super().__init__(f"unknown variable {name!r}", line, column)
        self.name = name


class NonNaturalExponent(MapFileError):
    def __init__(self, line: int, column: int, found: str = ""):
        super().__init__(f"exponent must be a natural number literal (found {found!r})", line, column)
        self.found = found


class ZeroDenominator(MapFileError):
    def __init__(self, line: int, column: int):
        super().__init__("zero denominator", line, column)


# =========================================================================
# Algebra errors
# =========================================================================

class AlgebraError(PascalisError):
    """An operation's precondition does not hold."""


class MixedFields(AlgebraError):
    pass


class DivisionByZero(AlgebraError, ZeroDivisionError):
    pass


class InexactDivision(AlgebraError):
    pass


class AmbientMismatch(AlgebraError):
    pass


class ArityMismatch(AlgebraError):
    pass


class MapArityMismatch(MapFileError, ArityMismatch):
    """Component count in a map file differs from the declared variables."""


class ExponentOverflow(AlgebraError):
    pass


class NotSquare(AlgebraError):
    pass


class SingularMatrix(AlgebraError):
    pass


class SingularLinearPart(AlgebraError):
    """J_F(0) is not invertible; F is no automorphism candidate."""


class NotInverse(AlgebraError):
    pass


class DegenerateMap(AlgebraError):
    pass


class NotHomogeneous(AlgebraError):
    pass


class NotNormalForm(AlgebraError):
    """Map is not X + H with F(0) = 0 and ord H >= 2 after normalisation."""


class NotStronglyNilpotent(AlgebraError):
    pass


# =========================================================================
# Resource errors (exit 2)
# =========================================================================

class ResourceLimit(PascalisError):
    """A polynomial produced during a step exceeded the term ceiling.

    `partial` optionally holds whatever was completed before the limit
    (a PascalTableau when raised from the pascal module).
    """

    exit_code = 2

    def __init__(self, step: int, terms: int, ceiling: int,
                 component: Optional[int] = None, partial: Any = None,
                 unit: str = "terms"):
        where = f" (component {component + 1})" if component is not None else ""
        super().__init__(
            f"term ceiling {ceiling} exceeded at step {step}{where}: {terms} {unit}"
        )
        self.unit = unit
        self.step = step
        self.terms = terms
        self.ceiling = ceiling
        self.component = component
        self.partial = partial
