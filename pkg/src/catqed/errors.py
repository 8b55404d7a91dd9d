"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to, so the scenario runner can
translate library failures without a lookup table.
"""


class CatQEDError(Exception):
    exit_code = 1


class InvalidDimensionError(CatQEDError, ValueError):
    exit_code = 2


class DimensionMismatchError(CatQEDError, ValueError):
    exit_code = 2


class ParameterError(CatQEDError, ValueError):
    exit_code = 2


class DegenerateStateError(CatQEDError, ValueError):
    exit_code = 2


class TruncationError(CatQEDError):
    """Fock truncation too small for the requested state or operation."""

    exit_code = 3

    def __init__(self, message: str, tail_mass: float = float("nan"), dim: int = 0):
        super().__init__(f"{message} (tail mass {tail_mass:.3e}, dim {dim})")
        self.tail_mass = tail_mass
        self.dim = dim


class InvariantViolation(CatQEDError):
    """A numerical identity the library relies on failed to hold."""

    exit_code = 4


class QuadratureError(InvariantViolation):
    pass


class CodeCollapseError(CatQEDError):
    """Decayed cat codewords are too small to be told apart."""

    exit_code = 4


class ConfigValidationError(CatQEDError):
    exit_code = 2

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class ConfigParseError(CatQEDError):
    exit_code = 5
