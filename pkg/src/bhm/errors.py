"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeError(OverflowError):
    """Result not representable in double precision."""

    def __init__(self, message: str, saturated: bool = True):
        super().__init__(message)
        self.saturated = saturated


class SingularityError(ValueError):
    """Kernel or incident field evaluated at (or too near) its source point."""


class GeometryError(ValueError):
    """Degenerate or invalid obstacle / array geometry."""


class ContractError(ValueError):
    """Inputs violate an operation's contract (wrong data kind, missing order, ...)."""


class SolveError(RuntimeError):
    """Forward solve failed to meet its residual bound."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class ExcludedWavenumberError(SolveError):
    """Free-plate boundary system is (numerically) singular at this wavenumber."""


class NormalizationError(ValueError):
    """Grid cannot be normalized (all zeros)."""


class DataFormatError(ValueError):
    """Malformed data file; ``line`` is the 1-based offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
