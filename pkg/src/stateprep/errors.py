"""Exception types shared across the package."""


class StatePrepError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(StatePrepError, ValueError):
    """Malformed input: wrong length, bad norm, duplicate strings, bad gate."""


class RegimeError(StatePrepError):
    """The requested ancilla budget does not admit the requested construction."""


class SingularMatrix(StatePrepError, ValueError):
    """A GF(2) matrix that must be invertible is singular."""


class SupportExceeded(StatePrepError):
    """The sparse simulator's support grew beyond the caller's cap."""

    def __init__(self, gate_index: int, support: int, cap: int):
        super().__init__(
            f"support {support} exceeds cap {cap} after gate {gate_index}"
        )
        self.gate_index = gate_index
        self.support = support
        self.cap = cap
