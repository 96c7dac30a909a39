"""Exception and warning types shared across the package."""


class ValidationError(ValueError):
    """An input failed validation. `field` names the offending key."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class TruncationError(RuntimeError):
    """Fock-space truncation lost too much probability weight to continue."""


class TruncationWarning(UserWarning):
    """Truncation leakage is measurable but below the abort threshold."""


class UnsupportedStateError(TypeError):
    """The closed-form propagator received a state it cannot represent."""


class PhaseUndefinedError(ArithmeticError):
    """Coherence magnitude too small for its phase to be meaningful."""
