"""Shared exception types.

The CLI maps InvalidInput to exit code 2 and CapExceeded to exit code 3.
"""


class StabpackError(Exception):
    pass


class InvalidInput(StabpackError, ValueError):
    pass


class DimensionMismatch(InvalidInput):
    pass


class DenominatorMismatch(InvalidInput):
    pass


class CapExceeded(StabpackError, RuntimeError):
    pass


class StabRetryExhausted(StabpackError, RuntimeError):
    """Monte Carlo stabbing ran out of retries; carries the residue."""

    def __init__(self, message: str, unstabbed: list[int]):
        super().__init__(message)
        self.unstabbed = unstabbed
