class InputError(ValueError):
    """An observation or argument value that cannot be processed (NaN, inf, out of domain)."""


class ContractError(ValueError):
    """A call that violates an operation's preconditions (mismatched orders, wrong mode, empty state)."""


class NonFiniteObservation(InputError):
    """Raised when a stream update receives a non-finite value.

    The state is left untouched; ``rejected`` carries the running reject count
    of the state that refused the observation.
    """

    def __init__(self, message: str, rejected: int):
        super().__init__(message)
        self.rejected = rejected
