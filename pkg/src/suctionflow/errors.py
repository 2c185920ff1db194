"""Exception hierarchy shared by all modules."""


class SuctionFlowError(Exception):
    pass


class PreconditionError(SuctionFlowError, ValueError):
    """Input violates a documented precondition (decay class, parameter range)."""


class GridMismatchError(SuctionFlowError, ValueError):
    pass


class OutOfGridError(SuctionFlowError, ValueError):
    pass


class DivergenceError(SuctionFlowError, ArithmeticError):
    """An improper integral or a norm does not converge for the given tail."""


class ConvergenceError(SuctionFlowError):
    """Picard iteration failed to reach its tolerance; ``history`` holds the deltas."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class ConfigError(SuctionFlowError, ValueError):
    pass
