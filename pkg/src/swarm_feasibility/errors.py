"""Exception hierarchy shared by the simulator and the CLI."""


class SwarmError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(SwarmError, ValueError):
    """A value handed to a pure function is outside its domain."""


class ConfigError(SwarmError, ValueError):
    """One or more configuration fields are missing, unknown, or out of range."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ContractViolation(SwarmError, RuntimeError):
    """An operation was called in a state where its precondition does not hold."""


class InvalidStateError(SwarmError, RuntimeError):
    """A world or run is in a state that cannot be summarized."""
