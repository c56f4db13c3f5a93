"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration value (bad grid spacing, negative dt, unknown key, ...)."""


class ContractViolationError(ValueError):
    """An operation was called outside its documented domain."""


class SimulationDivergedError(RuntimeError):
    """The wavefunction stopped being finite, or its power grew step-over-step.

    Carries the last finite state, the time at which the problem was detected,
    and any diagnostics records collected up to that point.
    """

    def __init__(self, message, t=None, field=None, records=None):
        super().__init__(message)
        self.t = t
        self.field = field
        self.records = list(records) if records is not None else []
