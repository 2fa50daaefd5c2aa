"""Exceptions raised by the solvers and the scenario runner."""


class CavityOPAError(Exception):
    """Base class for all library errors."""


class DegenerateSteadyState(CavityOPAError):
    """The Liouvillian has more than one stationary state."""


class Unstable(CavityOPAError):
    """No normalizable stationary solution exists (below-threshold condition violated)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ResolventSingular(CavityOPAError):
    """The shifted Liouvillian ``L - i*omega`` could not be inverted."""


class TruncationInsufficient(CavityOPAError):
    """Population in the highest retained photon sector exceeds tolerance."""

    def __init__(self, message, tail=None, n_max=None):
        super().__init__(message)
        self.tail = tail
        self.n_max = n_max


class ConfigError(CavityOPAError, ValueError):
    """Malformed scenario configuration or sweep range."""


class ScenarioError(CavityOPAError):
    """Wraps a library error with the scenario name and failing stage."""

    def __init__(self, scenario, stage, cause):
        super().__init__(f"scenario {scenario!r} failed during {stage}: {cause}")
        self.scenario = scenario
        self.stage = stage
        self.cause = cause
