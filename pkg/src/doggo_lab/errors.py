"""Exception hierarchy shared across the package."""


class DoggoLabError(Exception):
    """Base class for every error raised by doggo_lab."""


class UnreachableTarget(DoggoLabError, ValueError):
    pass


class SingularConfiguration(DoggoLabError, ValueError):
    pass


class ConfigError(DoggoLabError, ValueError):
    pass


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DomainError(DoggoLabError, ValueError):
    pass


class EmptySeries(DoggoLabError, ValueError):
    pass


class NoCrossover(DoggoLabError):
    """Gain never fell below -3 dB; ``lower_bound`` is the top of the sweep."""

    def __init__(self, lower_bound: float):
        super().__init__(
            f"gain never crossed -3 dB; bandwidth is at least {lower_bound:g} Hz"
        )
        self.lower_bound = lower_bound


class InsufficientTravel(DoggoLabError):
    pass


class NoJumpDetected(DoggoLabError):
    pass


class SimulationError(DoggoLabError):
    """Raised when a simulated experiment cannot complete."""


class NumericalDivergence(SimulationError):
    pass


class FallDetected(SimulationError):
    pass


class NoTakeoff(SimulationError):
    pass
