"""Exception types shared across the package."""


class ConlearnError(Exception):
    """Base class for all package-specific errors."""


class NumericalDegeneracyError(ConlearnError):
    """A matrix factorization or root search lost positive definiteness."""


class MalformedObservationError(ConlearnError):
    """An observation is inconsistent with the loss family's output structure."""


class DivergenceError(ConlearnError):
    """An iterate left the numerically trustworthy region."""


class ConfigError(ConlearnError):
    """Invalid experiment configuration.

    ``path`` locates the offending field, e.g. ``"stream.regime.kind"``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")
