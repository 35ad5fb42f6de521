# Exception hierarchy shared by every layer; the CLI maps these to exit codes.


class GameError(ValueError):
    """Base class for all failures raised by this project."""


class InvalidInputError(GameError):
    """A precondition was violated. The message names the constraint."""


class NumericalError(GameError):
    """A numerical procedure could not produce a trustworthy result."""


class IntegrationError(NumericalError):
    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t={t:g})")
        self.t = t
