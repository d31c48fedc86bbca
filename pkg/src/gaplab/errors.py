"""Exception hierarchy shared by every gaplab module."""


class GapLabError(Exception):
    """Base class for all gaplab errors."""


class ValidationError(GapLabError, ValueError):
    """An input violates a documented precondition.

    ``field`` names the offending input when there is a single one.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class WienLimitError(ValidationError):
    """Nuclear temperature does not exceed the radiation temperature."""


class DomainError(ValidationError):
    """A time, temperature or volume lies outside the function's domain."""


class NumericalFailure(GapLabError, ArithmeticError):
    """An iterative or floating-point computation could not complete.

    ``bracket`` carries the last root bracket when a solver gave up.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket
