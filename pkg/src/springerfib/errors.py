"""Exception hierarchy shared by every module."""


class SpringerError(Exception):
    """Base class for all library errors."""


class DivisionByZero(SpringerError, ZeroDivisionError):
    pass


class FieldMismatch(SpringerError):
    pass


class AmbientMismatch(SpringerError):
    pass


class ShapeMismatch(SpringerError):
    pass


class SingularGram(SpringerError):
    pass


class SingularG(SpringerError):
    pass


class InvalidShape(SpringerError):
    pass


class NotTypeDPartition(InvalidShape):
    pass


class NotACupEndpoint(SpringerError):
    pass


class NoAxisCrossingCup(SpringerError):
    pass


class SizeMismatch(SpringerError):
    pass


class DiagramSyntaxError(SpringerError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ValidationError(SpringerError):
    pass


class BadParity(SpringerError):
    pass


class IndexOutOfRange(SpringerError):
    pass


class NotAdmissible(SpringerError):
    pass


class NotStable(SpringerError):
    pass


class MissingSqrtMinusOne(SpringerError):
    pass


class BadParameters(SpringerError):
    pass


class TooSmall(SpringerError):
    pass


class WrongCase(SpringerError):
    pass


class NotContained(SpringerError):
    pass


class ParamCountMismatch(SpringerError):
    pass


class NotInComponent(SpringerError):
    pass


class CapExceeded(SpringerError):
    pass
