"""Exception hierarchy shared by every uavplace module."""


class UavPlacementError(Exception):
    """Base class for all errors raised by uavplace."""


class EmptyGrid(UavPlacementError):
    """No candidate location survives the regulatory filters for some region."""


class DegenerateLink(UavPlacementError):
    """A UAV and a user coincide, so the link distance is zero."""


class EmptyPathSet(UavPlacementError):
    pass


class ZeroChannel(UavPlacementError):
    pass


class Infeasible(UavPlacementError):
    """No selection vector meets the SINR threshold for every user."""


class NumericalFailure(UavPlacementError):
    pass


class IndexOutOfRange(UavPlacementError, IndexError):
    pass


class ConfigParseError(UavPlacementError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(UavPlacementError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
