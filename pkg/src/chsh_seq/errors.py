"""Exception hierarchy shared by every module."""


class ChshSeqError(Exception):
    """Base class for all library errors."""


class DimensionError(ChshSeqError, ValueError):
    pass


class HermiticityError(ChshSeqError, ValueError):
    pass


class NumericalError(ChshSeqError, ArithmeticError):
    pass


class SpectrumError(ChshSeqError, ValueError):
    """An eigenvalue lies outside the +1/-1 bands."""


class SignatureError(ChshSeqError, ValueError):
    pass


class ProjectorError(ChshSeqError, ValueError):
    pass


class ZeroProbabilityCollapse(ChshSeqError):
    """Collapse was requested onto an outcome that cannot occur."""


class InternalConsistencyError(ChshSeqError):
    """Two independent computation routes disagree; indicates a bug."""


class LabelError(ChshSeqError, ValueError):
    pass


class ParameterError(ChshSeqError, ValueError):
    pass


class ScenarioError(ChshSeqError, ValueError):
    """A scenario document failed to parse; ``path`` locates the field."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)
