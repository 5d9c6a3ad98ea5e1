"""Exception hierarchy shared by all modules."""


class ESDGError(Exception):
    """Base class for errors raised by this package."""


class InvalidArgumentError(ESDGError, ValueError):
    pass


class DegenerateBasisError(ESDGError, ValueError):
    pass


class InconsistentOperatorsError(ESDGError):
    pass


class IncompatibleQuadratureError(ESDGError):
    pass


class InvalidGeometryError(ESDGError):
    pass


class StabilityPreconditionError(ESDGError):
    """A degree condition required for entropy stability is violated."""


class DomainError(ESDGError, ValueError):
    """A thermodynamic state is outside the admissible set."""


class AdmissibilityError(DomainError):
    """Raised by the solver, carries the location of the bad state."""

    def __init__(self, message, element=None, face=None, stage=None):
        super().__init__(message)
        self.element = element
        self.face = face
        self.stage = stage


class ConfigError(ESDGError):
    pass
