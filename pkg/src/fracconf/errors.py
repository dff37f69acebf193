"""Exception hierarchy shared by every fracconf module."""


class FracConfError(Exception):
    """Base class; carries an optional pipeline stage tag."""

    stage = None

    def with_stage(self, stage):
        self.stage = stage
        return self

    def __str__(self):
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg


class ParamError(FracConfError, ValueError):
    pass


class DimensionError(FracConfError, ValueError):
    pass


class StructureError(FracConfError, ValueError):
    """Malformed gap graph (bad indices, duplicate edges, wrong shape tag)."""


class DegenerateConfiguration(FracConfError, ValueError):
    pass


class InfeasibleDimension(FracConfError, ValueError):
    pass


class GapInfeasible(FracConfError, ValueError):
    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class NotAcute(FracConfError, ValueError):
    pass


class OutsideCap(FracConfError, ValueError):
    pass


class AuditFailed(FracConfError, ArithmeticError):
    pass


class UnsupportedShape(FracConfError, ValueError):
    pass


class OracleTooLarge(FracConfError, ValueError):
    pass


class NotApplicable(FracConfError, ValueError):
    pass


class OutOfValidity(FracConfError, ValueError):
    pass


class ConfigError(FracConfError, ValueError):
    def __init__(self, msg, field=None):
        super().__init__(f"{field}: {msg}" if field else msg)
        self.field = field
