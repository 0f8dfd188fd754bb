class PseudosphereError(Exception):
    pass


class InvalidShape(PseudosphereError, ValueError):
    pass


class PatchHasNoVolume(PseudosphereError):
    pass


class CenterNotInterior(PseudosphereError, ValueError):
    pass


class NonFiniteIntegrand(PseudosphereError, ArithmeticError):
    pass


class SingularPoint(PseudosphereError, ZeroDivisionError):
    pass


class AlphaNotExterior(PseudosphereError, ValueError):
    pass


class NoTouchingPoint(PseudosphereError, ValueError):
    pass


class InsufficientSamples(PseudosphereError, ValueError):
    pass


class ConfigError(PseudosphereError, ValueError):
    """Bad run configuration; ``field`` names the offending key path."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = (", ".join(where) + ": ") if where else ""
        super().__init__(prefix + message)
