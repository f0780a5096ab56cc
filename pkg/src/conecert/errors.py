"""Exception types shared across the package."""


class ConeCertError(Exception):
    """Base class for every error raised by conecert."""


class NonConvergence(ConeCertError):
    pass


class NoStabilizingSolution(ConeCertError):
    pass


class DimensionMismatch(ConeCertError, ValueError):
    pass


class NonFiniteInput(ConeCertError, ValueError):
    pass


class InvalidSystem(ConeCertError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class NotControllable(ConeCertError):
    pass


class SpectrumUnsuitable(ConeCertError):
    pass


class FormatError(ConeCertError, ValueError):
    def __init__(self, msg, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + msg)
