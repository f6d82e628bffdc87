"""Exception types shared across the package.

Every error carries a stable ``code`` string; the command-line front-end
reports it verbatim in its error JSON.
"""


class FreeJacError(Exception):
    code = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"error": self.code, "message": str(self)}
        out.update(self.details)
        return out


class ShapeError(FreeJacError, ValueError):
    code = "shape_mismatch"


class ParseError(FreeJacError, ValueError):
    code = "parse_error"

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message, line=line, column=column)
        self.line = line
        self.column = column


class IllConditionedError(FreeJacError, ValueError):
    code = "ill_conditioned"


class SingularPencilError(FreeJacError, ValueError):
    code = "singular_pencil"


class SeriesInversionError(FreeJacError, ValueError):
    code = "series_inversion"


class WitnessError(FreeJacError, ValueError):
    code = "invalid_witness"


class DomainUnsatisfiableError(FreeJacError, RuntimeError):
    code = "domain_unsatisfiable"


class SingularDerivativeError(FreeJacError, ArithmeticError):
    """Newton hit an iterate where the derivative is singular."""

    code = "singular_derivative"

    def __init__(self, message, certificate=None, iterate=None, iterations=None):
        details = {"iterations": iterations}
        if certificate is not None:
            details["certificate"] = certificate.to_dict()
        super().__init__(message, **details)
        self.certificate = certificate
        self.iterate = iterate
        self.iterations = iterations


class ConvergenceError(FreeJacError, ArithmeticError):
    code = "max_iter_exceeded"

    def __init__(self, message, best=None, residual=None, iterations=None):
        super().__init__(message, residual=residual, iterations=iterations)
        self.best = best
        self.residual = residual
        self.iterations = iterations
