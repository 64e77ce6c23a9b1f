"""Exception types shared by all subpackages."""


class SuperintError(Exception):
    """Base class for domain errors raised by the engine."""


class DenominatorZero(SuperintError, ZeroDivisionError):
    """A denominator is (or a division would create) the zero polynomial."""


class LogObstruction(SuperintError):
    """A rational antiderivative would need a logarithm.

    Attributes
    ----------
    residues : list of (factor, residue)
        Each entry pairs a squarefree denominator factor with the numerator
        ``R`` of the leftover ``R/factor``.  For linear factors ``q - c`` the
        second entry is the residue value at ``c``.
    """

    def __init__(self, residues, message=None):
        self.residues = list(residues)
        if message is None:
            parts = [f"{r} at root of {f}" for f, r in self.residues]
            message = "logarithmic term required; residues: " + "; ".join(parts)
        super().__init__(message)


class NonPolynomialMomenta(SuperintError):
    """An operation needs a symbol polynomial in the momenta."""


class NotSeparable(SuperintError):
    """An operator term touches more than one axis."""


class UnsupportedOrder(SuperintError):
    """Requested correction operator or auxiliary function is out of range."""


class InconsistentAnsatz(SuperintError):
    """A Z_k candidate is not of the required kernel form."""


class EvaluationAtPole(SuperintError, ZeroDivisionError):
    """A numeric substitution hit a zero of a denominator."""


class GrammarError(SuperintError, SyntaxError):
    """Malformed expression or model text.

    ``line`` and ``column`` are 1-based.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class UndeclaredParameter(SuperintError):
    """An identifier is neither a builtin nor a declared parameter."""


class PoleProximity(SuperintError):
    """A trajectory came within the configured margin of a pole."""


class NonFiniteState(SuperintError):
    """A trajectory produced NaN or infinite values."""
