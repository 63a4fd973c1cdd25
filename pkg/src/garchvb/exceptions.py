"""Exception hierarchy shared across the package."""


class GarchVBError(Exception):
    """Base class for all domain errors raised by garchvb."""


class ConstraintViolation(GarchVBError, ValueError):
    """A parameter lies outside its admissible region."""


class NonFinite(GarchVBError, ValueError):
    """An input or intermediate quantity is NaN or infinite."""


class DegenerateSeries(GarchVBError, ValueError):
    """The return series is too short, non-finite or has zero spread."""


class DimensionMismatch(GarchVBError, ValueError):
    """Vector and variational-state dimensions disagree."""


class WrongFactorization(GarchVBError, ValueError):
    """An operation was invoked with an incompatible Cholesky factorization."""


class InsufficientSamples(GarchVBError, ValueError):
    """Too few samples to compute the requested statistic."""


class ProposalSingular(GarchVBError, RuntimeWarning):
    """The MLE curvature could not be turned into a proposal covariance."""


class ParseError(GarchVBError, ValueError):
    """An input file could not be parsed.

    Parameters
    ----------
    message : str
        Human readable description.
    row, column : int, optional
        1-based location of the offending cell.
    """

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
