"""Exception types shared across the library.

Cap- and limit-type errors signal that an exhaustive computation was cut
short; callers either re-run with a higher cap or degrade to a flagged,
partial answer.  Everything else is a genuine precondition or consistency
failure.
"""


class TaylorEdgesError(Exception):
    """Base class for all library errors."""


class CapExceeded(TaylorEdgesError):
    """An enumeration or closure hit its configured cap before finishing."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class LimitExceeded(TaylorEdgesError):
    """A brute-force search space is larger than the configured limit."""


class NotClosed(TaylorEdgesError):
    """A subset that must be a subuniverse is not closed."""


class NotACongruence(TaylorEdgesError):
    """A partition that must be a congruence fails compatibility."""


class NotSubdirect(TaylorEdgesError):
    """A relation that must be subdirect misses elements on some side."""


class NotCompatible(TaylorEdgesError):
    """A relation that must be compatible is not closed under the operations."""


class SignatureMismatch(TaylorEdgesError):
    """Two algebras that must be similar have different signatures."""


class ArityMismatch(TaylorEdgesError):
    """A term was applied to the wrong number of arguments."""


class NoCyclicWitness(TaylorEdgesError):
    """No cyclic term operation was found at the requested arities."""


class SEdgeMismatch(TaylorEdgesError):
    """Internal consistency failure: the two s-edge characterizations disagree.

    Raised when the intersection of the as- and sm-digraphs differs from the
    direct two-element-absorption test on some pair.  This cannot happen on a
    minimal Taylor algebra, so it indicates either a non-Taylor input or a bug.
    """


class PreconditionViolated(TaylorEdgesError):
    """An operation was called with inputs violating its stated precondition."""


class NotPolynomial(TaylorEdgesError):
    """A unary map is not a unary polynomial of its domain algebra."""


class NotConsistent(TaylorEdgesError):
    """A map family sends some constraint tuple outside its relation."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NotRetractive(TaylorEdgesError):
    """A map that must satisfy p(p(x)) = p(x) does not."""


class HypothesisUnmet(TaylorEdgesError):
    """A theorem-replay was asked to run with a failing hypothesis."""

    def __init__(self, message: str, hypothesis: str | None = None):
        super().__init__(message)
        self.hypothesis = hypothesis


class ParseError(TaylorEdgesError):
    """An input file is malformed; carries line information."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
