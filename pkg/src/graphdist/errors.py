"""Exception and warning types raised across the package."""


class GraphDistError(Exception):
    """Base class for all package errors."""


class InvalidGraph(GraphDistError, ValueError):
    pass


class SelfLoop(InvalidGraph):
    pass


class UnknownNode(InvalidGraph):
    pass


class DuplicateEdge(InvalidGraph):
    pass


class NonPositiveWeight(InvalidGraph):
    pass


class NotAligned(GraphDistError, ValueError):
    """Two graphs do not share the same node identifier sequence."""


class EigDecompositionFailure(GraphDistError, RuntimeError):
    pass


class Disconnected(GraphDistError, ValueError):
    """A connected graph was required.

    ``which`` names the offending argument when the caller compared two graphs.
    """

    def __init__(self, message, which=None):
        super().__init__(message)
        self.which = which


class BothEmpty(GraphDistError, ValueError):
    pass


class ZeroSparsity(GraphDistError, ValueError):
    pass


class NoRoot(GraphDistError, RuntimeError):
    pass


class QuadratureNonConvergence(GraphDistError, RuntimeError):
    pass


class EmptyInput(GraphDistError, ValueError):
    pass


class EmptySupport(GraphDistError, ValueError):
    pass


class KTooLarge(GraphDistError, ValueError):
    pass


class DegenerateLabels(GraphDistError, ValueError):
    pass


class ClassTooSmall(GraphDistError, ValueError):
    pass


class BlockTooSmall(GraphDistError, ValueError):
    pass


class AsymmetricC(GraphDistError, ValueError):
    pass


class InvalidParams(GraphDistError, ValueError):
    pass


class LabelMismatch(GraphDistError, ValueError):
    """Label file identifiers do not match the distance matrix's graph ids."""


class ParseError(GraphDistError, ValueError):
    """Malformed input file; carries the 1-based line/column when known."""

    def __init__(self, message, path=None, line=None, column=None):
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
                if column is not None:
                    loc += f":{column}"
            loc += ": "
        super().__init__(loc + message)
        self.path = path
        self.line = line
        self.column = column


class PairError(GraphDistError):
    """A metric failed on a specific pair (i, j) of a dataset."""

    def __init__(self, i, j, cause):
        super().__init__(f"pair ({i}, {j}): {type(cause).__name__}: {cause}")
        self.i = i
        self.j = j
        self.cause = cause


class DegenerateColumnWarning(UserWarning):
    """Constant column: correlation undefined, no edges produced for it."""


class EmptyGraphsWarning(UserWarning):
    """Both graphs are empty; a distance of 0 was returned by convention."""


class BinarizedWarning(UserWarning):
    """Weighted input was binarized before computing a binary-only quantity."""


class GeneralizedResultWarning(UserWarning):
    """Result computed with a pseudo-determinant on a disconnected graph."""
