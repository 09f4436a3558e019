"""Exception hierarchy shared by all plhsolve modules."""


class PlhError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PlhError):
    """Malformed input text; carries 1-based line/column of the offending token."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = "%s (line %d, column %d)" % (message, line, col)
        super().__init__(message)


class UnboundedValue(PlhError):
    """A finite rational was requested from a value with an eps^-k component."""


class MultipleGuards(PlhError):
    """Two pieces of a cost function fired at the same point (malformed language)."""


class NotMaxClosed(PlhError):
    """A relation handed to the order-propagation solver is not preserved by max."""

    def __init__(self, relation_name, pair):
        self.relation_name = relation_name
        self.pair = pair
        super().__init__(
            "relation %r is not max-closed; witness tuples %s and %s"
            % (relation_name, pair[0], pair[1])
        )


class SubmodularityViolation(PlhError):
    """A cost function failed the grid submodularity check."""

    def __init__(self, function_name, pair):
        self.function_name = function_name
        self.pair = pair
        super().__init__(
            "cost function %r violates submodularity at %s, %s"
            % (function_name, pair[0], pair[1])
        )


class OracleMismatch(PlhError):
    """The solver and the independent oracle disagree; always a bug, never swallowed."""


class ResourceLimitExceeded(PlhError):
    """A configured size cap was hit before the computation could finish."""


class InternalCheckFailed(PlhError):
    """A built-in self-check (witness assertion, invariant) failed."""
