"""Exception types raised across coarsekit."""


class CoarseKitError(Exception):
    """Base class for all library errors."""


class SpaceMismatchError(CoarseKitError, ValueError):
    """Two objects that must share a box space do not."""


class MissingDiagonalError(CoarseKitError, ValueError):
    """A relation was required to contain the diagonal but does not."""


class PartialBijectionError(CoarseKitError, ValueError):
    """A relation used as a translation is not a partial bijection."""


class ZeroOperatorError(CoarseKitError, ValueError):
    """The operation is undefined for a zero operator."""


class CapExceededError(CoarseKitError):
    """A brute-force enumeration would exceed the configured ball cap."""

    def __init__(self, component, center, size, cap):
        self.component = component
        self.center = center
        self.size = size
        self.cap = cap
        super().__init__(
            f"ball around point {center} of component {component} has {size} points, "
            f"over the brute-force cap of {cap}; use mode='heuristic' or mode='flow'"
        )


class NonConvergenceError(CoarseKitError, RuntimeError):
    """Power iteration hit its iteration cap."""

    def __init__(self, estimate, iterations, component=None):
        self.estimate = estimate
        self.iterations = iterations
        self.component = component
        where = "" if component is None else f" on component {component}"
        super().__init__(
            f"power iteration did not converge after {iterations} iterations{where}; "
            f"last estimate {estimate!r}"
        )


class SpaceFileError(CoarseKitError, ValueError):
    """Malformed space file; carries the offending line number."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        prefix = "" if lineno is None else f"line {lineno}: "
        super().__init__(prefix + message)
