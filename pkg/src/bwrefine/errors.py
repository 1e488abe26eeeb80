"""Exception types shared across the package."""


class NoDecomposition(ValueError):
    """Ground set too small for a branch decomposition."""


class InvalidImprovement(ValueError):
    """Tripartition does not qualify for the requested operation."""


class RefusedExhaustiveCheck(ValueError):
    pass


class RefusedEnumeration(ValueError):
    pass


class InternalInvariantFailure(AssertionError):
    """A checked invariant of the algorithm was violated."""


class InvalidRepresentative(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class WidthCapExceeded(RuntimeError):
    """The rankwidth structure refuses decompositions above its width cap."""


class RankwidthExceedsK(Exception):
    """Raised when the compression loop certifies rankwidth above the target."""

    def __init__(self, k, width):
        super().__init__(f"rankwidth exceeds {k} (two-approx width {width})")
        self.k = k
        self.width = width


class ParseError(ValueError):
    def __init__(self, line_no, msg):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


class InvalidGraph(ValueError):
    pass
