"""Exception hierarchy shared by every layer of the package."""


class KStressError(Exception):
    """Base class for all errors raised by kstress."""


class ValidationError(KStressError):
    """Malformed input: bad complex description, missing data, wrong dimensions."""


class BuildError(ValidationError):
    pass


class NonOrientable(KStressError):
    pass


class NonFlatCell(ValidationError):
    def __init__(self, cells):
        self.cells = list(cells)
        desc = ", ".join(f"{c} (rank {r})" for c, r in self.cells[:8])
        super().__init__(f"non-flat or degenerate cells: {desc}")


class DegenerateGeometry(ValidationError):
    pass


class ClosureFailure(KStressError):
    """Reciprocal integration did not close around a dual-graph cycle."""


class DisconnectedDualGraph(KStressError):
    pass


class TopologyError(KStressError):
    """A topological precondition (e.g. trivial H1 over Z/2) does not hold."""


class NumericalAmbiguity(KStressError):
    pass


class ParseError(ValidationError):
    pass
