"""Exception and warning types raised by the simulator."""


class SwarmSimError(Exception):
    """Base class for every simulator error."""


class InvalidRegion(SwarmSimError, ValueError):
    pass


class InvalidGridSize(SwarmSimError, ValueError):
    pass


class RegionTooSmall(SwarmSimError, ValueError):
    """No triangle grid keeps centroids outside the repulsion region."""


class InvalidPolygon(SwarmSimError, ValueError):
    pass


class AmbiguousSegment(SwarmSimError, ValueError):
    """A point coincides with the circle center and has no segment."""


class AgentInObstacle(SwarmSimError):
    pass


class IntegrationDiverged(SwarmSimError):
    def __init__(self, message: str, tick: int | None = None):
        super().__init__(message)
        self.tick = tick


class NoFreeRegion(SwarmSimError):
    """Every probed direction leaves sensed obstacle points inside the circle."""


class InsufficientCapacity(SwarmSimError):
    pass


class EmptyTrace(SwarmSimError):
    pass


class ScenarioError(SwarmSimError, ValueError):
    """Scenario file could not be parsed or violates an invariant.

    ``line`` and ``column`` are 1-based when the location is known.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class CoincidenceWarning(UserWarning):
    """Two agents occupy the same position; their mutual repulsion is zero."""
