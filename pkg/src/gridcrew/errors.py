"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: input problems (parse/validation)
exit 1, solver failures exit 2, I/O problems exit 3.
"""


class GridCrewError(Exception):
    """Base class for all toolkit errors."""


class ParseError(GridCrewError):
    """A file exists but its content cannot be parsed."""


class ValidationError(GridCrewError):
    """Parsed data violates a structural invariant."""


class UnreachableTerminalError(ValidationError):
    """Two terminals of a reduced graph are not connected by the road network."""


class SolverError(GridCrewError):
    """Base class for failures raised while solving."""


class RouteSizeError(SolverError):
    """More nodes assigned to a single route than the exact solver cap allows."""


class RouteInfeasibleError(SolverError):
    """Assigned quantities exceed the crew capacity; no feasible route exists."""


class StallError(SolverError):
    """The restoration loop cannot make progress on the remaining demand."""


class OverServiceError(SolverError):
    """A service update would drive a node's residual demand below zero."""
