"""Exception hierarchy shared by every module."""


class TPGRError(Exception):
    """Base class for all engine errors."""


class MetricSyntaxError(TPGRError, ValueError):
    """A metric document could not be parsed.

    ``line`` and ``column`` are 1-based.
    """

    def __init__(self, message: str, line: int, column: int):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class DomainError(TPGRError, ArithmeticError):
    """An expression was evaluated at a point where it is not differentiable."""

    def __init__(self, message: str, subexpr: str | None = None, point=None):
        self.subexpr = subexpr
        self.point = tuple(point) if point is not None else None
        detail = message
        if subexpr is not None:
            detail += f" in '{subexpr}'"
        if self.point is not None:
            detail += " at (" + ", ".join(f"{x:.17g}" for x in self.point) + ")"
        super().__init__(detail)


class OutsideChartError(DomainError):
    """A point lies outside the declared validity interval of a coordinate."""


class SingularPointError(DomainError):
    """The metric is degenerate or not evaluable at a point.

    ``tags`` names the singular sets the point belongs to when the metric is
    one of the catalog time-periodic metrics (e.g. ``"S_r=m"``).
    """

    def __init__(self, message: str, point=None, tags=(), subexpr=None):
        self.tags = tuple(tags)
        if self.tags:
            message = f"{message} [{', '.join(self.tags)}]"
        super().__init__(message, subexpr=subexpr, point=point)


class ProvisoError(TPGRError, ValueError):
    """The (rho*sigma)_x != 0 proviso of the v quadrature failed."""

    def __init__(self, message: str, x: float):
        self.x = x
        super().__init__(f"{message} at x = {x:.17g}")


class QuadratureError(TPGRError, ArithmeticError):
    """Adaptive quadrature could not reach the tolerance (likely a singularity)."""


class HorizonInfeasible(TPGRError, ValueError):
    """No horizon candidate set exists for the requested case."""

    def __init__(self, message: str, ratio: float | None = None):
        self.ratio = ratio
        super().__init__(message)


class BracketError(TPGRError, ValueError):
    """A root bracket does not change sign."""
