"""Exceptions raised by peacock.

Every error is a :class:`PeacockError`; the ones caused by bad input values are also :class:`ValueError` so that
callers who only care about the builtin hierarchy can keep catching that.
"""

from typing import Optional


class PeacockError(Exception):
    pass


class LayoutError(PeacockError, ValueError):
    """The layout document could not be parsed or violates a layout invariant.

    Parameters
    ----------
    message : str
    edge_id : int (optional)
        The offending edge, if the problem is tied to one edge.
    """

    def __init__(self, message: str, edge_id: Optional[int] = None) -> None:
        if edge_id is not None:
            message = f"edge {edge_id}: {message}"
        super().__init__(message)
        self.edge_id = edge_id


class ParameterError(PeacockError, ValueError):
    pass


class OptimizationError(PeacockError, ValueError):
    pass


class FanSegmentError(PeacockError, ValueError):
    pass


class StageError(PeacockError):
    """An error raised inside one pipeline stage, tagged with the stage name."""

    def __init__(self, stage: str, error: Exception) -> None:
        super().__init__(f"{stage}: {error}")
        self.stage = stage
        self.error = error
