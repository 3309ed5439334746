"""Dynamic metric k-center with bounded recourse."""
from .errors import BoundsViolation, BudgetExceeded, InvalidArgument, InvalidState, NotFound
from .kcenter import DynamicKCenter, LevelConfig, Solution, StepReport
from .metric import ChangeSet, MetricSpace, PointRecord, UpdateEvent, UpdateKind, ball, cl
from .mis import DynamicMIS

__all__ = [
    "BoundsViolation",
    "BudgetExceeded",
    "ChangeSet",
    "DynamicKCenter",
    "DynamicMIS",
    "InvalidArgument",
    "InvalidState",
    "LevelConfig",
    "MetricSpace",
    "NotFound",
    "PointRecord",
    "Solution",
    "StepReport",
    "UpdateEvent",
    "UpdateKind",
    "ball",
    "cl",
]
