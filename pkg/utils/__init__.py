from .logger import get_logger
from .config import load_config, runtime_threads
from .errors import (
    MonodromeError,
    InvariantViolation,
    TelescopingError,
    DegenerateLatticeStep,
    CollisionError,
    GeometryMismatchError,
    SolvabilityError,
    ResolutionError,
    StageError,
)

__all__ = [
    'get_logger',
    'load_config',
    'runtime_threads',
    'MonodromeError',
    'InvariantViolation',
    'TelescopingError',
    'DegenerateLatticeStep',
    'CollisionError',
    'GeometryMismatchError',
    'SolvabilityError',
    'ResolutionError',
    'StageError',
]
