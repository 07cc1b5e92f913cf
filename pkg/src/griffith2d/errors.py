"""Error taxonomy shared by all modules.

Every failure carries a stable machine-readable ``code`` (used by the CLI
for structured stderr output and exit codes) plus a ``details`` dict with
the offending data (coordinates, region ids, residuals).
"""


class Griffith2dError(Exception):
    code = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_json(self):
        return {"error": self.code, "message": str(self), "details": _plain(self.details)}


def _plain(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


class InvalidGeometryError(Griffith2dError):
    code = "invalid-geometry"


class GeometryRobustnessError(Griffith2dError):
    code = "geometry-robustness"


class InvalidArgumentError(Griffith2dError):
    code = "invalid-argument"


class DegenerateSlicingError(Griffith2dError):
    code = "degenerate-slicing"


class PartitionError(Griffith2dError):
    code = "partition-error"


class CoverageError(Griffith2dError):
    code = "coverage-error"


class DatumError(Griffith2dError):
    code = "datum-error"


class AmbiguousPointError(Griffith2dError):
    code = "ambiguous-point"


class MapFoldingError(Griffith2dError):
    code = "map-folding"


class WindowError(Griffith2dError):
    code = "window-error"


class BoundaryReachError(Griffith2dError):
    code = "boundary-reach"


class CoverError(Griffith2dError):
    code = "cover-error"


class MeshError(Griffith2dError):
    code = "mesh-error"


class SolverError(Griffith2dError):
    code = "solver-error"


class UsageError(Griffith2dError):
    code = "usage"


ERROR_CODES = sorted(
    cls.code
    for cls in list(globals().values())
    if isinstance(cls, type) and issubclass(cls, Griffith2dError)
)
