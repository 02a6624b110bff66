"""Shape derivatives of time-harmonic acoustic scattering in two dimensions."""

__version__ = "0.1.0"

from .derivatives import DerivativeBundle, derive
from .geometry import StarCurve, VelocityField
from .mie import PlaneWave, WaveParameters
from .problem import FieldSolution, solve
from .regularity import (Mode, PreconditionViolated, ProblemKind, RegularityQuery, SobolevIndex,
                         md_index, regularity_report, sd_index, solution_index)

__all__ = [
    "__version__", "DerivativeBundle", "derive", "StarCurve", "VelocityField", "PlaneWave",
    "WaveParameters", "FieldSolution", "solve", "Mode", "PreconditionViolated", "ProblemKind",
    "RegularityQuery", "SobolevIndex", "md_index", "regularity_report", "sd_index",
    "solution_index",
]
