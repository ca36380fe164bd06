"""Generalized q-dimensions on non-autonomous conformal attractors.

Builds level-scheduled contraction systems on an interval, equips them with
product or Markov-Gibbs symbolic measures, locates the pressure-function
jump points in t per moment order q, and cross-checks them against delta-mesh
box-counting estimates of the projected measure.
"""

__version__ = "0.1.0"

from .boxdim import DimensionEstimate, MeshHistogram, entropy_sum, estimate_Dq, mesh_histogram, moment_sum
from .maps import Map1D, Mobius, NestingError, NotConformalError, Similarity, Smooth
from .measures import GibbsMeasure, ProductMeasure, cylinder_mass, gibbs_pressure
from .moran import MoranReport, moran_limits, moran_sk
from .pressure import (
    DimensionRoot,
    PressureCurve,
    RootOutOfRangeError,
    cutset_sum,
    level_sum,
    level_sum_q1,
    pressure_curve,
    root_dq,
    series_partial_sums,
)
from .system import (
    BudgetExceededError,
    ContractionError,
    LevelSchedule,
    System,
    SystemDiagnostics,
    ValidationReport,
)
from .words import CutSet, Word, brute_force_cut_set, cut_set, enumerate_level

__all__ = [
    "__version__",
    "BudgetExceededError",
    "ContractionError",
    "CutSet",
    "DimensionEstimate",
    "DimensionRoot",
    "GibbsMeasure",
    "LevelSchedule",
    "Map1D",
    "MeshHistogram",
    "Mobius",
    "MoranReport",
    "NestingError",
    "NotConformalError",
    "PressureCurve",
    "ProductMeasure",
    "RootOutOfRangeError",
    "Similarity",
    "Smooth",
    "System",
    "SystemDiagnostics",
    "ValidationReport",
    "Word",
    "brute_force_cut_set",
    "cut_set",
    "cutset_sum",
    "cylinder_mass",
    "entropy_sum",
    "enumerate_level",
    "estimate_Dq",
    "gibbs_pressure",
    "level_sum",
    "level_sum_q1",
    "mesh_histogram",
    "moment_sum",
    "moran_limits",
    "moran_sk",
    "pressure_curve",
    "root_dq",
    "series_partial_sums",
]
