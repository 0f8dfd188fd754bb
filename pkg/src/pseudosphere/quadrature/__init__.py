from .core import QuadratureResult, boundary_grid, discretize, graded_refine, integrate_boundary, integrate_grid
from .extrapolate import GEOMETRIC, POWER, LimitEstimate, extrapolate_limit
from .oracles import poisson_normalization, reference_appendix_integral

__all__ = [
    "QuadratureResult", "boundary_grid", "discretize", "graded_refine", "integrate_boundary",
    "integrate_grid", "GEOMETRIC", "POWER", "LimitEstimate", "extrapolate_limit",
    "poisson_normalization", "reference_appendix_integral",
]
