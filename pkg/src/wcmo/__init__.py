"""Worst-case multi-objective a-posteriori error estimation on quadtree FEM."""

from .adapt import ConvergenceHistory, MarkingParams, semr_run
from .cases import CASES, CaseSpec, ObjectiveSpec, get_case, synth_permeability
from .coefficients import Constant, GriddedLogField
from .estimator import EstimateReport, LevelPair
from .mesh import Domain, Mesh, parse_mesh, refine, uniform_mesh, uniform_refine
from .solve import Field, SolverError, solve_primal, solve_sym
from .space import BoundaryRegion, Space, build_space, injection_matrix

__version__ = "0.1.0"

__all__ = [
    "CASES", "BoundaryRegion", "CaseSpec", "Constant", "ConvergenceHistory",
    "Domain", "EstimateReport", "Field", "GriddedLogField", "LevelPair",
    "MarkingParams", "Mesh", "ObjectiveSpec", "Space", "SolverError",
    "build_space", "get_case", "injection_matrix", "parse_mesh", "refine",
    "semr_run", "solve_primal", "solve_sym", "synth_permeability",
    "uniform_mesh", "uniform_refine", "__version__",
]
