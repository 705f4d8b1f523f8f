"""hp discontinuous Galerkin Poisson solver with an additive Jacobi + Schwarz preconditioner."""

from .assembly import AssembledSystem, DGConfig, assemble
from .dgspace import DofMap, build_dofmap, oswald
from .experiments import ExperimentSpec, ResultRow, convergence_study, run
from .gll import gll_rule, lagrange_basis
from .mesh import DomainError, Mesh, build_mesh
from .precond import NotSPDError, Preconditioner, build_preconditioner
from .spectral import condition_number_2norm, estimate_constants, extreme_eigs, pcg

__all__ = [
    "AssembledSystem", "DGConfig", "DofMap", "DomainError", "ExperimentSpec", "Mesh", "NotSPDError",
    "Preconditioner", "ResultRow", "assemble", "build_dofmap", "build_mesh", "build_preconditioner",
    "condition_number_2norm", "convergence_study", "estimate_constants", "extreme_eigs", "gll_rule",
    "lagrange_basis", "oswald", "pcg", "run",
]
