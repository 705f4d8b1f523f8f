"""Parameter sweeps over (p, alpha): condition numbers, iteration counts, constants, convergence."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Iterable

import numpy as np
import scipy.sparse.linalg as sla

from .assembly import DGConfig, assemble
from .dgspace import build_dofmap
from .gll import gauss_rule, lagrange_basis
from .mesh import build_mesh
from .precond import build_preconditioner
from .spectral import (DEFAULT_SEED, condition_number_2norm, estimate_constants, extreme_eigs,
                       lanczos_extreme, pcg)

log = logging.getLogger(__name__)

TASKS = ("condition-numbers", "iterations", "constants", "convergence")
RHS_CHOICES = ("random-solution", "load")


@dataclass(frozen=True)
class ExperimentSpec:
    method: str = "sipg"
    p: tuple[int, ...] = (2,)
    n: int = 16
    alpha: tuple[float, ...] = (10.0,)
    beta: tuple[float, float] | None = None  # None: (1, 1) for LDG, (0, 0) for SIPG
    tasks: tuple[str, ...] = TASKS[:3]
    rel_tol: float = 1e-8
    eig_tol: float = 1e-4
    seed: int = DEFAULT_SEED
    # right-hand side for the iteration counts: A x* for a seeded random x*, or int f phi with f = 1
    rhs: str = "random-solution"
    domain: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        method = self.method.lower()
        if method not in ("sipg", "ldg"):
            raise ValueError(f"unknown method {self.method!r}")
        object.__setattr__(self, "method", method)
        if not self.p or not self.alpha:
            raise ValueError("p-list and alpha-list must be nonempty")
        if any(int(q) != q or q < 2 for q in self.p):
            raise ValueError(f"polynomial degrees must be integers >= 2, got {self.p}")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        bad = set(self.tasks) - set(TASKS)
        if bad:
            raise ValueError(f"unknown tasks {sorted(bad)}; choose from {TASKS}")
        if self.rhs not in RHS_CHOICES:
            raise ValueError(f"rhs must be one of {RHS_CHOICES}")
        if self.n < 1:
            raise ValueError("n must be positive")
        object.__setattr__(self, "p", tuple(sorted(int(q) for q in self.p)))
        object.__setattr__(self, "alpha", tuple(sorted(float(a) for a in self.alpha)))

    @property
    def effective_beta(self) -> tuple[float, float]:
        if self.beta is not None:
            return tuple(float(b) for b in self.beta)
        return (1.0, 1.0) if self.method == "ldg" else (0.0, 0.0)

    def cases(self) -> list[tuple[int, float]]:
        return [(p, a) for p in self.p for a in self.alpha]


@dataclass
class ResultRow:
    method: str
    p: int
    n: int
    h: float
    alpha: float
    beta: str
    K_A: float | None = None
    K_TDG: float | None = None
    K_TDG_spectral: float | None = None
    cg_iters: int | None = None
    pcg_iters: int | None = None
    c1_jacobi: float | None = None
    c2_jacobi_kerQ: float | None = None
    c2_jacobi_full_VB: float | None = None
    c1_schwarz: float | None = None
    c2_schwarz: float | None = None
    h1_rate: float | None = None
    wall_time_seconds: float = 0.0
    error: str = ""

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict:
        return asdict(self)


class CaseFailure(RuntimeError):
    def __init__(self, p, alpha, cause):
        super().__init__(f"case p={p}, alpha={alpha:g} failed: {cause!r}")
        self.p, self.alpha, self.cause = p, alpha, cause


def random_solution_rhs(A, seed: int) -> np.ndarray:
    """``A x*`` for a standard normal ``x*``; equivalent to a random initial error."""
    x = np.random.default_rng(seed).standard_normal(A.shape[0])
    return A @ x


def run_case(spec: ExperimentSpec, p: int, alpha: float) -> ResultRow:
    t0 = time.perf_counter()
    mesh = build_mesh(spec.n, spec.domain)
    beta = spec.effective_beta
    row = ResultRow(spec.method, p, spec.n, mesh.h, alpha, f"{beta[0]:g},{beta[1]:g}")
    tasks = set(spec.tasks)
    if tasks - {"convergence"}:
        dofmap = build_dofmap(mesh, p)
        system = assemble(mesh, dofmap, DGConfig(spec.method, alpha, beta))
        prec = build_preconditioner(system)
        A = system.A
        if "condition-numbers" in tasks:
            row.K_A = extreme_eigs(A, tol=spec.eig_tol, seed=spec.seed).condition_number
            row.K_TDG = condition_number_2norm(A, prec, tol=spec.eig_tol, seed=spec.seed)
            row.K_TDG_spectral = lanczos_extreme(A, prec, tol=spec.eig_tol, seed=spec.seed).condition_number
        if "iterations" in tasks:
            b = random_solution_rhs(A, spec.seed) if spec.rhs == "random-solution" else system.rhs
            _, cg = pcg(A, b, rel_tol=spec.rel_tol)
            _, pc = pcg(A, b, prec, rel_tol=spec.rel_tol)
            if not (cg.converged and pc.converged):
                raise ArithmeticError("CG or PCG did not converge")
            row.cg_iters, row.pcg_iters = cg.iterations, pc.iterations
        if "constants" in tasks:
            c = estimate_constants(system, prec, tol=spec.eig_tol, seed=spec.seed)
            row.c1_jacobi, row.c2_jacobi_kerQ, row.c2_jacobi_full_VB = c.c1_jacobi, c.c2_jacobi_kerQ, c.c2_jacobi_full_VB
            row.c1_schwarz, row.c2_schwarz = c.c1_schwarz, c.c2_schwarz
    if "convergence" in tasks:
        study = convergence_study(spec.method, p, (4, 8, 16), alpha=alpha, beta=beta)
        row.h1_rate = study.rates[-1]
    row.wall_time_seconds = time.perf_counter() - t0
    return row


def run(spec: ExperimentSpec, on_row: Callable[[ResultRow], None] | None = None) -> list[ResultRow]:
    """All (p, alpha) cases in order; a failing case yields a row with ``error`` set.

    ``on_row`` receives each row as soon as it is done so partial sweeps are usable.
    """
    rows = []
    for p, alpha in spec.cases():
        try:
            row = run_case(spec, p, alpha)
        except Exception as exc:  # noqa: BLE001 - one bad case must not sink the sweep
            failure = CaseFailure(p, alpha, exc)
            log.error("%s", failure)
            beta = spec.effective_beta
            row = ResultRow(spec.method, p, spec.n, (spec.domain[1] - spec.domain[0]) / spec.n, alpha,
                            f"{beta[0]:g},{beta[1]:g}", error=str(failure))
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows


# -- manufactured solution ---------------------------------------------------


def _exact(x, y):
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def _exact_grad(x, y):
    return (np.pi * np.cos(np.pi * x) * np.sin(np.pi * y), np.pi * np.sin(np.pi * x) * np.cos(np.pi * y))


def _forcing(x, y):
    return 2.0 * np.pi**2 * _exact(x, y)


def broken_h1_error(u, mesh, dofmap, grad_exact=_exact_grad, extra_points: int = 3) -> float:
    """``(sum_K |u - u_h|_{H1(K)}^2)^{1/2}`` with an over-integrating Gauss rule."""
    p = dofmap.p
    g = gauss_rule(p + 1 + extra_points)
    vals, ders = lagrange_basis(p).eval(g.nodes)
    s = 2.0 / mesh.h
    Gx = s * np.kron(vals, ders)  # point = qy * nq + qx, loc = j * (p+1) + i
    Gy = s * np.kron(ders, vals)
    U = np.asarray(u)[dofmap.element_dofs]  # (ne, nloc)
    X, Y = np.meshgrid(g.nodes, g.nodes)
    ref_pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    e = np.arange(mesh.num_elements)
    phys = mesh.element_map(e[:, None], ref_pts[None])
    ex, ey = grad_exact(phys[..., 0], phys[..., 1])
    w = np.kron(g.weights, g.weights) * mesh.jacobian
    err = (U @ Gx.T - ex) ** 2 + (U @ Gy.T - ey) ** 2
    return float(np.sqrt(np.sum(err * w)))


@dataclass
class ConvergenceTable:
    method: str
    p: int
    n: list[int]
    errors: list[float]
    rates: list[float] = field(default_factory=list)


def convergence_study(method: str, p: int, n_list: Iterable[int] = (4, 8, 16), alpha: float = 10.0,
                      beta=None) -> ConvergenceTable:
    """Broken H1 errors for ``u = sin(pi x) sin(pi y)`` on (-1, 1)^2 and observed rates."""
    n_list = list(n_list)
    if beta is None:
        beta = (1.0, 1.0) if method.lower() == "ldg" else (0.0, 0.0)
    errors = []
    for n in n_list:
        mesh = build_mesh(n)
        dofmap = build_dofmap(mesh, p)
        system = assemble(mesh, dofmap, DGConfig(method, alpha, beta), f=_forcing)
        u = sla.spsolve(system.A.tocsc(), system.rhs)
        errors.append(broken_h1_error(u, mesh, dofmap))
    rates = [math.log(errors[i] / errors[i + 1]) / math.log(n_list[i + 1] / n_list[i])
             for i in range(len(errors) - 1)]
    return ConvergenceTable(method, p, n_list, errors, rates)
