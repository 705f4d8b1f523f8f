"""Additive preconditioner: Jacobi on the boundary-node space plus two-level Schwarz on the conforming space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .assembly import AssembledSystem
from .dgspace import DofMap, coarse_embedding, kerQ_basis, patch_indices, vb_dofs
from .mesh import Mesh

MODES = ("full", "jacobi", "schwarz")


class NotSPDError(np.linalg.LinAlgError):
    """The operator handed to the preconditioner is not symmetric positive definite."""


@dataclass(eq=False)
class JacobiB:
    dofs: np.ndarray
    inv_diag: np.ndarray
    size: int

    def apply(self, r: np.ndarray) -> np.ndarray:
        out = np.zeros(self.size)
        out[self.dofs] = self.inv_diag * r[self.dofs]
        return out


@dataclass(eq=False)
class SchwarzC:
    E: sp.csr_matrix
    A_C: sp.csr_matrix
    R0T: sp.csr_matrix
    coarse_factor: tuple = field(repr=False)
    patches: np.ndarray = field(repr=False)  # (npatch, m) conforming indices
    patch_inv: np.ndarray = field(repr=False)  # (npatch, m, m)

    @property
    def conforming_dim(self) -> int:
        return self.A_C.shape[0]

    def apply_conforming(self, rc: np.ndarray, coarse: bool = True, local: bool = True) -> np.ndarray:
        """``(R0^T A0^{-1} R0 + sum_i R_i^T A_i^{-1} R_i) rc``."""
        out = np.zeros(self.conforming_dim)
        if coarse and self.R0T.shape[1]:
            out += self.R0T @ la.cho_solve(self.coarse_factor, self.R0T.T @ rc)
        if local and self.patches.size:
            y = np.einsum("kij,kj->ki", self.patch_inv, rc[self.patches])
            # fixed order accumulation
            out += np.bincount(self.patches.ravel(), weights=y.ravel(), minlength=self.conforming_dim)
        return out

    def apply(self, r: np.ndarray) -> np.ndarray:
        return self.E @ self.apply_conforming(self.E.T @ r)


@dataclass(eq=False)
class Preconditioner:
    jacobi: JacobiB
    schwarz: SchwarzC
    mode: str = "full"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def size(self) -> int:
        return self.jacobi.size

    def apply(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if r.shape != (self.size,):
            raise ValueError(f"residual has shape {r.shape}, expected ({self.size},)")
        if self.mode == "jacobi":
            return self.jacobi.apply(r)
        if self.mode == "schwarz":
            return self.schwarz.apply(r)
        return self.jacobi.apply(r) + self.schwarz.apply(r)

    __call__ = apply

    def with_mode(self, mode: str) -> "Preconditioner":
        return Preconditioner(self.jacobi, self.schwarz, mode)

    def as_linear_operator(self) -> sla.LinearOperator:
        return sla.LinearOperator((self.size, self.size), matvec=self.apply, dtype=float)


def _check_spd_diag(d: np.ndarray):
    if np.any(d <= 0.0):
        raise NotSPDError(
            "non-positive diagonal entry: the DG operator is not SPD (penalty too small?)"
        )


def build_preconditioner(system: AssembledSystem, mesh: Mesh | None = None, dofmap: DofMap | None = None) -> Preconditioner:
    mesh = mesh or system.mesh
    dofmap = dofmap or system.dofmap
    A = system.A
    diag = A.diagonal()
    vb = vb_dofs(dofmap)
    _check_spd_diag(diag[vb])
    jac = JacobiB(vb, 1.0 / diag[vb], dofmap.total_dofs)

    E = dofmap.embedding
    A_C = (E.T @ A @ E).tocsr()
    R0T = coarse_embedding(mesh, dofmap)
    A0 = (R0T.T @ A_C @ R0T).toarray()
    try:
        coarse = la.cho_factor(A0) if A0.size else (np.zeros((0, 0)), False)
    except la.LinAlgError as exc:
        raise NotSPDError("coarse matrix is not SPD") from exc

    idx = patch_indices(mesh, dofmap)
    m = idx.shape[1]
    blocks = np.empty((idx.shape[0], m, m))
    for k, ii in enumerate(idx):
        blocks[k] = A_C[ii][:, ii].toarray()
    try:
        L = np.linalg.cholesky(blocks)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError("a patch matrix is not SPD") from exc
    # explicit inverses from the Cholesky factors: blocks are at most 121 x 121
    Linv = np.linalg.inv(L) if L.size else L
    inv = np.einsum("kji,kjl->kil", Linv, Linv)
    return Preconditioner(jac, SchwarzC(E, A_C, R0T, coarse, idx, inv))


@dataclass
class SubspaceForms:
    """Quadratic-form pair on a subspace with explicit basis.

    ``upper`` is the form ``A(T^{-1} v, v)`` when it is explicit (diagonal
    Jacobi form), ``A`` is the operator form and ``basis`` the subspace basis.
    For the conforming space, ``precond`` applies ``B_C`` in conforming
    coefficients instead.
    """

    which: str
    A: sp.spmatrix
    upper: sp.spmatrix | None = None
    precond: object = None
    basis: sp.spmatrix | None = None


def subspace_operator(prec: Preconditioner, system: AssembledSystem, which: str) -> SubspaceForms:
    """Forms whose generalized extreme eigenvalues are the subspace constants.

    ``which`` is ``"VB"``, ``"kerQ"`` or ``"VC"``.
    """
    A = system.A
    dofmap = system.dofmap
    if which == "VB":
        vb = prec.jacobi.dofs
        A_B = A[vb][:, vb].tocsr()
        return SubspaceForms("VB", A_B, sp.diags(A_B.diagonal()).tocsr(), basis=None)
    if which == "kerQ":
        Z = kerQ_basis(dofmap)
        D = sp.diags(A.diagonal() * (~dofmap.is_interior_dof))
        return SubspaceForms("kerQ", (Z.T @ A @ Z).tocsr(), (Z.T @ D @ Z).tocsr(), basis=Z)
    if which == "VC":
        return SubspaceForms("VC", prec.schwarz.A_C, precond=prec.schwarz.apply_conforming, basis=dofmap.embedding)
    raise ValueError(f"unknown subspace {which!r}")


def jacobi_form_direct(system: AssembledSystem, v: np.ndarray) -> float:
    """``A(T_B^{-1} v, v)`` for ``v`` in V_B via an explicit solve with ``T_B`` on V_B.

    ``T_B`` restricted to V_B has matrix ``D_B^{-1} A_B``; solving
    ``T_B w = v`` and forming ``w^T A_B v`` is independent of the diagonal
    identity it is checked against. Meant for small instances.
    """
    vb = vb_dofs(system.dofmap)
    A_B = system.A[vb][:, vb].toarray()
    vv = v[vb]
    T = A_B / np.diag(A_B)[:, None]
    w = np.linalg.solve(T, vv)
    return float(w @ A_B @ vv)
