"""SIPG / LDG stiffness assembly on uniform Cartesian meshes.

All integrals use tensor Gauss rules with ``p + 1`` points per direction, so
every matrix entry is exact up to roundoff. Since the mesh is uniform, the
element and face matrices are computed once per face/element kind and
scattered with index tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.io
import scipy.sparse as sp

from .dgspace import DofMap
from .gll import gauss_rule, lagrange_basis
from .mesh import Face, Mesh, element_faces

SIDES = ("W", "E", "S", "N")
# outward normal of each element side
SIDE_NORMAL = {"W": (-1.0, 0.0), "E": (1.0, 0.0), "S": (0.0, -1.0), "N": (0.0, 1.0)}


@dataclass(frozen=True)
class DGConfig:
    method: str = "sipg"
    alpha: float = 10.0
    beta: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        m = self.method.lower()
        if m not in ("sipg", "ldg"):
            raise ValueError(f"unknown DG method {self.method!r}")
        object.__setattr__(self, "method", m)
        if not self.alpha >= 1.0:
            raise ValueError(f"penalty scaling alpha must be >= 1, got {self.alpha}")
        beta = tuple(float(b) for b in self.beta)
        if len(beta) != 2:
            raise ValueError("beta must have two components")
        if m == "sipg":
            beta = (0.0, 0.0)
        object.__setattr__(self, "beta", beta)

    @property
    def theta(self) -> float:
        return 1.0 if self.method == "ldg" else 0.0

    def sigma(self, p: int, h: float) -> float:
        return self.alpha * p**2 / h

    def epsilon(self, p: int, h: float) -> float:
        return h / (self.alpha * p**2)


class ReferenceTables:
    """1D and face tables on the reference square for degree ``p``."""

    def __init__(self, p: int, h: float):
        self.p, self.h = p, h
        self.basis = lagrange_basis(p)
        self.gauss = gauss_rule(p + 1)
        self.vg, self.dg = self.basis.eval(self.gauss.nodes)
        W = np.diag(self.gauss.weights)
        self.M1 = self.vg.T @ W @ self.vg
        self.K1 = self.dg.T @ W @ self.dg
        self.D1 = self.basis.derivative_matrix()
        self.end_vals, self.end_ders = self.basis.eval([-1.0, 1.0])

    @property
    def nloc(self) -> int:
        return (self.p + 1) ** 2

    @cached_property
    def mass(self) -> np.ndarray:
        return (0.5 * self.h) ** 2 * np.kron(self.M1, self.M1)

    @cached_property
    def mass_inv(self) -> np.ndarray:
        return np.linalg.inv(self.mass)

    @cached_property
    def stiffness(self) -> np.ndarray:
        # Jacobian (h/2)^2 cancels the two derivative scalings (2/h)
        return np.kron(self.M1, self.K1) + np.kron(self.K1, self.M1)

    @cached_property
    def face_weights(self) -> np.ndarray:
        return 0.5 * self.h * self.gauss.weights

    def derivative(self, d: int) -> np.ndarray:
        """Nodal differentiation on one element, physical scaling included."""
        eye = np.eye(self.p + 1)
        D = np.kron(eye, self.D1) if d == 0 else np.kron(self.D1, eye)
        return (2.0 / self.h) * D

    def side_tables(self, side: str) -> tuple[np.ndarray, np.ndarray]:
        """Trace values and physical gradient on an element side.

        Returns ``(vals, grad)`` with shapes ``(nq, nloc)`` and ``(nq, nloc, 2)``;
        face points are ordered by the Gauss nodes of the tangential coordinate.
        """
        k = 0 if side in ("W", "S") else 1
        ev, ed = self.end_vals[k], self.end_ders[k]
        s = 2.0 / self.h
        if side in ("W", "E"):
            # x fixed, y runs over gauss points; loc = j*(p+1) + i
            vals = np.einsum("qj,i->qji", self.vg, ev)
            gx = s * np.einsum("qj,i->qji", self.vg, ed)
            gy = s * np.einsum("qj,i->qji", self.dg, ev)
        else:
            vals = np.einsum("j,qi->qji", ev, self.vg)
            gx = s * np.einsum("j,qi->qji", ev, self.dg)
            gy = s * np.einsum("j,qi->qji", ed, self.vg)
        nq = self.gauss.q
        grad = np.stack([gx.reshape(nq, -1), gy.reshape(nq, -1)], axis=-1)
        return vals.reshape(nq, -1), grad


@dataclass
class FaceKind:
    """Dense data shared by all faces of one kind (orientation + interior/boundary)."""

    name: str
    normal: np.ndarray
    sides: tuple[str, ...]  # element sides touching the face: (plus[, minus])
    jump: np.ndarray  # (nq, ncols): scalar jump along the face normal
    gavg: np.ndarray  # (nq, ncols): {grad u} . n_F
    gjump: np.ndarray | None  # (nq, ncols): [grad u], interior only
    traces: tuple[np.ndarray, ...]  # per side, (nq, nloc)
    dofs: np.ndarray = field(repr=False)  # (nfaces, ncols) global columns
    elements: np.ndarray = field(repr=False)  # (nfaces, nsides)


def face_kinds(mesh: Mesh, dofmap: DofMap, ref: ReferenceTables) -> list[FaceKind]:
    n = mesh.n
    fl = mesh.faces
    ed = dofmap.element_dofs
    tab = {s: ref.side_tables(s) for s in SIDES}
    kinds = []

    def interior(name, axis, plus_side, minus_side):
        sel = [f for f in fl if f.axis == axis and not f.is_boundary]
        if not sel:
            return
        nF = np.zeros(2)
        nF[axis] = 1.0
        vp, gp = tab[plus_side]
        vm, gm = tab[minus_side]
        gnp, gnm = gp @ nF, gm @ nF
        els = np.array([[f.plus, f.minus] for f in sel])
        kinds.append(
            FaceKind(
                name,
                nF,
                (plus_side, minus_side),
                jump=np.hstack([vp, -vm]),
                gavg=0.5 * np.hstack([gnp, gnm]),
                gjump=np.hstack([gnp, -gnm]),
                traces=(vp, vm),
                dofs=np.hstack([ed[els[:, 0]], ed[els[:, 1]]]),
                elements=els,
            )
        )

    interior("x-interior", 0, "E", "W")
    interior("y-interior", 1, "N", "S")
    for side, axis, line in (("W", 0, 0), ("E", 0, n), ("S", 1, 0), ("N", 1, n)):
        sel = [f for f in fl if f.axis == axis and f.line == line]
        nF = np.array(SIDE_NORMAL[side])
        v, g = tab[side]
        els = np.array([[f.plus] for f in sel])
        kinds.append(
            FaceKind(
                f"boundary-{side}",
                nF,
                (side,),
                jump=v,
                gavg=g @ nF,
                gjump=None,
                traces=(v,),
                dofs=ed[els[:, 0]],
                elements=els,
            )
        )
    return kinds


def _scatter(local: np.ndarray, rows: np.ndarray, cols: np.ndarray):
    """COO triplets of a dense local block repeated over index tables."""
    nzr, nzc = np.nonzero(local)
    vals = np.tile(local[nzr, nzc], rows.shape[0])
    r = rows[:, nzr].ravel()
    c = cols[:, nzc].ravel()
    return r, c, vals


class _Coo:
    def __init__(self, shape):
        self.shape = shape
        self.r, self.c, self.v = [], [], []

    def add(self, local, rows, cols=None):
        cols = rows if cols is None else cols
        r, c, v = _scatter(local, rows, cols)
        self.r.append(r.astype(np.int64))
        self.c.append(c.astype(np.int64))
        self.v.append(v)

    def tocsr(self) -> sp.csr_matrix:
        if not self.r:
            return sp.csr_matrix(self.shape)
        m = sp.coo_matrix(
            (np.concatenate(self.v), (np.concatenate(self.r), np.concatenate(self.c))),
            shape=self.shape,
        ).tocsr()
        m.sum_duplicates()
        return m


@dataclass(eq=False)
class AssembledSystem:
    A: sp.csr_matrix
    rhs: np.ndarray
    A_grad: sp.csr_matrix
    A_jump: sp.csr_matrix
    config: DGConfig
    mesh: Mesh
    dofmap: DofMap

    @property
    def sigma(self) -> float:
        return self.config.sigma(self.dofmap.p, self.mesh.h)

    @property
    def A_tilde(self) -> sp.csr_matrix:
        return (self.A_grad + self.sigma * self.A_jump).tocsr()


def lifting_operators(
    mesh: Mesh, dofmap: DofMap, beta=(0.0, 0.0), ref: ReferenceTables | None = None
) -> list[sp.csr_matrix]:
    """Sparse ``R_d`` (one per component) with ``(R_d u)[dof k of kappa] = int_kappa G_d(u) phi_k``.

    ``G(u) = R([u]) + L(beta . [u])`` is the total lifting; its coefficients on
    each element are ``M_kappa^{-1}`` applied to the corresponding block.
    """
    ref = ref or ReferenceTables(dofmap.p, mesh.h)
    beta = np.asarray(beta, dtype=float)
    N = dofmap.total_dofs
    ed = dofmap.element_dofs
    W = ref.face_weights
    out = []
    kinds = face_kinds(mesh, dofmap, ref)
    for d in range(2):
        coo = _Coo((N, N))
        for fk in kinds:
            inner = fk.gjump is not None
            bn = float(beta @ fk.normal) if inner else 0.0
            for s, side in enumerate(fk.sides):
                n_out = np.array(SIDE_NORMAL[side])
                c = (0.5 if inner else 1.0) * fk.normal[d] + bn * n_out[d]
                if c == 0.0:
                    continue
                local = -c * fk.traces[s].T @ (W[:, None] * fk.jump)
                coo.add(local, ed[fk.elements[:, s]], fk.dofs)
        out.append(coo.tocsr())
    return out


def block_diag_operator(mesh: Mesh, dofmap: DofMap, block: np.ndarray) -> sp.csr_matrix:
    return sp.kron(sp.identity(mesh.num_elements, format="csr"), sp.csr_matrix(block), format="csr")


def local_lifting(face: Face, mesh: Mesh, dofmap: DofMap, beta=(0.0, 0.0)) -> dict[int, np.ndarray]:
    """Lifting of the jump across one face, element by element.

    Returns ``{element: L}`` where ``L`` has shape ``(2, nloc, ncols)`` and maps
    the dofs of the face's elements (plus first, then minus) to the nodal
    coefficients of ``r_F([u]) + l_F(beta . [u])`` on that element.
    """
    ref = ReferenceTables(dofmap.p, mesh.h)
    beta = np.asarray(beta, dtype=float)
    tab = {s: ref.side_tables(s) for s in SIDES}
    W = ref.face_weights
    nF = np.array(face.normal, dtype=float)
    if face.is_boundary:
        side = _side_of(face, face.plus, mesh)
        sides, els = (side,), (face.plus,)
        jump = tab[side][0]
    else:
        plus_side, minus_side = ("E", "W") if face.axis == 0 else ("N", "S")
        sides, els = (plus_side, minus_side), (face.plus, face.minus)
        jump = np.hstack([tab[plus_side][0], -tab[minus_side][0]])
    out = {}
    for side, e in zip(sides, els):
        n_out = np.array(SIDE_NORMAL[side])
        blocks = []
        for d in range(2):
            if face.is_boundary:
                c = nF[d]
            else:
                c = 0.5 * nF[d] + float(beta @ nF) * n_out[d]
            rhs = -c * tab[side][0].T @ (W[:, None] * jump)
            blocks.append(ref.mass_inv @ rhs)
        out[e] = np.stack(blocks)
    return out


def _side_of(face: Face, e: int, mesh: Mesh) -> str:
    r, c = divmod(e, mesh.n)
    if face.axis == 0:
        return "W" if face.line == c else "E"
    return "S" if face.line == r else "N"


def assemble(
    mesh: Mesh,
    dofmap: DofMap,
    config: DGConfig,
    f: Callable[[np.ndarray, np.ndarray], np.ndarray] | float = 1.0,
) -> AssembledSystem:
    """Assemble the DG operator, right-hand side and the two split matrices."""
    if not isinstance(config, DGConfig):
        raise ValueError("config must be a DGConfig")
    p, h = dofmap.p, mesh.h
    ref = ReferenceTables(p, h)
    N = dofmap.total_dofs
    ed = dofmap.element_dofs
    sigma = config.sigma(p, h)
    beta = np.asarray(config.beta)
    W = ref.face_weights

    grad = _Coo((N, N))
    grad.add(ref.stiffness, ed)
    A_grad = grad.tocsr()

    jump = _Coo((N, N))
    face = _Coo((N, N))
    for fk in face_kinds(mesh, dofmap, ref):
        JW = fk.jump.T * W
        AJ = JW @ fk.jump
        jump.add(AJ, fk.dofs)
        loc = -JW @ fk.gavg
        loc = loc + loc.T + sigma * AJ
        if fk.gjump is not None:
            bn = float(beta @ fk.normal)
            if bn != 0.0:
                lb = -bn * JW @ fk.gjump
                loc = loc + lb + lb.T
        face.add(loc, fk.dofs)
    A_jump = jump.tocsr()
    A = (A_grad + face.tocsr()).tocsr()

    if config.theta != 0.0:
        Minv = block_diag_operator(mesh, dofmap, ref.mass_inv)
        for Rd in lifting_operators(mesh, dofmap, config.beta, ref):
            A = A + config.theta * (Rd.T @ (Minv @ Rd))
        A = A.tocsr()

    return AssembledSystem(A, load_vector(mesh, dofmap, f, ref), A_grad, A_jump, config, mesh, dofmap)


def assemble_with_liftings(mesh: Mesh, dofmap: DofMap, config: DGConfig) -> sp.csr_matrix:
    """Operator assembled entirely through materialized lifting operators.

    Independent second path used to cross-check :func:`assemble`: the
    consistency terms become ``sum_d (D_d^T R_d + R_d^T D_d)``.
    """
    p, h = dofmap.p, mesh.h
    ref = ReferenceTables(p, h)
    N = dofmap.total_dofs
    ed = dofmap.element_dofs
    A = _Coo((N, N))
    A.add(ref.stiffness, ed)
    sigma = config.sigma(p, h)
    for fk in face_kinds(mesh, dofmap, ref):
        A.add(sigma * (fk.jump.T * ref.face_weights) @ fk.jump, fk.dofs)
    A = A.tocsr()
    Rs = lifting_operators(mesh, dofmap, config.beta, ref)
    Minv = block_diag_operator(mesh, dofmap, ref.mass_inv)
    for d, Rd in enumerate(Rs):
        Dd = block_diag_operator(mesh, dofmap, ref.derivative(d))
        A = A + Dd.T @ Rd + Rd.T @ Dd
        if config.theta:
            A = A + config.theta * (Rd.T @ (Minv @ Rd))
    return A.tocsr()


def load_vector(mesh: Mesh, dofmap: DofMap, f, ref: ReferenceTables | None = None) -> np.ndarray:
    """``b_i = int f phi_i`` with the ``(p+1)``-point tensor Gauss rule."""
    ref = ref or ReferenceTables(dofmap.p, mesh.h)
    g = ref.gauss
    V = np.kron(ref.vg, ref.vg)  # (nq^2, nloc), point index = qy * nq + qx
    w = np.kron(g.weights, g.weights) * mesh.jacobian
    if callable(f):
        X, Y = np.meshgrid(g.nodes, g.nodes)
        ref_pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        e = np.arange(mesh.num_elements)
        phys = mesh.element_map(e[:, None], ref_pts[None, :, :])
        fv = np.asarray(f(phys[..., 0], phys[..., 1]), dtype=float)
        fv = np.broadcast_to(fv, phys.shape[:2])
    else:
        fv = np.full((mesh.num_elements, w.size), float(f))
    return ((fv * w) @ V).ravel()


def energy_norms(v, system: AssembledSystem, config: DGConfig | None = None) -> tuple[float, float]:
    """``(broken H1 seminorm^2, sum_F ||sigma^{1/2} [v]||_F^2)``."""
    config = config or system.config
    v = np.asarray(v, dtype=float)
    sigma = config.sigma(system.dofmap.p, system.mesh.h)
    return float(v @ (system.A_grad @ v)), float(sigma * (v @ (system.A_jump @ v)))


def export_matrix_market(system: AssembledSystem, path) -> None:
    """Write ``A`` to ``path`` and the right-hand side to ``path`` with ``_rhs`` appended to the stem."""
    import pathlib

    path = pathlib.Path(path)
    scipy.io.mmwrite(str(path), system.A, symmetry="general")
    rhs_path = path.with_name(path.stem + "_rhs" + path.suffix)
    scipy.io.mmwrite(str(rhs_path), system.rhs.reshape(-1, 1))
