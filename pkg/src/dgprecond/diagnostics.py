"""Measured constants of the norm equivalences behind the preconditioner analysis.

Everything here solves small generalized symmetric eigenproblems densely, so
the constants are exact suprema (not sampled lower bounds). Meant for meshes
with at most a few thousand dofs.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .assembly import AssembledSystem, ReferenceTables, block_diag_operator, face_kinds
from .dgspace import DofMap, oswald_matrix
from .mesh import Mesh


def _dense(M):
    return M.toarray() if sp.issparse(M) else np.asarray(M)


def pencil_extremes(A, B, rank_tol: float = 1e-10) -> tuple[float, float]:
    """Extreme eigenvalues of ``A x = lam B x`` on the range of ``B`` (``B`` SPSD).

    Directions in the null space of ``B`` are discarded, so ``A`` must vanish
    there for the supremum to be finite.
    """
    A, B = _dense(A), _dense(B)
    mu, U = la.eigh(B)
    keep = mu > rank_tol * mu.max()
    S = U[:, keep] / np.sqrt(mu[keep])
    lam = la.eigvalsh(S.T @ A @ S)
    return float(lam[0]), float(lam[-1])


def trace_constants(p: int, h: float = 1.0) -> tuple[float, float]:
    """Best constants of the element trace and inverse trace inequalities.

    Returns ``(C_trace, C_inv)`` with
    ``||v||_{dK}^2 <= C_trace (p^2/h) ||v||_K^2`` on Q^p and
    ``||v||_K^2 <= C_inv (h/p^2) ||v||_{dK}^2`` on functions vanishing at the
    element-interior GLL nodes.
    """
    ref = ReferenceTables(p, h)
    M = ref.mass
    B = np.zeros_like(M)
    for side in ("W", "E", "S", "N"):
        vals, _ = ref.side_tables(side)
        B += (vals.T * ref.face_weights) @ vals
    _, tr = pencil_extremes(B, M)
    k = np.arange(p + 1)
    I, J = np.meshgrid(k, k)
    bnd = ((I == 0) | (I == p) | (J == 0) | (J == p)).ravel()
    _, inv = pencil_extremes(M[np.ix_(bnd, bnd)], B[np.ix_(bnd, bnd)])
    return tr * h / p**2, inv * p**2 / h


def _faces_touching(mesh: Mesh, e: int) -> set[int]:
    r, c = divmod(int(e), mesh.n)
    out = set()
    for f in mesh.faces:
        lo, hi = (c, r) if f.axis == 0 else (r, c)
        if f.line in (lo, lo + 1) and abs(f.cell - hi) <= 1:
            out.add(f.id)
    return out


def averaging_constant(system: AssembledSystem, elements=None) -> float:
    """``max_K sup_v ||v - Q_h v||_K^2 / ((h/p^2) sum_{F meets K} ||[v]||_F^2)``."""
    mesh, dofmap = system.mesh, system.dofmap
    p, h = dofmap.p, mesh.h
    ref = ReferenceTables(p, h)
    N = dofmap.total_dofs
    IQ = sp.identity(N, format="csr") - oswald_matrix(dofmap)
    # per-face jump forms
    face_forms = {}
    for fk in face_kinds(mesh, dofmap, ref):
        JW = (fk.jump.T * ref.face_weights) @ fk.jump
        for cols, els in zip(fk.dofs, fk.elements):
            fid = _face_id(mesh, fk, els)
            face_forms[fid] = (cols, JW)
    elements = range(mesh.num_elements) if elements is None else elements
    worst = 0.0
    for e in elements:
        Dr, Dc, Dv = [], [], []
        for fid in _faces_touching(mesh, e):
            cols, JW = face_forms[fid]
            Dr.append(np.repeat(cols, cols.size))
            Dc.append(np.tile(cols, cols.size))
            Dv.append(JW.ravel())
        D = sp.csr_matrix((np.concatenate(Dv), (np.concatenate(Dr), np.concatenate(Dc))), shape=(N, N))
        D = (h / p**2) * D
        rows = dofmap.element_dofs[e]
        Me = sp.csr_matrix((ref.mass.ravel(), (np.repeat(rows, rows.size), np.tile(rows, rows.size))), shape=(N, N))
        Num = IQ.T @ Me @ IQ
        # restrict to the dofs either form touches
        act = np.unique(np.concatenate([D.nonzero()[0], Num.nonzero()[0]]))
        _, lam = pencil_extremes(Num[np.ix_(act, act)], D[np.ix_(act, act)])
        worst = max(worst, lam)
    return worst


def _face_id(mesh: Mesh, fk, els) -> int:
    """Recover the face id from a face kind and its adjacent elements."""
    n = mesh.n
    e = int(els[0])
    r, c = divmod(e, n)
    nx = (n + 1) * n
    side = fk.sides[0]
    if side == "W":
        return c * n + r
    if side == "E":
        return (c + 1) * n + r
    if side == "S":
        return nx + r * n + c
    return nx + (r + 1) * n + c


def spectral_bounds(system: AssembledSystem) -> tuple[float, float]:
    """``(C1, C2)`` with ``||v||^2 <= C1 A(v, v)`` and ``A(v, v) <= C2 (alpha p^4/h^2) ||v||^2``."""
    mesh, dofmap = system.mesh, system.dofmap
    p, h = dofmap.p, mesh.h
    M = block_diag_operator(mesh, dofmap, ReferenceTables(p, h).mass)
    lo, hi = la.eigh(_dense(system.A), _dense(M), eigvals_only=True)[[0, -1]]
    return 1.0 / lo, hi * h**2 / (system.config.alpha * p**4)


def dg_norm_equivalence(system: AssembledSystem) -> tuple[float, float]:
    """Extreme values of ``A(v, v) / (|v|_{1,h}^2 + sigma ||[v]||^2)``."""
    lam = la.eigh(_dense(system.A), _dense(system.A_tilde), eigvals_only=True)
    return float(lam[0]), float(lam[-1])


def stability_constant(system: AssembledSystem) -> float:
    """``sup_v [A(v - Q_h v, v - Q_h v) + A(Q_h v, Q_h v)] / A(v, v)``."""
    A = _dense(system.A)
    Q = oswald_matrix(system.dofmap).toarray()
    IQ = np.eye(A.shape[0]) - Q
    S = IQ.T @ A @ IQ + Q.T @ A @ Q
    return float(la.eigh(S, A, eigvals_only=True)[-1])


def relative_slope(ps, values) -> float:
    """Least-squares slope of ``values / mean(values)`` against ``ps``."""
    v = np.asarray(values, dtype=float)
    return float(np.polyfit(np.asarray(ps, dtype=float), v / v.mean(), 1)[0])
