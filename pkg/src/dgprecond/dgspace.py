"""DG degrees of freedom on tensor GLL nodes and the conforming/nonconforming splitting.

A DG dof is ``e * (p+1)**2 + j * (p+1) + i`` for element ``e`` and local GLL
indices ``i`` (x) and ``j`` (y). Coincident dofs are found through integer
lattice indices ``I = col * p + i``, ``J = row * p + j``; no coordinates are
compared.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .gll import GllRule, gll_rule, lagrange_basis
from .mesh import DomainError, Mesh


@dataclass(frozen=True, eq=False)
class DofMap:
    mesh: Mesh
    p: int
    rule: GllRule

    @property
    def n(self) -> int:
        return self.mesh.n

    @property
    def nloc(self) -> int:
        return (self.p + 1) ** 2

    @property
    def total_dofs(self) -> int:
        return self.mesh.num_elements * self.nloc

    @property
    def lattice_size(self) -> int:
        """Geometric nodes per direction, ``n * p + 1``."""
        return self.n * self.p + 1

    @cached_property
    def element_dofs(self) -> np.ndarray:
        """``(num_elements, nloc)`` global dof ids."""
        return np.arange(self.total_dofs).reshape(self.mesh.num_elements, self.nloc)

    @cached_property
    def lattice(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer lattice indices ``(I, J)`` of every dof."""
        p, n = self.p, self.n
        e, loc = np.divmod(np.arange(self.total_dofs), self.nloc)
        r, c = np.divmod(e, n)
        j, i = np.divmod(loc, p + 1)
        return c * p + i, r * p + j

    @cached_property
    def geom_node(self) -> np.ndarray:
        I, J = self.lattice
        return J * self.lattice_size + I

    @cached_property
    def local_interior_mask(self) -> np.ndarray:
        """Per local index: True for element-interior GLL nodes."""
        k = np.arange(self.p + 1)
        inner = (k > 0) & (k < self.p)
        return np.outer(inner, inner).ravel()

    @cached_property
    def is_interior_dof(self) -> np.ndarray:
        return np.tile(self.local_interior_mask, self.mesh.num_elements)

    @cached_property
    def on_domain_boundary(self) -> np.ndarray:
        I, J = self.lattice
        m = self.lattice_size - 1
        return (I == 0) | (I == m) | (J == 0) | (J == m)

    @cached_property
    def multiplicity(self) -> np.ndarray:
        """Number of coincident DG dofs, per dof (1, 2 or 4)."""
        cnt = np.bincount(self.geom_node, minlength=self.lattice_size**2)
        return cnt[self.geom_node]

    @cached_property
    def coords(self) -> np.ndarray:
        """Physical coordinates of every dof, ``(total_dofs, 2)``."""
        I, J = self.lattice
        t = self.rule.nodes
        p, h, a = self.p, self.mesh.h, self.mesh.a
        x = a + h * (I // p) + 0.5 * h * (t[I % p] + 1.0)
        y = a + h * (J // p) + 0.5 * h * (t[J % p] + 1.0)
        # nodes at the high end of a lattice cell (i == p) wrap to the next cell
        x = np.where(I % p == 0, a + h * (I // p), x)
        y = np.where(J % p == 0, a + h * (J // p), y)
        return np.stack([x, y], axis=1)

    # conforming subspace ---------------------------------------------------

    @property
    def conforming_dim(self) -> int:
        return (self.n * self.p - 1) ** 2

    @cached_property
    def conforming_id(self) -> np.ndarray:
        """Conforming coefficient index per DG dof, -1 on the domain boundary."""
        I, J = self.lattice
        cid = (J - 1) * (self.lattice_size - 2) + (I - 1)
        return np.where(self.on_domain_boundary, -1, cid)

    @cached_property
    def embedding(self) -> sp.csr_matrix:
        """``E``: conforming coefficients -> DG coefficients (0/1 scatter)."""
        cid = self.conforming_id
        rows = np.flatnonzero(cid >= 0)
        return sp.csr_matrix(
            (np.ones(rows.size), (rows, cid[rows])),
            shape=(self.total_dofs, self.conforming_dim),
        )

    @cached_property
    def conforming_lattice(self) -> tuple[np.ndarray, np.ndarray]:
        m = self.lattice_size - 2
        J, I = np.divmod(np.arange(self.conforming_dim), m)
        return I + 1, J + 1


def build_dofmap(mesh: Mesh, p: int) -> DofMap:
    if p < 2:
        raise ValueError(f"polynomial degree must be >= 2, got {p}")
    return DofMap(mesh, int(p), gll_rule(int(p)))


def oswald(v, dofmap: DofMap) -> np.ndarray:
    """Nodal averaging onto the conforming space with zero boundary values."""
    v = np.asarray(v, dtype=float)
    if v.shape != (dofmap.total_dofs,):
        raise ValueError(f"expected {dofmap.total_dofs} coefficients, got shape {v.shape}")
    g = dofmap.geom_node
    nn = dofmap.lattice_size**2
    avg = np.bincount(g, weights=v, minlength=nn) / np.maximum(np.bincount(g, minlength=nn), 1)
    out = avg[g]
    out[dofmap.on_domain_boundary] = 0.0
    return out


def oswald_matrix(dofmap: DofMap) -> sp.csr_matrix:
    """``Q_h`` as a sparse matrix, ``E diag(1/mult) E^T``."""
    E = dofmap.embedding
    mult = np.asarray(E.sum(axis=0)).ravel()
    return (E @ sp.diags(1.0 / mult) @ E.T).tocsr()


def kerQ_basis(dofmap: DofMap) -> sp.csr_matrix:
    """Sparse basis ``Z_W`` of ``ker(Q_h)``.

    Consecutive differences ``e_a - e_b`` over the coincident dofs of each
    interior geometric node, plus every unit vector at boundary nodes.
    """
    g = dofmap.geom_node
    order = np.lexsort((np.arange(g.size), g))
    gs = g[order]
    bnd = dofmap.on_domain_boundary[order]
    same_next = np.r_[gs[1:] == gs[:-1], False]
    # interior pairs: consecutive coincident dofs
    pair = same_next & ~bnd
    a = order[np.flatnonzero(pair)]
    b = order[np.flatnonzero(pair) + 1]
    units = order[bnd]
    ncol_pairs = a.size
    rows = np.concatenate([a, b, units])
    cols = np.concatenate([np.arange(ncol_pairs), np.arange(ncol_pairs), ncol_pairs + np.arange(units.size)])
    vals = np.concatenate([np.ones(ncol_pairs), -np.ones(ncol_pairs), np.ones(units.size)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(dofmap.total_dofs, ncol_pairs + units.size))


def vb_dofs(dofmap: DofMap) -> np.ndarray:
    """DG dofs located at element-boundary GLL nodes."""
    return np.flatnonzero(~dofmap.is_interior_dof)


def _hat_1d(t: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(t))


def conforming_unit_coords(dofmap: DofMap) -> tuple[np.ndarray, np.ndarray]:
    """Conforming node positions in element units (vertex ``k`` sits at ``k``)."""
    I, J = dofmap.conforming_lattice
    t = 0.5 * (dofmap.rule.nodes + 1.0)
    p = dofmap.p
    return I // p + t[I % p], J // p + t[J % p]


def coarse_embedding(mesh: Mesh, dofmap: DofMap) -> sp.csr_matrix:
    """``R0^T``: bilinear hats of interior vertices -> conforming coefficients.

    Column ``j`` holds the GLL nodal values of the hat of
    ``mesh.interior_vertices[j]``; exact because Q1 is contained in Q^p.
    """
    X, Y = conforming_unit_coords(dofmap)
    p = dofmap.p
    I, J = dofmap.conforming_lattice
    rows, cols, vals = [], [], []
    for j, v in enumerate(mesh.interior_vertices):
        r, c = divmod(int(v), mesh.n + 1)
        sel = np.flatnonzero(
            (I > (c - 1) * p) & (I < (c + 1) * p) & (J > (r - 1) * p) & (J < (r + 1) * p)
        )
        val = _hat_1d(X[sel] - c) * _hat_1d(Y[sel] - r)
        keep = val != 0.0
        rows.append(sel[keep])
        cols.append(np.full(keep.sum(), j))
        vals.append(val[keep])
    nv = mesh.interior_vertices.size
    if nv == 0:
        return sp.csr_matrix((dofmap.conforming_dim, 0))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dofmap.conforming_dim, nv),
    )


def patch_restriction(mesh: Mesh, dofmap: DofMap, vertex_id: int) -> np.ndarray:
    """Conforming dofs strictly inside the vertex patch of ``vertex_id``."""
    if not mesh.is_interior_vertex(vertex_id):
        raise DomainError(f"vertex {vertex_id} is not an interior vertex")
    r, c = divmod(int(vertex_id), mesh.n + 1)
    p = dofmap.p
    m = dofmap.lattice_size - 2
    k = np.arange(2 * p - 1)
    Jc, Ic = np.meshgrid((r - 1) * p + 1 + k, (c - 1) * p + 1 + k, indexing="ij")
    return ((Jc - 1) * m + (Ic - 1)).ravel()


def patch_indices(mesh: Mesh, dofmap: DofMap) -> np.ndarray:
    """``(num_interior_vertices, (2p-1)^2)`` patch index table."""
    if mesh.interior_vertices.size == 0:
        return np.zeros((0, (2 * dofmap.p - 1) ** 2), dtype=int)
    return np.stack([patch_restriction(mesh, dofmap, v) for v in mesh.interior_vertices])


def partition_of_unity(mesh: Mesh, vertex_id: int) -> np.ndarray:
    """Vertex values of the Q1 partition-of-unity function of a vertex patch.

    The central vertex gets 1; a vertex on the patch boundary gets 1 when every
    patch-boundary face through it is a boundary face of the mesh, else 0.
    """
    if not mesh.is_interior_vertex(vertex_id):
        raise DomainError(f"vertex {vertex_id} is not an interior vertex")
    n = mesh.n
    r, c = divmod(int(vertex_id), n + 1)
    theta = np.zeros((n + 1) ** 2)
    theta[vertex_id] = 1.0
    # patch boundary: segments of the square [c-1, c+1] x [r-1, r+1]
    segments = []
    for k in (c - 1, c):
        segments.append(((r - 1, k), (r - 1, k + 1)))
        segments.append(((r + 1, k), (r + 1, k + 1)))
    for k in (r - 1, r):
        segments.append(((k, c - 1), (k + 1, c - 1)))
        segments.append(((k, c + 1), (k + 1, c + 1)))

    def on_boundary(seg):
        (r0, c0), (r1, c1) = seg
        if r0 == r1:
            return r0 in (0, n)
        return c0 in (0, n)

    for rr in range(r - 1, r + 2):
        for cc in range(c - 1, c + 2):
            if (rr, cc) == (r, c):
                continue
            through = [s for s in segments if (rr, cc) in s]
            if through and all(on_boundary(s) for s in through):
                theta[rr * (n + 1) + cc] = 1.0
    return theta


def q1_values_at_dofs(theta: np.ndarray, dofmap: DofMap) -> np.ndarray:
    """Evaluate a continuous Q1 function (vertex values) at every DG dof."""
    mesh = dofmap.mesh
    n = mesh.n
    e = np.arange(dofmap.total_dofs) // dofmap.nloc
    r, c = np.divmod(e, n)
    I, J = dofmap.lattice
    t = 0.5 * (dofmap.rule.nodes + 1.0)
    p = dofmap.p
    s = t[I - c * p]
    u = t[J - r * p]
    T = theta.reshape(n + 1, n + 1)
    return (
        T[r, c] * (1 - s) * (1 - u)
        + T[r, c + 1] * s * (1 - u)
        + T[r + 1, c] * (1 - s) * u
        + T[r + 1, c + 1] * s * u
    )


def interpolate_Ip(values, dofmap: DofMap, atol: float = 1e-12) -> np.ndarray:
    """GLL interpolant of nodal DG values, returned as conforming coefficients.

    ``values`` are the values of a continuous function at every DG dof; the
    result is single-valued by construction, and a ``ValueError`` flags input
    that is not (to ``atol``) or is nonzero on the domain boundary.
    """
    values = np.asarray(values, dtype=float)
    g = dofmap.geom_node
    nn = dofmap.lattice_size**2
    lo = np.full(nn, np.inf)
    hi = np.full(nn, -np.inf)
    np.minimum.at(lo, g, values)
    np.maximum.at(hi, g, values)
    seen = np.isfinite(lo)
    if np.any(hi[seen] - lo[seen] > atol):
        raise ValueError("nodal values are not single-valued at shared nodes")
    if np.any(np.abs(values[dofmap.on_domain_boundary]) > atol):
        raise ValueError("nodal values do not vanish on the domain boundary")
    out = np.zeros(dofmap.conforming_dim)
    cid = dofmap.conforming_id
    keep = cid >= 0
    out[cid[keep]] = values[keep]
    return out


def reference_h1_interpolation_constant(p: int) -> float:
    """Exact ``sup |I_p u|_{H1} / |u|_{H1}`` over ``u`` in Q^{p+1}(reference square).

    Computed as a generalized eigenvalue problem with the GLL basis of degree
    ``p + 1`` as trial space; both seminorms integrate exactly with ``p + 2``
    Gauss points.
    """
    from scipy.linalg import eigh

    from .gll import gauss_rule

    hi = lagrange_basis(p + 1)
    lo = lagrange_basis(p)
    g = gauss_rule(p + 2)
    # interpolation of the degree p+1 basis at the degree-p GLL nodes
    P = hi.eval(lo.rule.nodes)[0]  # (p+1, p+2)
    vh, dh = hi.eval(g.nodes)
    vl, dl = lo.eval(g.nodes)
    W = np.diag(g.weights)
    Mh, Kh = vh.T @ W @ vh, dh.T @ W @ dh
    Ml, Kl = vl.T @ W @ vl, dl.T @ W @ dl
    S_hi = np.kron(Mh, Kh) + np.kron(Kh, Mh)
    S_lo = np.kron(Ml, Kl) + np.kron(Kl, Ml)
    P2 = np.kron(P, P)
    S_int = P2.T @ S_lo @ P2
    # constants lie in the kernel of both; remove them
    nh = S_hi.shape[0]
    ones = np.ones(nh) / np.sqrt(nh)
    Qc = np.linalg.qr(np.c_[ones, np.eye(nh)[:, : nh - 1]])[0][:, 1:]
    lam = eigh(Qc.T @ S_int @ Qc, Qc.T @ S_hi @ Qc, eigvals_only=True)
    return float(np.sqrt(lam.max()))
