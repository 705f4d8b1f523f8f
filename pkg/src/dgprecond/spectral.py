"""CG/PCG with Lanczos eigenvalue estimates, extreme eigenvalues and subspace constants."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .precond import Preconditioner, subspace_operator

log = logging.getLogger(__name__)

DEFAULT_SEED = 42


class BreakdownError(ArithmeticError):
    """Non-positive curvature met in CG/Lanczos: an operator is not SPD."""


def _as_apply(op):
    if op is None:
        return None
    if callable(op) and not hasattr(op, "shape"):
        return op
    return lambda x: op @ x


@dataclass
class SolveReport:
    iterations: int
    residuals: list[float]
    converged: bool
    eig_min: float = float("nan")
    eig_max: float = float("nan")

    @property
    def condition_number(self) -> float:
        return self.eig_max / self.eig_min


def cg_tridiagonal(alphas, betas) -> np.ndarray:
    """Lanczos matrix recovered from CG step lengths and direction updates."""
    k = len(alphas)
    T = np.zeros((k, k))
    for j in range(k):
        T[j, j] = 1.0 / alphas[j] + (betas[j - 1] / alphas[j - 1] if j > 0 else 0.0)
        if j + 1 < k:
            T[j, j + 1] = T[j + 1, j] = np.sqrt(betas[j]) / alphas[j]
    return T


def pcg(A, b, B=None, rel_tol: float = 1e-8, max_iter: int | None = None, callback=None):
    """Preconditioned CG from a zero initial guess.

    Stops when ``||r_k|| / ||r_0|| <= rel_tol`` (Euclidean norms). ``B`` is the
    preconditioner (matrix, callable or None for plain CG). Returns
    ``(x, SolveReport)``; the report carries the extreme Ritz values of ``B A``
    from the CG coefficients.
    """
    Aop = _as_apply(A)
    Bop = _as_apply(B) or (lambda r: r.copy())
    b = np.asarray(b, dtype=float)
    n = b.size
    max_iter = 10 * n if max_iter is None else max_iter
    x = np.zeros(n)
    r = b.copy()
    r0 = np.linalg.norm(r)
    hist = [1.0]
    if r0 == 0.0:
        return x, SolveReport(0, hist, True, 1.0, 1.0)
    z = Bop(r)
    d = z.copy()
    rz = r @ z
    alphas, betas = [], []
    converged = False
    k = 0
    while k < max_iter:
        Ad = Aop(d)
        curv = d @ Ad
        if not curv > 0.0 or not rz > 0.0:
            raise BreakdownError(f"non-positive curvature at iteration {k}")
        alpha = rz / curv
        x += alpha * d
        r -= alpha * Ad
        k += 1
        alphas.append(alpha)
        hist.append(np.linalg.norm(r) / r0)
        if callback is not None:
            callback(x, d)
        if hist[-1] <= rel_tol:
            converged = True
            break
        z = Bop(r)
        rz_new = r @ z
        beta = rz_new / rz
        betas.append(beta)
        rz = rz_new
        d = z + beta * d
    ritz = la.eigvalsh_tridiagonal(*_tridiag_parts(alphas, betas))
    return x, SolveReport(k, hist, converged, float(ritz[0]), float(ritz[-1]))


def _tridiag_parts(alphas, betas):
    T = cg_tridiagonal(alphas, betas)
    return np.diag(T).copy(), np.diag(T, 1).copy()


@dataclass
class EigEstimate:
    eig_min: float
    eig_max: float
    converged: bool
    residual: float
    steps: int = 0

    @property
    def condition_number(self) -> float:
        return self.eig_max / self.eig_min


def _extreme_ritz(diag, off):
    """Smallest and largest Ritz values and the last components of their Ritz vectors."""
    d, e = np.array(diag), np.array(off)
    k = d.size
    if k == 1:
        return d[[0, 0]], np.ones(2)
    out, last = np.empty(2), np.empty(2)
    for slot, i in enumerate((0, k - 1)):
        w, v = la.eigh_tridiagonal(d, e, select="i", select_range=(i, i))
        out[slot], last[slot] = w[0], v[-1, 0]
    return out, last


def lanczos_extreme(A, B=None, n: int | None = None, tol: float = 1e-4, seed: int = DEFAULT_SEED,
                    max_steps: int = 400) -> EigEstimate:
    """Extreme eigenvalues of ``B A`` (``A``, ``B`` symmetric, ``A`` SPD, ``B`` SPD or None).

    Lanczos on ``B^{1/2} A B^{1/2}`` carried out with residual-space vectors
    ``r`` and preconditioned vectors ``z = B r`` and full reorthogonalization.
    Stops when both extreme Ritz pairs have relative residual below ``tol``.
    """
    Aop = _as_apply(A)
    Bop = _as_apply(B) or (lambda r: r.copy())
    if n is None:
        n = A.shape[0]
    rng = np.random.default_rng(seed)
    r = rng.standard_normal(n)
    z = Bop(r)
    nrm = np.sqrt(r @ z)
    steps = min(max_steps, n)
    # preallocated bases: row j holds the j-th Lanczos vector
    Rs = np.empty((steps, n))
    Zs = np.empty((steps, n))
    diag, off = [], []
    r, z = r / nrm, z / nrm
    est = None
    for j in range(steps):
        Rs[j], Zs[j] = r, z
        w = Aop(z)
        a = z @ w
        diag.append(a)
        w = w - a * r - (off[-1] * Rs[j - 1] if off else 0.0)
        # full reorthogonalization in the B-inner product, twice
        for _ in range(2):
            w -= Rs[: j + 1].T @ (Zs[: j + 1] @ w)
        zw = Bop(w)
        b2 = w @ zw
        if b2 < 0:
            raise BreakdownError("preconditioner is not positive definite")
        b = np.sqrt(b2)
        theta, last = _extreme_ritz(diag, off)
        res = np.abs(b * last) / np.abs(theta)
        est = EigEstimate(float(theta[0]), float(theta[-1]), bool(np.all(res <= tol)), float(res.max()), j + 1)
        if est.converged and j >= 2:
            return est
        if b <= 1e-14 * abs(a):
            est.converged = True
            return est
        off.append(b)
        r, z = w / b, zw / b
    log.warning("Lanczos stopped after %d steps with residual %.2e", est.steps, est.residual)
    return est


def extreme_eigs(A, B=None, tol: float = 1e-4, seed: int = DEFAULT_SEED, M=None) -> EigEstimate:
    """``(lambda_min, lambda_max)`` of ``A``, of ``B A`` or of the pencil ``A x = lambda M x``.

    Sparse explicit ``A`` (optionally with sparse SPD ``M``) goes through
    ARPACK, with shift-invert at zero for the smallest eigenvalue; an operator
    preconditioner ``B`` goes through :func:`lanczos_extreme`.
    """
    if B is not None:
        return lanczos_extreme(A, B, tol=tol, seed=seed)
    n = A.shape[0]
    if n <= 400:
        Ad = A.toarray() if sp.issparse(A) else np.asarray(A)
        Md = None if M is None else (M.toarray() if sp.issparse(M) else np.asarray(M))
        lam = la.eigh(Ad, Md, eigvals_only=True)
        return EigEstimate(float(lam[0]), float(lam[-1]), True, 0.0)
    v0 = np.random.default_rng(seed).standard_normal(n)
    A = sp.csc_matrix(A)
    kw = dict(k=1, v0=v0, tol=tol * 1e-2, return_eigenvectors=False)
    if M is None:
        lmax = sla.eigsh(A, which="LA", **kw)[0]
        lmin = sla.eigsh(A, sigma=0.0, which="LM", **kw)[0]
    else:
        M = sp.csc_matrix(M)
        # largest of the pencil = 1 / smallest of the swapped pencil
        lmax = 1.0 / sla.eigsh(M, M=A, sigma=0.0, which="LM", **kw)[0]
        lmin = sla.eigsh(A, M=M, sigma=0.0, which="LM", **kw)[0]
    return EigEstimate(float(lmin), float(lmax), True, tol * 1e-2)


@dataclass
class ConstantsReport:
    c1_jacobi: float
    c2_jacobi_kerQ: float
    c2_jacobi_full_VB: float
    c1_schwarz: float
    c2_schwarz: float
    tol: float = 1e-4
    details: dict = field(default_factory=dict, repr=False)


def estimate_constants(system, prec: Preconditioner, dofmap=None, tol: float = 1e-4,
                       seed: int = DEFAULT_SEED) -> ConstantsReport:
    """Best constants of the Jacobi and Schwarz two-sided bounds.

    For ``v`` in V_B the Jacobi form is ``v^T D_B v``; the constants are the
    extreme values of ``v^T D v / v^T A v`` over V_B (lower) and over ker(Q_h)
    (upper, and over V_B for comparison). The Schwarz constants are
    ``1 / lambda_max`` and ``1 / lambda_min`` of ``B_C A_C``.
    """
    vb = subspace_operator(prec, system, "VB")
    # pencil A_B x = mu D_B x; mu in [1/c2_full, 1/c1]
    e_vb = extreme_eigs(vb.A, M=vb.upper, tol=tol, seed=seed)
    kq = subspace_operator(prec, system, "kerQ")
    e_kq = extreme_eigs(kq.A, M=kq.upper, tol=tol, seed=seed)
    vc = subspace_operator(prec, system, "VC")
    e_vc = lanczos_extreme(vc.A, vc.precond, tol=tol, seed=seed)
    return ConstantsReport(
        c1_jacobi=1.0 / e_vb.eig_max,
        c2_jacobi_kerQ=1.0 / e_kq.eig_min,
        c2_jacobi_full_VB=1.0 / e_vb.eig_min,
        c1_schwarz=1.0 / e_vc.eig_max,
        c2_schwarz=1.0 / e_vc.eig_min,
        tol=tol,
        details={"VB": e_vb, "kerQ": e_kq, "VC": e_vc},
    )


def condition_number_2norm(A, B, n: int | None = None, tol: float = 1e-4, seed: int = DEFAULT_SEED,
                           max_steps: int = 2000) -> float:
    """Euclidean 2-norm condition number ``sigma_max / sigma_min`` of the product ``B A``.

    ``B A`` is not symmetric in the Euclidean inner product, so its singular
    values differ from its eigenvalues; they are the square roots of the
    eigenvalues of ``A B B A``, which Lanczos handles directly.
    """
    Aop = _as_apply(A)
    Bop = _as_apply(B)
    if n is None:
        n = A.shape[0]

    def normal(x):
        y = Bop(Aop(x))
        return Aop(Bop(y))

    est = lanczos_extreme(normal, None, n=n, tol=tol, seed=seed, max_steps=max_steps)
    return float(np.sqrt(est.eig_max / est.eig_min))


def dense_condition_number(A, B) -> float:
    """Dense oracle for :func:`condition_number_2norm` on small problems."""
    Ad = A.toarray() if sp.issparse(A) else np.asarray(A)
    n = Ad.shape[0]
    Bop = _as_apply(B)
    BA = np.column_stack([Bop(Ad[:, j]) for j in range(n)])
    return float(np.linalg.cond(BA))
