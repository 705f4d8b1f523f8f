import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from conftest import make_system
from dgprecond.dgspace import vb_dofs
from dgprecond.precond import (NotSPDError, build_preconditioner, jacobi_form_direct,
                               subspace_operator)


def test_counts_small():
    s = make_system(n=2, p=2)
    P = build_preconditioner(s)
    assert P.schwarz.patches.shape == (1, 9)
    assert P.schwarz.R0T.shape[1] == 1


def test_counts_n32():
    s = make_system(n=32, p=2)
    P = build_preconditioner(s)
    assert P.schwarz.patches.shape[0] == 961
    assert P.schwarz.R0T.shape[1] == 961
    assert s.dofmap.total_dofs - P.jacobi.dofs.size == (2 - 1) ** 2 * 32**2


@pytest.mark.parametrize("method", ["sipg", "ldg"])
def test_apply_symmetric_and_additive(method):
    s = make_system(n=4, p=3, method=method)
    P = build_preconditioner(s)
    rng = np.random.default_rng(0)
    u, v = rng.standard_normal((2, s.dofmap.total_dofs))
    assert abs(u @ P(v) - v @ P(u)) <= 1e-12 * np.linalg.norm(u) * np.linalg.norm(P(v))
    full = P.apply(v)
    assert np.array_equal(full, P.with_mode("jacobi")(v) + P.with_mode("schwarz")(v))


def test_full_mode_positive_definite():
    s = make_system(n=3, p=2, method="ldg")
    P = build_preconditioner(s)
    N = s.dofmap.total_dofs
    B = np.column_stack([P(e) for e in np.eye(N)])
    assert np.linalg.eigvalsh(0.5 * (B + B.T))[0] > 0


def test_interior_dof_residual_goes_to_schwarz_only():
    s = make_system(n=4, p=3)
    P = build_preconditioner(s)
    r = np.zeros(s.dofmap.total_dofs)
    r[np.flatnonzero(s.dofmap.is_interior_dof)[5]] = 1.0
    assert not np.any(P.with_mode("jacobi")(r))
    assert_allclose(P(r), P.with_mode("schwarz")(r), atol=0)


def test_jacobi_is_diagonal_scaling_on_vb():
    s = make_system(n=3, p=2)
    P = build_preconditioner(s)
    r = np.random.default_rng(3).standard_normal(s.dofmap.total_dofs)
    out = P.with_mode("jacobi")(r)
    vb = vb_dofs(s.dofmap)
    assert_allclose(out[vb], r[vb] / s.A.diagonal()[vb])


def test_dimension_mismatch():
    P = build_preconditioner(make_system(n=2, p=2))
    with pytest.raises(ValueError):
        P(np.ones(3))


def test_bad_mode():
    P = build_preconditioner(make_system(n=2, p=2))
    with pytest.raises(ValueError):
        P.with_mode("multigrid")


def test_not_spd_detected():
    s = make_system(n=2, p=2)
    s.A = (s.A - 2 * sp.diags(s.A.diagonal())).tocsr()
    with pytest.raises(NotSPDError):
        build_preconditioner(s)


@given(seed=st.integers(0, 10**6))
def test_jacobi_form_identity(seed):
    s = make_system(n=2, p=2)
    vb = vb_dofs(s.dofmap)
    v = np.zeros(s.dofmap.total_dofs)
    v[vb] = np.random.default_rng(seed).standard_normal(vb.size)
    direct = jacobi_form_direct(s, v)
    # on V_B the Jacobi form is v^T D_B v
    diag = s.A.diagonal()[vb]
    assert direct == pytest.approx(v[vb] @ (diag * v[vb]), rel=1e-10)


def test_diagonal_operator_gives_unit_constants():
    s = make_system(n=2, p=2)
    P = build_preconditioner(s)
    s.A = sp.diags(s.A.diagonal()).tocsr()
    forms = subspace_operator(P, s, "VB")
    lam = np.linalg.eigvalsh(np.linalg.solve(forms.upper.toarray(), forms.A.toarray()))
    assert_allclose(lam, 1.0)


def test_single_patch_exactness():
    """A residual generated by a patch function is solved exactly by that patch."""
    s = make_system(n=4, p=3)
    P = build_preconditioner(s)
    S = P.schwarz
    k = 4
    idx = S.patches[k]
    v = np.zeros(S.conforming_dim)
    v[idx] = np.random.default_rng(1).standard_normal(idx.size)
    r = S.A_C @ v
    only_k = np.einsum("ij,j->i", S.patch_inv[k], r[idx])
    assert_allclose(only_k, v[idx], atol=1e-10 * np.abs(v).max())


def test_unknown_subspace():
    s = make_system(n=2, p=2)
    with pytest.raises(ValueError):
        subspace_operator(build_preconditioner(s), s, "nope")


def test_coarse_matrix_is_galerkin():
    s = make_system(n=4, p=2)
    S = build_preconditioner(s).schwarz
    A0 = (S.R0T.T @ S.A_C @ S.R0T).toarray()
    L = np.tril(S.coarse_factor[0]) if S.coarse_factor[1] else np.triu(S.coarse_factor[0]).T
    assert_allclose(L @ L.T, A0, rtol=1e-12, atol=1e-12 * abs(A0).max())
