import math

import numpy as np
import pytest

from dgprecond import experiments
from dgprecond.experiments import (ExperimentSpec, ResultRow, broken_h1_error, convergence_study,
                                   random_solution_rhs, run)
from dgprecond.mesh import build_mesh
from dgprecond.dgspace import build_dofmap


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(p=())
    with pytest.raises(ValueError):
        ExperimentSpec(alpha=())
    with pytest.raises(ValueError):
        ExperimentSpec(rel_tol=1.0)
    with pytest.raises(ValueError):
        ExperimentSpec(tasks=("plots",))
    with pytest.raises(ValueError):
        ExperimentSpec(method="nipg")
    with pytest.raises(ValueError):
        ExperimentSpec(p=(1,))


def test_default_beta():
    assert ExperimentSpec(method="ldg").effective_beta == (1.0, 1.0)
    assert ExperimentSpec(method="sipg").effective_beta == (0.0, 0.0)
    assert ExperimentSpec(method="ldg", beta=(2, 0)).effective_beta == (2.0, 0.0)


def test_empty_task_list_gives_geometry_rows():
    rows = run(ExperimentSpec(p=(3, 2), alpha=(10.0, 2.0), n=4, tasks=()))
    assert [(r.p, r.alpha) for r in rows] == [(2, 2.0), (2, 10.0), (3, 2.0), (3, 10.0)]
    for r in rows:
        assert r.h == 0.5 and r.K_A is None and r.cg_iters is None and not r.error


def test_small_sweep_all_tasks():
    spec = ExperimentSpec(method="sipg", p=(2,), n=4, tasks=experiments.TASKS)
    seen = []
    rows = run(spec, on_row=seen.append)
    assert seen == rows
    r = rows[0]
    assert r.K_A > r.K_TDG >= r.K_TDG_spectral >= 1.0
    assert r.pcg_iters < r.cg_iters
    assert r.c1_schwarz == pytest.approx(0.25, abs=1e-3)
    assert 1.5 <= r.h1_rate <= 2.5
    for name in ("K_A", "K_TDG", "c1_jacobi", "c2_jacobi_kerQ", "c2_jacobi_full_VB", "c2_schwarz"):
        assert getattr(r, name) >= 0


def test_failing_case_is_reported_and_sweep_continues():
    rows = run(ExperimentSpec(p=(2,), n=4, alpha=(1.0, 10.0), tasks=("iterations",)))
    assert "alpha=1" in rows[0].error and rows[0].cg_iters is None
    assert not rows[1].error and rows[1].pcg_iters > 0


def test_runs_are_reproducible():
    spec = ExperimentSpec(method="ldg", p=(2,), n=4, tasks=("condition-numbers", "iterations"))
    a, b = run(spec)[0], run(spec)[0]
    for name in ResultRow.field_names():
        if name != "wall_time_seconds":
            assert getattr(a, name) == getattr(b, name)


def test_random_solution_rhs_is_seeded():
    from conftest import make_system

    A = make_system(n=2, p=2).A
    assert np.array_equal(random_solution_rhs(A, 3), random_solution_rhs(A, 3))
    assert not np.array_equal(random_solution_rhs(A, 3), random_solution_rhs(A, 4))


@pytest.mark.parametrize("method", ["sipg", "ldg"])
@pytest.mark.parametrize("p", [2, 3])
def test_convergence_rates(method, p):
    t = convergence_study(method, p, (4, 8, 16))
    assert all(abs(r - p) <= 0.4 for r in t.rates)
    assert t.errors == sorted(t.errors, reverse=True)


def test_broken_h1_error_of_interpolant_is_small():
    mesh = build_mesh(8)
    d = build_dofmap(mesh, 4)
    x, y = d.coords.T
    u = np.sin(np.pi * x) * np.sin(np.pi * y)
    assert broken_h1_error(u, mesh, d) < 1e-3
    assert broken_h1_error(np.zeros_like(u), mesh, d) == pytest.approx(math.pi * math.sqrt(2), rel=1e-6)
