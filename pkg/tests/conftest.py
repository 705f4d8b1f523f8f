import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dgprecond import DGConfig, assemble, build_dofmap, build_mesh

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_system(n=4, p=2, method="sipg", alpha=10.0, beta=(1.0, 1.0), f=1.0):
    mesh = build_mesh(n)
    dofmap = build_dofmap(mesh, p)
    return assemble(mesh, dofmap, DGConfig(method, alpha, beta), f=f)
