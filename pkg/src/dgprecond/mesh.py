"""Uniform Cartesian meshes of a square and their face/vertex connectivity.

Elements are numbered lexicographically, ``e = row * n + col`` with ``col``
running along x. Vertices live on the ``(n+1) x (n+1)`` lattice,
``v = r * (n + 1) + c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class DomainError(ValueError):
    """An operation was requested for an entity it is not defined on."""


@dataclass(frozen=True)
class Face:
    id: int
    kind: str  # "interior" | "boundary"
    normal: tuple[int, int]
    plus: int
    minus: int | None
    measure: float
    # axis 0: face normal to x (vertical segment); axis 1: normal to y
    axis: int
    # lattice position: (line index across the axis, cell index along it)
    line: int
    cell: int

    @property
    def is_boundary(self) -> bool:
        return self.minus is None


@dataclass(frozen=True)
class Mesh:
    n: int
    a: float = -1.0
    b: float = 1.0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"number of elements per direction must be >= 1, got {self.n!r}")
        if not self.a < self.b:
            raise ValueError(f"empty domain [{self.a}, {self.b}]")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def num_elements(self) -> int:
        return self.n * self.n

    @property
    def num_vertices(self) -> int:
        return (self.n + 1) ** 2

    def element_rc(self, e):
        return np.divmod(e, self.n)

    def element_origin(self, e) -> np.ndarray:
        """Lower-left corner(s) of element(s) ``e``."""
        r, c = self.element_rc(np.asarray(e))
        return np.stack([self.a + c * self.h, self.a + r * self.h], axis=-1)

    def element_map(self, e, ref_pts) -> np.ndarray:
        """Affine map from the reference square ``[-1, 1]^2`` onto element ``e``."""
        x0 = self.element_origin(e)
        return x0 + 0.5 * self.h * (np.asarray(ref_pts) + 1.0)

    @property
    def jacobian(self) -> float:
        return (0.5 * self.h) ** 2

    def vertex_coords(self) -> np.ndarray:
        t = self.a + self.h * np.arange(self.n + 1)
        X, Y = np.meshgrid(t, t)
        return np.stack([X.ravel(), Y.ravel()], axis=1)

    def is_interior_vertex(self, v: int) -> bool:
        r, c = divmod(int(v), self.n + 1)
        return 0 < r < self.n and 0 < c < self.n

    @cached_property
    def interior_vertices(self) -> np.ndarray:
        k = np.arange(1, self.n)
        r, c = np.meshgrid(k, k, indexing="ij")
        return (r * (self.n + 1) + c).ravel()

    @cached_property
    def faces(self) -> list[Face]:
        return faces(self)


def build_mesh(n: int, domain: tuple[float, float] = (-1.0, 1.0)) -> Mesh:
    a, b = domain
    return Mesh(n, float(a), float(b))


def faces(mesh: Mesh) -> list[Face]:
    """All faces: x-normal faces first, then y-normal, each ordered by (line, cell).

    Interior faces carry ``normal = +e_axis`` so ``plus`` is the element on the
    low side; boundary faces carry the outward normal of their single element.
    """
    n, h = mesh.n, mesh.h
    out = []
    fid = 0
    for axis in (0, 1):
        for line in range(n + 1):
            for cell in range(n):
                # element on the low side (index line-1) and high side (index line)
                def elem(k):
                    return cell * n + k if axis == 0 else k * n + cell

                unit = [0, 0]
                unit[axis] = 1
                if line == 0:
                    unit[axis] = -1
                    f = Face(fid, "boundary", tuple(unit), elem(0), None, h, axis, line, cell)
                elif line == n:
                    f = Face(fid, "boundary", tuple(unit), elem(n - 1), None, h, axis, line, cell)
                else:
                    f = Face(fid, "interior", tuple(unit), elem(line - 1), elem(line), h, axis, line, cell)
                out.append(f)
                fid += 1
    return out


def element_faces(mesh: Mesh) -> np.ndarray:
    """``(num_elements, 4)`` face ids in the order west, east, south, north."""
    n = mesh.n
    nx = (n + 1) * n
    e = np.arange(n * n)
    r, c = divmod(e, n)
    west = c * n + r
    east = (c + 1) * n + r
    south = nx + r * n + c
    north = nx + (r + 1) * n + c
    return np.stack([west, east, south, north], axis=1)


def vertex_patch(mesh: Mesh, vertex_id: int) -> set[int]:
    """Elements sharing the interior vertex ``vertex_id``."""
    if not mesh.is_interior_vertex(vertex_id):
        raise DomainError(f"vertex {vertex_id} is not an interior vertex")
    r, c = divmod(int(vertex_id), mesh.n + 1)
    n = mesh.n
    return {(r - 1) * n + c - 1, (r - 1) * n + c, r * n + c - 1, r * n + c}
