"""Gauss-Legendre-Lobatto and Gauss-Legendre rules, 1D Lagrange bases on GLL nodes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NEWTON_TOL = 1e-15
NEWTON_MAXITER = 100


class NumericFailure(RuntimeError):
    """Raised when a root-finding iteration does not converge."""


def legendre(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(P_n(x), P_n'(x))`` by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p0 = np.ones_like(x)
    if n == 0:
        return p0, np.zeros_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    # derivative from P_n and P_{n-1}; endpoints handled separately
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = n * (x * p1 - p0) / (x * x - 1.0)
    end = np.isclose(np.abs(x), 1.0, rtol=0, atol=1e-14)
    dp[end] = np.sign(x[end]) ** (n + 1) * n * (n + 1) / 2.0
    return p1, dp


@dataclass(frozen=True)
class GllRule:
    p: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def npts(self) -> int:
        return self.p + 1


@dataclass(frozen=True)
class GaussRule:
    q: int
    nodes: np.ndarray
    weights: np.ndarray


def gll_rule(p: int) -> GllRule:
    """GLL nodes/weights for degree ``p``.

    Interior nodes are the roots of ``P_p'``; they are located by Newton
    iteration on ``(1 - x^2) P_p'(x)`` starting from the Chebyshev-Gauss-Lobatto
    points, using the recurrence ``(1 - x^2) P_p' = p (P_{p-1} - x P_p)``.
    """
    if p < 1:
        raise ValueError(f"GLL rule needs p >= 1, got {p}")
    x = -np.cos(np.pi * np.arange(p + 1) / p)
    if p > 1:
        xi = x[1:-1].copy()
        for _ in range(NEWTON_MAXITER):
            pn, _ = legendre(p, xi)
            pm, _ = legendre(p - 1, xi)
            # q(x) = P_{p-1} - x P_p is proportional to (1-x^2) P_p'
            q = pm - xi * pn
            # q'(x) = P_{p-1}' - P_p - x P_p' = -(p+1) P_p  (Legendre identity)
            dq = -(p + 1) * pn
            step = q / dq
            xi -= step
            if np.max(np.abs(step)) <= NEWTON_TOL:
                break
        else:
            raise NumericFailure(f"GLL Newton iteration did not converge for p={p}")
        x[1:-1] = xi
    x[0], x[-1] = -1.0, 1.0
    # symmetrize to kill roundoff asymmetry
    x = 0.5 * (x - x[::-1])
    if p % 2 == 0:
        x[p // 2] = 0.0
    pn, _ = legendre(p, x)
    w = 2.0 / (p * (p + 1) * pn**2)
    return GllRule(p, x, w)


def gauss_rule(q: int) -> GaussRule:
    """Gauss-Legendre rule with ``q`` points (exact up to degree ``2q - 1``)."""
    if q < 1:
        raise ValueError(f"Gauss rule needs q >= 1, got {q}")
    k = np.arange(1, q + 1)
    x = -np.cos(np.pi * (k - 0.25) / (q + 0.5))
    for _ in range(NEWTON_MAXITER):
        pn, dpn = legendre(q, x)
        step = pn / dpn
        x -= step
        if np.max(np.abs(step)) <= NEWTON_TOL:
            break
    else:
        raise NumericFailure(f"Gauss Newton iteration did not converge for q={q}")
    x = 0.5 * (x - x[::-1])
    if q % 2 == 1:
        x[q // 2] = 0.0
    _, dpn = legendre(q, x)
    w = 2.0 / ((1.0 - x**2) * dpn**2)
    return GaussRule(q, x, w)


@dataclass(frozen=True)
class LagrangeBasis1D:
    """Lagrange polynomials through the nodes of a GLL rule (barycentric form)."""

    rule: GllRule
    bary: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = self.rule.nodes
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, 1.0)
        object.__setattr__(self, "bary", 1.0 / np.prod(diff, axis=1))

    def derivative_matrix(self) -> np.ndarray:
        """``D[i, j] = phi_j'(x_i)`` at the nodes."""
        return self.eval(self.rule.nodes)[1]

    def eval(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Values and first derivatives, both shaped ``(len(points), p + 1)``.

        Entry ``[k, i]`` is ``phi_i(points[k])``.
        """
        x = self.rule.nodes
        w = self.bary
        t = np.atleast_1d(np.asarray(points, dtype=float))
        m, n = t.size, x.size
        vals = np.zeros((m, n))
        ders = np.zeros((m, n))
        d = t[:, None] - x[None, :]
        hit = np.isclose(d, 0.0, rtol=0, atol=1e-14)
        for k in range(m):
            j = np.flatnonzero(hit[k])
            if j.size:
                j = j[0]
                vals[k, j] = 1.0
                # derivative at a node: D[j, i] = (w_i / w_j) / (x_j - x_i), D[j, j] = -sum
                dx = x[j] - x
                dx[j] = 1.0
                row = (w / w[j]) / dx
                row[j] = 0.0
                row[j] = -row.sum()
                ders[k] = row
            else:
                c = w / d[k]
                s = c.sum()
                l = c / s
                vals[k] = l
                # l_i' = l_i * (sum_j c_j/d_j / s - 1/d_i)
                s1 = (c / d[k]).sum() / s
                ders[k] = l * (s1 - 1.0 / d[k])
        return vals, ders


def lagrange_basis(p: int) -> LagrangeBasis1D:
    return LagrangeBasis1D(gll_rule(p))


def discrete_gll_norm(values, rule: GllRule, jacobian: float = 1.0) -> float:
    """Squared discrete norm ``sum v(xi)^2 w_xi`` over the tensor GLL grid.

    ``values`` holds the nodal values on the ``(p+1)^d`` grid, flattened or as a
    ``d``-dimensional array; ``jacobian`` is the element map determinant.
    """
    v = np.asarray(values, dtype=float)
    n = rule.npts
    d = int(round(np.log(v.size) / np.log(n)))
    if n**d != v.size:
        raise ValueError(f"{v.size} values do not form a tensor GLL grid of {n} points")
    w = rule.weights
    wt = w
    for _ in range(d - 1):
        wt = np.multiply.outer(wt, w)
    return float(jacobian * np.sum(v.reshape(wt.shape) ** 2 * wt))
