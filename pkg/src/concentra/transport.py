"""Exact Wasserstein distances.

Four routes are provided: the transportation LP on finite supports, the
quantile formula on the real line, the closed form for W2 between
Gaussians, and the Kantorovich-Rubinstein dual LP for W1. All routes are
exact up to LP solver tolerance; there is no entropic approximation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import eigh
from scipy.optimize import linprog

from .errors import InputError, SolverError
from .measures import DiscreteMeasure, GaussianMeasure, _point_key

PLAN_ATOL = 1e-10


@dataclass(frozen=True)
class TransportPlan:
    """A coupling between two discrete measures together with its cost.

    ``weights[i, j]`` is the mass moved from row support point i to column
    support point j; ``cost`` is sum_ij weights_ij d(x_i, y_j)**order.
    """

    row_measure: DiscreteMeasure
    col_measure: DiscreteMeasure
    weights: np.ndarray
    cost: float
    order: float

    def validate(self, cost_matrix: np.ndarray | None = None) -> None:
        w = self.weights
        if np.any(w < -PLAN_ATOL):
            raise InputError("plan weights must be nonnegative")
        if np.max(np.abs(w.sum(axis=1) - self.row_measure.weights)) > PLAN_ATOL:
            raise InputError("row marginals do not match")
        if np.max(np.abs(w.sum(axis=0) - self.col_measure.weights)) > PLAN_ATOL:
            raise InputError("column marginals do not match")
        if cost_matrix is not None:
            declared = math.fsum((w * cost_matrix).ravel())
            if abs(declared - self.cost) > PLAN_ATOL * max(1.0, abs(self.cost)):
                raise InputError("declared cost does not match the plan")


def _resolve_space(mu: DiscreteMeasure, nu: DiscreteMeasure, space):
    if space is not None:
        return space
    a, b = mu.resolved_space(), nu.resolved_space()
    if mu.space is not None and nu.space is not None and mu.space is not nu.space:
        same = (
            type(mu.space) is type(nu.space)
            and getattr(mu.space, "labels", None) == getattr(nu.space, "labels", None)
            and np.array_equal(
                getattr(mu.space, "dist", np.empty(0)), getattr(nu.space, "dist", np.empty(0))
            )
        )
        if not same:
            raise InputError("measures live on different metric spaces")
    return a if mu.space is not None else b


def cost_matrix(mu: DiscreteMeasure, nu: DiscreteMeasure, s: float, space=None) -> np.ndarray:
    space = _resolve_space(mu, nu, space)
    return np.array(
        [[space.distance(x, y) ** s for y in nu.support] for x in mu.support]
    )


_COLGEN_THRESHOLD = 40_000
_LP_OPTIONS = {
    "presolve": False,
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


def _solve_restricted(cost, w_row, w_col, idx_i, idx_j):
    """Dual-simplex solve over the columns (idx_i[k], idx_j[k]) only.

    Returns the plan entries and the dual potentials (u, v), with the
    dropped last column constraint's dual fixed at zero.
    """
    nr, nc = cost.shape
    m = idx_i.size
    keep = idx_j < nc - 1
    rows = np.concatenate([idx_i, nr + idx_j[keep]])
    cols = np.concatenate([np.arange(m), np.arange(m)[keep]])
    a_eq = sparse.csr_matrix(
        (np.ones(rows.size), (rows, cols)), shape=(nr + nc - 1, m)
    )
    b_eq = np.concatenate([w_row, w_col[:-1]])
    # presolve falsely reports infeasibility on restricted column sets with
    # very small marginal weights; the default 1e-7 feasibility tolerance
    # leaks visible cost error when weights span many orders of magnitude
    res = linprog(
        cost[idx_i, idx_j],
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
        options=_LP_OPTIONS,
    )
    if not res.success:
        raise SolverError(f"transport LP failed: {res.status} {res.message}")
    duals = np.asarray(res.eqlin.marginals)
    u = duals[:nr]
    v = np.append(duals[nr:], 0.0)
    return res.x, u, v


def _northwest_band(w_row, w_col, width=2):
    """Column index set: the north-west-corner plan plus a diagonal band."""
    nr, nc = w_row.size, w_col.size
    pairs = set()
    i = j = 0
    ri, rj = float(w_row[0]), float(w_col[0])
    while True:
        for dj in range(-width, width + 1):
            if 0 <= j + dj < nc:
                pairs.add((i, j + dj))
        step = min(ri, rj)
        ri -= step
        rj -= step
        if ri <= 1e-17:
            i += 1
            if i == nr:
                break
            ri = float(w_row[i])
        if rj <= 1e-17:
            j += 1
            if j == nc:
                break
            rj = float(w_col[j])
    return pairs


def solve_transport_lp(cost: np.ndarray, w_row: np.ndarray, w_col: np.ndarray):
    """Minimum-cost transportation plan between two weight vectors.

    Solved as a sparse LP with the HiGHS dual simplex. Small instances are
    solved over all columns at once; large ones use exact column
    generation: a restricted LP seeded from the north-west-corner plan is
    re-solved with the columns whose reduced cost (from the dual
    potentials) is negative, until none remain — so the result carries the
    same optimality certificate as the full solve.
    """
    nr, nc = cost.shape
    if nr * nc <= _COLGEN_THRESHOLD:
        idx_i, idx_j = np.divmod(np.arange(nr * nc), nc)
        x, _, _ = _solve_restricted(cost, w_row, w_col, idx_i, idx_j)
        plan = x.reshape(nr, nc)
        plan[plan < 0] = 0.0
        value = math.fsum((plan * cost).ravel())
        return value, plan
    active = _northwest_band(w_row, w_col)
    for _ in range(50):
        idx_i = np.fromiter((i for i, _ in active), dtype=int, count=len(active))
        idx_j = np.fromiter((j for _, j in active), dtype=int, count=len(active))
        x, u, v = _solve_restricted(cost, w_row, w_col, idx_i, idx_j)
        reduced = cost - u[:, None] - v[None, :]
        viol_i, viol_j = np.nonzero(reduced < -1e-11)
        new = set(zip(viol_i.tolist(), viol_j.tolist())) - active
        if not new:
            plan = np.zeros((nr, nc))
            plan[idx_i, idx_j] = np.maximum(x, 0.0)
            value = math.fsum((plan[idx_i, idx_j] * cost[idx_i, idx_j]).ravel())
            return value, plan
        # cap growth per round: keep the most violating columns
        if len(new) > nr + nc:
            order = np.argsort(reduced[viol_i, viol_j])
            ranked = [
                p
                for p in zip(viol_i[order].tolist(), viol_j[order].tolist())
                if p not in active
            ]
            new = set(ranked[: nr + nc])
        active |= new
    raise SolverError("column generation did not converge")


def wasserstein_exact(
    mu: DiscreteMeasure, nu: DiscreteMeasure, s: float, space=None
) -> tuple[float, TransportPlan]:
    """W_s between discrete measures by exact linear programming.

    Returns the distance (min cost to the power 1/s) and an optimal plan.
    """
    if not (1.0 <= s <= 2.0):
        raise InputError("order s must lie in [1, 2]")
    cost = cost_matrix(mu, nu, s, space)
    raw, plan = solve_transport_lp(cost, mu.weights, nu.weights)
    plan_obj = TransportPlan(mu, nu, plan, raw, s)
    return float(max(raw, 0.0) ** (1.0 / s)), plan_obj


def _quantile_segments(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Merge the two weight partitions of [0, 1] along sorted supports."""
    xi = np.argsort([float(p) for p in mu.support], kind="stable")
    yi = np.argsort([float(p) for p in nu.support], kind="stable")
    xs = [float(mu.support[i]) for i in xi]
    ys = [float(nu.support[i]) for i in yi]
    wx = [float(mu.weights[i]) for i in xi]
    wy = [float(nu.weights[i]) for i in yi]
    i = j = 0
    rx, ry = wx[0], wy[0]
    while True:
        step = min(rx, ry)
        yield xs[i], ys[j], step
        rx -= step
        ry -= step
        # advance whichever partition is exhausted; on ties advance both
        if rx <= 1e-17:
            i += 1
            if i == len(xs):
                return
            rx = wx[i]
        if ry <= 1e-17:
            j += 1
            if j == len(ys):
                return
            ry = wy[j]


def wasserstein_1d(mu: DiscreteMeasure, nu: DiscreteMeasure, s: float) -> float:
    """W_s on the real line via the exact quantile-coupling formula."""
    if not (1.0 <= s <= 2.0):
        raise InputError("order s must lie in [1, 2]")
    total = math.fsum(abs(x - y) ** s * w for x, y, w in _quantile_segments(mu, nu))
    return float(max(total, 0.0) ** (1.0 / s))


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    vals, vecs = eigh(a)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def wasserstein_gaussian_w2(mu: GaussianMeasure, nu: GaussianMeasure) -> float:
    """Closed-form W2 between Gaussian laws (Bures metric plus mean shift)."""
    if mu.dim != nu.dim:
        raise InputError("Gaussian dimensions differ")
    s1 = _psd_sqrt(mu.cov)
    cross = _psd_sqrt(s1 @ nu.cov @ s1)
    gap = float(np.sum((mu.mean - nu.mean) ** 2))
    trace = float(np.trace(mu.cov) + np.trace(nu.cov) - 2.0 * np.trace(cross))
    return math.sqrt(max(gap + max(trace, 0.0), 0.0))


def kantorovich_dual_w1(
    mu: DiscreteMeasure, nu: DiscreteMeasure, space=None
) -> tuple[float, dict]:
    """W1 via the dual LP over 1-Lipschitz potentials on the joint support.

    Maximizes int f dmu - int f dnu subject to |f(x) - f(y)| <= d(x, y);
    returns the optimum and the feasible potential as {point: value}.
    """
    space = _resolve_space(mu, nu, space)
    points = list(mu.support)
    seen = {_point_key(p): i for i, p in enumerate(points)}
    for p in nu.support:
        if _point_key(p) not in seen:
            seen[_point_key(p)] = len(points)
            points.append(p)
    n = len(points)
    c = np.zeros(n)
    for p, w in zip(mu.support, mu.weights):
        c[seen[_point_key(p)]] += w
    for p, w in zip(nu.support, nu.weights):
        c[seen[_point_key(p)]] -= w
    rows, cols, data, b_ub = [], [], [], []
    r = 0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            rows += [r, r]
            cols += [i, j]
            data += [1.0, -1.0]
            b_ub.append(space.distance(points[i], points[j]))
            r += 1
    a_ub = sparse.csr_matrix((data, (rows, cols)), shape=(r, n))
    bounds = [(0.0, 0.0)] + [(None, None)] * (n - 1)
    res = linprog(
        -c, A_ub=a_ub, b_ub=np.array(b_ub), bounds=bounds, method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if not res.success:
        raise SolverError(f"dual LP failed: {res.status} {res.message}")
    potential = {_point_key(p): float(res.x[seen[_point_key(p)]]) for p in points}
    return float(-res.fun), potential
