"""Saliency energy assembly and its primal-dual interior-point solver.

The energy over per-region saliency values s (n regions) is

    E(s) = q^T s + (1/2) s^T P s

with q = truth_cost + alpha * center_cost + gamma * foreground_cost and
P = 4 * beta * (Diag(row sums of M) - M), M_ij = similarity_ij * proximity_ij
for i != j. The quadratic term equals beta * sum_ij (s_i - s_j)^2 M_ij, so P
is positive semidefinite with zero row sums. The feasible set is the simplex
with box bounds: 0 <= s_i <= 1 and sum s_i = 1.

The solver is a standard primal-dual interior-point method: inequality
multipliers start at 1 and s at 1/n; each iteration forms the dual, primal,
and centrality residuals, solves the reduced Newton KKT system for the search
direction, and backtracks keeping the multipliers positive and the iterate
strictly inside the box. It stops when the sum of the three residual l2 norms
drops below the tolerance.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .priors import HALF_DIAGONAL
from .superpixel import RegionGraph

__all__ = [
    "EnergySpec",
    "SolverReport",
    "SolverNonconvergence",
    "similarity",
    "proximity",
    "assemble",
    "solve",
]


def similarity(gray_i: float, gray_j: float) -> float:
    """Intensity similarity of two regions: exp(-|dg| / 0.5), 1 at equality."""
    return math.exp(-abs(gray_i - gray_j) / 0.5)


def proximity(center_i, center_j) -> float:
    """Spatial proximity of two region centroids, decaying with distance."""
    ci = np.asarray(center_i, dtype=np.float64)
    cj = np.asarray(center_j, dtype=np.float64)
    return math.exp(-float(np.hypot(*(ci - cj))) / HALF_DIAGONAL)


@dataclass(eq=False)
class EnergySpec:
    """Everything needed to evaluate and minimize the saliency energy."""

    truth_cost: np.ndarray
    center_cost: np.ndarray
    foreground_cost: np.ndarray
    alpha: float
    beta: float
    gamma: float
    similarity_m: np.ndarray
    proximity_m: np.ndarray

    def __post_init__(self) -> None:
        n = self.truth_cost.shape[0]
        if n < 1:
            raise ValueError("energy needs at least one region")
        for name in ("center_cost", "foreground_cost"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} length does not match the region count")
        for name in ("similarity_m", "proximity_m"):
            if getattr(self, name).shape != (n, n):
                raise ValueError(f"{name} shape does not match the region count")
        if min(self.alpha, self.beta, self.gamma) < 0.0:
            raise ValueError("energy weights must be non-negative")
        q = self.linear_cost()
        if not np.isfinite(q).all() or float(q.min()) < 0.0:
            raise ValueError("linear cost must be finite and non-negative")

    @property
    def n(self) -> int:
        return int(self.truth_cost.shape[0])

    def linear_cost(self) -> np.ndarray:
        return self.truth_cost + self.alpha * self.center_cost + self.gamma * self.foreground_cost

    def smoothness_matrix(self) -> np.ndarray:
        m = self.similarity_m * self.proximity_m
        m = m.copy()
        np.fill_diagonal(m, 0.0)
        return 4.0 * self.beta * (np.diag(m.sum(axis=1)) - m)

    def objective(self, s: np.ndarray) -> float:
        p = self.smoothness_matrix()
        return float(self.linear_cost() @ s + 0.5 * s @ p @ s)

    def to_json(self) -> str:
        doc = {
            "truth_cost": self.truth_cost.tolist(),
            "center_cost": self.center_cost.tolist(),
            "foreground_cost": self.foreground_cost.tolist(),
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "similarity": self.similarity_m.tolist(),
            "proximity": self.proximity_m.tolist(),
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EnergySpec":
        doc = json.loads(text)
        return cls(
            truth_cost=np.asarray(doc["truth_cost"], dtype=np.float64),
            center_cost=np.asarray(doc["center_cost"], dtype=np.float64),
            foreground_cost=np.asarray(doc["foreground_cost"], dtype=np.float64),
            alpha=float(doc["alpha"]),
            beta=float(doc["beta"]),
            gamma=float(doc["gamma"]),
            similarity_m=np.asarray(doc["similarity"], dtype=np.float64),
            proximity_m=np.asarray(doc["proximity"], dtype=np.float64),
        )


@dataclass(eq=False)
class SolverReport:
    """Solution vector plus convergence diagnostics."""

    saliency: np.ndarray
    iterations: int
    residual: float
    objective: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "saliency": self.saliency.tolist(),
                "iterations": self.iterations,
                "residual": self.residual,
                "objective": self.objective,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SolverReport":
        doc = json.loads(text)
        return cls(
            saliency=np.asarray(doc["saliency"], dtype=np.float64),
            iterations=int(doc["iterations"]),
            residual=float(doc["residual"]),
            objective=float(doc["objective"]),
        )


class SolverNonconvergence(RuntimeError):
    """Raised when the iteration cap is hit; carries the last report."""

    def __init__(self, message: str, report: SolverReport):
        super().__init__(message)
        self.report = report


def assemble(
    truth_cost: np.ndarray,
    center_cost: np.ndarray,
    foreground_cost: np.ndarray,
    graph: RegionGraph,
    alpha: float,
    beta: float,
    gamma: float,
) -> EnergySpec:
    """Build the energy for a region graph; pairwise terms are dense."""
    gray = np.asarray(graph.gray, dtype=np.float64)
    sim = np.exp(-np.abs(gray[:, None] - gray[None, :]) / 0.5)
    centers = np.asarray(graph.center, dtype=np.float64)
    dists = np.hypot(
        centers[:, None, 0] - centers[None, :, 0],
        centers[:, None, 1] - centers[None, :, 1],
    )
    prox = np.exp(-dists / HALF_DIAGONAL)
    return EnergySpec(
        truth_cost=np.asarray(truth_cost, dtype=np.float64),
        center_cost=np.asarray(center_cost, dtype=np.float64),
        foreground_cost=np.asarray(foreground_cost, dtype=np.float64),
        alpha=float(alpha),
        beta=float(beta),
        gamma=float(gamma),
        similarity_m=sim,
        proximity_m=prox,
    )


_BACKTRACK = 0.5
_SLOPE = 0.01
_MAX_BACKTRACKS = 60


def solve(
    spec: EnergySpec,
    tolerance: float = 1e-6,
    max_iterations: int = 200,
    centering: float = 10.0,
) -> SolverReport:
    """Minimize the energy over the box-bounded simplex.

    Returns a report whose residual is the sum of the dual, primal, and
    centrality residual l2 norms, below ``tolerance`` on success. Raises
    :class:`SolverNonconvergence` if the iteration cap is exceeded.
    """
    n = spec.n
    q = spec.linear_cost()
    p_mat = spec.smoothness_matrix()
    if n == 1:
        # The constraint set is the single point s = 1.
        s = np.ones(1)
        return SolverReport(s, 0, 0.0, spec.objective(s))

    s = np.full(n, 1.0 / n)
    lam_lo = np.ones(n)
    lam_hi = np.ones(n)
    nu = 0.0
    m = 2 * n
    ones = np.ones(n)

    def residuals(s, lam_lo, lam_hi, nu, inv_t):
        r_dual = q + p_mat @ s - lam_lo + lam_hi + nu * ones
        r_cent = np.concatenate([lam_lo * s - inv_t, lam_hi * (1.0 - s) - inv_t])
        r_pri = float(s.sum() - 1.0)
        return r_dual, r_cent, r_pri

    def norm_sum(r_dual, r_cent, r_pri):
        return float(np.linalg.norm(r_dual) + np.linalg.norm(r_cent) + abs(r_pri))

    def norm_all(r_dual, r_cent, r_pri):
        return math.sqrt(float(r_dual @ r_dual + r_cent @ r_cent + r_pri * r_pri))

    residual = math.inf
    for iteration in range(max_iterations):
        gap = float(lam_lo @ s + lam_hi @ (1.0 - s))
        inv_t = gap / (centering * m)
        r_dual, r_cent, r_pri = residuals(s, lam_lo, lam_hi, nu, inv_t)
        residual = norm_sum(r_dual, r_cent, r_pri)
        if residual < tolerance:
            return SolverReport(s.copy(), iteration, residual, spec.objective(s))

        # Reduced Newton system over (ds, dnu); the multiplier blocks have
        # been eliminated analytically.
        barrier = lam_lo / s + lam_hi / (1.0 - s)
        kkt = np.empty((n + 1, n + 1))
        kkt[:n, :n] = p_mat
        kkt[:n, :n][np.diag_indices(n)] += barrier
        kkt[:n, n] = 1.0
        kkt[n, :n] = 1.0
        kkt[n, n] = 0.0
        rhs = np.empty(n + 1)
        rhs[:n] = -r_dual + inv_t / s - lam_lo - inv_t / (1.0 - s) + lam_hi
        rhs[n] = -r_pri
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            kkt[np.diag_indices(n + 1)] += 1e-12
            sol = np.linalg.solve(kkt, rhs)
        ds = sol[:n]
        dnu = float(sol[n])
        dlam_lo = inv_t / s - lam_lo - (lam_lo / s) * ds
        dlam_hi = inv_t / (1.0 - s) - lam_hi + (lam_hi / (1.0 - s)) * ds

        # Largest step keeping multipliers positive, then strict box interior,
        # then sufficient decrease of the full residual norm.
        dlam = np.concatenate([dlam_lo, dlam_hi])
        lam = np.concatenate([lam_lo, lam_hi])
        neg = dlam < 0.0
        step = 1.0 if not neg.any() else min(1.0, 0.99 * float((-lam[neg] / dlam[neg]).min()))
        for _ in range(_MAX_BACKTRACKS):
            trial = s + step * ds
            if trial.min() > 0.0 and trial.max() < 1.0:
                break
            step *= _BACKTRACK
        else:
            raise SolverNonconvergence(
                "line search failed to stay interior",
                SolverReport(s.copy(), iteration, residual, spec.objective(s)),
            )
        base_norm = norm_all(r_dual, r_cent, r_pri)
        for _ in range(_MAX_BACKTRACKS):
            trial = residuals(
                s + step * ds,
                lam_lo + step * dlam_lo,
                lam_hi + step * dlam_hi,
                nu + step * dnu,
                inv_t,
            )
            if norm_all(*trial) <= (1.0 - _SLOPE * step) * base_norm:
                break
            step *= _BACKTRACK
        else:
            raise SolverNonconvergence(
                "line search stalled",
                SolverReport(s.copy(), iteration, residual, spec.objective(s)),
            )
        s = s + step * ds
        lam_lo = lam_lo + step * dlam_lo
        lam_hi = lam_hi + step * dlam_hi
        nu = nu + step * dnu

    raise SolverNonconvergence(
        f"no convergence within {max_iterations} iterations",
        SolverReport(s.copy(), max_iterations, residual, spec.objective(s)),
    )
