"""Damped Newton preimage solving for regular functions.

Solves f(q) = v using the 4x4 real differential. Targets are processed as a
batch: each iteration evaluates the series once for all active targets,
assembles the differentials, and applies per-target step halving until the
residual decreases. Divergence out of the search ball marks a target failed
rather than raising, since coverage failures near the boundary are data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import differential_matrices
from .series import SliceSeries


@dataclass(frozen=True)
class NewtonParams:
    """Tolerance and iteration limits for the damped Newton solver."""

    tol: float = 1e-10
    max_iter: int = 60
    max_halvings: int = 30

    def to_dict(self) -> dict:
        return {"tol": self.tol, "max_iter": self.max_iter,
                "max_halvings": self.max_halvings}


@dataclass
class NewtonBatchResult:
    points: np.ndarray        # (M, 4) final iterates
    residuals: np.ndarray     # (M,) |f(q) - v|
    converged: np.ndarray     # (M,) bool, residual < tol and |q| < r_limit
    iterations: np.ndarray    # (M,) int


def _residual_norms(vals: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("mk,mk->m", vals, vals))


def solve_preimages(f: SliceSeries, targets: np.ndarray, seeds: np.ndarray,
                    r_limit: float, params: NewtonParams | None = None) -> NewtonBatchResult:
    """Find q with f(q) = v for each target v, constrained to |q| < r_limit."""
    params = params or NewtonParams()
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    q = np.array(np.atleast_2d(np.asarray(seeds, dtype=float)), copy=True)
    m = targets.shape[0]
    # Seeds outside the search ball are pulled back inside before iterating.
    norms = _residual_norms(q)
    too_far = norms >= 0.98 * r_limit
    if np.any(too_far):
        q[too_far] *= (0.9 * r_limit / norms[too_far])[:, None]

    res = f.eval_many(q) - targets
    res_norm = _residual_norms(res)
    iters = np.zeros(m, dtype=int)
    active = res_norm >= params.tol

    for _ in range(params.max_iter):
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        qa = q[idx]
        mats = differential_matrices(f, qa)
        dets = np.abs(np.linalg.det(mats))
        # Levenberg-style ridge keeps near-singular steps finite.
        bad = dets < 1e-12
        if np.any(bad):
            mats[bad] += 1e-8 * np.eye(4)
        try:
            step = np.linalg.solve(mats, -res[idx][..., None])[..., 0]
        except np.linalg.LinAlgError:
            mats += 1e-8 * np.eye(4)
            step = np.linalg.solve(mats, -res[idx][..., None])[..., 0]

        lam = np.ones(len(idx))
        accepted = np.zeros(len(idx), dtype=bool)
        q_new = np.array(qa)
        res_new = np.array(res[idx])
        res_new_norm = np.array(res_norm[idx])
        for _ in range(params.max_halvings):
            todo = ~accepted
            if not np.any(todo):
                break
            cand = qa[todo] + lam[todo, None] * step[todo]
            cand_norm = _residual_norms(cand)
            inside = cand_norm < r_limit * 0.999999
            cand_val = np.full((todo.sum(), 4), np.nan)
            if np.any(inside):
                cand_val[inside] = f.eval_many(cand[inside]) - targets[idx][todo][inside]
            cand_res = np.where(inside, _residual_norms(np.nan_to_num(cand_val)), np.inf)
            better = cand_res < res_norm[idx][todo]
            sel = np.flatnonzero(todo)[better]
            q_new[sel] = cand[better]
            res_new[sel] = cand_val[better]
            res_new_norm[sel] = cand_res[better]
            accepted[sel] = True
            lam[np.flatnonzero(todo)[~better]] *= 0.5

        moved = accepted
        q[idx[moved]] = q_new[moved]
        res[idx[moved]] = res_new[moved]
        res_norm[idx[moved]] = res_new_norm[moved]
        iters[idx] += 1
        # Targets whose every damped step failed to improve are abandoned.
        active[idx[~moved]] = False
        active[idx] &= res_norm[idx] >= params.tol

    converged = (res_norm < params.tol) & (_residual_norms(q) < r_limit)
    return NewtonBatchResult(q, res_norm, converged, iters)


def solve_zero(f: SliceSeries, seeds: np.ndarray, r_limit: float,
               params: NewtonParams | None = None) -> NewtonBatchResult:
    """Roots of f inside |q| < r_limit from the given seeds."""
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    targets = np.zeros_like(seeds)
    return solve_preimages(f, targets, seeds, r_limit, params)
