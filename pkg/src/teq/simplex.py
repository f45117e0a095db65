"""Nelder-Mead run on many starting points in lockstep.

Every iteration evaluates the trial points of all live simplices with one
call of a batched objective ``f(X) -> values`` where ``X`` has shape
``(k, dim)``. Runs are independent: the trajectory of one run does not depend
on which other runs share the batch, so results are identical to running the
starts one after another.

Coefficients follow the dimension-adaptive choice of Gao & Han (2012).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SimplexResult:
    x: np.ndarray  # (runs, dim) best point of each run
    fun: np.ndarray  # (runs,)
    nfev: np.ndarray  # (runs,)
    converged: np.ndarray  # (runs,) bool
    simplex: np.ndarray  # (runs, dim + 1, dim) final simplices, best vertex first
    fsimplex: np.ndarray  # (runs, dim + 1)


def _coefficients(dim: int, adaptive: bool):
    if adaptive and dim > 1:
        return 1.0, 1.0 + 2.0 / dim, 0.75 - 1.0 / (2 * dim), 1.0 - 1.0 / dim
    return 1.0, 2.0, 0.5, 0.5


def minimize_batch(
    f,
    x0: np.ndarray,
    step: float = 0.1,
    max_evals: int = 2000,
    xatol: float = 1e-9,
    fatol: float = 1e-9,
    adaptive: bool = True,
    patience: int | None = None,
    simplex: np.ndarray | None = None,
    fsimplex: np.ndarray | None = None,
) -> SimplexResult:
    """Minimise ``f`` from each row of ``x0``.

    A run converges when its simplex has infinity-norm diameter <= ``xatol``
    and value spread <= ``fatol``. It is stopped without converging when it
    has used ``max_evals`` evaluations, or when its best value has improved by
    less than ``fatol`` over the last ``patience`` iterations (default
    ``20 * (dim + 1)``).

    Passing ``simplex`` and ``fsimplex`` from an earlier result resumes those
    runs; ``x0`` and ``step`` are then ignored and ``max_evals`` counts only
    the new evaluations.
    """
    if simplex is not None:
        sim = np.array(simplex, dtype=float)
        fsim = np.array(fsimplex, dtype=float)
        runs, dim = sim.shape[0], sim.shape[2]
        nfev = np.zeros(runs, dtype=int)
    else:
        x0 = np.atleast_2d(np.asarray(x0, dtype=float))
        runs, dim = x0.shape
        sim = np.repeat(x0[:, None, :], dim + 1, axis=1)
        sim[:, 1:, :] += step * np.eye(dim)[None, :, :]
        fsim = np.asarray(f(sim.reshape(-1, dim)), dtype=float).reshape(runs, dim + 1)
        nfev = np.full(runs, dim + 1)
    alpha, beta, gamma, delta = _coefficients(dim, adaptive)
    live = np.ones(runs, dtype=bool)
    converged = np.zeros(runs, dtype=bool)
    if patience is None:
        patience = 20 * (dim + 1)
    anchor = fsim.min(axis=1)
    anchor_iter = np.zeros(runs, dtype=int)
    it = 0

    def _sorted(xs, fx):
        order = np.argsort(fx, axis=1, kind="stable")
        rows = np.arange(fx.shape[0])[:, None]
        return xs[rows, order], fx[rows, order]

    sim, fsim = _sorted(sim, fsim)
    idx = np.arange(runs)
    while True:
        s, fs = sim[idx], fsim[idx]
        spread_x = np.max(np.abs(s[:, 1:, :] - s[:, :1, :]), axis=(1, 2))
        spread_f = fs[:, -1] - fs[:, 0]
        done = (spread_x <= xatol) & (spread_f <= fatol)
        converged[idx[done]] = True
        improved = fs[:, 0] < anchor[idx] - fatol
        anchor[idx[improved]] = fs[improved, 0]
        anchor_iter[idx[improved]] = it
        stalled = it - anchor_iter[idx] >= patience
        keep_going = ~done & (nfev[idx] < max_evals) & ~stalled
        idx, s, fs = idx[keep_going], s[keep_going], fs[keep_going]
        it += 1
        if idx.size == 0:
            break

        centroid = s[:, :-1, :].mean(axis=1)
        worst = s[:, -1, :]
        xr = centroid + alpha * (centroid - worst)
        fr = np.asarray(f(xr), dtype=float)
        nfev[idx] += 1

        f_best, f_sw, f_worst = fs[:, 0], fs[:, -2], fs[:, -1]
        expand = fr < f_best
        accept_r = (fr >= f_best) & (fr < f_sw)
        outside = (fr >= f_sw) & (fr < f_worst)
        inside = fr >= f_worst

        trial = np.empty_like(xr)
        trial[expand] = centroid[expand] + beta * (xr[expand] - centroid[expand])
        trial[outside] = centroid[outside] + gamma * (xr[outside] - centroid[outside])
        trial[inside] = centroid[inside] + gamma * (worst[inside] - centroid[inside])
        need = ~accept_r
        ft = np.full(idx.size, np.inf)
        if np.any(need):
            ft[need] = f(trial[need])
            nfev[idx[need]] += 1

        new_x = xr.copy()
        new_f = fr.copy()
        shrink = np.zeros(idx.size, dtype=bool)

        use_e = expand & (ft < fr)
        new_x[use_e], new_f[use_e] = trial[use_e], ft[use_e]

        ok_out = outside & (ft <= fr)
        new_x[ok_out], new_f[ok_out] = trial[ok_out], ft[ok_out]
        shrink |= outside & ~ok_out

        ok_in = inside & (ft < f_worst)
        new_x[ok_in], new_f[ok_in] = trial[ok_in], ft[ok_in]
        shrink |= inside & ~ok_in

        keep = ~shrink
        s[keep, -1, :] = new_x[keep]
        fs[keep, -1] = new_f[keep]
        if np.any(shrink):
            sk = s[shrink]
            sk[:, 1:, :] = sk[:, :1, :] + delta * (sk[:, 1:, :] - sk[:, :1, :])
            fk = np.asarray(f(sk[:, 1:, :].reshape(-1, dim)), dtype=float).reshape(-1, dim)
            s[shrink] = sk
            fs[shrink, 1:] = fk
            nfev[idx[shrink]] += dim
        sim[idx], fsim[idx] = _sorted(s, fs)

    return SimplexResult(sim[:, 0, :].copy(), fsim[:, 0].copy(), nfev, converged, sim, fsim)
