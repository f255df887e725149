"""Sequential minimal optimisation for the soft-margin SVM dual

    min_a  0.5 a'Qa - sum(a)   s.t.  0 <= a_i <= C,  y'a = 0,
    Q_ij = y_i y_j K(x_i, x_j),

with maximal-violating-pair working-set selection. Two interchangeable
backends share one algorithm: a scalar loop compiled by numba and a
vectorised numpy loop. Both perform the same floating-point operations in
the same order, so they return identical multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _accel

TAU = 1e-12


def _two_var_update(Qi_i, Qj_j, Qi_j, yi, yj, Gi, Gj, ai, aj, C):
    if yi != yj:
        quad = Qi_i + Qj_j + 2.0 * Qi_j
        if quad <= 0.0:
            quad = TAU
        delta = (-Gi - Gj) / quad
        diff = ai - aj
        ai += delta
        aj += delta
        if diff > 0.0:
            if aj < 0.0:
                aj = 0.0
                ai = diff
        else:
            if ai < 0.0:
                ai = 0.0
                aj = -diff
        if diff > 0.0:
            if ai > C:
                ai = C
                aj = C - diff
        else:
            if aj > C:
                aj = C
                ai = C + diff
    else:
        quad = Qi_i + Qj_j - 2.0 * Qi_j
        if quad <= 0.0:
            quad = TAU
        delta = (Gi - Gj) / quad
        total = ai + aj
        ai -= delta
        aj += delta
        if total > C:
            if ai > C:
                ai = C
                aj = total - C
        else:
            if aj < 0.0:
                aj = 0.0
                ai = total
        if total > C:
            if aj > C:
                aj = C
                ai = total - C
        else:
            if ai < 0.0:
                ai = 0.0
                aj = total
    return ai, aj


_two_var_update_jit = _accel.njit(_two_var_update)


@_accel.njit
def _solve_numba(Q, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    converged = False
    while True:
        i = -1
        j = -1
        m = -np.inf
        M = np.inf
        for t in range(n):
            v = -y[t] * G[t]
            if (y[t] > 0.0 and alpha[t] < C) or (y[t] < 0.0 and alpha[t] > 0.0):
                if v > m:
                    m = v
                    i = t
            if (y[t] > 0.0 and alpha[t] > 0.0) or (y[t] < 0.0 and alpha[t] < C):
                if v < M:
                    M = v
                    j = t
        if i < 0 or j < 0 or m - M < tol:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1
        ai_old = alpha[i]
        aj_old = alpha[j]
        ai, aj = _two_var_update_jit(Q[i, i], Q[j, j], Q[i, j], y[i], y[j], G[i], G[j],
                                     ai_old, aj_old, C)
        alpha[i] = ai
        alpha[j] = aj
        dai = ai - ai_old
        daj = aj - aj_old
        for t in range(n):
            G[t] += Q[i, t] * dai + Q[j, t] * daj
    return alpha, G, it, converged


def _solve_numpy(Q, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    pos = y > 0.0
    neg = ~pos
    it = 0
    converged = False
    while True:
        v = -y * G
        up = (pos & (alpha < C)) | (neg & (alpha > 0.0))
        low = (pos & (alpha > 0.0)) | (neg & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        vu = np.where(up, v, -np.inf)
        vl = np.where(low, v, np.inf)
        i = int(np.argmax(vu))
        j = int(np.argmin(vl))
        if vu[i] - vl[j] < tol:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1
        ai_old = alpha[i]
        aj_old = alpha[j]
        ai, aj = _two_var_update(Q[i, i], Q[j, j], Q[i, j], y[i], y[j], G[i], G[j],
                                 ai_old, aj_old, C)
        alpha[i] = ai
        alpha[j] = aj
        G += Q[i] * (ai - ai_old) + Q[j] * (aj - aj_old)
    return alpha, G, it, converged


@dataclass(frozen=True)
class DualSolution:
    alpha: np.ndarray
    gradient: np.ndarray
    rho: float
    n_iter: int
    converged: bool

    def objective(self, Q: np.ndarray) -> float:
        a = self.alpha
        return float(0.5 * a @ Q @ a - a.sum())


def compute_rho(alpha: np.ndarray, G: np.ndarray, y: np.ndarray, C: float) -> float:
    """Offset of the decision function ``f(x) = sum a_i y_i K(x_i, x) - rho``.

    Average of y_i G_i over free multipliers; midpoint of the feasible
    interval when every multiplier sits at a bound.
    """
    yG = y * G
    at_upper = alpha >= C
    at_lower = alpha <= 0.0
    free = ~(at_upper | at_lower)
    if free.any():
        return float(np.sum(yG[free]) / np.count_nonzero(free))
    ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
    lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2.0)


def solve_dual(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
               max_iter: int | None = None, use_jit: bool | None = None) -> DualSolution:
    """Solve the dual for a precomputed kernel matrix and labels in {-1, +1}."""
    y = np.ascontiguousarray(y, dtype=float)
    n = y.shape[0]
    Q = np.ascontiguousarray(np.outer(y, y) * K)
    if max_iter is None:
        max_iter = 10 * n
    if use_jit is None:
        use_jit = _accel.USE_JIT
    solver = _solve_numba if (use_jit and _accel.HAVE_NUMBA) else _solve_numpy
    alpha, G, it, converged = solver(Q, y, float(C), float(tol), int(max_iter))
    return DualSolution(alpha, G, compute_rho(alpha, G, y, C), int(it), bool(converged))
