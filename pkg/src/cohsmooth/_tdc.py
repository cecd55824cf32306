"""Kernels for the trace distance of coherence ``min_delta D_tr(rho, diag(delta))``.

The objective is convex on the probability simplex.  The solver runs a
projected subgradient phase from several starts, then polishes the best
iterate on the smoothed objective ``1/2 Tr sqrt(X^2 + mu^2)`` with an
accelerated projected gradient and a decreasing ``mu`` schedule.

Any Hermitian ``0 <= P <= I`` gives the lower bound
``Tr(P rho) - max_i P_ii`` on the optimum, so each evaluation also returns a
certified bound built from the (smoothed) positive-part projector of
``rho - diag(delta)``.
"""
import numpy as np

from ._accel import njit
from ._kernels import jacobi_eigh, project_simplex


@njit
def tdc_eval(rho, delta, mu):
    """Return ``(f, f_mu, grad_mu, lower_bound)`` at ``delta``."""
    n = rho.shape[0]
    x = rho.copy()
    for i in range(n):
        x[i, i] -= delta[i]
    w, v, _ = jacobi_eigh(x, 1e-14, 100)
    f = 0.0
    f_mu = 0.0
    s_mu = np.empty(n)
    s_hard = np.empty(n)
    for k in range(n):
        f += 0.5 * abs(w[k])
        r = np.sqrt(w[k] * w[k] + mu * mu)
        f_mu += 0.5 * r
        s_mu[k] = w[k] / r if r > 0.0 else 0.0
        s_hard[k] = 1.0 if w[k] > 0.0 else (-1.0 if w[k] < 0.0 else 0.0)
    grad = np.zeros(n)
    p_mu = np.empty(n)
    p_hard = np.empty(n)
    for i in range(n):
        a = 0.0
        b = 0.0
        for k in range(n):
            m2 = v[i, k].real ** 2 + v[i, k].imag ** 2
            a += s_mu[k] * m2
            b += s_hard[k] * m2
        grad[i] = -0.5 * a
        p_mu[i] = 0.5 * (1.0 + a)
        p_hard[i] = 0.5 * (1.0 + b)
    # <v_k| rho |v_k>
    tr_mu = 0.0
    tr_hard = 0.0
    for k in range(n):
        e = 0.0
        for i in range(n):
            for j in range(n):
                e += (np.conj(v[i, k]) * rho[i, j] * v[j, k]).real
        tr_mu += s_mu[k] * e
        tr_hard += s_hard[k] * e
    lb_mu = 0.5 * (1.0 + tr_mu) - np.max(p_mu)
    lb_hard = 0.5 * (1.0 + tr_hard) - np.max(p_hard)
    return f, f_mu, grad, max(lb_mu, lb_hard, 0.0)


@njit
def tdc_subgradient(rho, delta0, iters, step0):
    """Projected subgradient with step ``step0 / sqrt(t + 1)``; returns best iterate."""
    delta = delta0.copy()
    best = delta.copy()
    f_best, _, _, lb_best = tdc_eval(rho, delta, 0.0)
    for t in range(iters):
        f, _, g, lb = tdc_eval(rho, delta, 0.0)
        if f < f_best:
            f_best = f
            best[:] = delta
        if lb > lb_best:
            lb_best = lb
        gn = np.sqrt(np.sum(g * g))
        if gn == 0.0:
            break
        delta = project_simplex(delta - (step0 / np.sqrt(t + 1.0)) * g / gn, 1.0)
    return best, f_best, lb_best


@njit
def tdc_polish(rho, delta0, mus, iters_per_mu, tol):
    """Accelerated projected gradient on the smoothed objective with continuation.

    Returns ``(delta, f, lower_bound)`` where ``f`` is the exact objective at
    the returned point and ``lower_bound`` the best certificate seen.
    """
    n = rho.shape[0]
    x = delta0.copy()
    best = x.copy()
    f_best, _, _, lb_best = tdc_eval(rho, x, 0.0)
    for mi in range(mus.shape[0]):
        mu = mus[mi]
        L = 1.0 / mu
        y = x.copy()
        t = 1.0
        f_prev = 1e300
        for it in range(iters_per_mu):
            f_y, fm_y, g_y, lb_y = tdc_eval(rho, y, mu)
            if lb_y > lb_best:
                lb_best = lb_y
            if f_y < f_best:
                f_best = f_y
                best[:] = y
            while True:
                x_new = project_simplex(y - g_y / L, 1.0)
                f_new, fm_new, _, _ = tdc_eval(rho, x_new, mu)
                diff = x_new - y
                quad = fm_y + np.sum(g_y * diff) + 0.5 * L * np.sum(diff * diff)
                if fm_new <= quad + 1e-15 or L > 1e16:
                    break
                L *= 2.0
            if f_new < f_best:
                f_best = f_new
                best[:] = x_new
            step = np.sqrt(np.sum((x_new - x) ** 2))
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            if fm_new > f_prev:
                # adaptive restart of the momentum
                y = x_new.copy()
                t_new = 1.0
            else:
                y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            f_prev = fm_new
            x = x_new
            t = t_new
            L *= 0.8
            if L < 1.0:
                L = 1.0
            if step < tol and it > 5:
                break
        x = best.copy()
        if f_best - lb_best <= 1e-9:
            break
    return best, f_best, lb_best
