"""Qubit kernels: exact planar reduction of the smoothing problems.

Every catalog measure is invariant under diagonal phase unitaries, i.e.
rotations of the Bloch ball about the z axis.  Rotating a feasible point
into the half-plane spanned by the z axis and the Bloch vector of ``rho``
keeps its value and never increases its distance to ``rho`` (trace or
relative-entropy), so optimizing over the plane section is exact.  In the
plane the feasible region is star-shaped around ``rho``; its boundary is
scanned by angle and refined by golden-section search.

Measures are evaluated on the 2x2 matrices themselves (not Bloch closed
forms) so this path stays independent of the grid oracle.
"""
import numpy as np

from ._accel import njit
from ._kernels import l1_coherence, relative_entropy, relent_coherence

MEASURE_L1 = 0
MEASURE_RELENT = 1
MEASURE_TDC = 2

DIST_TRACE = 0
DIST_RELENT = 1

GOLDEN = 0.6180339887498949


@njit
def plane_density(s, z, phi):
    """Qubit state with Bloch vector ``(s cos phi, s sin phi, z)``."""
    m = np.empty((2, 2), dtype=np.complex128)
    off = 0.5 * s * np.exp(-1j * phi)
    m[0, 0] = 0.5 * (1.0 + z)
    m[1, 1] = 0.5 * (1.0 - z)
    m[0, 1] = off
    m[1, 0] = np.conj(off)
    return m


@njit
def measure_2x2(m, measure):
    if measure == MEASURE_L1:
        return l1_coherence(m)
    if measure == MEASURE_RELENT:
        return relent_coherence(m)
    # trace distance of coherence of a qubit: the closest diagonal state keeps
    # the populations, leaving eigenvalues +-|m01|
    return abs(m[0, 1])


@njit
def _unit_exit(cs, cz, us, uz):
    """Largest t with |c + t u| <= 1 (u a unit vector, |c| <= 1)."""
    cu = cs * us + cz * uz
    c2 = cs * cs + cz * cz
    disc = cu * cu - c2 + 1.0
    if disc < 0.0:
        disc = 0.0
    t = -cu + np.sqrt(disc)
    return max(t, 0.0)


@njit
def boundary_radius(rho, cs, cz, phi, theta, eps, dist):
    us = np.cos(theta)
    uz = np.sin(theta)
    t_unit = _unit_exit(cs, cz, us, uz)
    if dist == DIST_TRACE:
        return min(2.0 * eps, t_unit)
    # relative-entropy ball: S(rho||.) is convex along the ray and zero at t = 0
    hi = t_unit * (1.0 - 1e-12)
    m = plane_density(cs + hi * us, cz + hi * uz, phi)
    if relative_entropy(rho, m, 1e-12) <= eps:
        return hi
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        m = plane_density(cs + mid * us, cz + mid * uz, phi)
        if relative_entropy(rho, m, 1e-12) <= eps:
            lo = mid
        else:
            hi = mid
    return lo


@njit
def boundary_value(rho, cs, cz, phi, theta, eps, dist, measure, sense):
    t = boundary_radius(rho, cs, cz, phi, theta, eps, dist)
    s = cs + t * np.cos(theta)
    z = cz + t * np.sin(theta)
    return sense * measure_2x2(plane_density(s, z, phi), measure), s, z


@njit
def qubit_boundary_optimize(rho, cs, cz, phi, eps, dist, measure, sense, n_scan, n_refine):
    """Minimize ``sense * C`` over the boundary of the planar feasible region.

    Returns ``(best, s, z, bracket)`` where ``best`` is the optimum of
    ``sense * C``, ``(s, z)`` its planar coordinates and ``bracket`` the
    spread of the objective over the final golden-section bracket.
    """
    thetas = np.empty(n_scan)
    vals = np.empty(n_scan)
    step = 2.0 * np.pi / n_scan
    for i in range(n_scan):
        thetas[i] = -np.pi + i * step
        vals[i], _, _ = boundary_value(rho, cs, cz, phi, thetas[i], eps, dist, measure, sense)

    # local minima on the circle, best first
    cand = np.empty(n_scan, dtype=np.int64)
    nc = 0
    for i in range(n_scan):
        left = vals[(i - 1) % n_scan]
        right = vals[(i + 1) % n_scan]
        if vals[i] <= left and vals[i] <= right:
            cand[nc] = i
            nc += 1
    order = np.argsort(vals[cand[:nc]])

    best = np.inf
    best_s = 0.0
    best_z = 0.0
    bracket = 0.0
    for r in range(min(n_refine, nc)):
        i0 = cand[order[r]]
        a = thetas[i0] - step
        b = thetas[i0] + step
        x1 = b - GOLDEN * (b - a)
        x2 = a + GOLDEN * (b - a)
        f1, _, _ = boundary_value(rho, cs, cz, phi, x1, eps, dist, measure, sense)
        f2, _, _ = boundary_value(rho, cs, cz, phi, x2, eps, dist, measure, sense)
        for _ in range(90):
            if f1 <= f2:
                b = x2
                x2 = x1
                f2 = f1
                x1 = b - GOLDEN * (b - a)
                f1, _, _ = boundary_value(rho, cs, cz, phi, x1, eps, dist, measure, sense)
            else:
                a = x1
                x1 = x2
                f1 = f2
                x2 = a + GOLDEN * (b - a)
                f2, _, _ = boundary_value(rho, cs, cz, phi, x2, eps, dist, measure, sense)
            if b - a < 1e-13:
                break
        xm = 0.5 * (a + b)
        fm, sm, zm = boundary_value(rho, cs, cz, phi, xm, eps, dist, measure, sense)
        # keep the scan point if refinement did not improve on it
        f0, s0, z0 = boundary_value(rho, cs, cz, phi, thetas[i0], eps, dist, measure, sense)
        if f0 < fm:
            fm, sm, zm = f0, s0, z0
        if fm < best:
            best = fm
            best_s = sm
            best_z = zm
            bracket = abs(f1 - f2)
    return best, best_s, best_z, bracket
