"""Brute-force Bloch-grid oracle kernels.

Two implementations of the same sweep: an explicit loop compiled by numba
and a vectorized numpy version used when numba is disabled.  Both evaluate
measures and memberships with Bloch-vector closed forms only.
"""
import numpy as np

from ._accel import NUMBA_ENABLED, njit

LN2 = np.log(2.0)

MEASURE_L1 = 0
MEASURE_RELENT = 1
MEASURE_TDC = 2

DIST_TRACE = 0
DIST_RELENT = 1


@njit
def _h2(p):
    s = 0.0
    if p > 0.0:
        s -= p * np.log(p)
    if p < 1.0:
        s -= (1.0 - p) * np.log(1.0 - p)
    return s / LN2


@njit
def bloch_measure(x, y, z, measure):
    rxy = np.sqrt(x * x + y * y)
    if measure == MEASURE_L1:
        return rxy
    if measure == MEASURE_TDC:
        return 0.5 * rxy
    r = min(np.sqrt(rxy * rxy + z * z), 1.0)
    val = _h2(0.5 * (1.0 + z)) - _h2(0.5 * (1.0 + r))
    return max(val, 0.0)


@njit
def bloch_relent(vx, vy, vz, ux, uy, uz):
    """``S(rho||tau)`` in bits for Bloch vectors ``v`` (rho) and ``u`` (tau)."""
    rv = min(np.sqrt(vx * vx + vy * vy + vz * vz), 1.0)
    ru = np.sqrt(ux * ux + uy * uy + uz * uz)
    neg_s = -_h2(0.5 * (1.0 + rv)) * LN2
    if ru >= 1.0 - 1e-15:
        dx = vx - ux
        dy = vy - uy
        dz = vz - uz
        if dx * dx + dy * dy + dz * dz < 1e-24:
            return 0.0
        return np.inf
    if ru < 1e-12:
        cross = 0.5 * np.log(0.25 * (1.0 - ru * ru)) + (vx * ux + vy * uy + vz * uz)
    else:
        proj = (vx * ux + vy * uy + vz * uz) / ru
        cross = 0.5 * np.log(0.25 * (1.0 - ru * ru)) + 0.5 * np.log((1.0 + ru) / (1.0 - ru)) * proj
    val = (neg_s - cross) / LN2
    return max(val, 0.0)


@njit
def box_radius(eps, dist):
    """Bloch-space radius enclosing the ball (Pinsker's inequality for relative entropy)."""
    if dist == DIST_TRACE:
        return 2.0 * eps
    return 2.0 * np.sqrt(0.5 * eps * LN2) * (1.0 + 1e-9) + 1e-12


@njit
def grid_sweep_numba(v, eps, dist, measure, resolution):
    """Return ``(n_feasible, min, argmin(3), max, argmax(3))`` over the feasible grid."""
    h = 2.0 / (resolution - 1)
    lo = np.zeros(3, dtype=np.int64)
    hi = np.full(3, resolution - 1, dtype=np.int64)
    rad = box_radius(eps, dist)
    for a in range(3):
        lo[a] = max(0, int(np.floor((v[a] - rad + 1.0) / h)) - 1)
        hi[a] = min(resolution - 1, int(np.ceil((v[a] + rad + 1.0) / h)) + 1)
    n = 0
    vmin = np.inf
    vmax = -np.inf
    amin = np.zeros(3)
    amax = np.zeros(3)
    r2eps = (2.0 * eps) ** 2 * (1.0 + 1e-12) + 1e-24
    for i in range(lo[0], hi[0] + 1):
        x = -1.0 + i * h
        for j in range(lo[1], hi[1] + 1):
            y = -1.0 + j * h
            for k in range(lo[2], hi[2] + 1):
                z = -1.0 + k * h
                if x * x + y * y + z * z > 1.0 + 1e-12:
                    continue
                if dist == DIST_TRACE:
                    dx = x - v[0]
                    dy = y - v[1]
                    dz = z - v[2]
                    if dx * dx + dy * dy + dz * dz > r2eps:
                        continue
                else:
                    if bloch_relent(v[0], v[1], v[2], x, y, z) > eps + 1e-12:
                        continue
                c = bloch_measure(x, y, z, measure)
                n += 1
                if c < vmin:
                    vmin = c
                    amin[0] = x
                    amin[1] = y
                    amin[2] = z
                if c > vmax:
                    vmax = c
                    amax[0] = x
                    amax[1] = y
                    amax[2] = z
    return n, vmin, amin, vmax, amax


def _h2_np(p):
    p = np.clip(p, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(p > 0, -p * np.log(p), 0.0)
        b = np.where(p < 1, -(1 - p) * np.log(1 - p), 0.0)
    return (a + b) / LN2


def bloch_measure_numpy(x, y, z, measure):
    rxy = np.sqrt(x * x + y * y)
    if measure == MEASURE_L1:
        return rxy
    if measure == MEASURE_TDC:
        return 0.5 * rxy
    r = np.minimum(np.sqrt(rxy * rxy + z * z), 1.0)
    return np.maximum(_h2_np(0.5 * (1 + z)) - _h2_np(0.5 * (1 + r)), 0.0)


def bloch_relent_numpy(v, x, y, z):
    rv = min(float(np.linalg.norm(v)), 1.0)
    ru = np.sqrt(x * x + y * y + z * z)
    neg_s = -_h2_np(np.array(0.5 * (1 + rv))) * LN2
    dot = v[0] * x + v[1] * y + v[2] * z
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(ru < 1e-12, 1.0, np.log((1 + ru) / (1 - ru)) / (2 * np.maximum(ru, 1e-300)))
        cross = 0.5 * np.log(0.25 * (1 - ru * ru)) + ratio * dot
        val = (neg_s - cross) / LN2
    same = (x - v[0]) ** 2 + (y - v[1]) ** 2 + (z - v[2]) ** 2 < 1e-24
    val = np.where(ru >= 1 - 1e-15, np.where(same, 0.0, np.inf), val)
    return np.maximum(val, 0.0)


def grid_sweep_numpy(v, eps, dist, measure, resolution):
    h = 2.0 / (resolution - 1)
    lo = np.zeros(3, dtype=np.int64)
    hi = np.full(3, resolution - 1, dtype=np.int64)
    rad = box_radius(eps, dist)
    lo = np.maximum(0, np.floor((v - rad + 1) / h).astype(np.int64) - 1)
    hi = np.minimum(resolution - 1, np.ceil((v + rad + 1) / h).astype(np.int64) + 1)
    axes = [-1.0 + np.arange(lo[a], hi[a] + 1) * h for a in range(3)]
    best = (np.inf, np.zeros(3), -np.inf, np.zeros(3))
    n = 0
    r2eps = (2.0 * eps) ** 2 * (1.0 + 1e-12) + 1e-24
    # slab by slab along x keeps memory bounded for the full 201^3 sweep
    y, z = np.meshgrid(axes[1], axes[2], indexing="ij")
    for x0 in axes[0]:
        x = np.full_like(y, x0)
        ok = x * x + y * y + z * z <= 1.0 + 1e-12
        if dist == DIST_TRACE:
            ok &= (x - v[0]) ** 2 + (y - v[1]) ** 2 + (z - v[2]) ** 2 <= r2eps
        else:
            ok &= bloch_relent_numpy(v, x, y, z) <= eps + 1e-12
        if not ok.any():
            continue
        xs, ys, zs = x[ok], y[ok], z[ok]
        c = bloch_measure_numpy(xs, ys, zs, measure)
        n += c.size
        i, j = int(np.argmin(c)), int(np.argmax(c))
        vmin, amin, vmax, amax = best
        if c[i] < vmin:
            vmin, amin = float(c[i]), np.array([xs[i], ys[i], zs[i]])
        if c[j] > vmax:
            vmax, amax = float(c[j]), np.array([xs[j], ys[j], zs[j]])
        best = (vmin, amin, vmax, amax)
    return (n,) + best


def grid_sweep(v, eps, dist, measure, resolution):
    v = np.ascontiguousarray(v, dtype=np.float64)
    if NUMBA_ENABLED:
        return grid_sweep_numba(v, float(eps), int(dist), int(measure), int(resolution))
    return grid_sweep_numpy(v, float(eps), int(dist), int(measure), int(resolution))


@njit
def level_band_min(t, band, measure, resolution):
    """Grid minimum of a measure over Bloch vectors with ``|C_D - t| <= band``.

    ``C_D = |v_xy| / 2`` for qubits.  Returns ``(min, argmin, n_points)``; ``inf`` if
    the band holds no grid point.
    """
    h = 2.0 / (resolution - 1)
    best = np.inf
    arg = np.zeros(3)
    n = 0
    for i in range(resolution):
        x = -1.0 + i * h
        for j in range(resolution):
            y = -1.0 + j * h
            cd = 0.5 * np.sqrt(x * x + y * y)
            if abs(cd - t) > band:
                continue
            for k in range(resolution):
                z = -1.0 + k * h
                if x * x + y * y + z * z > 1.0 + 1e-12:
                    continue
                c = bloch_measure(x, y, z, measure)
                n += 1
                if c < best:
                    best = c
                    arg[0] = x
                    arg[1] = y
                    arg[2] = z
    return best, arg, n


@njit
def image_ball_max(v, eps, a, b, measure, n_axis):
    """Grid maximum of ``C(A u + b)`` over Bloch vectors ``u`` in the trace ball around ``v``.

    The grid covers the bounding box of the ball with ``n_axis`` points per
    axis.  Returns ``(max, argmax image (3), n_points, step)``.
    """
    r = 2.0 * eps
    h = 2.0 * r / (n_axis - 1) if n_axis > 1 else 0.0
    best = -np.inf
    arg = np.zeros(3)
    n = 0
    u = np.zeros(3)
    for i in range(n_axis):
        u[0] = v[0] - r + i * h
        for j in range(n_axis):
            u[1] = v[1] - r + j * h
            for k in range(n_axis):
                u[2] = v[2] - r + k * h
                if u[0] ** 2 + u[1] ** 2 + u[2] ** 2 > 1.0 + 1e-12:
                    continue
                if (u[0] - v[0]) ** 2 + (u[1] - v[1]) ** 2 + (u[2] - v[2]) ** 2 > r * r * (1 + 1e-12):
                    continue
                w0 = a[0, 0] * u[0] + a[0, 1] * u[1] + a[0, 2] * u[2] + b[0]
                w1 = a[1, 0] * u[0] + a[1, 1] * u[1] + a[1, 2] * u[2] + b[1]
                w2 = a[2, 0] * u[0] + a[2, 1] * u[1] + a[2, 2] * u[2] + b[2]
                c = bloch_measure(w0, w1, w2, measure)
                n += 1
                if c > best:
                    best = c
                    arg[0] = w0
                    arg[1] = w1
                    arg[2] = w2
    return best, arg, n, h
