"""Small dense kernels shared by every module.

All routines take and return plain numpy arrays (complex128 matrices,
float64 vectors) so that they compile under numba.  Matrices are tiny
(d <= 16), which is why products are written as explicit loops instead of
going through BLAS.
"""
import numpy as np

from ._accel import njit

LN2 = np.log(2.0)
SUPPORT_CUTOFF = 1e-12


@njit
def jacobi_eigh(a, tol=1e-14, max_sweeps=100):
    """Cyclic complex Jacobi eigensolver for a Hermitian matrix.

    Returns ``(w, v, sweeps)`` with eigenvalues ``w`` in descending order and
    orthonormal eigenvectors in the columns of ``v``.  ``sweeps`` equals
    ``max_sweeps + 1`` when the off-diagonal mass never dropped below
    ``tol * max(1, ||a||_F)``.
    """
    n = a.shape[0]
    A = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            A[i, j] = 0.5 * (a[i, j] + np.conj(a[j, i]))
    V = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        V[i, i] = 1.0
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += A[i, j].real ** 2 + A[i, j].imag ** 2
    scale = max(1.0, np.sqrt(scale))

    sweeps = max_sweeps + 1
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += A[p, q].real ** 2 + A[p, q].imag ** 2
        if np.sqrt(off) <= tol * scale:
            sweeps = sweep
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                ab = abs(b)
                if ab < 1e-300:
                    continue
                ph = b / ab
                cph = np.conj(ph)
                app = A[p, p].real
                aqq = A[q, q].real
                theta = (aqq - app) / (2.0 * ab)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for r in range(n):
                    arp = A[r, p]
                    arq = A[r, q]
                    A[r, p] = c * arp - s * cph * arq
                    A[r, q] = s * arp + c * cph * arq
                    vrp = V[r, p]
                    vrq = V[r, q]
                    V[r, p] = c * vrp - s * cph * vrq
                    V[r, q] = s * vrp + c * cph * vrq
                for r in range(n):
                    apr = A[p, r]
                    aqr = A[q, r]
                    A[p, r] = c * apr - s * ph * aqr
                    A[q, r] = s * apr + c * ph * aqr
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = app - t * ab
                A[q, q] = aqq + t * ab

    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i].real
    order = np.argsort(-w)
    w_sorted = np.empty(n)
    v_sorted = np.empty((n, n), dtype=np.complex128)
    for k in range(n):
        w_sorted[k] = w[order[k]]
        for r in range(n):
            v_sorted[r, k] = V[r, order[k]]
    return w_sorted, v_sorted, sweeps


@njit
def eigvalsh(a):
    w, _, _ = jacobi_eigh(a, 1e-14, 100)
    return w


@njit
def reconstruct(w, v):
    """``v @ diag(w) @ v^dagger``."""
    n = v.shape[0]
    out = np.zeros((n, n), dtype=np.complex128)
    for k in range(w.shape[0]):
        wk = w[k]
        if wk == 0.0:
            continue
        for i in range(n):
            vik = v[i, k] * wk
            for j in range(n):
                out[i, j] += vik * np.conj(v[j, k])
    return out


@njit
def matmul(a, b):
    n, m = a.shape
    p = b.shape[1]
    out = np.zeros((n, p), dtype=np.complex128)
    for i in range(n):
        for k in range(m):
            aik = a[i, k]
            if aik == 0.0:
                continue
            for j in range(p):
                out[i, j] += aik * b[k, j]
    return out


@njit
def dagger(a):
    n, m = a.shape
    out = np.empty((m, n), dtype=np.complex128)
    for i in range(n):
        for j in range(m):
            out[j, i] = np.conj(a[i, j])
    return out


@njit
def frob2(a):
    s = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            s += a[i, j].real ** 2 + a[i, j].imag ** 2
    return s


@njit
def inner_re(a, b):
    """Real Hilbert-Schmidt inner product ``Re Tr(a^dagger b)``."""
    s = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            s += a[i, j].real * b[i, j].real + a[i, j].imag * b[i, j].imag
    return s


@njit
def project_simplex(v, total=1.0):
    """Euclidean projection of ``v`` onto ``{x >= 0, sum(x) = total}`` by sorting."""
    n = v.shape[0]
    u = np.sort(v)[::-1]
    css = 0.0
    theta = 0.0
    for j in range(n):
        css += u[j]
        cand = (css - total) / (j + 1)
        if u[j] - cand > 0.0:
            theta = cand
    out = np.empty(n)
    for i in range(n):
        out[i] = max(v[i] - theta, 0.0)
    return out


@njit
def project_simplex_floor(v, floor):
    """Projection onto ``{x_i >= floor, sum(x) = 1}``."""
    n = v.shape[0]
    shifted = np.empty(n)
    for i in range(n):
        shifted[i] = v[i] - floor
    y = project_simplex(shifted, 1.0 - n * floor)
    for i in range(n):
        y[i] += floor
    return y


@njit
def project_density(m, floor=0.0):
    """Frobenius projection of a Hermitian matrix onto ``{rho >= floor*I, Tr rho = 1}``."""
    w, v, _ = jacobi_eigh(m, 1e-14, 100)
    if floor > 0.0:
        p = project_simplex_floor(w, floor)
    else:
        p = project_simplex(w, 1.0)
    return reconstruct(p, v)


@njit
def entropy_from_probs(p):
    s = 0.0
    for x in p:
        if x > 0.0:
            s -= x * np.log(x)
    return s / LN2


@njit
def vn_entropy(rho):
    w = eigvalsh(rho)
    return entropy_from_probs(w)


@njit
def trace_norm_half(x):
    """Half the trace norm of a Hermitian matrix."""
    w = eigvalsh(x)
    s = 0.0
    for k in range(w.shape[0]):
        s += abs(w[k])
    return 0.5 * s


@njit
def trace_distance(rho, tau):
    return trace_norm_half(rho - tau)


@njit
def relative_entropy(rho, tau, cutoff=SUPPORT_CUTOFF):
    """``S(rho||tau)`` in bits; ``inf`` when supp(rho) is not inside supp(tau)."""
    n = rho.shape[0]
    wr, vr, _ = jacobi_eigh(rho, 1e-14, 100)
    wt, vt, _ = jacobi_eigh(tau, 1e-14, 100)
    s = 0.0
    for i in range(n):
        if wr[i] > 0.0:
            s += wr[i] * np.log(wr[i])
    # rho expressed in the eigenbasis of tau: only the diagonal is needed
    for k in range(n):
        weight = 0.0
        for i in range(n):
            for j in range(n):
                weight += (np.conj(vt[i, k]) * rho[i, j] * vt[j, k]).real
        if wt[k] < cutoff:
            if weight > cutoff:
                return np.inf
            continue
        s -= weight * np.log(wt[k])
    s /= LN2
    if s < 0.0 and s > -1e-12:
        s = 0.0
    return s


@njit
def l1_coherence(rho):
    n = rho.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += abs(rho[i, j])
    return s


@njit
def relent_coherence(rho):
    n = rho.shape[0]
    diag = np.empty(n)
    for i in range(n):
        diag[i] = max(rho[i, i].real, 0.0)
    val = entropy_from_probs(diag) - vn_entropy(rho)
    if val < 0.0:
        val = 0.0
    return val
