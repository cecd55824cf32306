"""States, channels and the basic quantum-information functionals.

Everything here works in a fixed reference basis ``{|i>}``.  Values are
immutable after construction: the underlying arrays are marked read-only.
Logarithms are base 2 throughout.
"""
from __future__ import annotations

import logging
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels as K
from ._ledger import tracked

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
PROB_TOL = 1e-12
NONZERO_TOL = 1e-12
COMPLETENESS_TOL = 1e-10


class ValidationError(ValueError):
    """Input does not satisfy the invariants of the requested object."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


class DensityMatrix:
    """A d x d Hermitian, positive semidefinite, unit-trace matrix.

    Construction validates Hermiticity (1e-12), trace (1e-10) and the
    smallest eigenvalue (-1e-10).  With ``repair=True`` a single repair pass
    symmetrizes, clips negative eigenvalues and renormalizes the trace before
    validating; it is never applied silently.
    """

    __slots__ = ("_m",)

    def __init__(self, matrix, *, repair: bool = False):
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValidationError(f"density matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("density matrix has non-finite entries")
        if repair:
            m = _repair(m)
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise ValidationError(f"matrix is not Hermitian (deviation {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace is {tr!r}, expected 1")
        lam_min = K.eigvalsh(m)[-1]
        if lam_min < -PSD_TOL:
            raise ValidationError(f"matrix is not PSD (min eigenvalue {lam_min:.3e})")
        self._m = _frozen(m)

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._m
        return self._m.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self._m.shape == other._m.shape and np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash(self._m.tobytes())

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"

    def purity(self) -> float:
        return float(np.real(np.vdot(self._m, self._m)))

    @classmethod
    def from_pure(cls, amplitudes) -> "DensityMatrix":
        psi = PureState(amplitudes).amplitudes
        return cls(np.outer(psi, psi.conj()), repair=True)

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls(np.eye(d, dtype=np.complex128) / d)


def _repair(m: np.ndarray) -> np.ndarray:
    m = 0.5 * (m + m.conj().T)
    w, v, _ = K.jacobi_eigh(m)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0.0:
        raise ValidationError("cannot repair a matrix with no positive spectrum")
    w = w / w.sum()
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


class IncoherentState:
    """A state diagonal in the reference basis, stored as its probability vector."""

    __slots__ = ("_p",)

    def __init__(self, probs):
        p = np.asarray(probs, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise ValidationError("incoherent state needs a non-empty probability vector")
        if not np.all(np.isfinite(p)) or np.any(p < 0.0):
            raise ValidationError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValidationError(f"probabilities sum to {p.sum()!r}")
        self._p = _frozen(p)

    @property
    def probs(self) -> np.ndarray:
        return self._p

    @property
    def dim(self) -> int:
        return self._p.size

    def to_density(self) -> DensityMatrix:
        return DensityMatrix(np.diag(self._p).astype(np.complex128))

    def __eq__(self, other):
        if not isinstance(other, IncoherentState):
            return NotImplemented
        return np.array_equal(self._p, other._p)

    def __hash__(self):
        return hash(self._p.tobytes())

    def __repr__(self):
        return f"IncoherentState({np.array2string(self._p, precision=4)})"

    @classmethod
    def from_unnormalized(cls, weights) -> "IncoherentState":
        w = np.clip(np.asarray(weights, dtype=np.float64), 0.0, None)
        return cls(w / w.sum())


class PureState:
    """A unit vector in C^d."""

    __slots__ = ("_psi",)

    def __init__(self, amplitudes, *, normalize: bool = False):
        psi = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        if psi.size < 1 or not np.all(np.isfinite(psi)):
            raise ValidationError("pure state needs finite amplitudes")
        norm = np.linalg.norm(psi)
        if normalize:
            if norm == 0.0:
                raise ValidationError("cannot normalize the zero vector")
            psi = psi / norm
        elif abs(norm - 1.0) > PROB_TOL:
            raise ValidationError(f"amplitudes have norm {norm!r}")
        self._psi = _frozen(psi)

    @property
    def amplitudes(self) -> np.ndarray:
        return self._psi

    @property
    def dim(self) -> int:
        return self._psi.size

    def to_density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self._psi, self._psi.conj()), repair=True)

    def __repr__(self):
        return f"PureState(dim={self.dim})"


class KrausChannel:
    """A CPTP map given by Kraus operators ``K_k`` (each d_out x d_in).

    ``incoherent`` is the structural certificate: every column of every
    Kraus operator has at most one entry with modulus above 1e-12.  Passing
    ``incoherent=True`` for operators that fail the test raises.
    """

    __slots__ = ("_ops", "_incoherent", "label")

    def __init__(self, operators: Sequence, incoherent: bool | None = None, label: str = ""):
        ops = [np.asarray(k, dtype=np.complex128) for k in operators]
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise ValidationError("Kraus operators must be 2-D with a common shape")
        d_in = shape[1]
        completeness = sum(k.conj().T @ k for k in ops)
        dev = np.max(np.abs(completeness - np.eye(d_in)))
        if dev > COMPLETENESS_TOL:
            raise ValidationError(f"Kraus set is not trace preserving (deviation {dev:.3e})")
        structural = _columns_single_nonzero(ops)
        if incoherent and not structural:
            raise ValidationError("Kraus operators fail the incoherence column test")
        self._ops = tuple(_frozen(k) for k in ops)
        self._incoherent = structural
        self.label = label

    @property
    def operators(self) -> tuple:
        return self._ops

    @property
    def incoherent(self) -> bool:
        return self._incoherent

    @property
    def dims(self) -> tuple[int, int]:
        d_out, d_in = self._ops[0].shape
        return d_out, d_in

    def __call__(self, rho) -> DensityMatrix:
        return apply_kraus(self, rho)

    def __len__(self):
        return len(self._ops)

    def __repr__(self):
        tag = f" {self.label!r}" if self.label else ""
        return f"KrausChannel{tag}(n={len(self._ops)}, dims={self.dims}, incoherent={self._incoherent})"

    def compose(self, first: "KrausChannel") -> "KrausChannel":
        """The channel ``self o first``."""
        ops = [a @ b for a in self._ops for b in first._ops]
        ops = [k for k in ops if np.max(np.abs(k)) > 0.0] or [ops[0]]
        return KrausChannel(ops, label=f"{self.label}*{first.label}".strip("*"))


def _columns_single_nonzero(ops) -> bool:
    for k in ops:
        if np.any((np.abs(k) > NONZERO_TOL).sum(axis=0) > 1):
            return False
    return True


def as_matrix(rho) -> np.ndarray:
    """The complex matrix behind a DensityMatrix, IncoherentState, PureState or array."""
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    if isinstance(rho, IncoherentState):
        return np.diag(rho.probs).astype(np.complex128)
    if isinstance(rho, PureState):
        psi = rho.amplitudes
        return np.outer(psi, psi.conj())
    return np.asarray(rho, dtype=np.complex128)


def as_density(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, (IncoherentState, PureState)):
        return rho.to_density()
    return DensityMatrix(rho)


def _same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")


# --- spectra and distances -------------------------------------------------


@tracked
def hermitian_eig(m, tol: float = 1e-14, max_sweeps: int = 100):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues in descending
    order and eigenvectors as orthonormal columns.
    """
    a = as_matrix(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > 1e-10:
        raise ValidationError(f"matrix is not Hermitian (deviation {dev:.3e})")
    w, v, sweeps = K.jacobi_eigh(np.ascontiguousarray(a), tol, max_sweeps)
    if sweeps > max_sweeps:
        logger.warning("Jacobi eigensolver hit %d sweeps without converging", max_sweeps)
    return w, v


@tracked
def trace_distance(rho, tau) -> float:
    """Half the sum of absolute eigenvalues of ``rho - tau``."""
    a, b = as_matrix(rho), as_matrix(tau)
    _same_dim(a, b)
    return float(min(max(K.trace_distance(a, b), 0.0), 1.0))


@tracked
def relative_entropy(rho, tau) -> float:
    """``S(rho||tau) = Tr rho (log2 rho - log2 tau)``; ``inf`` off support."""
    a, b = as_matrix(rho), as_matrix(tau)
    _same_dim(a, b)
    return float(K.relative_entropy(a, b, K.SUPPORT_CUTOFF))


@tracked
def von_neumann_entropy(rho) -> float:
    return float(K.vn_entropy(as_matrix(rho)))


@tracked
def dephase(rho) -> IncoherentState:
    """Diagonal part of ``rho`` in the reference basis."""
    if isinstance(rho, IncoherentState):
        return rho
    diag = np.clip(np.real(np.diag(as_matrix(rho))), 0.0, None)
    return IncoherentState(diag / diag.sum())


@tracked
def tensor(a, b) -> DensityMatrix:
    return DensityMatrix(np.kron(as_matrix(a), as_matrix(b)), repair=True)


@tracked
def mixing_channel(rho, delta, p: float) -> DensityMatrix:
    """``(1 - p) rho + p delta`` for an incoherent ``delta``."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"mixing probability {p!r} outside [0, 1]")
    a = as_matrix(rho)
    d = as_matrix(delta)
    _same_dim(a, d)
    return DensityMatrix((1.0 - p) * a + p * d, repair=True)


def mixing_kraus(delta, p: float) -> KrausChannel:
    """Kraus form of the mixing channel: ``sqrt(1-p) I`` and ``sqrt(p delta_i) |i><j|``."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"mixing probability {p!r} outside [0, 1]")
    probs = dephase(delta).probs if not isinstance(delta, IncoherentState) else delta.probs
    d = probs.size
    ops = [np.sqrt(1.0 - p) * np.eye(d, dtype=np.complex128)]
    for i in range(d):
        if probs[i] * p == 0.0:
            continue
        for j in range(d):
            k = np.zeros((d, d), dtype=np.complex128)
            k[i, j] = np.sqrt(p * probs[i])
            ops.append(k)
    return KrausChannel(ops, label=f"mix(p={p:g})")


# --- channels --------------------------------------------------------------


class Branch(NamedTuple):
    index: int
    prob: float
    state: DensityMatrix


@tracked
def apply_kraus(ch: KrausChannel, rho) -> DensityMatrix:
    a = as_matrix(rho)
    d_out, d_in = ch.dims
    if a.shape != (d_in, d_in):
        raise ValidationError(f"channel expects dimension {d_in}, got {a.shape}")
    out = np.zeros((d_out, d_out), dtype=np.complex128)
    for k in ch.operators:
        out += k @ a @ k.conj().T
    return DensityMatrix(out, repair=True)


@tracked
def selective_apply(ch: KrausChannel, rho, cutoff: float = 1e-12) -> list[Branch]:
    """Post-measurement branches ``(p_k, K_k rho K_k^dagger / p_k)``.

    Branches with ``p_k < cutoff`` are dropped; their indices are logged and
    absent from the returned list (check ``Branch.index``).
    """
    a = as_matrix(rho)
    d_out, d_in = ch.dims
    if a.shape != (d_in, d_in):
        raise ValidationError(f"channel expects dimension {d_in}, got {a.shape}")
    branches, dropped, total = [], [], 0.0
    for idx, k in enumerate(ch.operators):
        out = k @ a @ k.conj().T
        p = float(np.trace(out).real)
        total += p
        if p < cutoff:
            dropped.append(idx)
            continue
        branches.append(Branch(idx, p, DensityMatrix(out / p, repair=True)))
    if abs(total - 1.0) > 1e-10:
        raise ValidationError(f"branch probabilities sum to {total!r}")
    if dropped:
        logger.debug("selective_apply dropped negligible branches %s", dropped)
    return branches


@tracked
def is_incoherent_channel(ch: KrausChannel) -> bool:
    """True iff every Kraus column has at most one nonzero entry."""
    ops = ch.operators if isinstance(ch, KrausChannel) else [np.asarray(k) for k in ch]
    return _columns_single_nonzero(ops)


def dephasing_channel(d: int) -> KrausChannel:
    ops = []
    for i in range(d):
        k = np.zeros((d, d), dtype=np.complex128)
        k[i, i] = 1.0
        ops.append(k)
    return KrausChannel(ops, label="dephase")


def partial_dephasing_channel(d: int, q: float) -> KrausChannel:
    """``(1 - q) rho + q diag(rho)``."""
    if not 0.0 <= q <= 1.0:
        raise ValidationError(f"dephasing strength {q!r} outside [0, 1]")
    ops = [np.sqrt(1.0 - q) * np.eye(d, dtype=np.complex128)]
    ops += [np.sqrt(q) * k for k in dephasing_channel(d).operators]
    return KrausChannel(ops, label=f"dephase(q={q:g})")


def unitary_channel(u) -> KrausChannel:
    u = np.asarray(u, dtype=np.complex128)
    return KrausChannel([u], label="unitary")


def permutation_matrix(perm: Sequence[int], phases: Sequence[float] | None = None) -> np.ndarray:
    """``sum_j exp(i phase_j) |perm[j]><j|``."""
    d = len(perm)
    u = np.zeros((d, d), dtype=np.complex128)
    ph = np.zeros(d) if phases is None else np.asarray(phases, dtype=np.float64)
    for j, i in enumerate(perm):
        u[i, j] = np.exp(1j * ph[j])
    return u


# --- sampling --------------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@tracked
def random_density(d: int, rank: int | None = None, seed=None) -> DensityMatrix:
    """Ginibre sample ``G G^dagger / Tr`` with ``G`` of shape (d, rank)."""
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise ValidationError(f"rank must lie in [1, {d}], got {rank}")
    rng = _rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, repair=True)


@tracked
def random_pure(d: int, seed=None) -> PureState:
    rng = _rng(seed)
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(psi, normalize=True)


@tracked
def random_incoherent(d: int, seed=None) -> IncoherentState:
    rng = _rng(seed)
    return IncoherentState.from_unnormalized(rng.dirichlet(np.ones(d)))


def random_incoherent_channel(d: int, n_kraus: int = 3, seed=None) -> KrausChannel:
    """Random incoherent Kraus set.

    ``n_kraus`` operators of the form permutation x diagonal share the weight
    of each input column with d single-entry operators ``|f(j)><j|`` that
    collapse coherence.  Every column carries a single nonzero entry.
    """
    rng = _rng(seed)
    collapse = rng.uniform(0.0, 0.5, size=d)
    amp = rng.standard_normal((n_kraus, d)) + 1j * rng.standard_normal((n_kraus, d))
    amp /= np.linalg.norm(amp, axis=0)
    amp *= np.sqrt(1.0 - collapse)
    ops = []
    for k in range(n_kraus):
        ops.append(permutation_matrix(rng.permutation(d)) @ np.diag(amp[k]))
    targets = rng.integers(0, d, size=d)
    for j in range(d):
        op = np.zeros((d, d), dtype=np.complex128)
        op[targets[j], j] = np.sqrt(collapse[j])
        ops.append(op)
    return KrausChannel(ops, label="random-incoherent")


def random_channel(d: int, n_kraus: int = 3, seed=None) -> KrausChannel:
    """Random CPTP map from a Haar-like isometry C^d -> C^(d n_kraus)."""
    rng = _rng(seed)
    g = rng.standard_normal((d * n_kraus, d)) + 1j * rng.standard_normal((d * n_kraus, d))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    ops = [q[k * d:(k + 1) * d, :] for k in range(n_kraus)]
    return KrausChannel(ops, label="random")


def maximally_coherent(d: int, m: int | None = None) -> PureState:
    """``|Psi_M> = M^{-1/2} sum_{i<M} |i>`` embedded in dimension d."""
    m = d if m is None else m
    if not 1 <= m <= d:
        raise ValidationError(f"need 1 <= M <= d, got M={m}, d={d}")
    psi = np.zeros(d, dtype=np.complex128)
    psi[:m] = 1.0 / np.sqrt(m)
    return PureState(psi, normalize=True)


def basis_state(d: int, i: int) -> DensityMatrix:
    m = np.zeros((d, d), dtype=np.complex128)
    m[i, i] = 1.0
    return DensityMatrix(m)


def bloch_to_density(v) -> np.ndarray:
    x, y, z = v
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]], dtype=np.complex128)


def density_to_bloch(rho) -> np.ndarray:
    m = as_matrix(rho)
    return np.array([2 * m[0, 1].real, -2 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real])
