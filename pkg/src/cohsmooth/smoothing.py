"""Smoothed coherence: minimum and maximum of a measure over a ball of states.

Qubits are solved exactly by the planar reduction in ``_qubit`` and
cross-checked against the brute-force Bloch grid of ``_oracle``.  Larger
dimensions use the Lagrangian solver of ``_smooth`` for the minimum (with a
certified lower bound) and multi-start ascent for the maximum.

Minimum values are always attained by the returned witness, so they are
upper estimates of the true minimum; maximum values are lower estimates.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import _kernels as K
from . import _oracle, _qubit, _smooth
from .measures import (
    MeasureKind,
    TDCConfig,
    c_trace_distance,
    coherence,
    max_coherence,
)
from .states import (
    DensityMatrix,
    ValidationError,
    as_density,
    bloch_to_density,
    density_to_bloch,
    random_density,
    random_pure,
    relative_entropy,
    tensor,
    trace_distance,
    basis_state,
)
from ._ledger import tracked

logger = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-8
ORACLE_AGREEMENT = 2e-3

ORACLE_EXACT = "oracle-exact"
HEURISTIC = "heuristic"
EXACT = "exact"

_MEASURE_CODE = {
    MeasureKind.L1: 0,
    MeasureKind.RELATIVE_ENTROPY: 1,
    MeasureKind.TRACE_DISTANCE: 2,
}


@dataclass(frozen=True)
class BallSpec:
    """``B_eps(rho)``: states within ``epsilon`` of the center.

    For relative-entropy balls membership reads ``S(rho || tau) <= epsilon``
    with the center in the first slot.
    """

    distance: str = "trace"
    epsilon: float = 0.0

    def __post_init__(self):
        key = str(self.distance).strip().lower()
        if key in ("trace", "tr", "trace-distance"):
            key = "trace"
        elif key in ("relative-entropy", "relent", "relative_entropy", "entropy"):
            key = "relative-entropy"
        else:
            raise ValidationError(f"unknown distance kind {self.distance!r}")
        eps = float(self.epsilon)
        if not math.isfinite(eps) or eps < 0.0:
            raise ValidationError(f"epsilon must be a finite number >= 0, got {self.epsilon!r}")
        object.__setattr__(self, "distance", key)
        object.__setattr__(self, "epsilon", eps)

    @property
    def code(self) -> int:
        return _smooth.DIST_TRACE if self.distance == "trace" else _smooth.DIST_RELENT

    def dist(self, rho, tau) -> float:
        if self.distance == "trace":
            return trace_distance(rho, tau)
        return relative_entropy(rho, tau)

    def contains(self, rho, tau, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.dist(rho, tau) <= self.epsilon + tol


@dataclass(frozen=True)
class SmoothConfig:
    """Solver settings; every field is recorded in the reports that use it."""

    seed: int = 0
    n_random: int = 8
    oracle: bool = True
    oracle_resolution: int = 201
    qubit_scan: int = 720
    qubit_refine: int = 4
    mus: tuple = (1e-3, 1e-4, 1e-5, 1e-6)
    inner_iters: int = 200
    max_outer: int = 60
    tol: float = 2e-4
    ascent_iters: int = 150
    ascent_step: float = 0.05
    tdc: TDCConfig = field(default_factory=TDCConfig)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mus"] = list(self.mus)
        out["tdc"]["polish_mus"] = list(self.tdc.polish_mus)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SmoothConfig":
        data = dict(data)
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValidationError(f"unknown solver settings: {sorted(unknown)}")
        if "tdc" in data:
            tdc = dict(data["tdc"])
            bad = set(tdc) - {f.name for f in fields(TDCConfig)}
            if bad:
                raise ValidationError(f"unknown TDC settings: {sorted(bad)}")
            if "polish_mus" in tdc:
                tdc["polish_mus"] = tuple(float(x) for x in tdc["polish_mus"])
            data["tdc"] = TDCConfig(**tdc)
        if "mus" in data:
            data["mus"] = tuple(float(x) for x in data["mus"])
        cfg = cls(**data)
        if cfg.oracle_resolution < 3 or cfg.qubit_scan < 8 or cfg.tol <= 0 or cfg.n_random < 0:
            raise ValidationError("solver settings out of range")
        return cfg


@dataclass(frozen=True)
class OracleResult:
    min: float
    max: float
    argmin: DensityMatrix
    argmax: DensityMatrix
    grid_error_min: float
    grid_error_max: float
    resolution: int
    n_points: int

    @property
    def grid_error(self) -> float:
        return max(self.grid_error_min, self.grid_error_max)

    @property
    def witnesses(self):
        return self.argmin, self.argmax


@dataclass(frozen=True)
class SmoothResult:
    value: float
    witness: DensityMatrix
    mode: str
    certification: str
    gap_estimate: float
    epsilon: float
    distance: str
    measure: str
    lower_bound: float | None = None
    upper_bound: float | None = None
    flags: tuple = ()
    oracle: dict | None = None

    def to_dict(self) -> dict:
        from .io import matrix_to_json

        out = {
            "mode": self.mode,
            "value": self.value,
            "epsilon": self.epsilon,
            "distance": self.distance,
            "measure": self.measure,
            "certification": self.certification,
            "gap_estimate": self.gap_estimate,
            "witness": matrix_to_json(self.witness.matrix),
        }
        if self.lower_bound is not None:
            out["lower_bound"] = self.lower_bound
        if self.upper_bound is not None:
            out["upper_bound"] = self.upper_bound
        if self.flags:
            out["flags"] = list(self.flags)
        if self.oracle is not None:
            out["oracle"] = self.oracle
        return out

    @property
    def interval(self) -> tuple[float, float]:
        """Bracket ``[lo, hi]`` believed to contain the true optimum."""
        if self.mode == "min":
            lo = self.lower_bound if self.lower_bound is not None else self.value - self.gap_estimate
            return max(lo, 0.0), self.value
        hi = self.upper_bound if self.upper_bound is not None else self.value + self.gap_estimate
        return self.value, hi


def _measure_code(measure) -> tuple[MeasureKind, int]:
    kind = MeasureKind.parse(measure)
    if kind not in _MEASURE_CODE:
        raise ValidationError("smoothing needs a measure defined on mixed states "
                              f"(got {kind.tag})")
    return kind, _MEASURE_CODE[kind]


def _as_ball(ball) -> BallSpec:
    if isinstance(ball, BallSpec):
        return ball
    if isinstance(ball, (int, float)):
        return BallSpec("trace", ball)
    if isinstance(ball, dict):
        return BallSpec(ball.get("distance", "trace"), ball.get("epsilon", 0.0))
    distance, eps = ball
    return BallSpec(distance, eps)


def _to_state(m) -> DensityMatrix:
    m = np.asarray(m, dtype=np.complex128)
    m = 0.5 * (m + m.conj().T)
    m = m / np.trace(m).real
    try:
        return DensityMatrix(m)
    except ValidationError:
        return DensityMatrix(m, repair=True)


def _value(tau, kind, cfg) -> float:
    if kind is MeasureKind.TRACE_DISTANCE:
        if tau.shape[0] == 2:
            return float(abs(tau[0, 1]))
        return c_trace_distance(tau, cfg.tdc).value
    return float(coherence(tau, kind))


# --- qubit oracle -------------------------------------------------------------


def _relent_grid_error(v, kind, h, sense_max) -> float:
    """Local Lipschitz estimate of C_r in Bloch coordinates around ``v`` times sqrt(3) h."""
    code = _MEASURE_CODE[kind]
    best = 0.0
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        hi, lo = v + e, v - e
        # stay inside the unit ball for the finite difference
        for p in (hi, lo):
            r = np.linalg.norm(p)
            if r > 1.0:
                p *= (1.0 - 1e-12) / r
        fh = _oracle.bloch_measure(hi[0], hi[1], hi[2], code)
        fl = _oracle.bloch_measure(lo[0], lo[1], lo[2], code)
        best += ((fh - fl) / (np.linalg.norm(hi - lo) + 1e-300)) ** 2
    # factor 2 covers the variation of the gradient across one cell
    return 2.0 * math.sqrt(best) * math.sqrt(3.0) * h


@tracked
def qubit_bloch_oracle(rho, ball, measure, resolution: int = 201) -> OracleResult:
    """Exhaustive Bloch-grid optimum of the measure over the ball.

    The grid has ``resolution`` points per axis on [-1, 1].  Membership and
    measure use Bloch closed forms.  ``grid_error`` is Lipschitz constant x
    sqrt(3) x grid step (a local estimate for the relative entropy of
    coherence, whose gradient is unbounded near pure states).
    """
    rho = as_density(rho)
    if rho.dim != 2:
        raise ValidationError(f"Bloch oracle needs a qubit, got d={rho.dim}")
    ball = _as_ball(ball)
    kind, code = _measure_code(measure)
    if resolution < 3:
        raise ValidationError("oracle resolution must be at least 3")
    v = density_to_bloch(rho)
    h = 2.0 / (resolution - 1)
    n, vmin, amin, vmax, amax = _oracle.grid_sweep(v, ball.epsilon, ball.code, code, resolution)
    c_rho = float(_oracle.bloch_measure(v[0], v[1], v[2], code))
    # the center itself is always a member even when it falls between grid points
    if n == 0 or c_rho < vmin:
        vmin, amin = c_rho, v.copy()
    if n == 0 or c_rho > vmax:
        vmax, amax = c_rho, v.copy()
    if kind is MeasureKind.RELATIVE_ENTROPY:
        err_min = _relent_grid_error(np.asarray(amin, float), kind, h, False)
        err_max = _relent_grid_error(np.asarray(amax, float), kind, h, True)
    else:
        lip = 1.0 if kind is MeasureKind.L1 else 0.5
        err_min = err_max = lip * math.sqrt(3.0) * h
    if ball.epsilon == 0.0:
        err_min = err_max = 0.0
    return OracleResult(float(vmin), float(vmax), _to_state(bloch_to_density(amin)),
                        _to_state(bloch_to_density(amax)), float(err_min), float(err_max),
                        int(resolution), int(n))


# --- qubit exact path ---------------------------------------------------------


def _qubit_optimize(rho, ball, kind, code, mode, cfg):
    m = np.ascontiguousarray(rho.matrix)
    v = density_to_bloch(rho)
    cs = float(math.hypot(v[0], v[1]))
    phi = float(math.atan2(v[1], v[0]))
    cz = float(v[2])
    sense = 1.0 if mode == "min" else -1.0
    best, s, z, bracket = _qubit.qubit_boundary_optimize(
        m, cs, cz, phi, ball.epsilon, ball.code, code, sense, cfg.qubit_scan, cfg.qubit_refine)
    tau = _qubit.plane_density(s, z, phi)
    return sense * best, tau, bracket


def _certify_qubit(rho, ball, kind, mode, value, cfg, flags):
    if not cfg.oracle:
        return HEURISTIC, None
    orc = qubit_bloch_oracle(rho, ball, kind, cfg.oracle_resolution)
    info = {"min": orc.min, "max": orc.max, "grid_error_min": orc.grid_error_min,
            "grid_error_max": orc.grid_error_max, "resolution": orc.resolution}
    if mode == "min":
        ok = orc.min - orc.grid_error_min - 1e-9 <= value <= orc.min + ORACLE_AGREEMENT
    else:
        ok = orc.max - ORACLE_AGREEMENT <= value <= orc.max + orc.grid_error_max + 1e-9
    if not ok:
        flags.append("oracle-disagreement")
        logger.warning("qubit solver %s value %.6g outside the oracle bracket %s", mode, value, info)
        return HEURISTIC, info
    return ORACLE_EXACT, info


# --- public API ---------------------------------------------------------------


def _result(value, witness, mode, cert, gap, ball, kind, **kw) -> SmoothResult:
    return SmoothResult(float(value), _to_state(witness), mode, cert, float(max(gap, 0.0)),
                        ball.epsilon, ball.distance, kind.tag, **kw)


def _zero_witness(rho, ball, cfg):
    """An incoherent member of the ball, or None."""
    m = rho.matrix
    if ball.distance == "trace":
        if rho.dim == 2:
            diag = np.diag(np.real(np.diag(m))).astype(np.complex128)
            return diag if trace_distance(m, diag) <= ball.epsilon else None
        res = c_trace_distance(m, cfg.tdc)
        if res.value <= ball.epsilon:
            return res.witness.to_density().matrix
        return None
    diag = np.diag(np.real(np.diag(m))).astype(np.complex128)
    if relative_entropy(m, diag) <= ball.epsilon:
        return diag
    return None


@tracked
def smooth_min(rho, ball, measure, config: SmoothConfig | None = None) -> SmoothResult:
    """Smallest value of ``measure`` over ``B_eps(rho)``.

    The value is attained by ``witness`` and is therefore an upper estimate;
    ``lower_bound`` carries the certified lower side where available.
    """
    cfg = config or SmoothConfig()
    rho = as_density(rho)
    ball = _as_ball(ball)
    kind, code = _measure_code(measure)
    m = rho.matrix
    c_rho = _value(m, kind, cfg)
    if ball.epsilon == 0.0:
        return _result(c_rho, m, "min", EXACT, 0.0, ball, kind, lower_bound=c_rho)
    zero = _zero_witness(rho, ball, cfg)
    if zero is not None:
        return _result(0.0, zero, "min", EXACT, 0.0, ball, kind, lower_bound=0.0)
    flags: list[str] = []
    if rho.dim == 2:
        value, tau, bracket = _qubit_optimize(rho, ball, kind, code, "min", cfg)
        if c_rho < value:
            value, tau = c_rho, m
        cert, info = _certify_qubit(rho, ball, kind, "min", value, cfg, flags)
        gap = bracket + 1e-9
        return _result(value, tau, "min", cert, gap, ball, kind, lower_bound=value - gap,
                       flags=tuple(flags), oracle=info)
    return _generic_min(rho, ball, kind, code, c_rho, cfg, flags)


def _start_candidates(rho, ball, kind, cfg):
    m = np.ascontiguousarray(rho.matrix)
    d = rho.dim
    cands = [m.copy()]
    if ball.distance == "trace":
        tdc = c_trace_distance(m, cfg.tdc)
        p = min(ball.epsilon / tdc.value, 1.0)
        delta = tdc.witness.probs
        cands.append((1 - p) * m + p * np.diag(delta))
    diag = np.diag(np.real(np.diag(m))).astype(np.complex128)
    cands.append(_smooth.pull_into_ball(m, diag, ball.epsilon, ball.code))
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.n_random):
        sigma = np.ascontiguousarray(random_density(d, seed=rng).matrix)
        cands.append(_smooth.pull_into_ball(m, sigma, ball.epsilon, ball.code))
    return cands


def _generic_min(rho, ball, kind, code, c_rho, cfg, flags):
    m = np.ascontiguousarray(rho.matrix)
    d = rho.dim
    best_val, best_x, best_d = np.inf, None, None
    for x in _start_candidates(rho, ball, kind, cfg):
        x = np.ascontiguousarray(x)
        dl = np.ascontiguousarray(np.clip(np.real(np.diag(x)), 0.0, None))
        if kind is MeasureKind.TRACE_DISTANCE:
            dl = c_trace_distance(x, cfg.tdc).witness.probs.copy()
        val = _smooth.measure_exact(x, dl, code)
        if val < best_val:
            best_val, best_x, best_d = val, x, dl
    floor = _smooth.LOG_FLOOR if (code == 1 or ball.code == 1) else 0.0
    x0 = best_x
    if floor > 0.0:
        x0 = np.ascontiguousarray(K.project_density(best_x, floor))
        if _smooth.dist_exact(m, x0, ball.code) > ball.epsilon:
            x0 = np.ascontiguousarray(_smooth.pull_into_ball(m, x0, ball.epsilon, ball.code))
        v0 = _smooth.measure_exact(x0, best_d, code)
        if v0 > best_val:
            x0 = best_x
        else:
            best_val = v0
    mus = np.asarray(cfg.mus, dtype=np.float64)
    tau, dl, ub, lb, steps = _smooth.smooth_min_kernel(
        m, ball.epsilon, code, ball.code, x0, np.ascontiguousarray(best_d), best_val,
        mus, cfg.inner_iters, cfg.max_outer, cfg.tol, floor)
    tau = _to_state(tau).matrix
    value = ub
    if kind is not MeasureKind.TRACE_DISTANCE:
        value = _smooth.measure_exact(np.ascontiguousarray(tau), dl, code)
    else:
        # the joint variable only bounds C_D(witness) from above; re-solve it
        value = min(value, c_trace_distance(tau, cfg.tdc).value)
    lb = max(min(lb, value), 0.0)
    gap = value - lb
    if gap > 10 * cfg.tol:
        flags.append("gap-above-tolerance")
        logger.warning("smoothed minimum stopped with certified gap %.3e after %d steps", gap, steps)
    if ball.dist(m, tau) > ball.epsilon + MEMBERSHIP_TOL:
        raise RuntimeError("internal error: smoothing witness left the ball")
    return _result(value, tau, "min", HEURISTIC, gap, ball, kind, lower_bound=lb,
                   flags=tuple(flags))


@tracked
def smooth_min_relent_ball(rho, epsilon: float, config: SmoothConfig | None = None) -> SmoothResult:
    """Relative entropy of coherence minimized over ``{tau : S(rho||tau) <= eps}``.

    Instances outside the regime ``eps <= C_r`` are flagged, not rejected.
    """
    rho = as_density(rho)
    ball = BallSpec("relative-entropy", epsilon)
    res = smooth_min(rho, ball, MeasureKind.RELATIVE_ENTROPY, config)
    flags = list(res.flags)
    if K.eigvalsh(np.ascontiguousarray(rho.matrix))[-1] < 1e-12:
        flags.append("rank-deficient-center")
    c_r = coherence(rho, MeasureKind.RELATIVE_ENTROPY)
    if ball.epsilon > c_r:
        flags.append("epsilon-exceeds-center-coherence")
    if ball.epsilon > res.value:
        flags.append("epsilon-exceeds-witness-coherence")
    if flags == list(res.flags):
        return res
    return SmoothResult(res.value, res.witness, res.mode, res.certification, res.gap_estimate,
                        res.epsilon, res.distance, res.measure, res.lower_bound,
                        res.upper_bound, tuple(flags), res.oracle)


def _max_upper_bound(c_rho, ball, kind, d) -> float:
    cap = max_coherence(kind, d) if kind is not MeasureKind.TRACE_DISTANCE else 1.0 - 1.0 / d
    radius = ball.epsilon
    if ball.distance != "trace":
        # Pinsker: trace distance <= sqrt(S ln2 / 2) with S in bits
        radius = math.sqrt(ball.epsilon * math.log(2.0) / 2.0)
    if kind is MeasureKind.L1:
        return min(cap, c_rho + 2.0 * (d - 1) * radius)
    if kind is MeasureKind.TRACE_DISTANCE:
        return min(cap, c_rho + radius)
    return cap


def _probe_states(rho, cfg):
    """Pure states pointing toward maximal coherence in the phases of ``rho``."""
    m = rho.matrix
    d = rho.dim
    w, v, _ = K.jacobi_eigh(np.ascontiguousarray(m), 1e-14, 100)
    lead = v[:, 0]
    phases = np.exp(1j * np.angle(np.where(np.abs(lead) > 1e-12, lead, 1.0)))
    order = np.argsort(-np.abs(lead), kind="stable")
    probes = []
    for size in range(2, d + 1):
        psi = np.zeros(d, dtype=np.complex128)
        idx = order[:size]
        psi[idx] = phases[idx] / math.sqrt(size)
        probes.append(np.outer(psi, psi.conj()))
    probes.append(np.outer(lead, lead.conj()))
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.n_random):
        psi = random_pure(d, seed=rng).amplitudes
        probes.append(np.outer(psi, psi.conj()))
    return probes


@tracked
def smooth_max(rho, ball, measure, config: SmoothConfig | None = None) -> SmoothResult:
    """Largest value of ``measure`` over ``B_eps(rho)``; a lower estimate beyond qubits."""
    cfg = config or SmoothConfig()
    rho = as_density(rho)
    ball = _as_ball(ball)
    kind, code = _measure_code(measure)
    m = np.ascontiguousarray(rho.matrix)
    c_rho = _value(m, kind, cfg)
    if ball.epsilon == 0.0:
        return _result(c_rho, m, "max", EXACT, 0.0, ball, kind, upper_bound=c_rho)
    flags: list[str] = []
    d = rho.dim
    if d == 2:
        value, tau, bracket = _qubit_optimize(rho, ball, kind, code, "max", cfg)
        if c_rho > value:
            value, tau = c_rho, m
        cert, info = _certify_qubit(rho, ball, kind, "max", value, cfg, flags)
        gap = bracket + 1e-9
        return _result(value, tau, "max", cert, gap, ball, kind, upper_bound=value + gap,
                       flags=tuple(flags), oracle=info)

    upper = _max_upper_bound(c_rho, ball, kind, d)
    floor = _smooth.LOG_FLOOR if ball.code == 1 else 0.0
    best_val, best_x = c_rho, m
    for probe in _probe_states(rho, cfg):
        start = probe
        if floor > 0.0:
            start = K.project_density(np.ascontiguousarray(probe), floor)
        start = np.ascontiguousarray(_smooth.pull_into_ball(m, np.ascontiguousarray(start),
                                                            ball.epsilon, ball.code))
        x, _ = _smooth.smooth_max_ascent(m, ball.epsilon, code, ball.code, start,
                                         cfg.ascent_iters, cfg.ascent_step, floor)
        for cand in (start, x):
            if kind is MeasureKind.TRACE_DISTANCE:
                r = c_trace_distance(cand, cfg.tdc)
                val = r.value - r.gap
            else:
                val = _smooth.measure_exact(cand, np.zeros(d), code)
            if val > best_val:
                best_val, best_x = val, cand
    if ball.dist(m, best_x) > ball.epsilon + MEMBERSHIP_TOL:
        raise RuntimeError("internal error: smoothing witness left the ball")
    return _result(best_val, best_x, "max", HEURISTIC, upper - best_val, ball, kind,
                   upper_bound=upper, flags=tuple(flags))


@tracked
def tensor_invariance_check(rho, ball, measure, config: SmoothConfig | None = None) -> dict:
    """Compare the smoothed minimum of ``|0><0| (x) rho`` with that of ``rho``."""
    rho = as_density(rho)
    ball = _as_ball(ball)
    kind, _ = _measure_code(measure)
    ext = tensor(basis_state(2, 0), rho)
    right = smooth_min(rho, ball, kind, config)
    left = smooth_min(ext, ball, kind, config)
    lo_l, hi_l = left.interval
    lo_r, hi_r = right.interval
    return {
        "left": left.value,
        "right": right.value,
        "abs_diff": abs(left.value - right.value),
        # worst case separation allowed by the two brackets
        "max_abs_diff": max(hi_l - lo_r, hi_r - lo_l, 0.0),
        "left_certification": left.certification,
        "right_certification": right.certification,
        "epsilon": ball.epsilon,
        "distance": ball.distance,
        "measure": kind.tag,
    }
