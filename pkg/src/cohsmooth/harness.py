"""Sampling campaigns that check the smoothed-measure properties numerically.

Each check draws seeded instances, evaluates both sides of an inequality as
brackets and lets :func:`reports.judge` decide.  Minimum estimates enter
only on the side where an upper estimate is safe (or with their certified
lower bound), maximum estimates the other way round, so a "pass" never rests
on the unsafe side of a solver estimate.

Prop ids: ``CORE`` (the base measures), ``P1`` .. ``P10``, ``ID_CD``,
``CRE_BOUND``, ``WSM`` and ``COVERAGE`` (the call-coverage ledger).
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, fields

import numpy as np

from . import _ledger, _oracle
from .io import channel_to_json, dumps, reports_to_csv, state_to_json
from .measures import (
    MeasureKind,
    c_geometric_pure,
    c_l1,
    c_rel_ent,
    c_rel_ent_direct,
    c_trace_distance,
    coherence,
    distance_based_measure,
    lipschitz_bloch,
)
from .oneshot import OperationFamily, bound_consistency
from .reports import VIOLATION, Bracket, PropReport, judge
from .smoothing import (
    _MEASURE_CODE,
    BallSpec,
    SmoothConfig,
    _relent_grid_error,
    qubit_bloch_oracle,
    smooth_max,
    smooth_min,
    smooth_min_relent_ball,
    tensor_invariance_check,
)
from .states import (
    DensityMatrix,
    IncoherentState,
    KrausChannel,
    ValidationError,
    apply_kraus,
    as_density,
    basis_state,
    density_to_bloch,
    dephase,
    hermitian_eig,
    is_incoherent_channel,
    maximally_coherent,
    mixing_channel,
    random_density,
    random_incoherent,
    random_incoherent_channel,
    random_pure,
    relative_entropy,
    selective_apply,
    tensor,
    trace_distance,
    von_neumann_entropy,
)

logger = logging.getLogger(__name__)

PROP_IDS = ("CORE", "P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8", "P9", "P10",
            "ID_CD", "CRE_BOUND", "WSM")
_PROP_INDEX = {pid: i for i, pid in enumerate(PROP_IDS)}

# P10 shares the P9 instances and WSM the CRE_BOUND samples
DEFAULT_SAMPLES = {
    "CORE": 200, "P1": 200, "P2": 50, "P4": 100, "P5": 100, "P6": 50, "P7": 50,
    "P8": 50, "P9": 20, "ID_CD": 100, "CRE_BOUND": 50,
}

P5_MIXING = (0.02, 0.05, 0.1, 0.2)


@dataclass(frozen=True)
class Campaign:
    """Everything a campaign needs; a report is reproducible from this alone."""

    seed: int = 0
    dims: tuple = (2, 3)
    eps_grid: tuple = (0.05, 0.1, 0.2)
    eps_pairs: tuple = ((0.2, 0.1), (0.1, 0.05))
    measures: tuple = ("l1", "relent")
    samples: dict = field(default_factory=lambda: dict(DEFAULT_SAMPLES))
    channels_per_state: int = 10
    p_values: tuple = (0.1, 0.5, 0.9)
    tol_closed: float = 1e-9
    tol_ordering: float = 1e-6
    tol_oracle: float = 2e-3
    tol_identity: float = 5e-3
    tol_equality: float = 5e-4
    tol_rel_ent: float = 1e-5
    eta: float = 0.05
    prop3_epsilon: float = 0.1
    prop3_margin: float = 0.009
    oneshot_measure: str = "relent"
    oneshot_distance: str = "trace"
    family: dict = field(default_factory=lambda: {
        "phase_settings": 8, "p_step": 0.1, "delta_step": 0.25, "budget": 100000})
    image_axis: int = 101
    smooth: SmoothConfig = field(default_factory=SmoothConfig)

    def __post_init__(self):
        if not self.dims or any(int(d) < 2 or int(d) > 6 for d in self.dims):
            raise ValidationError(f"dims must lie in 2..6, got {self.dims}")
        if not self.eps_grid or any(not (0.0 < float(e) <= 1.0) for e in self.eps_grid):
            raise ValidationError(f"eps_grid entries must lie in (0, 1], got {self.eps_grid}")
        for big, small in self.eps_pairs:
            if not (0.0 <= small < big <= 1.0):
                raise ValidationError(f"eps pair needs 0 <= eps' < eps <= 1, got {(big, small)}")
        for m in self.measures:
            if MeasureKind.parse(m) not in _MEASURE_CODE:
                raise ValidationError(f"campaign measure must be defined on mixed states: {m}")
        unknown = set(self.samples) - set(DEFAULT_SAMPLES)
        if unknown:
            raise ValidationError(f"unknown sample keys: {sorted(unknown)}")
        if any(int(n) < 0 for n in self.samples.values()):
            raise ValidationError("sample counts must be >= 0")
        object.__setattr__(self, "samples", dict(DEFAULT_SAMPLES, **self.samples))
        if not (0.0 < self.eta <= 1.0):
            raise ValidationError(f"eta must lie in (0, 1], got {self.eta}")
        if any(not (0.0 < p < 1.0) for p in self.p_values):
            raise ValidationError(f"p_values must lie in (0, 1), got {self.p_values}")
        tols = (self.tol_closed, self.tol_ordering, self.tol_oracle, self.tol_identity,
                self.tol_equality, self.tol_rel_ent)
        if any(t <= 0 for t in tols) or self.channels_per_state < 1 or self.image_axis < 3:
            raise ValidationError("tolerances must be > 0, channels_per_state >= 1, image_axis >= 3")
        unknown = set(self.family) - {"phase_settings", "p_step", "delta_step", "budget",
                                      "dephasing", "depth", "max_perm_dim"}
        if unknown:
            raise ValidationError(f"unknown family settings: {sorted(unknown)}")

    def n(self, pid: str) -> int:
        return int(self.samples.get(pid, DEFAULT_SAMPLES[pid]))

    def rng(self, pid: str, i: int) -> np.random.Generator:
        return np.random.default_rng([int(self.seed), _PROP_INDEX[pid], int(i)])

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name == "smooth":
                val = val.to_dict()
            elif f.name == "samples":
                val = {k: int(self.n(k)) for k in sorted(DEFAULT_SAMPLES)}
            elif f.name == "eps_pairs":
                val = [list(p) for p in val]
            elif isinstance(val, tuple):
                val = list(val)
            elif isinstance(val, dict):
                val = dict(val)
            out[f.name] = val
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Campaign":
        if not isinstance(data, dict):
            raise ValidationError("campaign config must be a JSON object")
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValidationError(f"unknown campaign keys: {sorted(unknown)}")
        kw = dict(data)
        for key in ("dims", "eps_grid", "measures", "p_values"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if "eps_pairs" in kw:
            kw["eps_pairs"] = tuple(tuple(float(x) for x in p) for p in kw["eps_pairs"])
        if "samples" in kw:
            kw["samples"] = dict(DEFAULT_SAMPLES, **kw["samples"])
        if "family" in kw:
            kw["family"] = dict(Campaign().family, **kw["family"])
        if "smooth" in kw:
            kw["smooth"] = SmoothConfig.from_dict(kw["smooth"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ValidationError(str(exc)) from None


@dataclass(frozen=True)
class CounterexampleSpec:
    """Block state ``eta |0><0| (x) rho_c + (1 - eta) |1><1| (x) delta``."""

    eta: float = 0.05
    rho_c: DensityMatrix = field(default_factory=lambda: DensityMatrix.from_pure(
        np.array([1.0, 1.0]) / math.sqrt(2.0)))
    delta: IncoherentState = field(default_factory=lambda: IncoherentState([0.5, 0.5]))
    epsilon: float = 0.1

    def __post_init__(self):
        if not (0.0 < float(self.eta) <= 1.0):
            raise ValidationError(f"eta must lie in (0, 1], got {self.eta}")
        if float(self.eta) > float(self.epsilon):
            raise ValidationError(f"infeasible spec: eta={self.eta} exceeds epsilon={self.epsilon}")
        rho_c = as_density(self.rho_c)
        delta = self.delta if isinstance(self.delta, IncoherentState) else IncoherentState(self.delta)
        if delta.dim != rho_c.dim:
            raise ValidationError("delta and rho_c dimensions differ")
        object.__setattr__(self, "rho_c", rho_c)
        object.__setattr__(self, "delta", delta)

    @property
    def coherent(self) -> bool:
        return c_l1(self.rho_c) > 1e-3


def build_prop3_state(spec: CounterexampleSpec) -> DensityMatrix:
    p0, p1 = basis_state(2, 0), basis_state(2, 1)
    m = spec.eta * tensor(p0, spec.rho_c).matrix
    m = m + (1.0 - spec.eta) * tensor(p1, spec.delta.to_density()).matrix
    rho = DensityMatrix(m)
    ref = tensor(p1, spec.delta.to_density())
    dist = trace_distance(rho, ref)
    if abs(dist - spec.eta) > 1e-10:
        raise RuntimeError(f"block state sits at distance {dist!r}, expected {spec.eta!r}")
    return rho


def _branch_measurement(d: int) -> KrausChannel:
    eye = np.eye(d)
    return KrausChannel([np.kron(np.diag([1.0, 0.0]), eye), np.kron(np.diag([0.0, 1.0]), eye)],
                        label="local-qubit-measurement")


def check_prop3(spec: CounterexampleSpec | None = None, measure="l1",
                config: SmoothConfig | None = None, min_branch: float = 0.01,
                zero_tol: float = 1e-3, margin: float = 0.009) -> PropReport:
    """Reproduce the failure of strong monotonicity on the block state.

    The judged inequality is ``sum_k p_k C_min(rho_k) <= C_min(rho)``; a
    violation beyond ``margin`` is what the construction predicts, so the
    report expects it (for a coherent ``rho_c``).
    """
    spec = spec or CounterexampleSpec()
    cfg = config or SmoothConfig()
    kind = MeasureKind.parse(measure)
    ball = BallSpec("trace", spec.epsilon)
    rho = build_prop3_state(spec)
    report = PropReport("P3", tolerance=margin, expect_violation=spec.coherent,
                        config={"eta": spec.eta, "epsilon": spec.epsilon, "measure": kind.tag,
                                "rho_c": state_to_json(spec.rho_c),
                                "delta": spec.delta.probs.tolist(), "zero_tol": zero_tol,
                                "min_branch": min_branch, "margin": margin,
                                "smooth": cfg.to_dict()})
    if spec.eta == spec.epsilon:
        report.notes.append("marginal: eta equals epsilon, the product state sits on the ball boundary")
    if not spec.coherent:
        report.notes.append("rho_c is incoherent: no violation expected")

    whole = smooth_min(rho, ball, kind, cfg)
    lhs = Bracket.exact(0.0, "branch-sum")
    parts = []
    for br in selective_apply(_branch_measurement(spec.rho_c.dim), rho):
        res = smooth_min(br.state, ball, kind, cfg)
        lhs = lhs + Bracket.of(res).scale(br.prob)
        parts.append({"index": br.index, "prob": br.prob, "c_min": res.value,
                      "lower_bound": Bracket.of(res).lo, "certification": res.certification})
    factor = tensor_invariance_check(spec.rho_c, ball, kind, cfg)
    verdict, slack, audit = judge(lhs, Bracket.of(whole), margin)
    reproduced = (verdict == VIOLATION and whole.value <= zero_tol and lhs.lo >= min_branch)
    report.record(verdict, slack, audit, {
        "state": state_to_json(rho), "c_min_rho": whole.value, "branch_sum_lo": lhs.lo,
        "branch_sum_hi": lhs.hi, "branches": parts,
        "qubit_factor": {"left": factor["left"], "right": factor["right"],
                         "abs_diff": factor["abs_diff"]},
        "reproduced": reproduced})
    report.notes.append(
        f"{kind.tag}: C_min(rho)={whole.value:.6g}, branch sum in [{lhs.lo:.6g}, {lhs.hi:.6g}], "
        f"eta*C_min(rho_c)={spec.eta * factor['right']:.6g}, reproduced={reproduced}")
    return report


# --- helpers ------------------------------------------------------------------


def _report(pid: str, campaign: Campaign, tol: float, **extra) -> PropReport:
    cfg = {"campaign": campaign.to_dict()}
    cfg.update(extra)
    return PropReport(pid, config=cfg, tolerance=tol)


def _pick(rng, seq):
    return seq[int(rng.integers(len(seq)))]


def _kind(name) -> tuple[MeasureKind, int]:
    kind = MeasureKind.parse(name)
    return kind, _MEASURE_CODE[kind]


def _two_sided(a: Bracket, b: Bracket, tol: float):
    return [judge(a, b, tol), judge(b, a, tol)]


def _closed(x: float, source: str = "closed-form") -> Bracket:
    return Bracket.exact(x, source)


def _tdc_bracket(rho, cfg: SmoothConfig) -> tuple[Bracket, object]:
    res = c_trace_distance(rho, cfg.tdc)
    return Bracket(max(res.value - res.gap, 0.0), res.value, "tdc-solver"), res


def bloch_affine(ch: KrausChannel) -> tuple[np.ndarray, np.ndarray]:
    """``(A, b)`` with ``bloch(ch(rho)) = A bloch(rho) + b`` for a qubit channel."""
    half = np.eye(2, dtype=np.complex128) / 2
    b = density_to_bloch(apply_kraus(ch, half))
    paulis = (np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0]))
    a = np.empty((3, 3))
    for j, s in enumerate(paulis):
        a[:, j] = density_to_bloch(apply_kraus(ch, half + s / 2)) - b
    return a, b


def _witness(rho, **kw) -> dict:
    out = {"state": state_to_json(rho)}
    out.update(kw)
    return out


# --- checks -------------------------------------------------------------------


def check_core(campaign: Campaign) -> PropReport:
    """Non-negativity, monotonicity and convexity of the base measures and the
    closed-form relative entropy against direct minimization."""
    cfg = campaign.smooth
    tol = campaign.tol_closed
    rep = _report("CORE", campaign, tol, tol_rel_ent=campaign.tol_rel_ent,
                  tol_solver=campaign.tol_oracle)
    worst_direct = 0.0
    for i in range(campaign.n("CORE")):
        rng = campaign.rng("CORE", i)
        d = campaign.dims[i % len(campaign.dims)]
        rho = random_density(d, seed=rng)
        sigma = random_density(d, seed=rng)
        lam = float(rng.uniform())
        ch = random_incoherent_channel(d, seed=rng)
        out = apply_kraus(ch, rho)
        mix = DensityMatrix(lam * rho.matrix + (1 - lam) * sigma.matrix, repair=True)
        dep = dephase(rho).to_density()
        js = []
        zero = _closed(0.0)
        for f in (c_l1, c_rel_ent):
            js.append(judge(zero, _closed(f(rho)), tol))
            js.append(judge(_closed(f(dep)), zero, tol))
            js.append(judge(_closed(f(out)), _closed(f(rho)), tol))
            js.append(judge(_closed(f(mix)), _closed(lam * f(rho) + (1 - lam) * f(sigma)), tol))
        # the trace-distance measure carries a solver gap; only its certified sides are used
        t_rho, r_rho = _tdc_bracket(rho, cfg)
        t_out, _ = _tdc_bracket(out, cfg)
        js.append(judge(t_out, t_rho, campaign.tol_oracle))
        js.append(judge(_tdc_bracket(dep, cfg)[0], zero, tol))
        dbm = distance_based_measure(rho, "trace", cfg.tdc)
        js.extend(_two_sided(_closed(dbm.value, "distance-measure"),
                             _closed(r_rho.value, "tdc-solver"), tol))
        # closed form against direct simplex minimization
        direct, _ = c_rel_ent_direct(rho)
        js.extend(_two_sided(_closed(c_rel_ent(rho)), _closed(direct, "direct-min"),
                             campaign.tol_rel_ent))
        worst_direct = max(worst_direct, abs(direct - c_rel_ent(rho)))
        js.extend(_two_sided(_closed(relative_entropy(rho, dep)), _closed(c_rel_ent(rho)), tol))
        # spectra and entropies
        w, v = hermitian_eig(rho.matrix)
        recon = float(np.linalg.norm(rho.matrix - (v * w) @ v.conj().T))
        js.append(judge(_closed(recon), zero, 1e-9))
        s = von_neumann_entropy(rho)
        js.append(judge(zero, _closed(s), tol))
        js.append(judge(_closed(s), _closed(math.log2(d)), tol))
        # pure states: geometric measure range
        psi = random_pure(d, seed=rng)
        g = c_geometric_pure(psi)
        js.append(judge(zero, _closed(g), tol))
        js.append(judge(_closed(g), _closed(1.0 - 1.0 / d), tol))
        js.append(judge(_closed(float(is_incoherent_channel(ch))), _closed(1.0), 0.0))
        rep.record_many(js, _witness(rho, sigma=state_to_json(sigma), lam=lam))
    rep.notes.append(f"max |closed form - direct minimization| = {worst_direct:.3e}")
    return rep


def check_p1(campaign: Campaign) -> PropReport:
    cfg = campaign.smooth
    tol = campaign.tol_ordering
    rep = _report("P1", campaign, tol)
    for i in range(campaign.n("P1")):
        rng = campaign.rng("P1", i)
        rho = random_density(2, seed=rng)
        big, small = campaign.eps_pairs[i % len(campaign.eps_pairs)]
        kind, _ = _kind(campaign.measures[(i // len(campaign.eps_pairs)) % len(campaign.measures)])
        a = Bracket.of(smooth_min(rho, BallSpec("trace", small), kind, cfg))
        b = Bracket.of(smooth_min(rho, BallSpec("trace", big), kind, cfg))
        diff = Bracket(a.lo - b.hi, a.hi - b.lo, "min-difference")
        bound = (big - small) / big * coherence(rho, kind)
        js = [judge(_closed(0.0), diff, tol), judge(diff, _closed(bound), tol)]
        rep.record_many(js, _witness(rho, eps=big, eps_prime=small, measure=kind.tag))
    return rep


def check_p2(campaign: Campaign) -> PropReport:
    cfg = campaign.smooth
    rep = _report("P2", campaign, campaign.tol_oracle, tol_qubit=campaign.tol_ordering)
    n = campaign.n("P2")
    for di, d in enumerate(campaign.dims):
        tol = campaign.tol_ordering if d == 2 else campaign.tol_oracle
        for i in range(n):
            rng = campaign.rng("P2", di * n + i)
            rho = random_density(d, seed=rng)
            eps = _pick(rng, campaign.eps_grid)
            kind, _ = _kind(_pick(rng, campaign.measures))
            ball = BallSpec("trace", eps)
            rhs = Bracket.of(smooth_min(rho, ball, kind, cfg))
            for c in range(campaign.channels_per_state):
                ch = random_incoherent_channel(d, seed=rng)
                lhs = Bracket.of(smooth_min(apply_kraus(ch, rho), ball, kind, cfg))
                verdict, slack, audit = judge(lhs, rhs, tol)
                rep.record(verdict, slack, audit, _witness(
                    rho, epsilon=eps, measure=kind.tag, channel_index=c,
                    channel=channel_to_json(ch)))
    return rep


def check_p4(campaign: Campaign) -> PropReport:
    cfg = campaign.smooth
    rep = _report("P4", campaign, campaign.tol_oracle)
    for i in range(campaign.n("P4")):
        rng = campaign.rng("P4", i)
        k = 2 + i % 2
        states = [random_density(2, seed=rng) for _ in range(k)]
        w = rng.dirichlet(np.ones(k))
        eps = _pick(rng, campaign.eps_grid)
        kind, _ = _kind(_pick(rng, campaign.measures))
        ball = BallSpec("trace", eps)
        mix = DensityMatrix(sum(wi * s.matrix for wi, s in zip(w, states)), repair=True)
        lhs = Bracket.of(smooth_min(mix, ball, kind, cfg))
        rhs = Bracket.exact(0.0, "weighted-sum")
        for wi, s in zip(w, states):
            rhs = rhs + Bracket.of(smooth_min(s, ball, kind, cfg)).scale(wi)
        verdict, slack, audit = judge(lhs, rhs, campaign.tol_oracle)
        rep.record(verdict, slack, audit, _witness(
            mix, parts=[state_to_json(s) for s in states], weights=w.tolist(),
            epsilon=eps, measure=kind.tag))
    return rep


def check_p5(campaign: Campaign) -> PropReport:
    cfg = campaign.smooth
    rep = _report("P5", campaign, campaign.tol_oracle, mixing=list(P5_MIXING))
    for i in range(campaign.n("P5")):
        rng = campaign.rng("P5", i)
        rho = random_density(2, seed=rng)
        delta = random_incoherent(2, seed=rng)
        p = P5_MIXING[i % len(P5_MIXING)]
        rho2 = mixing_channel(rho, delta, p)
        eps = _pick(rng, campaign.eps_grid)
        kind, _ = _kind(_pick(rng, campaign.measures))
        eta = trace_distance(rho, rho2)
        if eta <= 0.0:
            rep.skip("identical-pair")
            continue
        ball = BallSpec("trace", eps)
        a = Bracket.of(smooth_min(rho, ball, kind, cfg))
        b = Bracket.of(smooth_min(rho2, ball, kind, cfg))
        lo, hi = b.lo - a.hi, b.hi - a.lo
        absdiff = Bracket(0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi)),
                          max(abs(lo), abs(hi)), "abs-difference")
        c1, c2 = coherence(rho, kind), coherence(rho2, kind)
        f = eta / (eps + eta)
        # M pairs each state's measure with the other state's smoothed minimum
        rhs = Bracket(f * max(c1 - b.hi, c2 - a.hi), f * max(c1 - b.lo, c2 - a.lo),
                      "continuity-bound")
        verdict, slack, audit = judge(absdiff, rhs, campaign.tol_oracle)
        rep.record(verdict, slack, audit, _witness(
            rho, rho_prime=state_to_json(rho2), p=p, delta=delta.probs.tolist(),
            epsilon=eps, eta=eta, measure=kind.tag))
    return rep


def check_p6(campaign: Campaign) -> PropReport:
    cfg = campaign.smooth
    tol = campaign.tol_equality
    rep = _report("P6", campaign, tol)
    n = campaign.n("P6")
    worst = 0.0
    for di, d in enumerate(campaign.dims):
        for i in range(n):
            rng = campaign.rng("P6", di * n + i)
            rho = random_density(d, seed=rng)
            base, res = _tdc_bracket(rho, cfg)
            for p in campaign.p_values:
                tau = mixing_channel(rho, res.witness, p)
                out, r2 = _tdc_bracket(tau, cfg)
                worst = max(worst, abs(r2.value - (1 - p) * res.value))
                rep.record_many(_two_sided(out, base.scale(1.0 - p), tol),
                                _witness(rho, p=p, delta_star=res.witness.probs.tolist()))
    rep.notes.append(f"max |C_D(mixed) - (1-p) C_D| on point values = {worst:.3e}")
    return rep


def check_p7(campaign: Campaign) -> PropReport:
    cfg = campaign.smooth
    rep = _report("P7", campaign, campaign.tol_oracle, tol_lower=campaign.tol_identity)
    n = campaign.n("P7")
    res_ = cfg.oracle_resolution
    h = 2.0 / (res_ - 1)
    band = 0.5 * math.sqrt(3.0) * h
    for di, d in enumerate(campaign.dims):
        for i in range(n):
            rng = campaign.rng("P7", di * n + i)
            rho = random_density(d, seed=rng)
            eps = _pick(rng, campaign.eps_grid)
            kind, code = _kind(_pick(rng, campaign.measures))
            cd, _ = _tdc_bracket(rho, cfg)
            if eps > cd.hi:
                rep.skip("epsilon-exceeds-cd")
                continue
            cmin = Bracket.of(smooth_min(rho, BallSpec("trace", eps), kind, cfg))
            c = coherence(rho, kind)
            upper = Bracket((1 - eps / max(cd.lo, 1e-300)) * c, (1 - eps / cd.hi) * c,
                            "upper-formula")
            js = [judge(cmin, upper, campaign.tol_oracle)]
            if d == 2:
                t = cd.hi - eps
                g, arg, npts = _oracle.level_band_min(t, band, code, res_)
                if npts == 0:
                    rep.skip("empty-level-band")
                    continue
                if kind is MeasureKind.RELATIVE_ENTROPY:
                    err = _relent_grid_error(np.asarray(arg), kind, h, False)
                else:
                    err = lipschitz_bloch(kind) * (math.sqrt(3.0) * h + 2 * band)
                lower = Bracket(g - err, g, "grid-level-min")
                js.append(judge(lower, cmin, campaign.tol_identity))
            rep.record_many(js, _witness(rho, epsilon=eps, measure=kind.tag))
    return rep


def check_p8(campaign: Campaign) -> PropReport:
    cfg = campaign.smooth
    rep = _report("P8", campaign, campaign.tol_oracle)
    na = campaign.image_axis
    for i in range(campaign.n("P8")):
        rng = campaign.rng("P8", i)
        rho = random_density(2, seed=rng)
        ch = random_incoherent_channel(2, seed=rng)
        eps = _pick(rng, campaign.eps_grid)
        kind, code = _kind(_pick(rng, campaign.measures))
        a, b = bloch_affine(ch)
        v = density_to_bloch(rho)
        g, arg, npts, h = _oracle.image_ball_max(v, eps, a, b, code, na)
        step = float(np.linalg.norm(a, 2)) * h
        if kind is MeasureKind.RELATIVE_ENTROPY:
            err = _relent_grid_error(np.asarray(arg), kind, step, True)
        else:
            err = lipschitz_bloch(kind) * math.sqrt(3.0) * step
        lhs = Bracket(g, g + err, "image-grid-max")
        rhs = Bracket.of(smooth_max(rho, BallSpec("trace", eps), kind, cfg))
        verdict, slack, audit = judge(lhs, rhs, campaign.tol_oracle)
        rep.record(verdict, slack, audit, _witness(
            rho, epsilon=eps, measure=kind.tag, bloch_map=a.tolist(), bloch_shift=b.tolist()))
    return rep


def _oneshot_state(rng, d: int, variant: int) -> DensityMatrix:
    if variant == 0:
        return random_density(d, seed=rng)
    # a phased maximally coherent state with some noise
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=d))
    psi = maximally_coherent(d).amplitudes * phases
    s = rng.uniform(0.05, 0.3)
    noise = random_density(d, seed=rng).matrix
    return DensityMatrix((1 - s) * np.outer(psi, psi.conj()) + s * noise, repair=True)


def check_p9_p10(campaign: Campaign) -> tuple[PropReport, PropReport]:
    cfg = campaign.smooth
    tol = campaign.tol_oracle
    p9 = _report("P9", campaign, tol)
    p10 = _report("P10", campaign, tol)
    families = {}
    for i in range(campaign.n("P9")):
        rng = campaign.rng("P9", i)
        d = campaign.dims[i % len(campaign.dims)]
        rho = _oneshot_state(rng, d, (i // len(campaign.dims)) % 2)
        eps = _pick(rng, campaign.eps_grid)
        if d not in families:
            families[d] = OperationFamily(d, **campaign.family)
        r9, r10 = bound_consistency(rho, eps, families[d], campaign.oneshot_measure, cfg,
                                    campaign.oneshot_distance, tol)
        p9.merge(r9)
        p10.merge(r10)
    return p9, p10


def check_cd_identity(campaign: Campaign) -> PropReport:
    """``C_D = C_min + eps`` for the trace-distance measure on qubits."""
    cfg = campaign.smooth
    tol = campaign.tol_identity
    rep = _report("ID_CD", campaign, tol)
    target = campaign.n("ID_CD")
    judged = attempts = 0
    while judged < target and attempts < 20 * max(target, 1):
        rng = campaign.rng("ID_CD", attempts)
        attempts += 1
        rho = random_density(2, seed=rng)
        eps = _pick(rng, campaign.eps_grid)
        cd, _ = _tdc_bracket(rho, cfg)
        if eps > cd.lo:
            rep.skip("epsilon-exceeds-cd")
            continue
        cmin = Bracket.of(smooth_min(rho, BallSpec("trace", eps), MeasureKind.TRACE_DISTANCE, cfg))
        rep.record_many(_two_sided(cd, cmin + eps, tol), _witness(rho, epsilon=eps))
        judged += 1
    return rep


def check_cre_bound(campaign: Campaign) -> tuple[PropReport, PropReport]:
    """``C_{r,eps} <= C_r - eps`` on full-rank qubits, plus weak strong monotonicity."""
    cfg = campaign.smooth
    tol = campaign.tol_oracle
    cre = _report("CRE_BOUND", campaign, tol)
    wsm = _report("WSM", campaign, tol)
    for i in range(campaign.n("CRE_BOUND")):
        rng = campaign.rng("CRE_BOUND", i)
        rho = random_density(2, rank=2, seed=rng)
        eps = _pick(rng, campaign.eps_grid)
        ch = random_incoherent_channel(2, n_kraus=2, seed=rng)
        res = smooth_min_relent_ball(rho, eps, cfg)
        c_r = c_rel_ent(rho)
        wit = _witness(rho, epsilon=eps)
        if "rank-deficient-center" in res.flags:
            cre.skip("rank-deficient")
        elif eps > c_r:
            cre.skip("epsilon-exceeds-cr")
        else:
            verdict, slack, audit = judge(Bracket.of(res), _closed(c_r - eps), tol)
            cre.record(verdict, slack, audit, wit)

        # weak strong monotonicity along the witness branches
        tau = res.witness
        rb = {br.index: br for br in selective_apply(ch, rho)}
        tb = {br.index: br for br in selective_apply(ch, tau)}
        if set(rb) != set(tb):
            wsm.skip("branch-support-mismatch")
            continue
        feasible = all(relative_entropy(rb[k].state, tb[k].state) <= eps + 1e-9 for k in rb)
        if not feasible:
            wsm.skip("branch-outside-ball")
            continue
        lhs = Bracket.exact(0.0, "branch-sum")
        for k in sorted(rb):
            lhs = lhs + Bracket.of(smooth_min_relent_ball(rb[k].state, eps, cfg)).scale(tb[k].prob)
        verdict, slack, audit = judge(lhs, Bracket.of(res), tol)
        wsm.record(verdict, slack, audit, dict(wit, channel=channel_to_json(ch)))
    return cre, wsm


def _prop3_campaign(campaign: Campaign) -> PropReport:
    spec = CounterexampleSpec(eta=campaign.eta, epsilon=campaign.prop3_epsilon)
    rep = None
    for m in campaign.measures:
        r = check_prop3(spec, m, campaign.smooth, margin=campaign.prop3_margin)
        rep = r if rep is None else rep.merge(r)
    return rep


def _normalize_id(n) -> str:
    if isinstance(n, (int, np.integer)) and not isinstance(n, bool):
        key = f"P{int(n)}"
    else:
        key = str(n).strip().upper()
        if key.isdigit():
            key = f"P{key}"
    if key not in PROP_IDS:
        raise ValidationError(f"unknown property id {n!r}; expected one of {list(PROP_IDS)}")
    return key


def check_prop(n, campaign: Campaign | None = None) -> PropReport:
    """Run one property campaign by id (``3``, ``"P3"``, ``"ID_CD"``, ...)."""
    campaign = campaign or Campaign()
    key = _normalize_id(n)
    t0 = time.perf_counter()
    if key == "P3":
        rep = _prop3_campaign(campaign)
    elif key in ("P9", "P10"):
        rep = check_p9_p10(campaign)[0 if key == "P9" else 1]
    elif key in ("CRE_BOUND", "WSM"):
        rep = check_cre_bound(campaign)[0 if key == "CRE_BOUND" else 1]
    else:
        rep = _CHECKS[key](campaign)
    logger.info("%s: %d samples, %d violations, %d skipped in %.1fs", key, rep.samples,
                rep.violations, rep.skipped, time.perf_counter() - t0)
    return rep


_CHECKS = {
    "CORE": check_core, "P1": check_p1, "P2": check_p2, "P4": check_p4, "P5": check_p5,
    "P6": check_p6, "P7": check_p7, "P8": check_p8, "ID_CD": check_cd_identity,
}


def coverage_report(campaign: Campaign) -> PropReport:
    missing = _ledger.uncovered()
    rep = _report("COVERAGE", campaign, 0.0)
    rep.samples = len(_ledger.REGISTERED)
    rep.violations = len(missing)
    rep.max_slack = float(len(missing))
    rep.audit["pass"] = rep.samples - len(missing)
    rep.audit["violation"] = len(missing)
    rep.notes.extend(f"never called: {name}" for name in missing)
    rep.worst_witness = {"calls": _ledger.snapshot()}
    return rep


def run_campaign(campaign: Campaign | None = None, props=None) -> list[PropReport]:
    """Run the listed properties (all by default) in a fixed order.

    A full run appends a ``COVERAGE`` entry that fails when a registered
    public operation was never reached.
    """
    campaign = campaign or Campaign()
    keys = PROP_IDS if props is None else tuple(_normalize_id(p) for p in props)
    _ledger.reset()
    done: dict[str, PropReport] = {}
    for key in PROP_IDS:
        if key not in keys or key in done:
            continue
        if key in ("P9", "P10"):
            done["P9"], done["P10"] = check_p9_p10(campaign)
        elif key in ("CRE_BOUND", "WSM"):
            done["CRE_BOUND"], done["WSM"] = check_cre_bound(campaign)
        else:
            done[key] = check_prop(key, campaign)
    reports = [done[k] for k in PROP_IDS if k in keys]
    if props is None:
        reports.append(coverage_report(campaign))
    return reports


def reports_to_json(reports) -> str:
    return dumps([r.to_dict() for r in reports])


def write_reports(reports, json_path=None, csv_path=None) -> None:
    from pathlib import Path

    if json_path is not None:
        Path(json_path).write_text(reports_to_json(reports))
    if csv_path is not None:
        Path(csv_path).write_text(reports_to_csv(reports))
