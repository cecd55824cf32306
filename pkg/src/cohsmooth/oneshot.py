"""One-shot distillation and cost over an enumerable family of incoherent operations.

The searches are one-sided by construction: distillation over a subfamily
can only under-estimate the best achievable ``c_M`` and cost can only
over-estimate it.  That one-sidedness is what makes the comparisons with the
smoothed measures sound regardless of how coarse the family is.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit
from ._kernels import relative_entropy, trace_distance
from .measures import MeasureKind, c_trace_distance, max_coherence
from .reports import Bracket, PropReport, judge
from .smoothing import BallSpec, SmoothConfig, _as_ball, smooth_max, smooth_min
from .states import (
    DensityMatrix,
    KrausChannel,
    PureState,
    ValidationError,
    as_density,
    dephasing_channel,
    is_incoherent_channel,
    maximally_coherent,
    mixing_kraus,
    partial_dephasing_channel,
    permutation_matrix,
    IncoherentState,
)
from ._ledger import tracked

logger = logging.getLogger(__name__)

GEN_UNITARY = 0
GEN_DEPHASE = 1
GEN_MIX = 2

FEASIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class MaxCoherentState:
    """``Psi_M`` embedded in dimension ``d``."""

    M: int
    d: int

    def __post_init__(self):
        if not 1 <= self.M <= self.d:
            raise ValidationError(f"need 1 <= M <= d, got M={self.M}, d={self.d}")

    @property
    def state(self) -> PureState:
        return maximally_coherent(self.d, self.M)

    @property
    def density(self) -> DensityMatrix:
        psi = self.state.amplitudes
        return DensityMatrix(np.outer(psi, psi.conj()), repair=True)

    def c_M(self, measure) -> float:
        kind = MeasureKind.parse(measure)
        if kind is MeasureKind.TRACE_DISTANCE:
            if self.M == 1:
                return 0.0
            return c_trace_distance(self.density).value
        return max_coherence(kind, self.d, self.M)


def _simplex_grid(d: int, step: float):
    n = int(round(1.0 / step))
    out = []
    for combo in itertools.product(range(n + 1), repeat=d - 1):
        s = sum(combo)
        if s <= n:
            out.append(np.array(list(combo) + [n - s], dtype=np.float64) / n)
    return out


class OperationFamily:
    """Enumerable incoherent operations on ``C^d``.

    Generators are permutation x diagonal-phase unitaries (the first phase
    fixed), full and partial dephasings and mixing channels over a grid of
    ``(p, delta)``.  Members are the identity, every generator, then
    two-stage compositions ``N o U`` (non-unitary after unitary) and
    ``N o N'``; ``U o N`` adds nothing since dephasing and mixing commute
    with phases and the delta grid is permutation symmetric.  Enumeration
    stops at ``budget`` members.
    """

    def __init__(self, d: int, *, phase_settings: int = 8, p_step: float = 0.1,
                 delta_step: float = 0.25, dephasing=(0.25, 0.5, 0.75, 1.0),
                 depth: int = 2, budget: int = 100_000, max_perm_dim: int = 4):
        if d < 1:
            raise ValidationError("dimension must be positive")
        if depth not in (1, 2):
            raise ValidationError("composition depth must be 1 or 2")
        self.d = d
        self.phase_settings = phase_settings
        self.p_step = p_step
        self.delta_step = delta_step
        self.dephasing = tuple(dephasing)
        self.depth = depth
        self.budget = int(budget)
        self.max_perm_dim = max_perm_dim
        self._build()

    def _build(self):
        d = self.d
        codes, us, params, deltas, labels = [], [], [], [], []
        eye = np.eye(d, dtype=np.complex128)
        perms = list(itertools.permutations(range(d))) if d <= self.max_perm_dim else [tuple(range(d))]
        phase_grid = list(itertools.product(range(self.phase_settings), repeat=max(d - 1, 0)))
        for perm in perms:
            for ph in phase_grid:
                if perm == tuple(range(d)) and not any(ph):
                    continue  # the identity is member 0
                phases = 2.0 * np.pi * np.array((0,) + ph) / self.phase_settings
                codes.append(GEN_UNITARY)
                us.append(permutation_matrix(perm, phases))
                params.append(0.0)
                deltas.append(np.zeros(d))
                labels.append(f"unitary(perm={list(perm)},phase_idx={[0, *ph]})")
        self.n_unitary = len(codes)
        for q in self.dephasing:
            codes.append(GEN_DEPHASE)
            us.append(eye)
            params.append(float(q))
            deltas.append(np.zeros(d))
            labels.append(f"dephase(q={q:g})")
        n_p = int(round(1.0 / self.p_step))
        for k in range(1, n_p + 1):
            p = k / n_p
            for delta in _simplex_grid(d, self.delta_step):
                codes.append(GEN_MIX)
                us.append(eye)
                params.append(p)
                deltas.append(delta)
                labels.append(f"mix(p={p:g},delta={delta.tolist()})")
        self.codes = np.array(codes, dtype=np.int64)
        self.us = np.array(us, dtype=np.complex128).reshape(len(codes), d, d)
        self.params = np.array(params, dtype=np.float64)
        self.deltas = np.array(deltas, dtype=np.float64).reshape(len(codes), d)
        self.labels = labels

        n_gen = len(codes)
        first, second = [-1], [-1]
        for g in range(n_gen):
            first.append(g)
            second.append(-1)
        if self.depth == 2:
            nonunitary = range(self.n_unitary, n_gen)
            pairs = itertools.chain(
                ((u, n) for u in range(self.n_unitary) for n in nonunitary),
                ((a, b) for a in nonunitary for b in nonunitary),
            )
            for a, b in pairs:
                if len(first) >= self.budget:
                    break
                first.append(a)
                second.append(b)
        self.truncated = len(first) >= self.budget and self.depth == 2
        self.first = np.array(first[: self.budget], dtype=np.int64)
        self.second = np.array(second[: self.budget], dtype=np.int64)

    def __len__(self):
        return int(self.first.size)

    def label(self, index: int) -> str:
        a, b = int(self.first[index]), int(self.second[index])
        if a < 0:
            return "identity"
        if b < 0:
            return self.labels[a]
        return f"{self.labels[b]} o {self.labels[a]}"

    def _gen_kraus(self, g: int) -> KrausChannel:
        code = self.codes[g]
        if code == GEN_UNITARY:
            return KrausChannel([self.us[g]], label=self.labels[g])
        if code == GEN_DEPHASE:
            q = self.params[g]
            if q == 1.0:
                return dephasing_channel(self.d)
            return partial_dephasing_channel(self.d, q)
        return mixing_kraus(IncoherentState(self.deltas[g]), self.params[g])

    def kraus(self, index: int) -> KrausChannel:
        """Kraus form of member ``index`` (used for the incoherence certificate)."""
        a, b = int(self.first[index]), int(self.second[index])
        if a < 0:
            ch = KrausChannel([np.eye(self.d, dtype=np.complex128)], label="identity")
        elif b < 0:
            ch = self._gen_kraus(a)
        else:
            ch = self._gen_kraus(b).compose(self._gen_kraus(a))
        ch.label = self.label(index)
        return ch

    def apply(self, index: int, rho) -> np.ndarray:
        m = np.ascontiguousarray(as_density(rho).matrix)
        return _apply_member(self.codes, self.us, self.params, self.deltas,
                             int(self.first[index]), int(self.second[index]), m)

    def audit_incoherence(self, indices=None) -> bool:
        idx = range(len(self)) if indices is None else indices
        return all(is_incoherent_channel(self.kraus(i)) for i in idx)

    def budget_info(self) -> dict:
        return {
            "budget": self.budget,
            "members": len(self),
            "generators": int(self.codes.size),
            "unitaries": self.n_unitary,
            "truncated": bool(self.truncated),
            "phase_settings": self.phase_settings,
            "p_step": self.p_step,
            "delta_step": self.delta_step,
            "dephasing": list(self.dephasing),
            "depth": self.depth,
        }


@njit
def _apply_gen(code, u, q, delta, m):
    n = m.shape[0]
    if code == GEN_UNITARY:
        out = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            for j in range(n):
                acc = 0.0 + 0.0j
                for k in range(n):
                    if u[i, k] == 0.0:
                        continue
                    for l in range(n):
                        if u[j, l] == 0.0:
                            continue
                        acc += u[i, k] * m[k, l] * np.conj(u[j, l])
                out[i, j] = acc
        return out
    if code == GEN_DEPHASE:
        out = m * (1.0 - q)
        for i in range(n):
            out[i, i] = m[i, i]
        return out
    out = m * (1.0 - q)
    for i in range(n):
        out[i, i] += q * delta[i]
    return out


@njit
def _apply_member(codes, us, params, deltas, a, b, m):
    if a < 0:
        return m.copy()
    out = _apply_gen(codes[a], us[a], params[a], deltas[a], m)
    if b >= 0:
        out = _apply_gen(codes[b], us[b], params[b], deltas[b], out)
    return out


@njit
def family_sweep(codes, us, params, deltas, first, second, inputs, targets, dist, image_first):
    """Minimum distance and argmin member for every (input, target) pair.

    ``image_first`` selects ``D(Lambda(input), target)`` (distillation) over
    ``D(target, Lambda(input))`` (cost); the order matters for relative entropy.
    """
    n_in = inputs.shape[0]
    n_t = targets.shape[0]
    best = np.full((n_in, n_t), np.inf)
    arg = np.full((n_in, n_t), -1, dtype=np.int64)
    for idx in range(first.shape[0]):
        for i in range(n_in):
            out = _apply_member(codes, us, params, deltas, first[idx], second[idx], inputs[i])
            for t in range(n_t):
                if dist == 0:
                    dv = trace_distance(out, targets[t])
                elif image_first:
                    dv = relative_entropy(out, targets[t], 1e-12)
                else:
                    dv = relative_entropy(targets[t], out, 1e-12)
                if dv < best[i, t]:
                    best[i, t] = dv
                    arg[i, t] = idx
    return best, arg


@dataclass(frozen=True)
class OneShotResult:
    mode: str
    best_cM: float | None
    M: int | None
    epsilon: float
    witness_channel: str | None
    witness_index: int | None
    achieved_distance: float | None
    family_budget: dict
    measure: str
    distance: str
    feasible: bool
    per_M: dict

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "best_cM": self.best_cM,
            "M": self.M,
            "epsilon": self.epsilon,
            "witness_channel": self.witness_channel,
            "achieved_distance": self.achieved_distance,
            "family_budget": self.family_budget,
            "measure": self.measure,
            "distance": self.distance,
            "feasible": self.feasible,
            "per_M": self.per_M,
        }


def _prepare(rho, epsilon, family, measure, M_range, distance):
    rho = as_density(rho)
    ball = _as_ball((distance, epsilon))
    kind = MeasureKind.parse(measure)
    d = rho.dim
    if family is None:
        family = OperationFamily(d)
    if len(family) == 0:
        raise ValidationError("empty operation family")
    if family.d != d:
        raise ValidationError(f"family acts on d={family.d}, state has d={d}")
    ms = list(range(1, d + 1)) if M_range is None else sorted(set(int(m) for m in M_range))
    if not ms or ms[0] < 1 or ms[-1] > d:
        raise ValidationError(f"M_range must lie in [1, {d}], got {M_range}")
    targets = [MaxCoherentState(m, d) for m in ms]
    return rho, ball, kind, family, ms, targets


def _sweep(family, inputs, targets, ball, image_first):
    return family_sweep(family.codes, family.us, family.params, family.deltas, family.first,
                        family.second, np.ascontiguousarray(np.array(inputs)),
                        np.ascontiguousarray(np.array(targets)), ball.code, image_first)


@tracked
def distill_one_shot(rho, epsilon: float, family: OperationFamily | None = None,
                     measure="relent", M_range=None, distance: str = "trace") -> OneShotResult:
    """Largest ``c_M`` with ``D(Lambda(rho), Psi_M) <= eps`` over the family (a lower bound)."""
    rho, ball, kind, family, ms, targets = _prepare(rho, epsilon, family, measure, M_range, distance)
    best, arg = _sweep(family, [rho.matrix], [t.density.matrix for t in targets], ball, True)
    per_m, choice = {}, None
    for j, t in enumerate(targets):
        dv = float(best[0, j])
        ok = dv <= ball.epsilon + FEASIBILITY_TOL
        per_m[str(t.M)] = {"min_distance": dv, "feasible": ok}
        if ok:
            c = t.c_M(kind)
            # ties keep the smaller M (enumeration order)
            if choice is None or c > choice[0]:
                choice = (c, t.M, int(arg[0, j]), dv)
    if choice is None:
        # Psi_1 is a basis state; the replacement channel reaches it exactly
        logger.warning("no feasible M in the family; reporting M=1 as infeasible")
        return OneShotResult("distill", None, None, ball.epsilon, None, None, None,
                             family.budget_info(), kind.tag, ball.distance, False, per_m)
    c, m, idx, dv = choice
    return OneShotResult("distill", float(c), m, ball.epsilon, family.label(idx), idx, dv,
                         family.budget_info(), kind.tag, ball.distance, True, per_m)


@tracked
def cost_one_shot(rho, epsilon: float, family: OperationFamily | None = None,
                  measure="relent", M_range=None, distance: str = "trace") -> OneShotResult:
    """Smallest ``c_M`` with ``D(rho, Lambda(Psi_M)) <= eps`` over the family (an upper bound).

    When no member and no ``M`` in range is feasible the result says so
    (``feasible`` False, ``best_cM`` None) instead of returning a maximum.
    """
    rho, ball, kind, family, ms, targets = _prepare(rho, epsilon, family, measure, M_range, distance)
    best, arg = _sweep(family, [t.density.matrix for t in targets], [rho.matrix], ball, False)
    per_m, choice = {}, None
    for j, t in enumerate(targets):
        dv = float(best[j, 0])
        ok = dv <= ball.epsilon + FEASIBILITY_TOL
        per_m[str(t.M)] = {"min_distance": dv, "feasible": ok}
        if ok:
            c = t.c_M(kind)
            if choice is None or c < choice[0]:
                choice = (c, t.M, int(arg[j, 0]), dv)
    if choice is None:
        return OneShotResult("cost", None, None, ball.epsilon, None, None, None,
                             family.budget_info(), kind.tag, ball.distance, False, per_m)
    c, m, idx, dv = choice
    return OneShotResult("cost", float(c), m, ball.epsilon, family.label(idx), idx, dv,
                         family.budget_info(), kind.tag, ball.distance, True, per_m)


@tracked
def bound_consistency(rho, epsilon: float, family: OperationFamily | None = None,
                      measure="relent", config: SmoothConfig | None = None,
                      distance: str = "trace", slack: float = 2e-3) -> list[PropReport]:
    """Check distill <= C_max and C_min <= cost on one instance.

    The left/right sides are the family-restricted rates (exact for the
    family) against the smoothed-measure brackets; the audit records which
    side of each bracket was used.
    """
    rho = as_density(rho)
    if family is None:
        family = OperationFamily(rho.dim)
    ball = BallSpec(distance, epsilon)
    kind = MeasureKind.parse(measure)
    dist = distill_one_shot(rho, epsilon, family, kind, distance=distance)
    cost = cost_one_shot(rho, epsilon, family, kind, distance=distance)
    from .io import state_to_json

    witness = {"state": state_to_json(rho), "epsilon": ball.epsilon, "measure": kind.tag,
               "distance": ball.distance}
    cfg = {"epsilon": ball.epsilon, "distance": ball.distance, "measure": kind.tag,
           "family_budget": family.budget_info(), "slack": slack}

    p9 = PropReport("P9", config=dict(cfg), tolerance=slack)
    if dist.feasible:
        cmax = smooth_max(rho, ball, kind, config)
        verdict, s, audit = judge(Bracket.exact(dist.best_cM, "distill-family"),
                                  Bracket.of(cmax), slack)
        p9.record(verdict, s, audit, dict(witness, distill=dist.to_dict(), c_max=cmax.value))
    else:
        p9.skip("distill-infeasible")

    p10 = PropReport("P10", config=dict(cfg), tolerance=slack)
    if cost.feasible:
        cmin = smooth_min(rho, ball, kind, config)
        verdict, s, audit = judge(Bracket.of(cmin), Bracket.exact(cost.best_cM, "cost-family"),
                                  slack)
        p10.record(verdict, s, audit, dict(witness, cost=cost.to_dict(), c_min=cmin.value))
    else:
        p10.skip("cost-infeasible")
    return [p9, p10]
