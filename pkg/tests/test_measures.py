import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cohsmooth import measures as M
from cohsmooth import states as S
from cohsmooth.measures import MeasureKind, TDCConfig
from cohsmooth.states import DensityMatrix, IncoherentState, ValidationError
from conftest import ket_density
from strategies import seeds, state_and_channel, states


def _simplex_grid(d, step):
    n = int(round(1 / step))
    for idx in itertools.combinations(range(n + d - 1), d - 1):
        cuts = (-1,) + idx + (n + d - 1,)
        yield np.array([cuts[i + 1] - cuts[i] - 1 for i in range(d)]) / n


def test_l1_examples(plus):
    assert M.c_l1(S.basis_state(3, 1)) == 0.0
    assert M.c_l1(plus) == pytest.approx(1.0)
    for d in (2, 3, 5):
        assert M.c_l1(S.maximally_coherent(d).to_density()) == pytest.approx(d - 1)


def test_rel_ent_examples(plus):
    assert M.c_rel_ent(plus) == pytest.approx(1.0)
    assert M.c_rel_ent(DensityMatrix.maximally_mixed(3)) == pytest.approx(0.0, abs=1e-12)
    assert M.c_rel_ent(S.maximally_coherent(4).to_density()) == pytest.approx(2.0)


@given(states())
def test_rel_ent_closed_form_matches_direct_minimization(rho):
    val, delta = M.c_rel_ent_direct(rho)
    assert val == pytest.approx(M.c_rel_ent(rho), abs=1e-5)
    # the minimizer is the dephased state
    assert np.allclose(delta.probs, S.dephase(rho).probs, atol=1e-2)


def test_trace_distance_examples(plus):
    res = M.c_trace_distance(plus)
    assert res.value == pytest.approx(0.5, abs=1e-6)
    assert res.converged
    delta = IncoherentState([0.2, 0.5, 0.3])
    res = M.c_trace_distance(delta.to_density())
    assert res.value == 0.0
    assert np.allclose(res.witness.probs, delta.probs)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_trace_distance_d3_against_simplex_grid(seed):
    rho = S.random_density(3, seed=seed)
    grid = min(S.trace_distance(rho, np.diag(p)) for p in _simplex_grid(3, 1e-2))
    res = M.c_trace_distance(rho)
    # the grid can only overestimate; step 1e-2 moves D by at most ~1e-2
    assert res.value <= grid + 1e-9
    assert res.value >= grid - 1e-2
    assert S.trace_distance(rho, res.witness.to_density()) == pytest.approx(res.value, abs=1e-9)
    assert res.gap <= TDCConfig().tol


@pytest.mark.slow
def test_trace_distance_d3_fine_grid():
    rho = S.random_density(3, seed=11)
    grid = min(S.trace_distance(rho, np.diag(p)) for p in _simplex_grid(3, 2e-3))
    assert M.c_trace_distance(rho).value == pytest.approx(grid, abs=2e-3)


def test_trace_distance_qubit_closed_form():
    # a qubit's nearest incoherent state keeps the diagonal: D = |rho_01|
    rho = S.random_density(2, seed=4)
    assert M.c_trace_distance(rho).value == pytest.approx(abs(rho.matrix[0, 1]), abs=1e-7)


def test_geometric_pure_examples(plus):
    assert M.c_geometric_pure(S.basis_state(3, 2)) == pytest.approx(0.0, abs=1e-12)
    assert M.c_geometric_pure(plus) == pytest.approx(0.5)
    theta = np.pi / 6
    assert M.c_geometric_pure(np.array([np.cos(theta), np.sin(theta)])) == pytest.approx(0.25)
    assert M.c_geometric_pure(S.maximally_coherent(4)) == pytest.approx(0.75)
    with pytest.raises(ValidationError):
        M.c_geometric_pure(DensityMatrix.maximally_mixed(2))


@pytest.mark.parametrize("kind", ["trace", "relent"])
def test_distance_based_witness_is_locally_optimal(kind):
    rho = S.random_density(3, seed=21)
    res = M.distance_based_measure(rho, kind)
    dist = S.trace_distance if kind == "trace" else S.relative_entropy
    rng = np.random.default_rng(5)
    for _ in range(1000):
        p = res.witness.probs + rng.normal(scale=1e-2, size=3)
        if np.any(p < 0):
            continue
        assert dist(rho, np.diag(p / p.sum())) >= res.value - 1e-8


def test_distance_based_rejects_unknown():
    with pytest.raises(ValidationError):
        M.distance_based_measure(np.eye(2) / 2, "fidelity")


def test_measure_kind_parse():
    assert MeasureKind.parse("L1") is MeasureKind.L1
    assert MeasureKind.parse("relent") is MeasureKind.RELATIVE_ENTROPY
    assert MeasureKind.parse(MeasureKind.TRACE_DISTANCE) is MeasureKind.TRACE_DISTANCE
    assert MeasureKind.RELATIVE_ENTROPY.tag == "RelativeEntropy"
    with pytest.raises(ValidationError):
        MeasureKind.parse("bogus")


@pytest.mark.parametrize("kind,expected", [("l1", 2.0), ("relent", np.log2(3)), ("geometric", 2 / 3)])
def test_max_coherence(kind, expected):
    assert M.max_coherence(kind, 3) == pytest.approx(expected)


# C1: faithfulness on incoherent states, non-negativity elsewhere
@given(st.integers(2, 4), seeds)
def test_vanishes_on_incoherent(d, seed):
    delta = S.random_incoherent(d, seed=seed).to_density()
    assert M.c_l1(delta) == 0.0
    assert M.c_rel_ent(delta) == pytest.approx(0.0, abs=1e-10)
    assert M.c_trace_distance(delta).value == 0.0


@given(states())
def test_nonnegative(rho):
    assert M.c_l1(rho) >= 0.0
    assert M.c_rel_ent(rho) >= -1e-12
    assert M.c_trace_distance(rho, TDCConfig(n_starts=2)).value >= 0.0


# C2: monotone under incoherent channels
@given(state_and_channel())
def test_monotone_under_incoherent_channels(pair):
    rho, ch = pair
    out = S.apply_kraus(ch, rho)
    assert M.c_l1(out) <= M.c_l1(rho) + 1e-10
    assert M.c_rel_ent(out) <= M.c_rel_ent(rho) + 1e-9


@given(state_and_channel(d=3))
def test_tdc_monotone_under_incoherent_channels(pair):
    rho, ch = pair
    a = M.c_trace_distance(rho)
    b = M.c_trace_distance(S.apply_kraus(ch, rho))
    assert b.value - b.gap <= a.value + 1e-8


# C4: convexity
@given(st.integers(2, 4), seeds, st.floats(0, 1))
def test_convex(d, seed, p):
    a = S.random_density(d, seed=seed)
    b = S.random_density(d, seed=seed + 1)
    mix = p * a.matrix + (1 - p) * b.matrix
    for f in (M.c_l1, M.c_rel_ent):
        assert f(mix) <= p * f(a) + (1 - p) * f(b) + 1e-9


def test_coherence_dispatch(plus):
    assert M.coherence(plus, "l1") == pytest.approx(1.0)
    assert M.coherence(plus, "relent") == pytest.approx(1.0)
    assert M.coherence(plus, "tdc") == pytest.approx(0.5, abs=1e-6)
    assert M.coherence(ket_density(1, 0), "geometric") == pytest.approx(0.0, abs=1e-12)


def test_lipschitz_constants():
    assert M.lipschitz_bloch("l1") == 1.0
    assert M.lipschitz_bloch("tdc") == 0.5
    assert M.lipschitz_bloch("relent") == np.inf
