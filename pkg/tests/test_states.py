import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cohsmooth import states as S
from cohsmooth.states import (
    DensityMatrix,
    IncoherentState,
    KrausChannel,
    PureState,
    ValidationError,
)
from strategies import seeds, state_and_channel, states


def _power_iteration_spectrum(m, iters=3000):
    """Independent spectrum oracle: deflated power iteration on a shifted matrix."""
    n = m.shape[0]
    shift = np.abs(m).sum() + 1.0
    a = m + shift * np.eye(n)
    vals = []
    rng = np.random.default_rng(0)
    for _ in range(n):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        for _ in range(iters):
            x = a @ x
            x /= np.linalg.norm(x)
        lam = np.real(np.vdot(x, a @ x))
        vals.append(lam - shift)
        a = a - lam * np.outer(x, x.conj())
    return np.sort(vals)[::-1]


def test_density_invariants_enforced():
    with pytest.raises(ValidationError):
        DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([0.6, 0.6]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([1.2, -0.2]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.ones((2, 3)) / 2)
    rho = DensityMatrix(np.diag([1.2, -0.2]), repair=True)
    assert np.allclose(rho.matrix, np.diag([1.0, 0.0]))


def test_incoherent_and_pure_invariants():
    with pytest.raises(ValidationError):
        IncoherentState([0.5, 0.6])
    with pytest.raises(ValidationError):
        IncoherentState([1.1, -0.1])
    with pytest.raises(ValidationError):
        PureState([1.0, 1.0])
    psi = PureState([1.0, 1.0], normalize=True)
    assert np.isclose(np.linalg.norm(psi.amplitudes), 1.0)
    d = IncoherentState([0.25, 0.75]).to_density().matrix
    assert np.allclose(d, np.diag([0.25, 0.75]))


def test_hermitian_eig_trivial():
    w, v = S.hermitian_eig(np.eye(2))
    assert np.allclose(w, [1, 1])
    w, v = S.hermitian_eig(np.diag([0.3, 0.7]))
    assert np.allclose(w, [0.7, 0.3])
    assert np.allclose(np.abs(v), np.array([[0, 1], [1, 0]]))


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        S.hermitian_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


@given(seeds)
def test_hermitian_eig_reconstruction_and_oracle(seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = (g + g.conj().T) / 2
    w, v = S.hermitian_eig(h)
    assert np.linalg.norm(h - (v * w) @ v.conj().T) <= 1e-9
    assert np.linalg.norm(v.conj().T @ v - np.eye(4)) <= 1e-9
    assert np.all(np.diff(w) <= 1e-12)
    assert np.allclose(w, np.sort(np.linalg.eigvalsh(h))[::-1], atol=1e-10)


def test_hermitian_eig_matches_power_iteration():
    rng = np.random.default_rng(7)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = (g + g.conj().T) / 2
    w, _ = S.hermitian_eig(h)
    assert np.allclose(w, _power_iteration_spectrum(h), atol=1e-8)


def test_trace_distance_examples(plus):
    zero = S.basis_state(2, 0)
    one = S.basis_state(2, 1)
    assert S.trace_distance(zero, one) == pytest.approx(1.0)
    assert S.trace_distance(plus, plus) == pytest.approx(0.0, abs=1e-12)
    # pure states: sqrt(1 - |<a|b>|^2)
    theta = 0.3
    b = DensityMatrix.from_pure([np.cos(theta), np.sin(theta)])
    assert S.trace_distance(zero, b) == pytest.approx(abs(np.sin(theta)), abs=1e-12)
    with pytest.raises(ValidationError):
        S.trace_distance(zero, S.basis_state(3, 0))


@given(states(), seeds)
def test_trace_distance_metric(rho, seed):
    tau = S.random_density(rho.dim, seed=seed)
    sig = S.random_density(rho.dim, seed=seed + 1)
    dt = S.trace_distance(rho, tau)
    assert 0.0 <= dt <= 1.0 + 1e-12
    assert dt == pytest.approx(S.trace_distance(tau, rho), abs=1e-12)
    assert dt <= S.trace_distance(rho, sig) + S.trace_distance(sig, tau) + 1e-12


@given(state_and_channel(), seeds)
def test_distances_contract_under_channels(pair, seed):
    rho, ch = pair
    tau = S.random_density(rho.dim, seed=seed)
    a, b = S.apply_kraus(ch, rho), S.apply_kraus(ch, tau)
    assert S.trace_distance(a, b) <= S.trace_distance(rho, tau) + 1e-10
    assert S.relative_entropy(a, b) <= S.relative_entropy(rho, tau) + 1e-8


def test_relative_entropy_examples():
    zero, one = S.basis_state(2, 0), S.basis_state(2, 1)
    assert S.relative_entropy(zero, zero) == pytest.approx(0.0, abs=1e-12)
    assert S.relative_entropy(zero, one) == np.inf
    mixed = DensityMatrix.maximally_mixed(2)
    assert S.relative_entropy(zero, mixed) == pytest.approx(1.0)


@given(states(), seeds)
def test_relative_entropy_nonnegative(rho, seed):
    tau = S.random_density(rho.dim, seed=seed)
    assert S.relative_entropy(rho, tau) >= -1e-10


def test_entropy_examples(plus):
    assert S.von_neumann_entropy(plus) == pytest.approx(0.0, abs=1e-12)
    assert S.von_neumann_entropy(DensityMatrix.maximally_mixed(4)) == pytest.approx(2.0)


def test_dephase_and_tensor(plus):
    assert np.allclose(S.dephase(plus).probs, [0.5, 0.5])
    t = S.tensor(S.basis_state(2, 0), plus)
    assert t.dim == 4
    assert np.allclose(t.matrix[:2, :2], plus.matrix)
    assert np.allclose(t.matrix[2:, 2:], 0)


def test_mixing_channel_examples(plus):
    delta = IncoherentState([0.5, 0.5])
    assert np.allclose(S.mixing_channel(plus, delta, 0.0).matrix, plus.matrix)
    assert np.allclose(S.mixing_channel(plus, delta, 1.0).matrix, np.eye(2) / 2)
    with pytest.raises(ValidationError):
        S.mixing_channel(plus, delta, 1.5)
    # the Kraus form reproduces the map
    k = S.mixing_kraus(delta, 0.3)
    assert S.is_incoherent_channel(k)
    assert np.allclose(S.apply_kraus(k, plus).matrix, S.mixing_channel(plus, delta, 0.3).matrix)


def test_kraus_channel_checks():
    with pytest.raises(ValidationError):
        KrausChannel([np.eye(2) * 0.5])
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    ch = KrausChannel([h])
    assert not ch.incoherent
    with pytest.raises(ValidationError):
        KrausChannel([h], incoherent=True)
    assert S.is_incoherent_channel(S.dephasing_channel(3))
    assert S.is_incoherent_channel(S.partial_dephasing_channel(3, 0.4))
    assert S.is_incoherent_channel(S.unitary_channel(S.permutation_matrix([2, 0, 1], [0.1, 0.2, 0.3])))


@given(st.integers(2, 4), seeds)
def test_random_incoherent_channel_properties(d, seed):
    ch = S.random_incoherent_channel(d, seed=seed)
    assert ch.incoherent
    comp = sum(k.conj().T @ k for k in ch.operators)
    assert np.allclose(comp, np.eye(d), atol=1e-10)
    # maps incoherent states to incoherent states
    delta = S.random_incoherent(d, seed=seed).to_density()
    out = S.apply_kraus(ch, delta).matrix
    assert np.allclose(out - np.diag(np.diag(out)), 0, atol=1e-12)


def test_selective_apply_branches(plus):
    ch = S.dephasing_channel(2)
    br = S.selective_apply(ch, plus)
    assert [b.index for b in br] == [0, 1]
    assert sum(b.prob for b in br) == pytest.approx(1.0)
    assert np.allclose(br[0].state.matrix, np.diag([1, 0]))
    # a zero-probability branch is dropped
    br = S.selective_apply(ch, S.basis_state(2, 0))
    assert [b.index for b in br] == [0]


def test_compose_order():
    x = S.unitary_channel(S.permutation_matrix([1, 0]))
    dep = S.partial_dephasing_channel(2, 1.0)
    both = dep.compose(x)
    rho = DensityMatrix(np.array([[0.7, 0.2], [0.2, 0.3]]))
    assert np.allclose(both(rho).matrix, np.diag([0.3, 0.7]))


def test_random_generators_deterministic():
    a = S.random_density(3, seed=11).matrix
    b = S.random_density(3, seed=11).matrix
    assert np.array_equal(a, b)
    assert not np.array_equal(a, S.random_density(3, seed=12).matrix)
    assert S.random_density(3, rank=1, seed=5).purity() == pytest.approx(1.0)
    assert np.array_equal(S.random_pure(3, seed=4).amplitudes, S.random_pure(3, seed=4).amplitudes)
    ch1 = S.random_incoherent_channel(3, seed=9)
    ch2 = S.random_incoherent_channel(3, seed=9)
    assert all(np.array_equal(p, q) for p, q in zip(ch1.operators, ch2.operators))


def test_random_channel_is_cptp():
    ch = S.random_channel(3, seed=1)
    assert np.allclose(sum(k.conj().T @ k for k in ch.operators), np.eye(3))


@given(seeds)
def test_bloch_round_trip(seed):
    rho = S.random_density(2, seed=seed)
    v = S.density_to_bloch(rho)
    assert np.linalg.norm(v) <= 1 + 1e-12
    assert np.allclose(S.bloch_to_density(v), rho.matrix, atol=1e-14)
    tau = S.random_density(2, seed=seed + 1)
    assert S.trace_distance(rho, tau) == pytest.approx(
        0.5 * np.linalg.norm(v - S.density_to_bloch(tau)), abs=1e-12)


def test_maximally_coherent():
    psi = S.maximally_coherent(4, 2).amplitudes
    assert np.allclose(psi, [2 ** -0.5, 2 ** -0.5, 0, 0])


def test_entropy_scalar_value():
    assert S.von_neumann_entropy(np.diag([0.7, 0.3])) == pytest.approx(0.8812908992306927)


def test_relative_entropy_support_violation():
    assert S.relative_entropy(np.eye(2) / 2, S.basis_state(2, 0)) == np.inf


def test_tensor_spectrum_products():
    a, b = S.random_density(2, seed=1), S.random_density(3, seed=2)
    wa, _ = S.hermitian_eig(a.matrix)
    wb, _ = S.hermitian_eig(b.matrix)
    w, _ = S.hermitian_eig(S.tensor(a, b).matrix)
    assert np.allclose(w, np.sort(np.outer(wa, wb).ravel())[::-1], atol=1e-12)


@given(states(), seeds, st.floats(0.0, 1.0))
def test_mixing_moves_at_most_p_times_distance(rho, seed, p):
    delta = S.random_incoherent(rho.dim, seed=seed)
    out = S.mixing_channel(rho, delta, p)
    assert S.trace_distance(out, rho) <= p * S.trace_distance(rho, delta.to_density()) + 1e-12


def test_hadamard_creates_coherence():
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    ch = KrausChannel([h])
    assert not S.is_incoherent_channel(ch)
    out = S.apply_kraus(ch, S.basis_state(2, 0)).matrix
    assert abs(out[0, 1]) == pytest.approx(0.5)


def test_random_density_average_near_maximally_mixed():
    rng = np.random.default_rng(0)
    mean = sum(S.random_density(2, seed=rng).matrix for _ in range(10_000)) / 10_000
    assert S.trace_distance(mean, np.eye(2) / 2) < 0.02


def test_prop3_measurement_branches():
    eta = 0.05
    plus = DensityMatrix.from_pure(np.array([1, 1]) / np.sqrt(2))
    rho = eta * S.tensor(S.basis_state(2, 0), plus).matrix \
        + (1 - eta) * S.tensor(S.basis_state(2, 1), np.eye(2) / 2).matrix
    ch = KrausChannel([np.kron(np.diag([1, 0]), np.eye(2)), np.kron(np.diag([0, 1]), np.eye(2))])
    br = S.selective_apply(ch, rho)
    assert [b.prob for b in br] == pytest.approx([eta, 1 - eta])
    assert np.allclose(br[0].state.matrix, S.tensor(S.basis_state(2, 0), plus).matrix)
