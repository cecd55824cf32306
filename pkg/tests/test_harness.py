import numpy as np
import pytest

from cohsmooth import harness as H
from cohsmooth import states as S
from cohsmooth.harness import Campaign, CounterexampleSpec
from cohsmooth.states import DensityMatrix, IncoherentState, ValidationError

SMALL = {k: 3 for k in H.DEFAULT_SAMPLES}


@pytest.fixture(scope="module")
def small():
    return Campaign(samples=dict(SMALL), channels_per_state=2,
                    family={"phase_settings": 4, "p_step": 0.25, "delta_step": 0.5, "budget": 20000},
                    smooth=H.SmoothConfig(oracle_resolution=101))


def test_campaign_validation():
    with pytest.raises(ValidationError):
        Campaign(dims=(1,))
    with pytest.raises(ValidationError):
        Campaign(eps_grid=(0.0,))
    with pytest.raises(ValidationError):
        Campaign(eps_pairs=((0.1, 0.2),))
    with pytest.raises(ValidationError):
        Campaign(measures=("geometric",))
    with pytest.raises(ValidationError):
        Campaign(samples={"P99": 1})
    with pytest.raises(ValidationError):
        Campaign.from_dict({"bogus": 1})
    with pytest.raises(ValidationError):
        Campaign.from_dict({"family": {"bogus": 1}})


def test_campaign_dict_round_trip():
    c = Campaign(seed=4, samples={"P1": 7}, eps_pairs=((0.3, 0.1),))
    back = Campaign.from_dict(c.to_dict())
    assert back == c
    assert back.n("P1") == 7 and back.n("P2") == H.DEFAULT_SAMPLES["P2"]


def test_campaign_rng_streams_are_independent():
    c = Campaign(seed=1)
    a = c.rng("P1", 0).random()
    assert a == c.rng("P1", 0).random()
    assert a != c.rng("P2", 0).random()
    assert a != c.rng("P1", 1).random()


def test_counterexample_spec_validation():
    with pytest.raises(ValidationError):
        CounterexampleSpec(eta=0.0)
    with pytest.raises(ValidationError):
        CounterexampleSpec(eta=0.2, epsilon=0.1)
    with pytest.raises(ValidationError):
        CounterexampleSpec(delta=IncoherentState([1 / 3] * 3))


def test_build_prop3_state():
    spec = CounterexampleSpec()
    rho = H.build_prop3_state(spec)
    ref = S.tensor(S.basis_state(2, 1), spec.delta.to_density())
    assert S.trace_distance(rho, ref) == pytest.approx(0.05, abs=1e-10)
    w, _ = S.hermitian_eig(rho.matrix)
    expected = np.concatenate([0.05 * np.array([1.0, 0.0]), 0.95 * spec.delta.probs])
    assert np.allclose(w, np.sort(expected)[::-1], atol=1e-12)
    one = H.build_prop3_state(CounterexampleSpec(eta=1.0, epsilon=1.0))
    assert np.allclose(one.matrix, S.tensor(S.basis_state(2, 0), spec.rho_c).matrix)


@pytest.mark.parametrize("measure", ["l1", "relent"])
def test_prop3_default_reproduces_violation(measure):
    rep = H.check_prop3(CounterexampleSpec(), measure)
    assert rep.expect_violation and rep.passed
    assert rep.violations == rep.samples == 1
    w = rep.worst_witness
    assert w["reproduced"]
    assert w["c_min_rho"] <= 1e-3
    assert w["branch_sum_lo"] >= 0.01
    assert w["qubit_factor"]["abs_diff"] <= 5e-3


def test_prop3_marginal_and_incoherent():
    rep = H.check_prop3(CounterexampleSpec(eta=0.1, epsilon=0.1))
    assert any("marginal" in n for n in rep.notes)
    spec = CounterexampleSpec(rho_c=DensityMatrix(np.diag([0.3, 0.7])))
    rep = H.check_prop3(spec)
    assert not rep.expect_violation
    assert rep.violations == 0 and rep.passed
    assert any("incoherent" in n for n in rep.notes)
    assert rep.worst_witness["branch_sum_hi"] == pytest.approx(0.0, abs=1e-9)


def test_bloch_affine_matches_channel():
    ch = S.random_incoherent_channel(2, seed=3)
    a, b = H.bloch_affine(ch)
    rho = S.random_density(2, seed=4)
    v = S.density_to_bloch(rho)
    assert np.allclose(a @ v + b, S.density_to_bloch(S.apply_kraus(ch, rho)), atol=1e-12)


def test_check_prop_ids(small):
    rep = H.check_prop(1, small)
    assert rep.prop_id == "P1" and rep.samples == 3
    assert H.check_prop("p1", small).to_dict() == rep.to_dict()
    with pytest.raises(ValidationError):
        H.check_prop("P11", small)


def test_small_campaign_passes_and_is_deterministic(small):
    first = H.reports_to_json(H.run_campaign(small))
    second = H.reports_to_json(H.run_campaign(small))
    assert first == second
    reports = H.run_campaign(small)
    ids = [r.prop_id for r in reports]
    assert ids == list(H.PROP_IDS) + ["COVERAGE"]
    for r in reports:
        assert r.passed, r.to_dict()
    # seeds change the sampled instances
    other = H.reports_to_json(H.run_campaign(Campaign.from_dict(dict(small.to_dict(), seed=1))))
    assert other != first


def test_write_reports(tmp_path, small):
    reports = H.run_campaign(small, ["P1", "P3"])
    H.write_reports(reports, tmp_path / "r.json", tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == \
        "prop_id,samples,violations,skipped,max_slack"
    assert [r.prop_id for r in reports] == ["P1", "P3"]
