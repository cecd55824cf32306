import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given

from cohsmooth import io as cio
from cohsmooth import states as S
from cohsmooth.reports import PASS, SKIPPED, VIOLATION, Bracket, PropReport, judge
from cohsmooth.states import ValidationError
from strategies import seeds, states


def test_judge_semantics():
    assert judge(Bracket(0.1, 0.2), Bracket(0.3, 0.4), 0.0)[0] == PASS
    assert judge(Bracket(0.5, 0.6), Bracket(0.3, 0.4), 0.0)[0] == VIOLATION
    # overlapping brackets cannot decide
    assert judge(Bracket(0.35, 0.45), Bracket(0.3, 0.4), 0.0)[0] == SKIPPED
    verdict, slack, audit = judge(Bracket(0.35, 0.45), Bracket(0.3, 0.4), 0.2)
    assert verdict == PASS and slack == pytest.approx(0.15)
    assert audit["lhs_side"] == "upper" and audit["rhs_side"] == "lower"


def test_bracket_arithmetic():
    b = Bracket(1.0, 2.0, "a") + Bracket(0.5, 0.5, "b")
    assert (b.lo, b.hi, b.source) == (1.5, 2.5, "a+b")
    s = Bracket(1.0, 2.0).scale(-1.0)
    assert (s.lo, s.hi) == (-2.0, -1.0)


def test_report_counts_and_merge():
    r = PropReport("P1")
    r.record(PASS, -0.1, {"lhs_source": "x", "rhs_source": "y"})
    r.record(VIOLATION, 0.3, {}, {"w": 1})
    r.skip("reason")
    assert (r.samples, r.violations, r.skipped) == (3, 1, 1)
    assert r.max_slack == 0.3 and r.worst_witness == {"w": 1}
    assert not r.passed
    other = PropReport("P1")
    other.record(PASS, 0.5, {"lhs_source": "z"}, {"w": 2})
    r.merge(other)
    assert r.samples == 4 and r.worst_witness == {"w": 2}
    assert r.audit["skip:reason"] == 1 and "z" in r.audit["lhs_sides"]


def test_record_many():
    r = PropReport("P5")
    parts = [judge(Bracket(0, 0), Bracket(1, 1), 0), judge(Bracket(0.5, 0.7), Bracket(0.6, 0.6), 0)]
    assert r.record_many(parts) == SKIPPED
    assert r.skipped == 1


def test_expected_violation_polarity():
    r = PropReport("P3", expect_violation=True)
    assert not r.passed
    r.record(VIOLATION, 0.5, {})
    assert r.passed
    r.record(PASS, -0.5, {})
    assert not r.passed


def test_report_to_dict_is_json():
    r = PropReport("P2", tolerance=1e-6)
    d = r.to_dict()
    assert d["max_slack"] == 0.0 and d["passed"]
    json.dumps(d)


@given(states())
def test_state_round_trip_bit_identical(rho):
    text = cio.dumps(cio.state_to_json(rho))
    back = cio.state_from_json(json.loads(text))
    assert np.array_equal(back.matrix, rho.matrix)


@given(seeds)
def test_channel_round_trip_bit_identical(seed):
    ch = S.random_incoherent_channel(3, seed=seed)
    back = cio.channel_from_json(json.loads(cio.dumps(cio.channel_to_json(ch))))
    for a, b in zip(ch.operators, back.operators):
        assert np.array_equal(a, b)


def test_state_json_errors(tmp_path):
    with pytest.raises(ValidationError):
        cio.state_from_json({"matrix": [[1, 0], [0, 0]]})
    with pytest.raises(ValidationError):
        cio.state_from_json({"matrix": [[[1, 0]]], "dim": 2})
    with pytest.raises(ValidationError):
        cio.state_from_json({"matrix": [[[1, 0]]], "extra": 1})
    with pytest.raises(ValidationError):
        cio.state_from_json({"dim": 1})
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ValidationError):
        cio.load_state(p)


def test_save_load_files(tmp_path):
    rho = S.random_density(3, seed=4)
    cio.save_state(tmp_path / "s.json", rho)
    assert np.array_equal(cio.load_state(tmp_path / "s.json").matrix, rho.matrix)
    ch = S.random_incoherent_channel(2, seed=4)
    cio.save_channel(tmp_path / "c.json", ch)
    assert cio.load_channel(tmp_path / "c.json").incoherent


def test_csv_columns():
    r = PropReport("P4", samples=3, violations=0, skipped=1, max_slack=1e-7)
    rows = list(csv.reader(io.StringIO(cio.reports_to_csv([r, r.to_dict()]))))
    assert rows[0] == list(cio.CSV_COLUMNS)
    assert rows[1] == ["P4", "3", "0", "1", "1e-07"]
    assert rows[1] == rows[2]
