import io
import json

import pytest

from conftest import ACCEPTANCE_LINES
from hemirobin.acceptance import CRITERIA, load_verdicts, run_acceptance, run_criterion, verdicts_to_json
from hemirobin.cli import main


@pytest.fixture(scope="module")
def verdicts():
    out = {v.criterion: v for v in run_acceptance()}
    ACCEPTANCE_LINES.extend(v.line() for v in out.values())
    return out


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(verdicts, number):
    v = verdicts[number]
    print(v.line())
    assert v.passed, v.detail
    assert v.runtime_s <= v.runtime_limit_s


def test_verdict_json_round_trips(verdicts):
    text = verdicts_to_json(list(verdicts.values()))
    back = load_verdicts(text)
    assert [b.as_dict() for b in back] == json.loads(text)["criteria"]
    assert json.loads(verdicts_to_json(back)) == json.loads(text)
    with pytest.raises(ValueError):
        load_verdicts('{"criteria": [{"criterion": 1}]}')
    with pytest.raises(ValueError):
        load_verdicts('{"criteria": [{"criterion": 1, "name": "x", "measured": "big", "bound": "", "pass": true}]}')


def test_amplitude_perturbation_is_detected():
    v1 = run_criterion(1, amplitude_scale=1.01)
    assert not v1.passed and v1.measured == pytest.approx(0.01, rel=1e-6)
    # the sum window [0.97, 1.03] absorbs a 2% change of A^2
    assert run_criterion(2, amplitude_scale=1.01).passed
    assert not run_criterion(2, amplitude_scale=1.03).passed


def test_verify_command_exit_codes():
    out, err = io.StringIO(), io.StringIO()
    assert main(["verify"], stdout=out, stderr=err) == 0
    assert json.loads(out.getvalue())["all_pass"] is True
    assert err.getvalue().count("[PASS]") == len(CRITERIA)
