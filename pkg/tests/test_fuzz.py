import json
import random
from fractions import Fraction

import pytest

from sigma_lab.errors import SigmaLabError
from sigma_lab.fuzz import (CHECKS, DISCARD, ERROR, FAIL, PASS, FuzzConfig, _base, check_l1_lower, evaluate,
                            instance_from_json, instance_to_json, parse_checks, replay, run_fuzz, shrink,
                            trial_seed)


def at_most_two_outcomes(inst):
    # deliberately false once the generator draws three or more outcomes
    n = len(inst["masses"])
    return (PASS, "") if n <= 2 else (FAIL, f"{n} outcomes")


def gen_wide(rng, cfg):
    return _base(rng, FuzzConfig(min_outcomes=5, max_outcomes=6), parts=2, values=1, density=True)


def explode(inst):
    raise ZeroDivisionError("boom")


PLANTED = {"at-most-two": (gen_wide, at_most_two_outcomes), "explode": (gen_wide, explode)}


def test_same_seed_same_report():
    cfg = FuzzConfig(seed=7, trials=15, checks=("metric-axioms", "bayes", "rogge"))
    assert json.dumps(run_fuzz(cfg).to_json(), sort_keys=True) == json.dumps(run_fuzz(cfg).to_json(),
                                                                              sort_keys=True)


def test_trial_seed_depends_only_on_its_key():
    assert trial_seed(42, "landers", 3) == trial_seed(42, "landers", 3)
    assert trial_seed(42, "landers", 3) != trial_seed(42, "landers", 4)
    assert trial_seed(42, "landers", 3) != trial_seed(43, "landers", 3)
    few = run_fuzz(FuzzConfig(trials=3, checks=("at-most-two",), shrink=False), PLANTED)
    many = run_fuzz(FuzzConfig(trials=6, checks=("at-most-two",), shrink=False), PLANTED)
    first = [f["instance"] for f in few.stats["at-most-two"].failures]
    assert [f["instance"] for f in many.stats["at-most-two"].failures][:3] == first


def test_every_check_passes_briefly():
    rep = run_fuzz(FuzzConfig(seed=1, trials=12))
    for name, s in rep.stats.items():
        assert s.ok, (name, s.failures[:1])
        assert s.passed + s.discarded + s.failed + s.errors == 12


def test_equal_fields_are_discarded():
    inst = {"masses": [Fraction(1, 2), Fraction(1, 2)], "parts": [[0, 1], [0, 1]], "values": [], "params": {}}
    assert evaluate(check_l1_lower, inst)[0] == DISCARD


def test_shrinker_finds_minimal_counterexample():
    rep = run_fuzz(FuzzConfig(trials=5, checks=("at-most-two",)), PLANTED)
    s = rep.stats["at-most-two"]
    assert s.failed == 5 and not rep.ok
    for f in s.failures:
        assert len(f["instance"]["masses"]) >= 5
        assert len(f["shrunk"]["masses"]) == 3
        assert f["shrunk"]["density"] == [1, 1, 1]


def test_crash_is_reported_as_error():
    rep = run_fuzz(FuzzConfig(trials=2, checks=("explode",)), PLANTED)
    s = rep.stats["explode"]
    assert s.errors == 2 and s.failed == 0 and not s.ok
    assert s.failures[0]["status"] == ERROR and "ZeroDivisionError" in s.failures[0]["detail"]


def test_replay_round_trip():
    rep = run_fuzz(FuzzConfig(trials=1, checks=("at-most-two",)), PLANTED)
    doc = json.loads(json.dumps(rep.to_json()))
    failure = doc["checks"]["at-most-two"]["failures"][0]
    n = len(failure["instance"]["masses"])
    assert replay("at-most-two", failure["instance"], PLANTED) == (FAIL, f"{n} outcomes")
    assert replay("at-most-two", failure["shrunk"], PLANTED) == (FAIL, "3 outcomes")
    gen, _ = CHECKS["tower"]
    inst = gen(random.Random(5), FuzzConfig())
    assert instance_from_json(json.loads(json.dumps(instance_to_json(inst)))) == inst
    assert replay("tower", instance_to_json(inst))[0] == PASS


def test_shrink_keeps_passing_instance_unchanged():
    inst = {"masses": [Fraction(1)], "parts": [[0]], "values": [], "params": {}}
    assert shrink(at_most_two_outcomes, inst, FAIL) == inst


def test_unknown_checks():
    assert parse_checks("tower, bayes") == ("tower", "bayes")
    with pytest.raises(SigmaLabError):
        parse_checks("tower,nope")
    with pytest.raises(SigmaLabError):
        run_fuzz(FuzzConfig(trials=1, checks=("nope",)))
    with pytest.raises(SigmaLabError):
        replay("nope", {})


def test_worker_pool_matches_serial():
    cfg = dict(seed=3, trials=10, checks=("landers", "sandwich"))
    assert run_fuzz(FuzzConfig(**cfg)).to_json() == run_fuzz(FuzzConfig(workers=2, **cfg)).to_json()
