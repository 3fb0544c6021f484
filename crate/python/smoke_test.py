"""Smoke test for the accountable_py extension module.

Build the module first (see README), then run:
    python3 python/smoke_test.py
"""
import json
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)

import accountable_py as acc

SCENARIOS = os.path.join(HERE, "..", "scenarios")


def load(name):
    return acc.Model.from_file(os.path.join(SCENARIOS, name))


def main():
    hall = load("uber-hall.acct")
    assert hall.hall() == ["AI", "CHASSIS"], hall.hall()
    assert hall.informed("AI") == ["UBER"]

    lind = load("uber-lindberg.acct")
    assert lind.lindberg("AI") == ["UBER"]
    assert lind.lindberg("CHASSIS") == ["DRIVER"]

    raci = load("uber-raci.acct")
    assert raci.raci("HIT_PEDESTRIAN") == ["UBER"]
    assert raci.missed_by_ego() == ["DETECT_PEDESTRIAN"]
    assert raci.raci("HIT_PEDESTRIAN", ["CHASSIS"]) == []

    report = json.loads(raci.report_json())
    assert report["missed_by_ego"] == ["DETECT_PEDESTRIAN"]

    sts = load("uber-sts.acct")
    rules = [v["rule"] for v in json.loads(sts.check(strict=True))]
    assert rules == ["CPS-1"], rules
    assert json.loads(sts.check()) == []

    text = raci.serialize()
    assert acc.Model.from_text(text).serialize() == text
    assert acc.canonicalize(text) == text

    try:
        acc.Model.from_text("component A\nprincipal P kind=robot\n")
    except ValueError as e:
        assert "2:" in str(e)
    else:
        raise AssertionError("bad scenario accepted")

    try:
        hall.lindberg("NOPE")
    except KeyError:
        pass
    else:
        raise AssertionError("unknown component accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
