"""Self-check suite: green run, report formats, mutation canaries."""

from __future__ import annotations

import json

import pytest

from shiftwaring.core import ConfigError
from shiftwaring.verify import render_report_csv, render_report_json, \
    run_suite


@pytest.fixture(scope="module")
def report():
    return run_suite(workers=1)


def test_suite_passes(report):
    assert report["passed"] is True
    assert report["suite"] == "shiftwaring-verify"
    assert len(report["checks"]) >= 20
    for check in report["checks"]:
        assert check["passed"] is True, check["name"]
        # tolerance direction varies per check (some are lower bounds),
        # so only the shape of the record is universal
        assert isinstance(check["measured"], float)
        assert isinstance(check["tolerance"], float)


def test_check_names_unique_and_stable(report):
    names = [c["name"] for c in report["checks"]]
    assert len(names) == len(set(names))
    # spot-check a few fixtures that the CSV format tests rely on
    assert "kernel-decomposition-identity" in names
    assert all(name == name.lower() for name in names)


def test_csv_rendering(report):
    text = render_report_csv(report)
    lines = text.splitlines()
    assert text.endswith("\n")
    assert lines[0] == "name,passed,measured,tolerance,detail,config_hash"
    assert len(lines) == 1 + len(report["checks"])
    for line, check in zip(lines[1:], report["checks"]):
        cells = line.split(",")
        assert cells[0] == check["name"]
        assert cells[1] == "true"
        assert float(cells[2]) == check["measured"]
        assert cells[5] == report["config_hash"]


def test_json_rendering_round_trips(report):
    text = render_report_json(report)
    assert json.loads(text) == report


def test_runs_are_deterministic(report):
    again = run_suite(workers=1)
    assert render_report_csv(again) == render_report_csv(report)
    assert again["config_hash"] == report["config_hash"]


def test_mutation_canary_trips_exactly_one_check(report):
    mutated = run_suite(workers=1, mutate="k1-sign")
    assert mutated["passed"] is False
    failing = [c["name"] for c in mutated["checks"] if not c["passed"]]
    assert failing == ["kernel-decomposition-identity"]
    # the mutated run must not silently drop checks
    assert len(mutated["checks"]) == len(report["checks"])


def test_unknown_mutation_rejected():
    with pytest.raises(ConfigError):
        run_suite(mutate="no-such-knob")
