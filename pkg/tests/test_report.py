import json

import pytest

from hgforge.report import (
    CheckKind,
    CheckRecord,
    Report,
    Summary,
    emit_report,
    record_from_json,
    record_to_json,
    render_text,
    report_from_json,
    report_to_json,
)


def _record(id="cauchy.inverse.rational", residual=1e-12, tol=1e-7, **kwargs):
    return CheckRecord(
        id=id, ref="rational Cauchy inverse", m=2, trial=0, residual=residual, tol=tol, **kwargs
    )


@pytest.mark.parametrize(
    "kwargs, status",
    [
        (dict(), "pass"),
        (dict(residual=1e-3), "fail"),
        (dict(residual=1e-3, kind="probe"), "probe-fail"),
        (dict(residual=None, error="SeriesError: outside the disc"), "error"),
        (dict(residual=0.0, tol=0.0), "pass"),
    ],
)
def test_record_status(kwargs, status):
    assert _record(**kwargs).status == status


@pytest.mark.parametrize("value", [float("nan"), float("inf"), None])
def test_non_finite_residual_becomes_none(value):
    record = _record(residual=value)
    assert record.residual is None
    assert not record.passed


def test_summary_counts():
    records = [
        _record(),
        _record(residual=1.0),
        _record(kind=CheckKind.PROBE),
        _record(residual=1.0, kind=CheckKind.PROBE),
        _record(residual=1.0, kind=CheckKind.PROBE),
    ]
    assert Summary.from_records(records) == Summary(
        passed=1, failed=1, probe_passed=1, probe_failed=2
    )


def test_failing_probes_do_not_fail_the_report():
    report = Report(checks=[_record(), _record(residual=1.0, kind=CheckKind.PROBE)])
    assert report.ok
    assert not Report(checks=[_record(residual=1.0)]).ok


def test_record_json_keys():
    doc = record_to_json(_record(extra={"column": "Column1"}))
    keys = ["id", "paper_ref", "m", "trial", "residual", "tol", "kind", "pass", "extra"]
    assert list(doc) == keys
    assert doc["kind"] == "theorem"
    assert doc["pass"] is True
    assert record_from_json(doc) == _record(extra={"column": "Column1"})


def test_error_is_reported():
    doc = record_to_json(_record(residual=None, error="GenericityError: resonant"))
    assert doc["residual"] is None
    assert doc["error"] == "GenericityError: resonant"


def test_report_json():
    report = Report(
        config={"suite": "cauchy"},
        checks=[_record(), _record(residual=1.0, kind=CheckKind.PROBE)],
        versions={"hgforge": "24.1"},
    )
    doc = report_to_json(report)
    assert doc["summary"] == {"pass": 1, "fail": 0}
    assert doc["probes"] == {"pass": 0, "fail": 1}
    assert doc["config"] == {"suite": "cauchy"}
    assert report_from_json(json.loads(json.dumps(doc))) == report


def test_empty_report_json():
    doc = report_to_json(Report())
    assert doc["checks"] == []
    assert doc["summary"] == {"pass": 0, "fail": 0}


def test_versions_are_filled_in():
    versions = Report().versions
    assert set(versions) == {"hgforge", "numpy", "scipy", "python"}


def test_text_rendering():
    report = Report(checks=[_record(), _record(residual=None, error="ValueError: boom")])
    messages = render_text(report)
    assert messages[0].content.startswith("id")
    assert messages[0].fmt_keywords == {"bold": True}
    assert "pass" in messages[2].content
    assert messages[4].content == "    ValueError: boom"
    assert messages[-1].content == "1 passed, 1 failed (0 probes within tolerance, 0 outside)"
    assert messages[-1].fmt_keywords["fg"] == "red"


def test_emit_report():
    report = Report(checks=[_record()], versions={})
    assert json.loads(emit_report(report))["summary"]["pass"] == 1
    assert "1 passed, 0 failed" in emit_report(report, "text")
    with pytest.raises(ValueError) as excinfo:
        emit_report(report, "yaml")
    assert "'yaml'" in str(excinfo.value)
