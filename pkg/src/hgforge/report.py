"""Check records, verification reports and their JSON / text renderings."""
from __future__ import annotations

import enum
import json
import math
import platform
from typing import Any, Dict, List, Optional, Sequence, Tuple

import attrs
import numpy as np
import scipy

from hgforge import __version__


class CheckKind(enum.Enum):
    """Theorem checks decide the exit status, probes are only reported."""

    THEOREM = "theorem"
    PROBE = "probe"


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


@attrs.frozen
class CheckRecord:
    id: str
    ref: str
    m: int
    trial: int
    residual: Optional[float] = attrs.field(converter=_finite_or_none)
    tol: float = attrs.field(converter=float)
    kind: CheckKind = attrs.field(default=CheckKind.THEOREM, converter=CheckKind)
    error: Optional[str] = None
    extra: Dict[str, Any] = attrs.field(factory=dict)

    @property
    def passed(self) -> bool:
        return self.error is None and self.residual is not None and self.residual <= self.tol

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        if self.passed:
            return "pass"
        return "fail" if self.kind is CheckKind.THEOREM else "probe-fail"


@attrs.frozen
class Summary:
    passed: int = 0
    failed: int = 0
    probe_passed: int = 0
    probe_failed: int = 0

    @classmethod
    def from_records(cls, records: Sequence[CheckRecord]) -> Summary:
        counts = {(kind, ok): 0 for kind in CheckKind for ok in (True, False)}
        for record in records:
            counts[record.kind, record.passed] += 1
        return cls(
            passed=counts[CheckKind.THEOREM, True],
            failed=counts[CheckKind.THEOREM, False],
            probe_passed=counts[CheckKind.PROBE, True],
            probe_failed=counts[CheckKind.PROBE, False],
        )


def versions() -> Dict[str, str]:
    return {
        "hgforge": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


@attrs.frozen
class Report:
    config: Dict[str, Any] = attrs.field(factory=dict)
    checks: Tuple[CheckRecord, ...] = attrs.field(default=(), converter=tuple)
    versions: Dict[str, str] = attrs.field(factory=versions)

    @property
    def summary(self) -> Summary:
        return Summary.from_records(self.checks)

    @property
    def ok(self) -> bool:
        """Only failing theorem checks make a report fail."""
        return self.summary.failed == 0


def record_to_json(record: CheckRecord) -> Dict[str, Any]:
    doc = {
        "id": record.id,
        "paper_ref": record.ref,
        "m": record.m,
        "trial": record.trial,
        "residual": record.residual,
        "tol": record.tol,
        "kind": record.kind.value,
        "pass": record.passed,
    }
    if record.error is not None:
        doc["error"] = record.error
    if record.extra:
        doc["extra"] = record.extra
    return doc


def record_from_json(doc: Dict[str, Any]) -> CheckRecord:
    return CheckRecord(
        id=doc["id"],
        ref=doc["paper_ref"],
        m=doc["m"],
        trial=doc["trial"],
        residual=doc["residual"],
        tol=doc["tol"],
        kind=doc.get("kind", CheckKind.THEOREM.value),
        error=doc.get("error"),
        extra=doc.get("extra", {}),
    )


def report_to_json(report: Report) -> Dict[str, Any]:
    summary = report.summary
    return {
        "config": report.config,
        "checks": [record_to_json(r) for r in report.checks],
        "summary": {"pass": summary.passed, "fail": summary.failed},
        "probes": {"pass": summary.probe_passed, "fail": summary.probe_failed},
        "versions": report.versions,
    }


def report_from_json(doc: Dict[str, Any]) -> Report:
    return Report(
        config=doc.get("config", {}),
        checks=[record_from_json(r) for r in doc.get("checks", [])],
        versions=doc.get("versions", {}),
    )


@attrs.frozen
class Message:
    content: str
    fmt_keywords: Dict[str, Any] = attrs.field(factory=dict)


_COLUMNS = (("id", 28), ("m", 3), ("residual", 11), ("tol", 9), ("kind", 8), ("status", 10))
_STATUS_STYLE = {
    "pass": {},
    "fail": {"fg": "red", "bold": True},
    "probe-fail": {"fg": "yellow"},
    "error": {"fg": "red"},
}


def _row(values: Sequence[str]) -> str:
    return " | ".join(f"{v:<{width}}" for v, (_, width) in zip(values, _COLUMNS)).rstrip()


def _format_residual(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.3e}"


def render_text(report: Report) -> List[Message]:
    """Fixed-width table followed by a summary line."""
    header = _row([name for name, _ in _COLUMNS])
    messages = [Message(header, {"bold": True}), Message("-" * len(header))]
    for record in report.checks:
        row = _row(
            (
                record.id,
                str(record.m),
                _format_residual(record.residual),
                f"{record.tol:.1e}",
                record.kind.value,
                record.status,
            )
        )
        messages.append(Message(row, _STATUS_STYLE[record.status]))
        if record.error is not None:
            messages.append(Message(f"    {record.error}", _STATUS_STYLE["error"]))
    summary = report.summary
    line = (
        f"{summary.passed} passed, {summary.failed} failed"
        f" ({summary.probe_passed} probes within tolerance, {summary.probe_failed} outside)"
    )
    messages.append(Message(""))
    messages.append(Message(line, {"fg": "green" if report.ok else "red", "bold": True}))
    return messages


def emit_report(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report_to_json(report), indent=2)
    if fmt == "text":
        return "\n".join(m.content for m in render_text(report))
    raise ValueError(f"format: Expected 'json' or 'text', got {fmt!r}.")
