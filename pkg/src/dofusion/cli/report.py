"""Command reports in text, LaTeX and JSON form.

The JSON schema is shared by every command:

    {"command", "query", "status", "estimand_text", "estimand_latex",
     "derivation", "validation": {"seeds", "max_abs_error"[, "gapped"]}, "details"}

Fields a command does not produce are null.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from ..core.engine import Derivation, DeriveResult, derivation_to_json
from ..core.estimand import Estimand, render
from ..core.queue import ValidationSummary

STATUS_TRUE = "true"
STATUS_FALSE = "false"


@dataclass
class Report:
    """Outcome of one CLI command."""

    command: str
    status: str
    success: bool
    query: str | None = None
    estimand: Estimand | None = None
    derivation: Derivation | None = None
    validation: ValidationSummary | None = None
    reason: str | None = None
    path: str | None = None
    lines: list[str] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_result(cls, command: str, query: str, result: DeriveResult) -> Report:
        return cls(
            command=command,
            status=result.status.value,
            success=result.success,
            query=query,
            estimand=result.estimand,
            derivation=result.derivation,
            reason=result.reason,
            path=result.path,
        )

    @classmethod
    def verdict(cls, command: str, holds: bool, **kwargs: Any) -> Report:
        return cls(command, STATUS_TRUE if holds else STATUS_FALSE, holds, **kwargs)


def to_json(report: Report) -> dict[str, Any]:
    validation = None
    if report.validation is not None:
        validation = {
            "seeds": report.validation.seeds,
            "max_abs_error": report.validation.max_abs_error,
        }
        if report.validation.gapped:
            validation["gapped"] = dict(sorted(report.validation.gapped.items()))
        if report.validation.failures:
            validation["failures"] = [
                {"label": label, "seed": seed, "error": error}
                for label, seed, error in report.validation.failures
            ]
    return {
        "command": report.command,
        "query": report.query,
        "status": report.status,
        "estimand_text": render(report.estimand) if report.estimand is not None else None,
        "estimand_latex": render(report.estimand, "latex") if report.estimand is not None else None,
        "derivation": derivation_to_json(report.derivation) if report.derivation else None,
        "validation": validation,
        "details": report.details or None,
    }


def _derivation_lines(d: Derivation, fmt: str) -> list[str]:
    out = []
    for i, step in enumerate(d.steps, start=1):
        out.append(f"  {i}. {step.rule.value}: {render(step.after, fmt)}")
        if step.premise is not None:
            out.append(f"     premise: {step.premise}")
    return out


def format_report(report: Report, fmt: str = "text") -> str:
    """Render a report for stdout."""
    if fmt == "json":
        return json.dumps(to_json(report), indent=2, ensure_ascii=False) + "\n"

    expr_fmt = "latex" if fmt == "latex" else "pretty"
    out: list[str] = []
    if report.query is not None:
        out.append(f"query: {report.query}")
    status = report.status
    if report.path:
        status += f" ({report.path})"
    out.append(f"status: {status}")
    if report.reason:
        out.append(f"reason: {report.reason}")
    if report.estimand is not None:
        out.append(f"estimand: {render(report.estimand, expr_fmt)}")
        if fmt == "text":
            out.append(f"text: {render(report.estimand)}")
    if report.derivation is not None and report.derivation.steps:
        out.append("derivation:")
        out.extend(_derivation_lines(report.derivation, expr_fmt))
    if report.validation is not None:
        v = report.validation
        out.append(f"validation: seeds={v.seeds} max_abs_error={v.max_abs_error:.3g}")
        out.extend(f"  gap {label}: {n}/{v.seeds} seeds" for label, n in sorted(v.gapped.items()))
        out.extend(f"  failed {label} seed={seed}: {error}" for label, seed, error in v.failures)
    out.extend(report.lines)
    return "\n".join(out) + "\n"
