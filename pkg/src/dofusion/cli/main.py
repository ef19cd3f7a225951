"""Command-line front end.

Every invocation becomes one Job; `run` dispatches it to the criteria or the
derivation engine and returns an exit status with a Report. Reports go to
stdout, logs to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from tqdm import tqdm

from .. import __version__
from ..core.config import get_config
from ..core.criteria import (
    backdoor_estimand,
    enumerate_backdoor_sets,
    find_frontdoor,
    first_minimal_backdoor_set,
    frontdoor_estimand,
)
from ..core.engine import (
    DEFAULT_SOURCE,
    DeriveResult,
    DeriveStatus,
    SearchBudget,
    identify,
    load_derivation,
    query_from_text,
    recover,
    selection_catalog,
    transport,
    verify,
)
from ..core.estimand import TARGET, Query, Source, SourceCatalog, render
from ..core.fixtures import FIXTURE_CATALOG, Fixture, Task, get_query_fixtures
from ..core.grammar import parse_estimand
from ..core.graph import Graph, format_graph
from ..core.logging import progress_logging, setup_logging, verbosity_level
from ..core.queue import (
    ValidationJob,
    ValidationQueue,
    ValidationSummary,
    estimand_check,
    step_check,
)
from ..core.separation import d_separated, implied_independencies
from .parsers import format_sources, parse_graph, parse_name_groups, parse_sources
from .report import Report, format_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2

COMMANDS = (
    "dsep",
    "ci-list",
    "adjust",
    "identify",
    "recover",
    "transport",
    "validate",
    "check-derivation",
    "export",
)


class UsageError(Exception):
    """Command arguments that do not fit together."""

    pass


@dataclass
class Job:
    """One CLI invocation."""

    command: str
    graph_path: Path | None = None
    args: dict[str, Any] = field(default_factory=dict)
    output_format: str = "text"
    seed: int = 0
    budget: dict[str, int | None] = field(default_factory=dict)
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command: {self.command}")
        if self.output_format not in ("text", "latex", "json"):
            raise UsageError(f"unknown output format: {self.output_format}")


# =============================================================================
# Inputs
# =============================================================================


def _read(path: Path) -> str:
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    return path.read_text(encoding="utf-8")


def _graph(job: Job) -> Graph:
    if job.graph_path is None:
        raise UsageError(f"{job.command} needs a diagram file")
    return parse_graph(_read(job.graph_path))


def _catalog(job: Job, g: Graph) -> SourceCatalog | None:
    data = job.args.get("data")
    if data is None:
        return None
    cat = parse_sources(_read(Path(data)))
    cat.check(g)
    return cat


def _names(text: str, g: Graph) -> frozenset[str]:
    groups = parse_name_groups(text)
    if len(groups) != 1:
        raise UsageError(f"expected a single vertex set, got {text!r}")
    return g.check(groups[0])


# =============================================================================
# Commands
# =============================================================================


def _dsep(job: Job) -> Report:
    g = _graph(job)
    groups = parse_name_groups(job.args["sets"])
    if len(groups) not in (2, 3):
        raise UsageError("dsep expects 'X | Y' or 'X | Y | Z'")
    x, y = g.check(groups[0]), g.check(groups[1])
    z = g.check(groups[2]) if len(groups) == 3 else frozenset()
    holds = d_separated(g, x, y, z)
    return Report.verdict("dsep", holds, query=job.args["sets"])


def _ci_list(job: Job) -> Report:
    g = _graph(job)
    max_given = job.args.get("max_given")
    if max_given is None:
        max_given = get_config().output.max_given
    statements = implied_independencies(g, max_given)
    return Report.verdict(
        "ci-list",
        True,
        lines=[str(s) for s in statements],
        details={"independencies": [str(s) for s in statements]},
    )


def _adjust(job: Job) -> Report:
    g = _graph(job)
    x, y = _names(job.args["x"], g), _names(job.args["y"], g)
    query = f"P({','.join(sorted(y))}|do({','.join(sorted(x))}))"

    if job.args.get("frontdoor"):
        found = find_frontdoor(g, x, y)
        if found is None:
            return Report.verdict("adjust", False, query=query, reason="no frontdoor set found")
        mediators, w = found
        e = frontdoor_estimand(g, x, y, mediators, w)
        return Report.verdict(
            "adjust",
            True,
            query=query,
            estimand=e,
            path="frontdoor",
            details={"mediators": sorted(mediators), "covariates": sorted(w)},
        )

    universe = g.endogenous - x - y
    report = enumerate_backdoor_sets(g, x, y, universe)
    admissible = [sorted(s) for s in report.admissible_sets]
    minimal = [sorted(s) for s in report.minimal_sets]
    z = first_minimal_backdoor_set(g, x, y)
    return Report.verdict(
        "adjust",
        bool(report),
        query=query,
        estimand=backdoor_estimand(g, x, y, z) if z is not None else None,
        path="backdoor",
        reason=None if report else "no backdoor admissible set",
        lines=["admissible: {" + ",".join(s) + "}" for s in admissible]
        + ["minimal: {" + ",".join(s) + "}" for s in minimal],
        details={"admissible_sets": admissible, "minimal_sets": minimal},
    )


def _transport_catalog(job: Job, g: Graph, x: frozenset[str]) -> SourceCatalog:
    cat = _catalog(job, g)
    domains = job.args.get("domains")
    wanted = [d for d in domains.split(",") if d] if domains else None
    if cat is None:
        names = wanted or [DEFAULT_SOURCE]
        return SourceCatalog(tuple(Source(domain=d, intervened=x) for d in names))
    if wanted is None:
        return cat
    kept = tuple(s for s in cat.sources if s.domain == TARGET or s.domain in wanted)
    if not any(s.domain in wanted for s in kept):
        raise UsageError(f"no sources for domains {', '.join(wanted)}")
    return SourceCatalog(kept)


def _derive(job: Job) -> Report:
    g = _graph(job)
    text = job.args["query"]
    q = query_from_text(text, g)
    budget = SearchBudget.from_config(**job.budget)
    cat: SourceCatalog
    if job.command == "identify":
        cat = _catalog(job, g) or SourceCatalog.of(Source())
        result = identify(q, cat, budget)
    elif job.command == "recover":
        cat = _catalog(job, g) or selection_catalog()
        result = recover(q, cat, budget)
    else:
        cat = _transport_catalog(job, g, q.x)
        result = transport(q, cat, budget)

    report = Report.from_result(job.command, text, result)
    seeds = job.args.get("validate") or 0
    if result.success and result.derivation is not None and seeds > 0:
        checks = {"estimand": estimand_check(q.term, result.derivation.final, g, cat.domains)}
        report.validation = _run_checks(job, checks, seeds)
    return report


def _check_derivation(job: Job) -> Report:
    g = _graph(job)
    d = load_derivation(Path(job.args["file"]), g)
    result = verify(d, g)
    reason = None
    if not result.ok:
        reason = f"step {result.failed_step}: {result.reason}"
    return Report.verdict(
        "check-derivation",
        result.ok,
        query=render(d.query.term),
        estimand=d.final,
        derivation=d,
        reason=reason,
    )


def _run_checks(
    job: Job,
    checks: dict[str, Callable[[int], float]],
    seeds: int,
    gap_checks: dict[str, Callable[[int], float]] | None = None,
) -> ValidationSummary:
    queue = ValidationQueue(workers=job.workers)
    total = (len(checks) + len(gap_checks or {})) * seeds
    with (
        progress_logging(),
        tqdm(total=total, desc="validate", unit="model", disable=None) as bar,
    ):

        def tick(_job: ValidationJob) -> None:
            bar.update(1)

        return queue.run(checks, seeds, on_complete=tick, start=job.seed, gap_checks=gap_checks)


def _fixture_checks(fixture: Fixture, steps: bool, budget: SearchBudget) -> dict[str, Callable[[int], float]]:
    g = fixture.graph
    assert fixture.query is not None
    q = query_from_text(fixture.query, g)
    checks: dict[str, Callable[[int], float]] = {}
    if fixture.expected is not None:
        expected = parse_estimand(fixture.expected)
        checks[f"{fixture.id}:expected"] = estimand_check(q.term, expected, g, fixture.domains)
    if steps:
        result = _solve(fixture, q, budget)
        if result.derivation is not None:
            for i, step in enumerate(result.derivation.steps, start=1):
                checks[f"{fixture.id}:step{i:02d}"] = step_check(
                    step.before, step.after, g, fixture.domains
                )
    return checks


def _gap_checks(fixture: Fixture) -> dict[str, Callable[[int], float]]:
    if fixture.biased is None or fixture.query is None:
        return {}
    q = query_from_text(fixture.query, fixture.graph)
    biased = parse_estimand(fixture.biased)
    return {f"{fixture.id}:biased": estimand_check(q.term, biased, fixture.graph, fixture.domains)}


def _solve(fixture: Fixture, q: Query, budget: SearchBudget) -> DeriveResult:
    if fixture.task is Task.RECOVER:
        return recover(q, fixture.catalog, budget)
    if fixture.task is Task.TRANSPORT:
        return transport(q, fixture.catalog, budget)
    return identify(q, fixture.catalog, budget)


def _validate(job: Job) -> Report:
    seeds = job.args.get("seeds") or get_config().oracle.seeds
    wanted = job.args.get("fixtures") or []
    fixtures = get_query_fixtures()
    if wanted:
        unknown = sorted(set(wanted) - set(FIXTURE_CATALOG))
        if unknown:
            raise UsageError(f"unknown fixture: {', '.join(unknown)}")
        fixtures = [f for f in fixtures if f.id in wanted]
    budget = SearchBudget.from_config(**job.budget)
    checks: dict[str, Callable[[int], float]] = {}
    gap_checks: dict[str, Callable[[int], float]] = {}
    for fixture in fixtures:
        if fixture.expected_status is DeriveStatus.DERIVED:
            checks.update(_fixture_checks(fixture, bool(job.args.get("steps")), budget))
        gap_checks.update(_gap_checks(fixture))
    if not checks and not gap_checks:
        raise UsageError("nothing to validate")
    summary = _run_checks(job, checks, seeds, gap_checks)
    details: dict[str, Any] = {"checks": sorted(checks)}
    if gap_checks:
        details["gap_checks"] = sorted(gap_checks)
    return Report.verdict("validate", summary.success, validation=summary, details=details)


def _export(job: Job) -> Report:
    out = Path(job.args["directory"])
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for fixture in FIXTURE_CATALOG.values():
        (out / f"{fixture.id}.graph").write_text(format_graph(fixture.graph), encoding="utf-8")
        written.append(f"{fixture.id}.graph")
        if fixture.query is not None:
            (out / f"{fixture.id}.sources").write_text(
                format_sources(fixture.catalog), encoding="utf-8"
            )
            written.append(f"{fixture.id}.sources")
    logger.info("Exported %d files to %s", len(written), out)
    return Report.verdict("export", True, lines=written)


_HANDLERS: dict[str, Callable[[Job], Report]] = {
    "dsep": _dsep,
    "ci-list": _ci_list,
    "adjust": _adjust,
    "identify": _derive,
    "recover": _derive,
    "transport": _derive,
    "validate": _validate,
    "check-derivation": _check_derivation,
    "export": _export,
}


def run(job: Job) -> tuple[int, Report]:
    """Execute a job and return (exit status, report)."""
    logger.info("Running %s (graph=%s)", job.command, job.graph_path)
    report = _HANDLERS[job.command](job)
    return (EXIT_OK if report.success else EXIT_NEGATIVE), report


# =============================================================================
# Argument parsing
# =============================================================================


def _add_budget(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("search budget")
    g.add_argument("--max-steps", type=int)
    g.add_argument("--max-states", type=int)
    g.add_argument("--max-term-width", type=int)
    g.add_argument("--max-condition-size", type=int)
    g.add_argument("--neighbourhood", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dofusion",
        description="Symbolic causal identification across heterogeneous data sources",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--format", choices=("text", "latex", "json"), dest="output_format")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--log-file", type=Path)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dsep", help="test X ⫫ Y | Z by d-separation")
    p.add_argument("graph", type=Path)
    p.add_argument("sets", help="'X | Y | Z'")

    p = sub.add_parser("ci-list", help="list the independencies the diagram implies")
    p.add_argument("graph", type=Path)
    p.add_argument("--max-given", type=int)

    p = sub.add_parser("adjust", help="backdoor or frontdoor adjustment")
    p.add_argument("graph", type=Path)
    p.add_argument("x")
    p.add_argument("y")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--backdoor", action="store_true", default=True)
    mode.add_argument("--frontdoor", action="store_true")

    for name, help_text in (
        ("identify", "identify a query from observations and surrogate experiments"),
        ("recover", "recover a query from selection-biased data"),
        ("transport", "transport a query from source domains"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("graph", type=Path)
        p.add_argument("query", help="e.g. 'P(Y|do(X))'")
        p.add_argument("--data", type=Path, help="source specification file")
        p.add_argument("--validate", type=int, metavar="SEEDS", help="check against random models")
        if name == "transport":
            p.add_argument("--domains", help="comma-separated source domains")
        _add_budget(p)

    p = sub.add_parser("validate", help="run the reference catalogue through the oracle")
    p.add_argument("--seeds", type=int)
    p.add_argument("--fixture", action="append", dest="fixtures")
    p.add_argument("--steps", action="store_true", help="also check every derivation step")
    _add_budget(p)

    p = sub.add_parser("check-derivation", help="verify a saved derivation")
    p.add_argument("graph", type=Path)
    p.add_argument("file", type=Path)

    p = sub.add_parser("export", help="write the reference diagrams and sources to a directory")
    p.add_argument("directory", type=Path)
    return parser


_BUDGET_KEYS = ("max_steps", "max_states", "max_term_width", "max_condition_size", "neighbourhood")
_GLOBAL_KEYS = ("verbose", "output_format", "seed", "workers", "log_file", "command", "graph")


def job_from_args(ns: argparse.Namespace) -> Job:
    values = vars(ns)
    budget = {k: values[k] for k in _BUDGET_KEYS if values.get(k) is not None}
    args = {k: v for k, v in values.items() if k not in _BUDGET_KEYS and k not in _GLOBAL_KEYS}
    return Job(
        command=ns.command,
        graph_path=values.get("graph"),
        args=args,
        output_format=ns.output_format or get_config().output.format,
        seed=ns.seed,
        budget=budget,
        workers=ns.workers,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the dofusion command."""
    ns = build_parser().parse_args(argv)
    setup_logging(verbosity_level(ns.verbose), log_file=ns.log_file, simple_format=True)

    try:
        job = job_from_args(ns)
        status, report = run(job)
    except Exception as e:
        logger.error("%s failed: %s", ns.command, e, exc_info=ns.verbose > 1)
        return EXIT_ERROR

    sys.stdout.write(format_report(report, job.output_format))
    return status
