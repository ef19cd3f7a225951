"""Command-line front end for dofusion."""

from .main import EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK, Job, UsageError, main, run
from .parsers import ParseError, format_sources, parse_graph, parse_sources
from .report import Report, format_report, to_json

__all__ = [
    "EXIT_ERROR",
    "EXIT_NEGATIVE",
    "EXIT_OK",
    "Job",
    "ParseError",
    "Report",
    "UsageError",
    "format_report",
    "format_sources",
    "main",
    "parse_graph",
    "parse_sources",
    "run",
    "to_json",
]
