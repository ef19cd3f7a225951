"""Line-oriented readers for diagram files and source specifications.

Diagram files:

    # comment
    var X Y Z W
    select S
    snode S1 a b
    X -> Y
    X <-> Y
    W -> S
    S1 -> Z

Source specifications, one source per line:

    obs [selected] [domain=a] [measured=V1,V2]
    exp Z1,Z2 [selected] [domain=b] [measured=...]
    marginal Z,W [domain=a]
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from funcparserlib.lexer import LexerError, Token, make_tokenizer
from funcparserlib.parser import NoParseError, Parser, finished, many, maybe, oneplus, tok

from ..core.estimand import TARGET, Source, SourceCatalog
from ..core.graph import Graph, Vertex, VertexKind, validate

logger = logging.getLogger(__name__)


class ParseError(Exception):
    """Input file line that cannot be read."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


_SPECS = [
    ("Comment", (r"#.*",)),
    ("Space", (r"[ \t\r\n]+",)),
    ("Name", (r"[A-Za-z_][A-Za-z0-9_]*",)),
    ("Op", (r"<->|->|[,=|*]",)),
]
_USELESS = ("Comment", "Space")

_tokenizer = make_tokenizer(_SPECS)

_KEYWORDS = frozenset({"var", "select", "snode", "obs", "exp", "marginal"})


def tokenize(line: str, lineno: int) -> list[Token]:
    try:
        return [t for t in _tokenizer(line) if t.type not in _USELESS]
    except LexerError as e:
        raise ParseError(lineno, f"unexpected character {e.msg!r}") from e


def _n(s: str) -> Parser:
    return tok("Name", s)


def _op(s: str) -> Parser:
    return tok("Op", s)


def _name_list() -> Parser:
    name = tok("Name")
    return name + many(-_op(",") + name) >> (lambda a: [a[0], *a[1]])


# =============================================================================
# Diagrams
# =============================================================================


def _diagram_line() -> Parser:
    name = tok("Name")
    arrow = _op("->") | _op("<->")

    var_stmt = -_n("var") + oneplus(name) >> (lambda ns: ("var", ns))
    select_stmt = -_n("select") + oneplus(name) >> (lambda ns: ("select", ns))
    snode_stmt = -_n("snode") + name + many(name) >> (lambda a: ("snode", a[0], a[1]))
    edge_stmt = name + oneplus(arrow + name) >> (lambda a: ("edges", a[0], a[1]))
    return (var_stmt | select_stmt | snode_stmt | edge_stmt) + -finished


_DIAGRAM_LINE = _diagram_line()


@dataclass
class _Diagram:
    declared: dict[str, tuple[Vertex, int]] = field(default_factory=dict)
    directed: list[tuple[str, str, int]] = field(default_factory=list)
    bidirected: list[tuple[str, str, int]] = field(default_factory=list)

    def declare(self, vertex: Vertex, lineno: int) -> None:
        if vertex.name in _KEYWORDS:
            raise ParseError(lineno, f"{vertex.name!r} is a reserved word")
        if vertex.name in self.declared:
            first = self.declared[vertex.name][1]
            raise ParseError(lineno, f"{vertex.name} already declared on line {first}")
        self.declared[vertex.name] = (vertex, lineno)


def parse_graph(text: str) -> Graph:
    """Read a diagram file into a validated Graph.

    Raises:
        ParseError: on syntax errors, undeclared names, or a discrepancy
            vertex that never points at anything
        GraphValidationError: if the diagram breaks a graph invariant
    """
    diagram = _Diagram()
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = tokenize(line, lineno)
        if not tokens:
            continue
        try:
            stmt = _DIAGRAM_LINE.parse(tokens)
        except NoParseError as e:
            raise ParseError(lineno, f"syntax error: {e.msg}") from e

        kind = stmt[0]
        if kind == "var":
            for name in stmt[1]:
                diagram.declare(Vertex(name), lineno)
        elif kind == "select":
            for name in stmt[1]:
                diagram.declare(Vertex(name, VertexKind.SELECTION), lineno)
        elif kind == "snode":
            vertex = Vertex(stmt[1], VertexKind.DISCREPANCY, frozenset(stmt[2]))
            diagram.declare(vertex, lineno)
        else:
            left = stmt[1]
            for arrow, right in stmt[2]:
                edges = diagram.directed if arrow == "->" else diagram.bidirected
                edges.append((left, right, lineno))
                left = right

    for a, b, lineno in diagram.directed + diagram.bidirected:
        for name in (a, b):
            if name not in diagram.declared:
                raise ParseError(lineno, f"undeclared vertex {name}")

    pointing = {a for a, _b, _line in diagram.directed}
    for vertex, lineno in diagram.declared.values():
        if vertex.kind == VertexKind.DISCREPANCY and vertex.name not in pointing:
            raise ParseError(lineno, f"snode {vertex.name} has no outgoing edge")

    g = validate(
        [v for v, _line in diagram.declared.values()],
        [(a, b) for a, b, _line in diagram.directed],
        [(a, b) for a, b, _line in diagram.bidirected],
    )
    logger.debug(
        "Parsed diagram (vertices=%d, directed=%d, bidirected=%d)",
        len(g.vertices),
        len(g.directed),
        len(g.bidirected),
    )
    return g


# =============================================================================
# Source specifications
# =============================================================================


def _source_line() -> Parser:
    names = _name_list()
    option = (
        (_n("selected") >> (lambda _: ("selected", True)))
        | (_n("domain") + -_op("=") + (tok("Name") | _op("*")))
        | (_n("measured") + -_op("=") + names)
    )
    obs = _n("obs") + many(option) >> (lambda a: ("obs", [], a[1]))
    exp = _n("exp") + names + many(option)
    marginal = _n("marginal") + names + many(option)
    return (obs | exp | marginal) + -finished


_SOURCE_LINE = _source_line()


def _build_source(stmt: tuple, lineno: int) -> Source:
    kind, names, options = stmt
    settings: dict[str, object] = {}
    for key, value in options:
        if key in settings:
            raise ParseError(lineno, f"option {key} given twice")
        settings[key] = value

    selected = bool(settings.get("selected", False))
    domain = str(settings.get("domain", TARGET))
    measured_opt = settings.get("measured")
    measured = frozenset(measured_opt) if isinstance(measured_opt, list) else None

    if kind == "marginal":
        if selected:
            raise ParseError(lineno, "a marginal source is unbiased and cannot be selected")
        if measured is not None:
            raise ParseError(lineno, "marginal already names its measured variables")
        return Source(domain=domain, measured=frozenset(names))
    return Source(
        domain=domain,
        intervened=frozenset(names),
        selected=selected,
        measured=measured,
    )


def parse_sources(text: str) -> SourceCatalog:
    """Read a source specification into a SourceCatalog.

    Raises:
        ParseError: on syntax errors or an empty specification
    """
    sources: list[Source] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = tokenize(line, lineno)
        if not tokens:
            continue
        try:
            stmt = _SOURCE_LINE.parse(tokens)
        except NoParseError as e:
            raise ParseError(lineno, f"syntax error: {e.msg}") from e
        source = _build_source(stmt, lineno)
        if source not in sources:
            sources.append(source)
    if not sources:
        raise ParseError(1, "no sources given")
    return SourceCatalog(tuple(sources))


def format_sources(cat: SourceCatalog) -> str:
    """Render a catalogue in the format read by `parse_sources`."""
    lines = []
    for s in cat.sources:
        if s.measured is not None and not s.intervened and not s.selected:
            head = "marginal " + ",".join(sorted(s.measured))
            lines.append(head if s.domain == TARGET else f"{head} domain={s.domain}")
        else:
            lines.append(str(s))
    return "\n".join(lines) + "\n"


# =============================================================================
# Command arguments
# =============================================================================


def _name_groups() -> Parser:
    group = many(tok("Name") + -maybe(_op(",")))
    return group + many(-_op("|") + group) + -finished >> (lambda a: [a[0], *a[1]])


_NAME_GROUPS = _name_groups()


def parse_name_groups(text: str) -> list[frozenset[str]]:
    """Read `X,Y | Z | W` style arguments into vertex sets.

    Names inside a group may be separated by commas or spaces.
    """
    tokens = tokenize(text, 1)
    try:
        groups = _NAME_GROUPS.parse(tokens)
    except NoParseError as e:
        raise ParseError(1, f"syntax error: {e.msg}") from e
    return [frozenset(g) for g in groups]
