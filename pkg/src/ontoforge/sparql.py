"""SPARQL-subset parser and evaluator: SELECT, basic graph patterns with `;`
lists, FILTER comparisons, ORDER BY, LIMIT. No OPTIONAL/UNION/DISTINCT."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from .rdf import (
    Graph, Iri, Literal, PrefixMap, Term, TurtleSyntaxError, UnknownPrefixError,
)
from .vocab import RDF_TYPE, XSD_DECIMAL, XSD_INTEGER


class SparqlSyntaxError(TurtleSyntaxError):
    pass


class UnboundSelectVariableError(ValueError):
    def __init__(self, names):
        super().__init__("variable(s) not bound by any pattern: " + ", ".join(sorted(names)))
        self.names = sorted(names)


@dataclass(frozen=True)
class Variable:
    name: str

    def __repr__(self):
        return f"?{self.name}"


PatternTerm = Term | Variable


@dataclass(frozen=True)
class TriplePattern:
    s: PatternTerm
    p: PatternTerm
    o: PatternTerm


_OPS = (">=", "<=", "!=", ">", "<", "=")


@dataclass(frozen=True)
class FilterExpr:
    var: str
    op: str
    value: Decimal | str

    @property
    def is_numeric(self) -> bool:
        return isinstance(self.value, Decimal)


@dataclass
class Query:
    prefixes: PrefixMap
    select_vars: list[str]
    patterns: list[TriplePattern]
    filters: list[FilterExpr] = field(default_factory=list)
    order_by: tuple[str, bool] | None = None  # (variable, ascending)
    limit: int | None = None


# Solutions are plain ordered dicts: select variable -> bound Term.
Solution = dict[str, Term]


@dataclass
class EvalResult:
    """List-like query result; `warnings` counts rows dropped by non-coercible filters."""

    rows: list[Solution]
    warnings: int = 0

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, i):
        return self.rows[i]


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_VAR_RE = re.compile(r"\?([A-Za-z_][A-Za-z0-9_]*)")
_PNAME_RE = re.compile(r"([A-Za-z][A-Za-z0-9_\-]*)?:([A-Za-z_][A-Za-z0-9_\-]*)?")
_WORD_RE = re.compile(r"[A-Za-z][A-Za-z0-9_\-]*")
_NUM_RE = re.compile(r"[+-]?(?:\d+\.\d+|\d+)")

_KEYWORDS = {"SELECT", "WHERE", "PREFIX", "FILTER", "ORDER", "BY", "ASC", "DESC", "LIMIT", "A"}


class _QueryLexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, reason):
        raise SparqlSyntaxError(reason, self.line, self.col)

    def _advance(self, n):
        chunk = self.text[self.pos:self.pos + n]
        newlines = chunk.count("\n")
        if newlines:
            self.line += newlines
            self.col = n - chunk.rfind("\n")
        else:
            self.col += n
        self.pos += n

    def tokens(self):
        out = []
        while True:
            self._skip_ws()
            if self.pos >= len(self.text):
                out.append(("eof", None, self.line, self.col))
                return out
            out.append(self._one())

    def _skip_ws(self):
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in " \t\r\n":
                self._advance(1)
            elif c == "#":
                end = self.text.find("\n", self.pos)
                self._advance((end - self.pos) if end != -1 else len(self.text) - self.pos)
            else:
                break

    def _one(self):
        text, pos = self.text, self.pos
        line, col = self.line, self.col
        c = text[pos]
        if c == "?":
            m = _VAR_RE.match(text, pos)
            if not m:
                self.error("variable name expected after '?'")
            self._advance(m.end() - pos)
            return ("var", m.group(1), line, col)
        if c == "<":
            end = text.find(">", pos + 1)
            if end == -1:
                self.error("unterminated IRI: missing '>'")
            value = text[pos + 1:end]
            self._advance(end - pos + 1)
            return ("iri", value, line, col)
        if c == '"':
            end = pos + 1
            buf = []
            while True:
                if end >= len(text) or text[end] == "\n":
                    self.error("unterminated string literal")
                ch = text[end]
                if ch == '"':
                    break
                if ch == "\\":
                    esc = text[end + 1] if end + 1 < len(text) else ""
                    mapped = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}.get(esc)
                    if mapped is None:
                        self.error(f"unsupported escape '\\{esc}'")
                    buf.append(mapped)
                    end += 2
                else:
                    buf.append(ch)
                    end += 1
            self._advance(end - pos + 1)
            return ("string", "".join(buf), line, col)
        for op in _OPS:
            if text.startswith(op, pos):
                self._advance(len(op))
                return ("op", op, line, col)
        if c in "{}().;,":
            self._advance(1)
            kinds = {"{": "lbrace", "}": "rbrace", "(": "lparen", ")": "rparen",
                     ".": "dot", ";": "semi", ",": "comma"}
            return (kinds[c], None, line, col)
        m = _NUM_RE.match(text, pos)
        if m and (c.isdigit() or (c in "+-" and pos + 1 < len(text) and text[pos + 1].isdigit())):
            lex = m.group(0)
            self._advance(len(lex))
            return ("number", lex, line, col)
        m = _PNAME_RE.match(text, pos)
        if m and ":" in text[pos:m.end()]:
            self._advance(m.end() - pos)
            return ("qname", (m.group(1) or "", m.group(2) or ""), line, col)
        m = _WORD_RE.match(text, pos)
        if m:
            word = m.group(0)
            self._advance(len(word))
            if word.upper() in _KEYWORDS:
                return ("kw", word.upper(), line, col)
            self.error(f"unexpected token '{word}'")
        self.error(f"unexpected character {c!r}")


class _QueryParser:
    def __init__(self, text: str):
        self.toks = _QueryLexer(text).tokens()
        self.i = 0
        self.prefixes = PrefixMap()

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind, what, value=None):
        tok = self.take()
        if tok[0] != kind or (value is not None and tok[1] != value):
            raise SparqlSyntaxError(f"expected {what}", tok[2], tok[3])
        return tok

    def parse(self) -> Query:
        while self.peek()[0] == "kw" and self.peek()[1] == "PREFIX":
            self.take()
            label_tok = self.take()
            if label_tok[0] != "qname" or label_tok[1][1] != "":
                raise SparqlSyntaxError("expected prefix label ending in ':'", label_tok[2], label_tok[3])
            iri_tok = self.expect("iri", "a namespace IRI")
            self.prefixes.bind(label_tok[1][0], iri_tok[1])

        self.expect("kw", "SELECT", "SELECT")
        select_vars = []
        while self.peek()[0] == "var":
            select_vars.append(self.take()[1])
        if not select_vars:
            tok = self.peek()
            raise SparqlSyntaxError("SELECT needs at least one variable", tok[2], tok[3])

        self.expect("kw", "WHERE", "WHERE")
        self.expect("lbrace", "'{'")
        patterns: list[TriplePattern] = []
        filters: list[FilterExpr] = []
        while True:
            tok = self.peek()
            if tok[0] == "rbrace":
                self.take()
                break
            if tok[0] == "kw" and tok[1] == "FILTER":
                self.take()
                filters.append(self._filter())
                if self.peek()[0] == "dot":
                    self.take()
                continue
            self._triple_block(patterns)

        order_by = None
        limit = None
        while self.peek()[0] == "kw":
            kw = self.take()
            if kw[1] == "ORDER":
                self.expect("kw", "BY", "BY")
                ascending = True
                nxt = self.peek()
                if nxt[0] == "kw" and nxt[1] in ("ASC", "DESC"):
                    ascending = self.take()[1] == "ASC"
                    self.expect("lparen", "'('")
                    var = self.expect("var", "a variable")[1]
                    self.expect("rparen", "')'")
                else:
                    var = self.expect("var", "a variable")[1]
                order_by = (var, ascending)
            elif kw[1] == "LIMIT":
                num = self.expect("number", "a positive integer")
                if "." in num[1] or int(num[1]) <= 0:
                    raise SparqlSyntaxError("LIMIT must be a positive integer", num[2], num[3])
                limit = int(num[1])
            else:
                raise SparqlSyntaxError(f"unexpected keyword {kw[1]}", kw[2], kw[3])
        tok = self.take()
        if tok[0] != "eof":
            raise SparqlSyntaxError("unexpected trailing content", tok[2], tok[3])

        query = Query(self.prefixes, select_vars, patterns, filters, order_by, limit)
        self._check_bound(query)
        return query

    def _check_bound(self, query: Query):
        bound = set()
        for pat in query.patterns:
            for term in (pat.s, pat.p, pat.o):
                if isinstance(term, Variable):
                    bound.add(term.name)
        unbound = set(query.select_vars) - bound
        unbound |= {f.var for f in query.filters} - bound
        if query.order_by and query.order_by[0] not in bound:
            unbound.add(query.order_by[0])
        if unbound:
            raise UnboundSelectVariableError(unbound)

    def _filter(self) -> FilterExpr:
        self.expect("lparen", "'(' after FILTER")
        var = self.expect("var", "a variable")[1]
        op_tok = self.take()
        if op_tok[0] != "op":
            raise SparqlSyntaxError("expected a comparison operator", op_tok[2], op_tok[3])
        val_tok = self.take()
        if val_tok[0] == "number":
            value: Decimal | str = Decimal(val_tok[1])
        elif val_tok[0] == "string":
            value = val_tok[1]
        else:
            raise SparqlSyntaxError("expected a numeric or string constant", val_tok[2], val_tok[3])
        self.expect("rparen", "')'")
        return FilterExpr(var, op_tok[1], value)

    def _pattern_term(self, position: str) -> PatternTerm:
        tok = self.take()
        if tok[0] == "var":
            return Variable(tok[1])
        if tok[0] == "iri":
            return Iri(tok[1])
        if tok[0] == "qname":
            prefix, local = tok[1]
            if prefix not in self.prefixes:
                raise UnknownPrefixError(prefix, tok[2], tok[3])
            return Iri(self.prefixes.expand(prefix, local))
        if tok[0] == "kw" and tok[1] == "A" and position == "predicate":
            return Iri(RDF_TYPE)
        if position == "object":
            if tok[0] == "string":
                return Literal(tok[1])
            if tok[0] == "number":
                dt = XSD_DECIMAL if "." in tok[1] else XSD_INTEGER
                return Literal(tok[1], dt)
        raise SparqlSyntaxError(f"expected a {position}", tok[2], tok[3])

    def _triple_block(self, patterns: list[TriplePattern]):
        subj = self._pattern_term("subject")
        while True:
            pred = self._pattern_term("predicate")
            obj = self._pattern_term("object")
            patterns.append(TriplePattern(subj, pred, obj))
            nxt = self.peek()
            if nxt[0] == "semi":
                self.take()
                continue
            if nxt[0] == "dot":
                self.take()
            return


def parse_query(text: str) -> Query:
    """Parse a query; raises SparqlSyntaxError / UnknownPrefixError / UnboundSelectVariableError."""
    return _QueryParser(text).parse()


# ---------------------------------------------------------------------------
# Evaluator
# ---------------------------------------------------------------------------

def _substitute(term: PatternTerm, binding: dict[str, Term]) -> PatternTerm:
    if isinstance(term, Variable):
        return binding.get(term.name, term)
    return term


def _match_pattern(graph: Graph, pattern: TriplePattern, binding: dict[str, Term]):
    s = _substitute(pattern.s, binding)
    p = _substitute(pattern.p, binding)
    o = _substitute(pattern.o, binding)
    sm = None if isinstance(s, Variable) else s
    pm = None if isinstance(p, Variable) else p
    om = None if isinstance(o, Variable) else o
    for triple in graph.match(sm, pm, om):
        new = dict(binding)
        ok = True
        for patt, actual in ((s, triple.s), (p, triple.p), (o, triple.o)):
            if isinstance(patt, Variable):
                bound = new.get(patt.name)
                if bound is None:
                    new[patt.name] = actual
                elif bound != actual:
                    ok = False
                    break
        if ok:
            yield new


def _passes_filter(f: FilterExpr, term: Term) -> bool | None:
    """True/False when comparable; None when the row must be dropped with a warning."""
    if f.is_numeric:
        if not isinstance(term, Literal):
            return None
        value = term.numeric_value()
        if value is None:
            return None
        left: Decimal | str = value
        right = f.value
    else:
        if not isinstance(term, Literal):
            return None
        left = term.lexical
        right = f.value
    if f.op == ">":
        return left > right
    if f.op == "<":
        return left < right
    if f.op == ">=":
        return left >= right
    if f.op == "<=":
        return left <= right
    if f.op == "=":
        return left == right
    return left != right


def _order_key(term: Term):
    if isinstance(term, Iri):
        return (0, term.value)
    if isinstance(term, Literal):
        value = term.numeric_value()
        if value is not None:
            return (2, value)
        return (3, term.lexical)
    return (1, term.label)


def evaluate(graph: Graph, query: Query) -> EvalResult:
    """Nested-loop join over the patterns, then filter, sort, project, truncate.

    Duplicate solutions are kept (no implicit DISTINCT). Rows whose filter
    operand cannot be coerced are dropped and counted as warnings rather than
    aborting, so queries over partially-populated data still answer.
    """
    bindings: list[dict[str, Term]] = [{}]
    for pattern in query.patterns:
        bindings = [b for binding in bindings for b in _match_pattern(graph, pattern, binding)]
        if not bindings:
            break

    warnings = 0
    kept = []
    for binding in bindings:
        verdict = True
        for f in query.filters:
            outcome = _passes_filter(f, binding[f.var])
            if outcome is None:
                warnings += 1
                verdict = False
                break
            if not outcome:
                verdict = False
                break
        if verdict:
            kept.append(binding)

    if query.order_by:
        var, ascending = query.order_by
        kept.sort(key=lambda b: _order_key(b[var]), reverse=not ascending)
    if query.limit is not None:
        kept = kept[:query.limit]

    rows = [{v: binding[v] for v in query.select_vars} for binding in kept]
    return EvalResult(rows=rows, warnings=warnings)


def render_table(query: Query, result: EvalResult) -> str:
    """Tab-separated table with a header row of variable names, for golden files."""
    lines = ["\t".join(f"?{v}" for v in query.select_vars)]
    for row in result:
        lines.append("\t".join(_render_cell(row[v]) for v in query.select_vars))
    return "\n".join(lines) + "\n"


def _render_cell(term: Term) -> str:
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, Literal):
        return term.lexical
    return f"_:{term.label}"
