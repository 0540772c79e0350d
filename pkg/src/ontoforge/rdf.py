"""RDF term/triple/graph model with a Turtle-subset parser and serializer.

Supported Turtle subset: @prefix/PREFIX directives, `a`, `;` predicate-object
lists, `,` object lists, <IRI>s, qnames, blank-node labels (_:x), quoted string
literals with \\" \\\\ \\n \\t escapes, ^^ datatypes, @lang tags, and bare
integer/decimal/boolean tokens. No collections, no [] anonymous nodes, no
multi-line strings.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from .vocab import RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_INTEGER


class TurtleSyntaxError(ValueError):
    """Malformed Turtle/query text; carries a 1-based line and column."""

    def __init__(self, reason: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {reason}")
        self.reason = reason
        self.line = line
        self.col = col


class UnknownPrefixError(ValueError):
    def __init__(self, prefix: str, line: int = 0, col: int = 0):
        loc = f" at line {line}, column {col}" if line else ""
        super().__init__(f"undeclared prefix '{prefix}'{loc}")
        self.prefix = prefix
        self.line = line
        self.col = col


class FrozenGraphError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Iri:
    value: str

    def __post_init__(self):
        if not self.value or any(c.isspace() for c in self.value):
            raise ValueError(f"invalid IRI: {self.value!r}")

    def __repr__(self):
        return f"<{self.value}>"


@dataclass(frozen=True)
class BlankNode:
    label: str

    def __repr__(self):
        return f"_:{self.label}"


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str | None = None
    lang: str | None = None

    def __post_init__(self):
        if self.lang is not None and self.datatype is not None:
            raise ValueError("literal cannot carry both a language tag and a datatype")

    def __repr__(self):
        if self.lang:
            return f'"{self.lexical}"@{self.lang}'
        if self.datatype:
            return f'"{self.lexical}"^^<{self.datatype}>'
        return f'"{self.lexical}"'

    def numeric_value(self) -> Decimal | None:
        """Decimal value of this literal, or None when the lexical form is not numeric."""
        try:
            return Decimal(self.lexical)
        except InvalidOperation:
            return None


Term = Iri | BlankNode | Literal


@dataclass(frozen=True)
class Triple:
    s: Term
    p: Term
    o: Term

    def __post_init__(self):
        if not isinstance(self.p, Iri):
            raise ValueError(f"predicate must be an IRI, got {self.p!r}")
        if isinstance(self.s, Literal):
            raise ValueError("subject must not be a literal")


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------

class Graph:
    """Duplicate-free triple set with subject/predicate/object indexes.

    Mutable while building; freeze() makes it immutable and safe to share
    across concurrent readers. Iteration follows insertion order.
    """

    def __init__(self, triples=()):
        self._triples: dict[Triple, None] = {}
        self._by_s: dict[Term, list[Triple]] = {}
        self._by_p: dict[Term, list[Triple]] = {}
        self._by_o: dict[Term, list[Triple]] = {}
        self._frozen = False
        for t in triples:
            self.add(t)

    def add(self, triple: Triple) -> bool:
        if self._frozen:
            raise FrozenGraphError("graph is frozen")
        if triple in self._triples:
            return False
        self._triples[triple] = None
        self._by_s.setdefault(triple.s, []).append(triple)
        self._by_p.setdefault(triple.p, []).append(triple)
        self._by_o.setdefault(triple.o, []).append(triple)
        return True

    def freeze(self) -> "Graph":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def copy(self) -> "Graph":
        return Graph(self)

    def __len__(self):
        return len(self._triples)

    def __iter__(self):
        return iter(self._triples)

    def __contains__(self, triple: Triple):
        return triple in self._triples

    def match(self, s: Term | None = None, p: Term | None = None, o: Term | None = None):
        """All triples matching the bound positions; None matches anything."""
        candidates = None
        # pick the narrowest index among bound positions
        for term, index in ((s, self._by_s), (p, self._by_p), (o, self._by_o)):
            if term is not None:
                bucket = index.get(term, [])
                if candidates is None or len(bucket) < len(candidates):
                    candidates = bucket
        if candidates is None:
            candidates = list(self._triples)
        out = []
        for t in candidates:
            if s is not None and t.s != s:
                continue
            if p is not None and t.p != p:
                continue
            if o is not None and t.o != o:
                continue
            out.append(t)
        return out

    def subjects(self, p: Term | None = None, o: Term | None = None):
        return [t.s for t in self.match(None, p, o)]

    def objects(self, s: Term | None = None, p: Term | None = None):
        return [t.o for t in self.match(s, p, None)]

    def blank_labels(self) -> set[str]:
        labels = set()
        for t in self._triples:
            for term in (t.s, t.o):
                if isinstance(term, BlankNode):
                    labels.add(term.label)
        return labels


def merge(a: Graph, b: Graph) -> Graph:
    """Set union of two graphs; b's blank labels are renamed when they collide with a's."""
    out = a.copy()
    clashes = a.blank_labels() & b.blank_labels()
    rename: dict[str, str] = {}
    if clashes:
        taken = a.blank_labels() | b.blank_labels()
        counter = itertools.count()
        for label in sorted(clashes):
            while True:
                fresh = f"b{next(counter)}"
                if fresh not in taken:
                    taken.add(fresh)
                    rename[label] = fresh
                    break

    def rn(term: Term) -> Term:
        if isinstance(term, BlankNode) and term.label in rename:
            return BlankNode(rename[term.label])
        return term

    for t in b:
        out.add(Triple(rn(t.s), t.p, rn(t.o)))
    return out


def graphs_equal(a: Graph, b: Graph) -> bool:
    """True iff the graphs are isomorphic (bijective blank-node relabeling)."""
    if len(a) != len(b):
        return False
    a_ground = {t for t in a if not _has_blank(t)}
    b_ground = {t for t in b if not _has_blank(t)}
    if a_ground != b_ground:
        return False
    a_blank = [t for t in a if _has_blank(t)]
    b_blank = {t for t in b if _has_blank(t)}
    a_labels = sorted(a.blank_labels())
    b_labels = sorted(b.blank_labels())
    if len(a_labels) != len(b_labels):
        return False
    if not a_labels:
        return True
    return _find_bijection(a_blank, b_blank, a_labels, b_labels, {})


def _has_blank(t: Triple) -> bool:
    return isinstance(t.s, BlankNode) or isinstance(t.o, BlankNode)


def _apply_mapping(t: Triple, mapping: dict[str, str]) -> Triple | None:
    def sub(term):
        if isinstance(term, BlankNode):
            mapped = mapping.get(term.label)
            return None if mapped is None else BlankNode(mapped)
        return term

    s, o = sub(t.s), sub(t.o)
    if s is None or o is None:
        return None
    return Triple(s, t.p, o)


def _find_bijection(a_blank, b_blank, a_labels, b_labels, mapping) -> bool:
    # backtracking search; fixtures stay well under 50 blank nodes
    if len(mapping) == len(a_labels):
        for t in a_blank:
            if _apply_mapping(t, mapping) not in b_blank:
                return False
        return True
    label = a_labels[len(mapping)]
    used = set(mapping.values())
    for candidate in b_labels:
        if candidate in used:
            continue
        mapping[label] = candidate
        ok = True
        for t in a_blank:
            mapped = _apply_mapping(t, mapping)
            if mapped is not None and mapped not in b_blank:
                ok = False
                break
        if ok and _find_bijection(a_blank, b_blank, a_labels, b_labels, mapping):
            return True
        del mapping[label]
    return False


# ---------------------------------------------------------------------------
# Prefix map
# ---------------------------------------------------------------------------

_LOCAL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*$")


class PrefixMap:
    """Ordered prefix-label → namespace-IRI mapping. Rebinding a label replaces it."""

    def __init__(self, bindings: dict[str, str] | None = None):
        self._map: dict[str, str] = {}
        if bindings:
            for k, v in bindings.items():
                self.bind(k, v)

    def bind(self, prefix: str, namespace: str):
        self._map[prefix] = namespace

    def namespace(self, prefix: str) -> str | None:
        return self._map.get(prefix)

    def expand(self, prefix: str, local: str) -> str:
        ns = self._map.get(prefix)
        if ns is None:
            raise UnknownPrefixError(prefix)
        return ns + local

    def compact(self, iri: str) -> str | None:
        """Best qname for an IRI, or None when no bound namespace fits."""
        best = None
        for prefix, ns in self._map.items():
            if iri.startswith(ns) and (best is None or len(ns) > len(self._map[best])):
                local = iri[len(ns):]
                if local == "" or _LOCAL_RE.match(local):
                    best = prefix
        if best is None:
            return None
        return f"{best}:{iri[len(self._map[best]):]}"

    def items(self):
        return list(self._map.items())

    def as_dict(self) -> dict[str, str]:
        return dict(self._map)

    def __contains__(self, prefix: str):
        return prefix in self._map

    def __len__(self):
        return len(self._map)

    def __eq__(self, other):
        return isinstance(other, PrefixMap) and self._map == other._map

    def copy(self) -> "PrefixMap":
        return PrefixMap(self._map)


# ---------------------------------------------------------------------------
# Tokenizer (shared by the Turtle parser; the query parser has its own)
# ---------------------------------------------------------------------------

@dataclass
class Token:
    kind: str
    value: object
    line: int
    col: int


_PNAME_RE = re.compile(r"([A-Za-z][A-Za-z0-9_\-]*)?:([A-Za-z_][A-Za-z0-9_\-]*)?")
_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_\-]*")
_BLANK_LABEL_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9_\-]*")
_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.\d+|\d+)")
_LANG_RE = re.compile(r"[A-Za-z]+(?:-[A-Za-z0-9]+)*")

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}
_UNESCAPES = {"\n": "\\n", "\t": "\\t", '"': '\\"', "\\": "\\\\"}


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, reason: str):
        raise TurtleSyntaxError(reason, self.line, self.col)

    def _advance(self, n: int):
        chunk = self.text[self.pos:self.pos + n]
        newlines = chunk.count("\n")
        if newlines:
            self.line += newlines
            self.col = n - chunk.rfind("\n")
        else:
            self.col += n
        self.pos += n

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

    def tokens(self):
        out = []
        while True:
            tok = self.next_token()
            out.append(tok)
            if tok.kind == "eof":
                return out

    def next_token(self) -> Token:
        self._skip_ws()
        if self.pos >= len(self.text):
            return Token("eof", None, self.line, self.col)
        line, col = self.line, self.col
        text, pos = self.text, self.pos
        c = text[pos]

        if c == "<":
            end = text.find(">", pos + 1)
            nl = text.find("\n", pos + 1)
            if end == -1 or (nl != -1 and nl < end):
                self.error("unterminated IRI: missing '>'")
            value = text[pos + 1:end]
            self._advance(end - pos + 1)
            return Token("iri", value, line, col)

        if c == '"':
            i = pos + 1
            buf = []
            while True:
                if i >= len(text) or text[i] == "\n":
                    self.error("unterminated string literal")
                ch = text[i]
                if ch == '"':
                    break
                if ch == "\\":
                    if i + 1 >= len(text):
                        self.error("dangling escape at end of input")
                    esc = text[i + 1]
                    if esc not in _ESCAPES:
                        self.error(f"unsupported escape '\\{esc}'")
                    buf.append(_ESCAPES[esc])
                    i += 2
                else:
                    buf.append(ch)
                    i += 1
            self._advance(i - pos + 1)
            return Token("string", "".join(buf), line, col)

        if c == "_" and text.startswith("_:", pos):
            m = _BLANK_LABEL_RE.match(text, pos + 2)
            if not m:
                self.error("blank node label expected after '_:'")
            self._advance(m.end() - pos)
            return Token("blank", m.group(0), line, col)

        if c == "@":
            m = _IDENT_RE.match(text, pos + 1)
            word = m.group(0) if m else ""
            if word == "prefix":
                self._advance(len("@prefix"))
                return Token("at_prefix", None, line, col)
            lm = _LANG_RE.match(text, pos + 1)
            if lm:
                self._advance(lm.end() - pos)
                return Token("langtag", lm.group(0), line, col)
            self.error("expected '@prefix' or a language tag after '@'")

        if text.startswith("^^", pos):
            self._advance(2)
            return Token("dtype", None, line, col)

        if c in ".;,":
            self._advance(1)
            return Token({".": "dot", ";": "semi", ",": "comma"}[c], None, line, col)

        m = _NUMBER_RE.match(text, pos)
        if m and (c.isdigit() or (c in "+-" and pos + 1 < len(text) and text[pos + 1].isdigit())):
            lex = m.group(0)
            self._advance(len(lex))
            kind = "decimal" if "." in lex else "integer"
            return Token(kind, lex, line, col)

        # qnames, keywords, bare booleans
        m = _PNAME_RE.match(text, pos)
        if m and ":" in text[pos:m.end()]:
            prefix = m.group(1) or ""
            local = m.group(2) or ""
            self._advance(m.end() - pos)
            return Token("qname", (prefix, local), line, col)

        m = _IDENT_RE.match(text, pos)
        if m:
            word = m.group(0)
            self._advance(len(word))
            if word == "a":
                return Token("a", None, line, col)
            if word in ("true", "false"):
                return Token("boolean", word, line, col)
            if word.upper() == "PREFIX":
                return Token("kw_prefix", None, line, col)
            raise TurtleSyntaxError(f"unexpected token '{word}'", line, col)

        self.error(f"unexpected character {c!r}")


# ---------------------------------------------------------------------------
# Turtle parser
# ---------------------------------------------------------------------------

class _TurtleParser:
    def __init__(self, text: str, base: str | None):
        self.toks = _Lexer(text).tokens()
        self.i = 0
        self.base = base
        self.graph = Graph()
        self.prefixes = PrefixMap()

    def peek(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.take()
        if tok.kind != kind:
            raise TurtleSyntaxError(f"expected {what}", tok.line, tok.col)
        return tok

    def parse(self):
        while self.peek().kind != "eof":
            kind = self.peek().kind
            if kind == "at_prefix":
                self.take()
                self._prefix_directive(require_dot=True)
            elif kind == "kw_prefix":
                self.take()
                self._prefix_directive(require_dot=False)
            else:
                self._triples()
        return self.graph, self.prefixes

    def _prefix_directive(self, require_dot: bool):
        # "@prefix ex:" lexes as a qname with an empty local part
        tok = self.take()
        if tok.kind != "qname" or tok.value[1] != "":
            raise TurtleSyntaxError("expected prefix label ending in ':'", tok.line, tok.col)
        prefix = tok.value[0]
        ns = self.expect("iri", "a namespace IRI").value
        self.prefixes.bind(prefix, self._resolve(ns))
        if require_dot:
            self.expect("dot", "'.' after @prefix directive")
        elif self.peek().kind == "dot":
            self.take()

    def _resolve(self, iri: str) -> str:
        if ":" not in iri:
            if self.base is None:
                raise TurtleSyntaxError(f"relative IRI <{iri}> without a base", self.peek().line, self.peek().col)
            return self.base + iri
        return iri

    def _term(self, tok: Token, position: str) -> Term:
        if tok.kind == "iri":
            return Iri(self._resolve(tok.value))
        if tok.kind == "qname":
            prefix, local = tok.value
            if local == "":
                raise TurtleSyntaxError("qname is missing a local part", tok.line, tok.col)
            if prefix not in self.prefixes:
                raise UnknownPrefixError(prefix, tok.line, tok.col)
            return Iri(self.prefixes.expand(prefix, local))
        if tok.kind == "blank":
            return BlankNode(tok.value)
        if position == "object":
            if tok.kind == "string":
                return self._literal_rest(tok.value)
            if tok.kind == "integer":
                return Literal(tok.value, XSD_INTEGER)
            if tok.kind == "decimal":
                return Literal(tok.value, XSD_DECIMAL)
            if tok.kind == "boolean":
                return Literal(tok.value, XSD_BOOLEAN)
        raise TurtleSyntaxError(f"expected a {position}", tok.line, tok.col)

    def _literal_rest(self, lexical: str) -> Literal:
        nxt = self.peek()
        if nxt.kind == "dtype":
            self.take()
            dtok = self.take()
            if dtok.kind == "iri":
                dt = self._resolve(dtok.value)
            elif dtok.kind == "qname":
                prefix, local = dtok.value
                if prefix not in self.prefixes:
                    raise UnknownPrefixError(prefix, dtok.line, dtok.col)
                dt = self.prefixes.expand(prefix, local)
            else:
                raise TurtleSyntaxError("expected a datatype IRI after '^^'", dtok.line, dtok.col)
            return Literal(lexical, dt)
        if nxt.kind == "langtag":
            self.take()
            return Literal(lexical, lang=nxt.value)
        return Literal(lexical)

    def _verb(self) -> Iri:
        tok = self.take()
        if tok.kind == "a":
            return Iri(RDF_TYPE)
        term = self._term(tok, "predicate")
        if not isinstance(term, Iri):
            raise TurtleSyntaxError("predicate must be an IRI", tok.line, tok.col)
        return term

    def _triples(self):
        subj = self._term(self.take(), "subject")
        while True:
            pred = self._verb()
            while True:
                obj = self._term(self.take(), "object")
                self.graph.add(Triple(subj, pred, obj))
                if self.peek().kind == "comma":
                    self.take()
                    continue
                break
            nxt = self.take()
            if nxt.kind == "semi":
                if self.peek().kind == "dot":  # tolerate dangling ';'
                    self.take()
                    return
                continue
            if nxt.kind == "dot":
                return
            raise TurtleSyntaxError("expected '.', ';' or ',' after object", nxt.line, nxt.col)


def parse_turtle(text: str, base: str | None = None) -> tuple[Graph, PrefixMap]:
    """Parse a Turtle-subset document into a graph and its prefix map."""
    return _TurtleParser(text, base).parse()


# ---------------------------------------------------------------------------
# Turtle serializer
# ---------------------------------------------------------------------------

def _escape(text: str) -> str:
    return "".join(_UNESCAPES.get(c, c) for c in text)


_BARE_INT = re.compile(r"[+-]?\d+$")
_BARE_DEC = re.compile(r"[+-]?\d+\.\d+$")


def _render_term(term: Term, prefixes: PrefixMap) -> str:
    if isinstance(term, Iri):
        q = prefixes.compact(term.value)
        return q if q is not None else f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    if term.lang:
        return f'"{_escape(term.lexical)}"@{term.lang}'
    if term.datatype == XSD_INTEGER and _BARE_INT.match(term.lexical):
        return term.lexical
    if term.datatype == XSD_DECIMAL and _BARE_DEC.match(term.lexical):
        return term.lexical
    if term.datatype == XSD_BOOLEAN and term.lexical in ("true", "false"):
        return term.lexical
    if term.datatype:
        dt = prefixes.compact(term.datatype)
        dts = dt if dt is not None else f"<{term.datatype}>"
        return f'"{_escape(term.lexical)}"^^{dts}'
    return f'"{_escape(term.lexical)}"'


def _sort_key(term: Term):
    if isinstance(term, Iri):
        return (0, term.value, "", "")
    if isinstance(term, BlankNode):
        return (1, term.label, "", "")
    return (2, term.lexical, term.datatype or "", term.lang or "")


def serialize_turtle(graph: Graph, prefixes: PrefixMap) -> str:
    """Deterministic Turtle text: subjects grouped, everything sorted."""
    lines = [f"@prefix {p}: <{ns}> ." for p, ns in prefixes.items()]
    by_subject: dict[Term, dict[Iri, list[Term]]] = {}
    for t in graph:
        by_subject.setdefault(t.s, {}).setdefault(t.p, []).append(t.o)

    if lines and by_subject:
        lines.append("")
    for subj in sorted(by_subject, key=_sort_key):
        stext = _render_term(subj, prefixes)
        preds = sorted(by_subject[subj], key=_sort_key)
        parts = []
        for pred in preds:
            ptext = "a" if pred.value == RDF_TYPE else _render_term(pred, prefixes)
            objs = sorted(by_subject[subj][pred], key=_sort_key)
            otext = " , ".join(_render_term(o, prefixes) for o in objs)
            parts.append(f"{ptext} {otext}")
        body = " ;\n    ".join(parts)
        lines.append(f"{stext} {body} .")
    return "\n".join(lines) + ("\n" if lines else "")
