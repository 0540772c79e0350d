"""Three test tiers over an ontology: structural pitfall scans, ABox
domain/range conformance, and competency-question query suites."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

from . import sparql
from .gateway import (
    Proposal, ProposalKind, ProposalStatus, build_request, complete_and_parse,
    prompt_hash,
)
from .model import OntologySnapshot, subclass_closure
from .rdf import BlankNode, Graph, Iri, Literal
from .templates import TESTCASE_TRANSLATION


class CheckId(Enum):
    # model-test pitfalls
    MISSING_DOMAIN = "MissingDomain"
    MISSING_RANGE = "MissingRange"
    SUBCLASS_CYCLE = "SubclassCycle"
    UNTYPED_INDIVIDUAL = "UntypedIndividual"
    ORPHAN_PROPERTY = "OrphanProperty"
    MISSING_LABEL = "MissingLabel"
    # data-test conformance checks
    DOMAIN_VIOLATION = "DomainViolation"
    RANGE_VIOLATION = "RangeViolation"


class Severity(Enum):
    ERROR = "Error"
    WARNING = "Warning"


@dataclass(frozen=True)
class PitfallFinding:
    check_id: CheckId
    severity: Severity
    subject: str
    message: str

    def to_dict(self) -> dict:
        return {"check_id": self.check_id.value, "severity": self.severity.value,
                "subject": self.subject, "message": self.message}


class ExpectationType(Enum):
    MIN_ROWS = "MinRows"
    EXACT_ROWS = "ExactRows"
    CONTAINS_BINDING = "ContainsBinding"
    EMPTY = "Empty"


@dataclass(frozen=True)
class Expectation:
    type: ExpectationType
    count: int | None = None
    var: str | None = None
    iri: str | None = None
    literal: str | None = None

    def describe(self) -> str:
        if self.type is ExpectationType.MIN_ROWS:
            return f"at least {self.count} row(s)"
        if self.type is ExpectationType.EXACT_ROWS:
            return f"exactly {self.count} row(s)"
        if self.type is ExpectationType.EMPTY:
            return "no rows"
        target = self.iri if self.iri is not None else self.literal
        return f"a row binding ?{self.var} to {target}"

    def to_dict(self) -> dict:
        out: dict = {"type": self.type.value}
        if self.count is not None:
            out["count"] = self.count
        if self.var is not None:
            out["var"] = self.var
        if self.iri is not None:
            out["iri"] = self.iri
        if self.literal is not None:
            out["literal"] = self.literal
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Expectation":
        return cls(type=ExpectationType(data["type"]), count=data.get("count"),
                   var=data.get("var"), iri=data.get("iri"), literal=data.get("literal"))


DEFAULT_EXPECTATION = Expectation(ExpectationType.MIN_ROWS, count=1)


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # keep pytest collection away from the name

    id: str
    cq_id: str
    query: str
    expectation: Expectation = DEFAULT_EXPECTATION
    description: str = ""

    def to_dict(self) -> dict:
        return {"id": self.id, "cq_id": self.cq_id, "query": self.query,
                "expectation": self.expectation.to_dict(), "description": self.description}

    @classmethod
    def from_dict(cls, data: dict) -> "TestCase":
        return cls(id=data["id"], cq_id=data["cq_id"], query=data["query"],
                   expectation=Expectation.from_dict(data["expectation"]),
                   description=data.get("description", ""))


@dataclass(frozen=True)
class CaseOutcome:
    case_id: str
    cq_id: str
    status: str  # "pass" | "fail" | "error"
    expected: str
    actual: str

    def to_dict(self) -> dict:
        return {"case_id": self.case_id, "cq_id": self.cq_id, "status": self.status,
                "expected": self.expected, "actual": self.actual}


@dataclass
class TestReport:
    outcomes: list[CaseOutcome] = field(default_factory=list)
    duration_s: float = 0.0

    @property
    def passes(self) -> int:
        return sum(1 for o in self.outcomes if o.status == "pass")

    @property
    def failures(self) -> int:
        return sum(1 for o in self.outcomes if o.status == "fail")

    @property
    def errors(self) -> int:
        return sum(1 for o in self.outcomes if o.status == "error")

    @property
    def total(self) -> int:
        return len(self.outcomes)

    def all_passed(self) -> bool:
        return self.passes == self.total

    def to_dict(self) -> dict:
        return {"total": self.total, "passes": self.passes, "failures": self.failures,
                "errors": self.errors, "duration_s": self.duration_s,
                "outcomes": [o.to_dict() for o in self.outcomes]}

    def to_text(self) -> str:
        lines = [f"{o.status.upper():5}  {o.case_id}  ({o.cq_id})  expected {o.expected}, got {o.actual}"
                 for o in self.outcomes]
        lines.append(f"total {self.total}  passes {self.passes}  failures {self.failures}  errors {self.errors}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Model tests (pitfall scan)
# ---------------------------------------------------------------------------

def run_model_tests(graph: Graph, snapshot: OntologySnapshot) -> list[PitfallFinding]:
    findings: list[PitfallFinding] = []

    for prop in sorted(snapshot.properties):
        if prop not in snapshot.domain_of:
            findings.append(PitfallFinding(CheckId.MISSING_DOMAIN, Severity.WARNING, prop,
                                           "property has no rdfs:domain"))
        if prop not in snapshot.range_of:
            findings.append(PitfallFinding(CheckId.MISSING_RANGE, Severity.WARNING, prop,
                                           "property has no rdfs:range"))

    for members in _subclass_cycles(snapshot):
        start = min(members)
        findings.append(PitfallFinding(CheckId.SUBCLASS_CYCLE, Severity.ERROR, start,
                                       "subclass cycle involving " + ", ".join(sorted(members))))

    known = snapshot.classes | snapshot.properties | snapshot.individuals
    untyped = sorted({t.s.value for t in graph
                      if isinstance(t.s, Iri) and t.s.value not in known})
    for subject in untyped:
        findings.append(PitfallFinding(CheckId.UNTYPED_INDIVIDUAL, Severity.WARNING, subject,
                                       "subject is neither a schema entity nor a typed individual"))

    used_predicates = {t.p.value for t in graph}
    for prop in sorted(snapshot.properties):
        if prop not in used_predicates and prop not in snapshot.domain_of and prop not in snapshot.range_of:
            findings.append(PitfallFinding(CheckId.ORPHAN_PROPERTY, Severity.WARNING, prop,
                                           "property is never used in an assertion or domain/range axiom"))

    for entity in sorted(snapshot.classes | snapshot.properties):
        if snapshot.label(entity) is None:
            findings.append(PitfallFinding(CheckId.MISSING_LABEL, Severity.WARNING, entity,
                                           "entity has no rdfs:label"))
    return findings


def _subclass_cycles(snapshot: OntologySnapshot) -> list[set[str]]:
    """Strongly connected components of the subclass digraph that form cycles."""
    edges: dict[str, list[str]] = {}
    for child, parent in snapshot.subclass_edges:
        edges.setdefault(child, []).append(parent)

    index = {}
    lowlink = {}
    on_stack = set()
    stack: list[str] = []
    counter = [0]
    out: list[set[str]] = []

    def strongconnect(node: str):
        # iterative Tarjan to stay safe on deep hierarchies
        work = [(node, iter(edges.get(node, ())))]
        index[node] = lowlink[node] = counter[0]
        counter[0] += 1
        stack.append(node)
        on_stack.add(node)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(edges.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                component = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.add(w)
                    if w == v:
                        break
                if len(component) > 1 or (v in edges and v in edges.get(v, ())):
                    out.append(component)

    for node in sorted(set(edges) | {p for ps in edges.values() for p in ps}):
        if node not in index:
            strongconnect(node)
    return out


# ---------------------------------------------------------------------------
# Data tests (ABox conformance)
# ---------------------------------------------------------------------------

def run_data_tests(graph: Graph, snapshot: OntologySnapshot) -> list[PitfallFinding]:
    findings: list[PitfallFinding] = []
    types_of: dict[str, set[str]] = {}
    for individual, cls in snapshot.type_assertions:
        types_of.setdefault(individual, set()).add(cls)
    closures: dict[str, frozenset[str]] = {}

    def conforms(iri: str, required: str) -> bool:
        for cls in types_of.get(iri, ()):
            if cls not in closures:
                closures[cls] = subclass_closure(snapshot, cls)
            if required in closures[cls]:
                return True
        return False

    def domain_err(subject, message):
        findings.append(PitfallFinding(CheckId.DOMAIN_VIOLATION, Severity.ERROR, subject, message))

    def range_err(subject, message):
        findings.append(PitfallFinding(CheckId.RANGE_VIOLATION, Severity.ERROR, subject, message))

    for t in graph:
        prop = t.p.value
        if prop in snapshot.object_properties:
            if isinstance(t.o, Literal):
                range_err(_name(t.s), f"literal object {t.o.lexical!r} on object property {prop}")
            elif isinstance(t.o, Iri):
                for required in sorted(snapshot.range_of.get(prop, ())):
                    if not conforms(t.o.value, required):
                        range_err(t.o.value, f"object of {prop} is not typed to range {required}")
            if isinstance(t.s, Iri):
                for required in sorted(snapshot.domain_of.get(prop, ())):
                    if not conforms(t.s.value, required):
                        domain_err(t.s.value, f"subject of {prop} is not typed to domain {required}")
        elif prop in snapshot.data_properties:
            if not isinstance(t.o, Literal):
                range_err(_name(t.o), f"non-literal object on data property {prop}")
            if isinstance(t.s, Iri):
                for required in sorted(snapshot.domain_of.get(prop, ())):
                    if not conforms(t.s.value, required):
                        domain_err(t.s.value, f"subject of {prop} is not typed to domain {required}")
    return findings


def _name(term) -> str:
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    return term.lexical


# ---------------------------------------------------------------------------
# Query tests
# ---------------------------------------------------------------------------

def check_expectation(expectation: Expectation, result: sparql.EvalResult) -> tuple[bool, str]:
    rows = len(result)
    if expectation.type is ExpectationType.MIN_ROWS:
        return rows >= (expectation.count or 0), f"{rows} row(s)"
    if expectation.type is ExpectationType.EXACT_ROWS:
        return rows == expectation.count, f"{rows} row(s)"
    if expectation.type is ExpectationType.EMPTY:
        return rows == 0, f"{rows} row(s)"
    target = Iri(expectation.iri) if expectation.iri is not None else None
    for row in result:
        bound = row.get(expectation.var)
        if target is not None and bound == target:
            return True, f"{rows} row(s), binding present"
        if target is None and isinstance(bound, Literal) and bound.lexical == expectation.literal:
            return True, f"{rows} row(s), binding present"
    return False, f"{rows} row(s), binding absent"


def run_query_tests(graph: Graph, suite) -> TestReport:
    report = TestReport()
    started = time.monotonic()
    for case in suite:
        try:
            query = sparql.parse_query(case.query)
            result = sparql.evaluate(graph, query)
        except Exception as exc:  # case-level errors are recorded, not raised
            report.outcomes.append(CaseOutcome(case.id, case.cq_id, "error",
                                               case.expectation.describe(), f"error: {exc}"))
            continue
        ok, actual = check_expectation(case.expectation, result)
        report.outcomes.append(CaseOutcome(case.id, case.cq_id,
                                           "pass" if ok else "fail",
                                           case.expectation.describe(), actual))
    report.duration_s = time.monotonic() - started
    return report


def load_suite(text: str) -> list[TestCase]:
    """Read a suite file: a JSON list of test-case objects."""
    import json
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("a suite file must contain a list of test cases")
    return [TestCase.from_dict(tc) for tc in data]


def dump_suite(suite) -> str:
    import json
    return json.dumps([tc.to_dict() for tc in suite], indent=1, ensure_ascii=False) + "\n"


def query_inventory_ok(query_text: str, snapshot: OntologySnapshot) -> bool:
    """True when every IRI the query mentions exists in the snapshot inventory."""
    query = sparql.parse_query(query_text)
    known = snapshot.classes | snapshot.properties | snapshot.individuals
    for pattern in query.patterns:
        for term in (pattern.s, pattern.p, pattern.o):
            if isinstance(term, Iri) and term.value not in known:
                return False
    return True


# ---------------------------------------------------------------------------
# Test-case generation from ICQs
# ---------------------------------------------------------------------------

def generate_test_cases(project, provider, *, model: str = "default") -> list[tuple[Proposal, str]]:
    """One SparqlTest proposal per accepted ICQ; unparseable queries are
    re-prompted once and then marked Rejected("unparseable").

    Returns (proposal, prompt_hash) pairs; the pipeline attaches provenance.
    """
    if not project.icqs:
        raise ValueError("test-case generation needs at least one accepted ICQ")
    inventory = project.inventory_context()
    out: list[tuple[Proposal, str]] = []
    for icq in project.icqs:
        context = dict(inventory)
        context.update(cq_id=icq.id, question=icq.question)
        proposals, phash, completion = complete_and_parse(
            TESTCASE_TRANSLATION, context, provider, model=model)
        proposal = _pick_test_proposal(proposals, icq.id)
        if proposal is not None and _query_parses(proposal):
            out.append((proposal, phash))
            continue
        # one repair pass aimed at the query text itself
        reason = "no SparqlTest for this cq_id" if proposal is None else _parse_error(proposal)
        repair_context = dict(context)
        repair_context["question"] = (
            f"{icq.question}\n(The previous query was rejected: {reason}. "
            "Answer again with one valid SparqlTest.)"
        )
        try:
            proposals, phash, completion = complete_and_parse(
                TESTCASE_TRANSLATION, repair_context, provider, model=model)
            proposal = _pick_test_proposal(proposals, icq.id)
        except Exception:
            proposal = None
        if proposal is not None and _query_parses(proposal):
            out.append((proposal, phash))
        else:
            payload = proposal.payload if proposal is not None else {
                "cq_id": icq.id, "query": completion}
            rejected = Proposal(id=Proposal.create(ProposalKind.SPARQL_TEST, payload).id,
                                kind=ProposalKind.SPARQL_TEST, payload=payload,
                                status=ProposalStatus.REJECTED, reason="unparseable")
            out.append((rejected, phash))
    return out


def _pick_test_proposal(proposals, cq_id: str) -> Proposal | None:
    for p in proposals:
        if p.kind is ProposalKind.SPARQL_TEST and p.payload.get("cq_id") == cq_id:
            return p
    return None


def _query_parses(proposal: Proposal) -> bool:
    try:
        sparql.parse_query(proposal.payload["query"])
        return True
    except Exception:
        return False


def _parse_error(proposal: Proposal) -> str:
    try:
        sparql.parse_query(proposal.payload["query"])
        return ""
    except Exception as exc:
        return str(exc)
