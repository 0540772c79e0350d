"""Seven-stage methodology state machine: owns the Project, drives stages
through the gateway, enforces review gates, merges modelets, and records every
change in an append-only revision log."""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from . import docgen, feedback, sparql, testkit, vocab
from .gateway import (
    CorpusIndex, Proposal, ProposalKind, ProposalStatus, Provenance,
    chain_steps, complete_and_parse, parse_proposals, retrieve, run_chain,
    self_consistency, validate_payload,
)
from .model import extract_snapshot
from .rdf import Graph, Iri, Literal, PrefixMap, Triple, merge, serialize_turtle, parse_turtle
from .templates import (
    ANNOTATION_GENERATION, CQ_GENERATION, FEEDBACK_THEMES, GLOSSARY_EXTRACTION,
    MODELET_DEVELOPMENT, REFINEMENT_SUGGESTIONS, TEMPLATES, THEME_REFINEMENT,
    TESTCASE_TRANSLATION,
)

SCHEMA_VERSION = 1

STRUCTURAL_KINDS = {
    ProposalKind.CLASS_DEF, ProposalKind.OBJECT_PROPERTY_DEF,
    ProposalKind.DATA_PROPERTY_DEF, ProposalKind.RELATION_AXIOM,
    ProposalKind.INSTANCE,
}


class StageOrderViolationError(RuntimeError):
    pass


class UnknownProposalError(KeyError):
    pass


class AlreadyDecidedError(RuntimeError):
    pass


class CompileError(RuntimeError):
    pass


class UnknownModeletError(KeyError):
    pass


class GateFailedError(RuntimeError):
    def __init__(self, report: dict):
        failing = report.get("failed_cases", [])
        cq_ids = sorted({c["cq_id"] for c in failing})
        msg = "merge gate failed"
        if cq_ids:
            msg += ": failing CQ tests " + ", ".join(cq_ids)
        if report.get("model_errors"):
            msg += f"; {len(report['model_errors'])} model error(s)"
        super().__init__(msg)
        self.report = report


class DuplicateProjectNameError(FileExistsError):
    pass


class ProjectIoError(OSError):
    pass


class SchemaVersionMismatchError(RuntimeError):
    pass


class CorruptProjectError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        super().__init__(message)
        self.pos = pos


class Stage(Enum):
    SCENARIO_GLOSSARY = "ScenarioGlossary"
    COMPETENCY_QUESTIONS = "CompetencyQuestions"
    MODELET_DEVELOPMENT = "ModeletDevelopment"
    TEST_CASE_GENERATION = "TestCaseGeneration"
    MODEL_REFINEMENT = "ModelRefinement"
    DOCUMENT_GENERATION = "DocumentGeneration"
    FEEDBACK = "Feedback"


STAGE_ORDER = list(Stage)


class StageStatus(Enum):
    NOT_STARTED = "NotStarted"
    AWAITING_REVIEW = "AwaitingReview"
    PASSED = "Passed"
    FAILED = "Failed"


class ModeletStatus(Enum):
    DRAFT = "Draft"
    UNDER_TEST = "UnderTest"
    MERGED = "Merged"
    REVERTED = "Reverted"


STAGE_TEMPLATES = {
    Stage.SCENARIO_GLOSSARY: GLOSSARY_EXTRACTION.id,
    Stage.COMPETENCY_QUESTIONS: CQ_GENERATION.id,
    Stage.MODELET_DEVELOPMENT: MODELET_DEVELOPMENT.id,
    Stage.TEST_CASE_GENERATION: TESTCASE_TRANSLATION.id,
    Stage.MODEL_REFINEMENT: REFINEMENT_SUGGESTIONS.id,
    Stage.DOCUMENT_GENERATION: ANNOTATION_GENERATION.id,
    Stage.FEEDBACK: FEEDBACK_THEMES.id,
}

_TEMPLATE_STAGE = {tid: stage for stage, tid in STAGE_TEMPLATES.items()}
# theme-refinement proposals behave like refinement output (compiled into main)
_TEMPLATE_STAGE[THEME_REFINEMENT.id] = Stage.MODEL_REFINEMENT


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class ScenarioDoc:
    id: str
    title: str
    text: str


@dataclass
class GlossaryEntry:
    term: str
    interpretation: str


@dataclass
class Icq:
    id: str
    question: str
    status: str = "Accepted"


@dataclass
class Modelet:
    id: str
    title: str
    graph: Graph
    covered_cq_ids: list[str] = field(default_factory=list)
    status: ModeletStatus = ModeletStatus.DRAFT
    gate_report: dict | None = None


@dataclass
class LogEntry:
    seq: int
    timestamp: str
    actor: str  # human | llm | system
    action: str
    subject: str
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"seq": self.seq, "timestamp": self.timestamp, "actor": self.actor,
                "action": self.action, "subject": self.subject, "detail": self.detail}


@dataclass
class Project:
    name: str
    namespace: str
    prefix_label: str
    language: str = "en"
    scenario_docs: list[ScenarioDoc] = field(default_factory=list)
    glossary: list[GlossaryEntry] = field(default_factory=list)
    icqs: list[Icq] = field(default_factory=list)
    modelets: list[Modelet] = field(default_factory=list)
    graph: Graph = field(default_factory=Graph)
    prefixes: PrefixMap = field(default_factory=PrefixMap)
    proposals: dict[str, Proposal] = field(default_factory=dict)
    test_cases: list[testkit.TestCase] = field(default_factory=list)
    feedback_items: list[feedback.FeedbackItem] = field(default_factory=list)
    revision_log: list[LogEntry] = field(default_factory=list)
    stage_status: dict[Stage, StageStatus] = field(default_factory=dict)
    counters: dict[str, int] = field(default_factory=dict)

    # -- logging ------------------------------------------------------------

    def log(self, actor: str, action: str, subject: str, detail: dict | None = None,
            clock=None) -> LogEntry:
        seq = self.counters.get("log", 0) + 1
        self.counters["log"] = seq
        entry = LogEntry(seq=seq, timestamp=(clock or utc_now)(), actor=actor,
                         action=action, subject=subject, detail=detail or {})
        self.revision_log.append(entry)
        return entry

    def next_id(self, kind: str, fmt: str) -> str:
        value = self.counters.get(kind, 0) + 1
        self.counters[kind] = value
        return fmt.format(value)

    # -- views --------------------------------------------------------------

    def pending(self, stage: Stage | None = None) -> list[Proposal]:
        out = []
        for p in self.proposals.values():
            if p.status is not ProposalStatus.PENDING:
                continue
            if stage is not None and proposal_stage(p) is not stage:
                continue
            out.append(p)
        return out

    def union_graph(self) -> Graph:
        """Main model plus every non-reverted modelet subgraph."""
        out = self.graph
        for m in self.modelets:
            if m.status is not ModeletStatus.REVERTED and len(m.graph):
                out = merge(out, m.graph)
        return out if out is not self.graph else self.graph.copy()

    def scenario_text(self) -> str:
        return "\n\n".join(f"{d.title}: {d.text}" for d in self.scenario_docs)

    def glossary_text(self) -> str:
        if not self.glossary:
            return "(none yet)"
        return "\n".join(f"- {g.term}: {g.interpretation}" for g in self.glossary)

    def inventory_context(self) -> dict:
        snap = extract_snapshot(self.union_graph())

        def locals_of(iris) -> str:
            names = sorted(local_name(i) for i in iris)
            return ", ".join(names) if names else "(none)"

        return {
            "project": self.name,
            "prefix": self.prefix_label,
            "namespace": self.namespace,
            "classes": locals_of(snap.classes),
            "object_properties": locals_of(snap.object_properties),
            "data_properties": locals_of(snap.data_properties),
        }


def local_name(iri: str) -> str:
    for sep in ("#", "/"):
        if sep in iri:
            return iri.rsplit(sep, 1)[1]
    return iri


def proposal_stage(proposal: Proposal) -> Stage | None:
    if proposal.provenance is None:
        return None
    template_id = proposal.provenance.template_id.split("#", 1)[0]
    return _TEMPLATE_STAGE.get(template_id)


# ---------------------------------------------------------------------------
# Project lifecycle
# ---------------------------------------------------------------------------

def init_project(name: str, scenario_texts, *, namespace: str, prefix_label: str = "ns",
                 language: str = "en", clock=None) -> Project:
    """New project with at least one human-supplied scenario document."""
    docs = list(scenario_texts)
    if not docs:
        raise ValueError("a project needs at least one scenario text")
    prefixes = PrefixMap({prefix_label: namespace, **vocab.STANDARD_PREFIXES})
    project = Project(name=name, namespace=namespace, prefix_label=prefix_label,
                      language=language, prefixes=prefixes)
    for stage in STAGE_ORDER:
        project.stage_status[stage] = StageStatus.NOT_STARTED
    for i, doc in enumerate(docs, 1):
        if isinstance(doc, tuple):
            title, text = doc
        else:
            title, text = f"scenario-{i}", doc
        project.scenario_docs.append(ScenarioDoc(id=f"sc-{i:02d}", title=title, text=text))
    project.log("system", "created", name, clock=clock)
    return project


def load_seed_model(project: Project, turtle_text: str, *, clock=None):
    """Load a seed Turtle document into the main model (logged for replay)."""
    graph, prefixes = parse_turtle(turtle_text)
    for label, ns in prefixes.items():
        project.prefixes.bind(label, ns)
    project.graph = merge(project.graph, graph)
    project.log("human", "seed_loaded", "main", {"turtle": turtle_text}, clock=clock)


# ---------------------------------------------------------------------------
# Stage runs
# ---------------------------------------------------------------------------

def run_stage(project: Project, stage: Stage, provider, *, model: str = "default",
              focus: str | None = None, covered_cq_ids=None, k: int = 3,
              clock=None) -> list[Proposal]:
    """Drive one stage through the gateway; new proposals land as Pending."""
    _check_stage_order(project, stage)
    try:
        if stage is Stage.SCENARIO_GLOSSARY:
            added = _run_glossary(project, provider, model)
        elif stage is Stage.COMPETENCY_QUESTIONS:
            added = _run_cqs(project, provider, model)
        elif stage is Stage.MODELET_DEVELOPMENT:
            added = _run_modelet(project, provider, model, focus, covered_cq_ids, clock)
        elif stage is Stage.TEST_CASE_GENERATION:
            added = _run_testgen(project, provider, model, clock)
        elif stage is Stage.MODEL_REFINEMENT:
            added = _run_refinement(project, provider, model, k, clock)
        elif stage is Stage.DOCUMENT_GENERATION:
            added = _run_annotation(project, provider, model)
        else:
            added = _run_feedback(project, provider, model)
    except Exception as exc:
        project.stage_status[stage] = StageStatus.FAILED
        project.log("system", "stage_error", stage.value, {"error": str(exc)}, clock=clock)
        raise

    stored = []
    for proposal, phash, template_id, technique in added:
        prov = Provenance(template_id=template_id, technique=technique,
                          prompt_hash=phash, provider_id=getattr(provider, "id", "unknown"),
                          timestamp=(clock or utc_now)())
        proposal = Proposal(id=proposal.id, kind=proposal.kind, payload=proposal.payload,
                            status=proposal.status, provenance=prov,
                            original_payload=proposal.original_payload, reason=proposal.reason)
        if proposal.id in project.proposals:
            project.log("system", "duplicate_proposal", proposal.id, clock=clock)
            continue
        project.proposals[proposal.id] = proposal
        project.log("llm", "proposal_added", proposal.id,
                    {"kind": proposal.kind.value, "status": proposal.status.value}, clock=clock)
        stored.append(proposal)

    project.stage_status[stage] = StageStatus.AWAITING_REVIEW
    project.log("system", "stage_run", stage.value, {"proposals": len(stored)}, clock=clock)
    _refresh_stage_status(project, clock)
    return stored


def _check_stage_order(project: Project, stage: Stage):
    idx = STAGE_ORDER.index(stage)
    for earlier in STAGE_ORDER[:idx]:
        if project.stage_status[earlier] is not StageStatus.PASSED:
            raise StageOrderViolationError(
                f"cannot run {stage.value}: stage {earlier.value} is "
                f"{project.stage_status[earlier].value}")
    for later in STAGE_ORDER[idx + 1:]:
        if project.stage_status[later] is not StageStatus.NOT_STARTED:
            raise StageOrderViolationError(
                f"cannot re-run {stage.value}: later stage {later.value} already ran; "
                "revert it first")


def _run_glossary(project, provider, model):
    corpus = CorpusIndex.from_documents(
        [(d.id, d.title, d.text) for d in project.scenario_docs])
    hits = retrieve(corpus, "user profile context preference vehicle", k=3)
    retrieved = [(doc_id, corpus.text_of(doc_id)) for doc_id, _ in hits]
    context = {"project": project.name, "retrieved": retrieved}
    proposals, phash, _ = complete_and_parse(GLOSSARY_EXTRACTION, context, provider, model=model)
    return [(p, phash, GLOSSARY_EXTRACTION.id, GLOSSARY_EXTRACTION.technique.value) for p in proposals]


def _run_cqs(project, provider, model):
    context = {"project": project.name, "scenario": project.scenario_text(),
               "glossary": project.glossary_text()}
    proposals, phash, _ = complete_and_parse(CQ_GENERATION, context, provider, model=model)
    return [(p, phash, CQ_GENERATION.id, CQ_GENERATION.technique.value) for p in proposals]


def _run_modelet(project, provider, model, focus, covered_cq_ids, clock):
    ordinal = project.counters.get("modelet", 0) + 1
    focus = focus or f"modelet {ordinal}"
    context = {"project": project.name, "scenario": project.scenario_text(),
               "glossary": project.glossary_text(), "focus": focus}
    steps = chain_steps(MODELET_DEVELOPMENT)
    responses, hashes = run_chain(steps, context, provider, model=model)
    proposals = parse_proposals(responses[-1].completions[0], MODELET_DEVELOPMENT.expected_kinds)

    modelet_id = project.next_id("modelet", "modelet-{}")
    project.modelets.append(Modelet(id=modelet_id, title=focus, graph=Graph(),
                                    covered_cq_ids=list(covered_cq_ids or [])))
    project.log("system", "modelet_created", modelet_id, {"focus": focus}, clock=clock)
    step_id = f"{MODELET_DEVELOPMENT.id}#step{len(steps)}"
    return [(p, hashes[-1], step_id, MODELET_DEVELOPMENT.technique.value) for p in proposals]


def _run_testgen(project, provider, model, clock):
    pairs = testkit.generate_test_cases(project, provider, model=model)
    out = []
    for proposal, phash in pairs:
        out.append((proposal, phash, TESTCASE_TRANSLATION.id, TESTCASE_TRANSLATION.technique.value))
    return out


def _run_refinement(project, provider, model, k, clock):
    context = dict(project.inventory_context())
    vote = self_consistency(REFINEMENT_SUGGESTIONS, context, k, provider, model=model)
    for minority in vote.minority:
        project.log("llm", "minority_proposal", minority.id,
                    {"kind": minority.kind.value, "name": minority.display_name(),
                     "votes": vote.tally[minority.vote_key()]}, clock=clock)
    tid = REFINEMENT_SUGGESTIONS.id
    return [(p, vote.prompt_hash, tid, REFINEMENT_SUGGESTIONS.technique.value) for p in vote.winners]


def _run_annotation(project, provider, model):
    pairs = docgen.annotate_entities(project, provider, model=model)
    return [(p, phash, ANNOTATION_GENERATION.id, ANNOTATION_GENERATION.technique.value)
            for p, phash in pairs]


def _run_feedback(project, provider, model):
    pairs = feedback.summarize_feedback(project, provider, model=model)
    return [(p, phash, FEEDBACK_THEMES.id, FEEDBACK_THEMES.technique.value) for p, phash in pairs]


# ---------------------------------------------------------------------------
# Decisions and compilation
# ---------------------------------------------------------------------------

_CAMEL_SPLIT = re.compile(r"[\s_\-]+")


def camel_case(name: str, kind: str) -> str:
    """Deterministic IRI local name: classes/instances UpperCamel, properties lowerCamel."""
    words = [w for w in _CAMEL_SPLIT.split(name.strip()) if w]
    if not words:
        raise CompileError(f"cannot derive an IRI from name {name!r}")
    if len(words) == 1:
        word = words[0]
        if kind == "property":
            return word
        return word[0].upper() + word[1:]
    out = "".join(w[0].upper() + w[1:] for w in words)
    if kind == "property":
        out = out[0].lower() + out[1:]
    return out


def entity_iri(project: Project, name: str, kind: str) -> str:
    if "://" in name:
        return name
    return project.namespace + camel_case(name, kind)


_XSD_SHORTHAND = {"string": vocab.XSD_STRING, "integer": vocab.XSD_INTEGER,
                  "decimal": vocab.XSD_DECIMAL, "boolean": vocab.XSD_BOOLEAN}

_RELATIONS = {
    "subClassOf": (vocab.RDFS_SUBCLASSOF, "class", "class"),
    "subPropertyOf": (vocab.RDFS_SUBPROPERTYOF, "property", "property"),
    "domain": (vocab.RDFS_DOMAIN, "property", "class"),
    "range": (vocab.RDFS_RANGE, "property", "class"),
}


def compile_proposal(project: Project, kind: ProposalKind, payload: dict) -> list[Triple]:
    """Deterministic triple compilation; pure in (namespace, payload)."""
    ns = project.namespace
    if kind is ProposalKind.CLASS_DEF:
        iri = Iri(entity_iri(project, payload["name"], "class"))
        triples = [Triple(iri, Iri(vocab.RDF_TYPE), Iri(vocab.OWL_CLASS))]
        if payload.get("parent"):
            triples.append(Triple(iri, Iri(vocab.RDFS_SUBCLASSOF),
                                  Iri(entity_iri(project, payload["parent"], "class"))))
        return triples
    if kind in (ProposalKind.OBJECT_PROPERTY_DEF, ProposalKind.DATA_PROPERTY_DEF):
        iri = Iri(entity_iri(project, payload["name"], "property"))
        is_object = kind is ProposalKind.OBJECT_PROPERTY_DEF
        decl = vocab.OWL_OBJECT_PROPERTY if is_object else vocab.OWL_DATATYPE_PROPERTY
        triples = [Triple(iri, Iri(vocab.RDF_TYPE), Iri(decl))]
        if payload.get("domain"):
            triples.append(Triple(iri, Iri(vocab.RDFS_DOMAIN),
                                  Iri(entity_iri(project, payload["domain"], "class"))))
        if payload.get("range"):
            rng = payload["range"]
            if is_object:
                target = entity_iri(project, rng, "class")
            else:
                target = _XSD_SHORTHAND.get(rng) or (
                    vocab.XSD_NS + rng[4:] if rng.startswith("xsd:") else rng if "://" in rng
                    else None)
                if target is None:
                    raise CompileError(f"unknown datatype range {rng!r}")
            triples.append(Triple(iri, Iri(vocab.RDFS_RANGE), Iri(target)))
        return triples
    if kind is ProposalKind.RELATION_AXIOM:
        relation = payload["relation"]
        if relation not in _RELATIONS:
            raise CompileError(f"unsupported relation {relation!r}")
        pred, subj_kind, obj_kind = _RELATIONS[relation]
        return [Triple(Iri(entity_iri(project, payload["subject"], subj_kind)),
                       Iri(pred),
                       Iri(entity_iri(project, payload["object"], obj_kind)))]
    if kind is ProposalKind.INSTANCE:
        iri = Iri(entity_iri(project, payload["name"], "class"))
        triples = [Triple(iri, Iri(vocab.RDF_TYPE),
                          Iri(entity_iri(project, payload["class"], "class")))]
        for entry in payload.get("properties", []):
            pred = Iri(entity_iri(project, entry["property"], "property"))
            triples.append(Triple(iri, pred, _value_term(project, entry)))
        return triples
    if kind is ProposalKind.ANNOTATION:
        entity = payload["entity"]
        iri = Iri(entity if "://" in entity else ns + entity)
        return [
            Triple(iri, Iri(vocab.RDFS_LABEL), Literal(payload["label"], lang=project.language)),
            Triple(iri, Iri(vocab.RDFS_COMMENT), Literal(payload["comment"], lang=project.language)),
        ]
    raise CompileError(f"proposals of kind {kind.value} do not compile to triples")


def _value_term(project: Project, entry: dict):
    value = entry["value"]
    vtype = entry.get("value_type")
    if vtype in ("iri", "entity"):
        return Iri(entity_iri(project, str(value), "class"))
    if vtype == "integer":
        return Literal(str(value), vocab.XSD_INTEGER)
    if vtype == "decimal":
        return Literal(str(value), vocab.XSD_DECIMAL)
    if vtype == "boolean":
        return Literal("true" if value in (True, "true") else "false", vocab.XSD_BOOLEAN)
    if vtype in (None, "string"):
        if isinstance(value, bool):
            return Literal("true" if value else "false", vocab.XSD_BOOLEAN)
        if isinstance(value, int):
            return Literal(str(value), vocab.XSD_INTEGER)
        if isinstance(value, float):
            return Literal(repr(value), vocab.XSD_DECIMAL)
        return Literal(str(value))
    raise CompileError(f"unknown value_type {vtype!r}")


def _declared_iris(project: Project) -> set[str]:
    out = set()
    for g in [project.graph] + [m.graph for m in project.modelets
                                if m.status is not ModeletStatus.REVERTED]:
        for t in g.match(p=Iri(vocab.RDF_TYPE)):
            if isinstance(t.s, Iri):
                out.add(t.s.value)
    return out


def apply_decisions(project: Project, decisions, *, clock=None) -> Project:
    """Apply a batch of review decisions; the whole batch is validated first."""
    seen_ids = set()
    for d in decisions:
        pid = d.get("proposal")
        verdict = d.get("verdict")
        if pid not in project.proposals:
            raise UnknownProposalError(pid)
        if project.proposals[pid].status is not ProposalStatus.PENDING or pid in seen_ids:
            raise AlreadyDecidedError(pid)
        if verdict not in ("accept", "reject", "edit"):
            raise ValueError(f"unknown verdict {verdict!r} for proposal {pid}")
        if verdict == "edit":
            if "payload" not in d:
                raise ValueError(f"edit decision for {pid} needs a payload")
            validate_payload(project.proposals[pid].kind, d["payload"])
        seen_ids.add(pid)

    for d in decisions:
        pid = d["proposal"]
        verdict = d["verdict"]
        proposal = project.proposals[pid]
        reason = d.get("reason")
        if verdict == "reject":
            updated = Proposal(id=pid, kind=proposal.kind, payload=proposal.payload,
                               status=ProposalStatus.REJECTED, provenance=proposal.provenance,
                               reason=reason)
            project.proposals[pid] = updated
            project.log("human", "decision_reject", pid, {"reason": reason or ""}, clock=clock)
            continue
        if verdict == "edit":
            payload = d["payload"]
            updated = Proposal(id=pid, kind=proposal.kind, payload=payload,
                               status=ProposalStatus.EDITED, provenance=proposal.provenance,
                               original_payload=proposal.payload, reason=reason)
        else:
            payload = proposal.payload
            updated = Proposal(id=pid, kind=proposal.kind, payload=payload,
                               status=ProposalStatus.ACCEPTED, provenance=proposal.provenance,
                               reason=reason)
        project.proposals[pid] = updated
        project.log("human", f"decision_{verdict}", pid, {}, clock=clock)
        _apply_accepted(project, updated, clock)

    _refresh_stage_status(project, clock)
    return project


def _apply_accepted(project: Project, proposal: Proposal, clock):
    kind = proposal.kind
    payload = proposal.payload
    if kind is ProposalKind.GLOSSARY_TERM:
        project.glossary.append(GlossaryEntry(term=payload["term"],
                                              interpretation=payload["interpretation"]))
        project.log("system", "glossary_added", payload["term"], clock=clock)
        return
    if kind is ProposalKind.COMPETENCY_QUESTION:
        icq_id = project.next_id("cq", "CQ{:02d}")
        project.icqs.append(Icq(id=icq_id, question=payload["question"]))
        project.log("system", "icq_added", icq_id, {"question": payload["question"]}, clock=clock)
        return
    if kind is ProposalKind.SPARQL_TEST:
        try:
            sparql.parse_query(payload["query"])
        except Exception as exc:
            raise CompileError(f"accepted SparqlTest {proposal.id} does not parse: {exc}")
        case_id = project.next_id("test", "tc-{:03d}")
        expectation = (testkit.Expectation.from_dict(payload["expectation"])
                       if payload.get("expectation") else testkit.DEFAULT_EXPECTATION)
        project.test_cases.append(testkit.TestCase(
            id=case_id, cq_id=payload["cq_id"], query=payload["query"],
            expectation=expectation, description=f"generated for {payload['cq_id']}"))
        project.log("system", "test_registered", case_id, {"cq_id": payload["cq_id"]}, clock=clock)
        return
    if kind is ProposalKind.REVISION:
        project.log("system", "theme_accepted", proposal.id, {"theme": payload["theme"]}, clock=clock)
        return

    triples = compile_proposal(project, kind, payload)
    # collision rule covers class/property IRIs; an Instance proposal for an
    # existing individual extends it (set semantics deduplicate the typing)
    if kind in (ProposalKind.CLASS_DEF, ProposalKind.OBJECT_PROPERTY_DEF,
                ProposalKind.DATA_PROPERTY_DEF):
        new_iri = triples[0].s.value
        if new_iri in _declared_iris(project):
            raise CompileError(f"IRI collision: {new_iri} is already declared")
    target = "main"
    if proposal_stage(proposal) is Stage.MODELET_DEVELOPMENT and kind in STRUCTURAL_KINDS:
        drafts = [m for m in project.modelets if m.status is ModeletStatus.DRAFT]
        if not drafts:
            raise CompileError("no draft modelet to receive the accepted proposal")
        modelet = drafts[-1]
        for t in triples:
            modelet.graph.add(t)
        target = f"modelet:{modelet.id}"
    else:
        for t in triples:
            project.graph.add(t)
    project.log("system", "compiled", proposal.id, {"target": target}, clock=clock)


# ---------------------------------------------------------------------------
# Stage gates
# ---------------------------------------------------------------------------

def _gate(project: Project, stage: Stage) -> tuple[bool, str]:
    if stage is Stage.SCENARIO_GLOSSARY:
        return (bool(project.glossary), "needs at least one accepted glossary term")
    if stage is Stage.COMPETENCY_QUESTIONS:
        return (bool(project.icqs), "needs at least one accepted competency question")
    if stage is Stage.MODELET_DEVELOPMENT:
        ok = any(m.status is not ModeletStatus.REVERTED and len(m.graph) for m in project.modelets)
        return (ok, "needs at least one modelet with content")
    if stage is Stage.TEST_CASE_GENERATION:
        covered = {tc.cq_id for tc in project.test_cases}
        missing = [icq.id for icq in project.icqs if icq.id not in covered]
        return (not missing, "ICQs without a registered test: " + ", ".join(missing))
    if stage is Stage.DOCUMENT_GENERATION:
        snap = extract_snapshot(project.graph)
        missing = [e for e in sorted(snap.classes | snap.properties)
                   if not (snap.label(e) and snap.comment(e))]
        return (not missing, f"{len(missing)} entities lack label/comment")
    return (True, "")


def _refresh_stage_status(project: Project, clock=None):
    for stage in STAGE_ORDER:
        if project.stage_status[stage] is not StageStatus.AWAITING_REVIEW:
            continue
        if project.pending(stage):
            continue
        ok, _why = _gate(project, stage)
        if ok:
            project.stage_status[stage] = StageStatus.PASSED
            project.log("system", "stage_passed", stage.value, clock=clock)
            if stage is Stage.TEST_CASE_GENERATION:
                for m in project.modelets:
                    if m.status is ModeletStatus.DRAFT:
                        m.status = ModeletStatus.UNDER_TEST
                        project.log("system", "modelet_under_test", m.id, clock=clock)


def revert_stage(project: Project, stage: Stage, *, clock=None):
    """Explicit backward transition; downstream stage statuses reset to NotStarted."""
    idx = STAGE_ORDER.index(stage)
    for s in STAGE_ORDER[idx:]:
        project.stage_status[s] = StageStatus.NOT_STARTED
    project.log("human", "stage_reverted", stage.value, clock=clock)


# ---------------------------------------------------------------------------
# Modelet merge
# ---------------------------------------------------------------------------

def merge_modelet(project: Project, modelet_id: str, *, clock=None) -> Project:
    """Gate (model tests + covered CQ query tests on the union) then merge."""
    modelet = next((m for m in project.modelets
                    if m.id == modelet_id and m.status is ModeletStatus.UNDER_TEST), None)
    if modelet is None:
        raise UnknownModeletError(f"no modelet {modelet_id!r} in UnderTest state")
    union = merge(project.graph, modelet.graph)
    snapshot = extract_snapshot(union)
    model_findings = testkit.run_model_tests(union, snapshot)
    model_errors = [f for f in model_findings if f.severity is testkit.Severity.ERROR]
    cases = [tc for tc in project.test_cases if tc.cq_id in modelet.covered_cq_ids]
    query_report = testkit.run_query_tests(union, cases)
    failed_cases = [o.to_dict() for o in query_report.outcomes if o.status != "pass"]
    if model_errors or failed_cases:
        report = {
            "modelet": modelet.id,
            "model_errors": [f.to_dict() for f in model_errors],
            "failed_cases": failed_cases,
        }
        modelet.gate_report = report
        project.log("system", "merge_gate_failed", modelet.id, report, clock=clock)
        raise GateFailedError(report)
    project.graph = union
    modelet.status = ModeletStatus.MERGED
    modelet.gate_report = None
    project.log("system", "modelet_merged", modelet.id, clock=clock)
    return project


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------

def replay_revision_log(project: Project) -> Graph:
    """Rebuild the main model graph from the log alone (plus stored payloads)."""
    main = Graph()
    modelet_graphs: dict[str, Graph] = {}
    for entry in project.revision_log:
        if entry.action == "seed_loaded":
            seeded, _ = parse_turtle(entry.detail["turtle"])
            main = merge(main, seeded)
        elif entry.action == "compiled":
            proposal = project.proposals[entry.subject]
            triples = compile_proposal(project, proposal.kind, proposal.payload)
            target = entry.detail["target"]
            if target == "main":
                for t in triples:
                    main.add(t)
            else:
                graph = modelet_graphs.setdefault(target.split(":", 1)[1], Graph())
                for t in triples:
                    graph.add(t)
        elif entry.action == "modelet_merged":
            main = merge(main, modelet_graphs.get(entry.subject, Graph()))
    return main


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def project_to_dict(project: Project) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": project.name,
        "namespace": project.namespace,
        "prefix_label": project.prefix_label,
        "language": project.language,
        "scenario_docs": [{"id": d.id, "title": d.title, "text": d.text}
                          for d in project.scenario_docs],
        "glossary": [{"term": g.term, "interpretation": g.interpretation}
                     for g in project.glossary],
        "icqs": [{"id": q.id, "question": q.question, "status": q.status}
                 for q in project.icqs],
        "modelets": [{
            "id": m.id, "title": m.title,
            "turtle": serialize_turtle(m.graph, project.prefixes),
            "covered_cq_ids": m.covered_cq_ids,
            "status": m.status.value,
            "gate_report": m.gate_report,
        } for m in project.modelets],
        "main_model": serialize_turtle(project.graph, project.prefixes),
        "prefixes": [[label, ns] for label, ns in project.prefixes.items()],
        "proposals": [p.to_dict() for p in project.proposals.values()],
        "test_cases": [tc.to_dict() for tc in project.test_cases],
        "feedback_items": [f.to_dict() for f in project.feedback_items],
        "revision_log": [e.to_dict() for e in project.revision_log],
        "stage_status": {s.value: project.stage_status[s].value for s in STAGE_ORDER},
        "counters": project.counters,
    }


def project_from_dict(data: dict) -> Project:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatchError(
            f"project schema version {version!r}; this build reads version {SCHEMA_VERSION}")
    prefixes = PrefixMap(dict(data["prefixes"]))
    graph, _ = parse_turtle(data["main_model"])
    project = Project(
        name=data["name"], namespace=data["namespace"], prefix_label=data["prefix_label"],
        language=data.get("language", "en"), graph=graph, prefixes=prefixes,
    )
    project.scenario_docs = [ScenarioDoc(**d) for d in data["scenario_docs"]]
    project.glossary = [GlossaryEntry(**g) for g in data["glossary"]]
    project.icqs = [Icq(**q) for q in data["icqs"]]
    for m in data["modelets"]:
        mgraph, _ = parse_turtle(m["turtle"])
        project.modelets.append(Modelet(id=m["id"], title=m["title"], graph=mgraph,
                                        covered_cq_ids=list(m["covered_cq_ids"]),
                                        status=ModeletStatus(m["status"]),
                                        gate_report=m.get("gate_report")))
    project.proposals = {p["id"]: Proposal.from_dict(p) for p in data["proposals"]}
    project.test_cases = [testkit.TestCase.from_dict(tc) for tc in data["test_cases"]]
    project.feedback_items = [feedback.FeedbackItem.from_dict(f) for f in data["feedback_items"]]
    project.revision_log = [LogEntry(seq=e["seq"], timestamp=e["timestamp"], actor=e["actor"],
                                     action=e["action"], subject=e["subject"],
                                     detail=e.get("detail", {}))
                            for e in data["revision_log"]]
    project.stage_status = {Stage(k): StageStatus(v) for k, v in data["stage_status"].items()}
    project.counters = dict(data["counters"])
    return project


def save_project(project: Project, path: str):
    """Crash-safe persistence: write a temp file, then atomically replace."""
    data = json.dumps(project_to_dict(project), indent=1, ensure_ascii=False, sort_keys=True)
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except OSError as exc:
        raise ProjectIoError(f"could not save project to {path}: {exc}") from exc


def load_project(path: str) -> Project:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProjectIoError(f"could not read project file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptProjectError(f"corrupt project file at position {exc.pos}: {exc.msg}",
                                  pos=exc.pos) from exc
    if not isinstance(data, dict):
        raise CorruptProjectError("corrupt project file: top level is not an object")
    return project_from_dict(data)


def create_project_file(project: Project, path: str):
    if os.path.exists(path):
        raise DuplicateProjectNameError(f"a project file already exists at {path}")
    save_project(project, path)
