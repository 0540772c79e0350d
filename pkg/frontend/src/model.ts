// Pure view-model builders: API payloads in, render-ready structures out.
// Nothing here touches the DOM or the network, so vitest covers it directly.

import type {
  ApiError, CaseOutcome, Decision, GateReport, MetricsPayload, ProjectSummary,
  Proposal, TestsPayload,
} from "./api.js";
import type { TurtleTriple } from "./turtle.js";

const RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const OWL_CLASS = "http://www.w3.org/2002/07/owl#Class";
const RDFS_SUBCLASS = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
const RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label";

// ---------------------------------------------------------------------------
// Review queue
// ---------------------------------------------------------------------------

export interface QueueRow {
  id: string;
  kind: string;
  name: string;
  status: Proposal["status"];
  summary: string;
  payload: Record<string, unknown>;
}

export interface QueueFilter {
  kind?: string;
  status?: string;
}

const NAME_FIELDS: Record<string, string> = {
  GlossaryTerm: "term",
  CompetencyQuestion: "question",
  ClassDef: "name",
  ObjectPropertyDef: "name",
  DataPropertyDef: "name",
  Instance: "name",
  Annotation: "entity",
  SparqlTest: "cq_id",
  Revision: "theme",
};

export function proposalName(proposal: Proposal): string {
  const field = NAME_FIELDS[proposal.kind];
  if (field) return String(proposal.payload[field] ?? "");
  const p = proposal.payload;
  return `${p.subject ?? ""} ${p.relation ?? ""} ${p.object ?? ""}`.trim();
}

export function buildReviewQueue(proposals: Proposal[], filter: QueueFilter = {}): QueueRow[] {
  return proposals
    .filter((p) => !filter.kind || p.kind === filter.kind)
    .filter((p) => !filter.status || p.status === filter.status)
    .map((p) => ({
      id: p.id,
      kind: p.kind,
      name: proposalName(p),
      status: p.status,
      summary: String(
        p.payload.definition ?? p.payload.interpretation ?? p.payload.comment ??
        p.payload.action ?? p.payload.query ?? "",
      ),
      payload: p.payload,
    }));
}

// Decision drafts: local state only; the server stays the single source of
// truth and drafts survive failed submissions untouched.

export interface DecisionDraft {
  verdict: "accept" | "reject" | "edit";
  payload?: Record<string, unknown>;
  reason?: string;
}

export type DraftMap = Map<string, DecisionDraft>;

export function setDraft(
  drafts: DraftMap, id: string, verdict: DecisionDraft["verdict"],
  payload?: Record<string, unknown>, reason?: string,
): DraftMap {
  const next = new Map(drafts);
  if (verdict === "edit" && payload === undefined) {
    throw new Error("an edit draft needs a payload");
  }
  next.set(id, { verdict, payload: verdict === "edit" ? payload : undefined, reason });
  return next;
}

export function clearDraft(drafts: DraftMap, id: string): DraftMap {
  const next = new Map(drafts);
  next.delete(id);
  return next;
}

export function draftsToDecisions(drafts: DraftMap): Decision[] {
  return [...drafts.entries()].map(([proposal, draft]) => {
    const decision: Decision = { proposal, verdict: draft.verdict };
    if (draft.payload !== undefined) decision.payload = draft.payload;
    if (draft.reason) decision.reason = draft.reason;
    return decision;
  });
}

// ---------------------------------------------------------------------------
// Stage panel
// ---------------------------------------------------------------------------

export interface StageRow {
  stage: string;
  status: string;
  isNext: boolean;
}

export function buildStagePanel(summary: ProjectSummary): StageRow[] {
  let nextMarked = false;
  return summary.stage_order.map((stage) => {
    const status = summary.stage_status[stage] ?? "NotStarted";
    const isNext = !nextMarked && status !== "Passed";
    if (isNext) nextMarked = true;
    return { stage, status, isNext };
  });
}

export interface GateFailureView {
  modelet: string;
  failingCqIds: string[];
  modelErrors: string[];
  cases: CaseOutcome[];
}

export function buildGateFailureView(detail: GateReport): GateFailureView {
  const failingCqIds = [...new Set(detail.failed_cases.map((c) => c.cq_id))].sort();
  return {
    modelet: detail.modelet,
    failingCqIds,
    modelErrors: detail.model_errors.map((f) => `${f.check_id}: ${f.subject} ${f.message}`),
    cases: detail.failed_cases,
  };
}

export function describeApiError(error: ApiError): string {
  if (error.kind === "GateFailed" && error.detail) {
    const view = buildGateFailureView(error.detail as GateReport);
    return `Merge gate failed for ${view.modelet}: failing CQ tests ${view.failingCqIds.join(", ")}`;
  }
  return `${error.kind}: ${error.message}`;
}

// ---------------------------------------------------------------------------
// Metrics card
// ---------------------------------------------------------------------------

export interface MetricRow {
  label: string;
  value: string;
}

const BASE_LABELS: [string, string][] = [
  ["class_count", "Class count"],
  ["object_property_count", "Object property count"],
  ["data_property_count", "Data property count"],
  ["properties_count", "Properties count"],
  ["individual_count", "Individual count"],
  ["subclassof_count", "SubClassOf axioms count"],
  ["domain_axiom_count", "Object property domain axioms count"],
  ["range_axiom_count", "Object property range axioms count"],
  ["dl_expressivity", "DL expressivity"],
];

const SCHEMA_LABELS: [string, string][] = [
  ["attribute_richness", "Attribute richness (AR)"],
  ["inheritance_richness", "Inheritance richness (IR)"],
  ["relationship_richness", "Relationship richness (RR)"],
  ["axiom_class_ratio", "Axiom/class ratio"],
  ["class_relation_ratio", "Class/relation ratio"],
];

export function buildMetricsCard(payload: MetricsPayload): MetricRow[] {
  const rows: MetricRow[] = [];
  for (const [key, label] of BASE_LABELS) {
    rows.push({ label, value: String(payload.base[key]) });
  }
  for (const [key, label] of SCHEMA_LABELS) {
    rows.push({ label, value: String(payload.schema[key]) });
  }
  if (payload.schema.degenerate === true) {
    rows.push({ label: "Degenerate", value: "one or more denominators were zero" });
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Test table
// ---------------------------------------------------------------------------

export interface TestTable {
  headline: string;
  rows: { id: string; cqId: string; status: string; expected: string; actual: string }[];
  modelErrors: number;
  dataErrors: number;
}

export function buildTestTable(payload: TestsPayload): TestTable {
  const q = payload.query;
  return {
    headline: `${q.passes}/${q.total} query tests passing` +
      (q.failures ? `, ${q.failures} failing` : "") +
      (q.errors ? `, ${q.errors} erroring` : ""),
    rows: q.outcomes.map((o) => ({
      id: o.case_id, cqId: o.cq_id, status: o.status,
      expected: o.expected, actual: o.actual,
    })),
    modelErrors: payload.model.filter((f) => f.severity === "Error").length,
    dataErrors: payload.data.filter((f) => f.severity === "Error").length,
  };
}

// ---------------------------------------------------------------------------
// Class tree from the exported Turtle
// ---------------------------------------------------------------------------

export interface ClassNode {
  iri: string;
  label: string;
  children: ClassNode[];
}

export function buildClassTree(triples: TurtleTriple[]): ClassNode[] {
  const classes = new Set<string>();
  const labels = new Map<string, string>();
  const parents = new Map<string, string[]>();

  for (const t of triples) {
    if (t.p.value === RDF_TYPE && t.o.kind === "iri" && t.o.value === OWL_CLASS && t.s.kind === "iri") {
      classes.add(t.s.value);
    }
    if (t.p.value === RDFS_SUBCLASS && t.s.kind === "iri" && t.o.kind === "iri") {
      classes.add(t.s.value);
      classes.add(t.o.value);
      parents.set(t.s.value, [...(parents.get(t.s.value) ?? []), t.o.value]);
    }
    if (t.p.value === RDFS_LABEL && t.s.kind === "iri" && t.o.kind === "literal") {
      if (!labels.has(t.s.value)) labels.set(t.s.value, t.o.value);
    }
  }

  const labelOf = (iri: string) => labels.get(iri) ?? iri.split(/[#/]/).pop() ?? iri;
  const childrenOf = new Map<string, string[]>();
  for (const [child, parentIris] of parents) {
    for (const parent of parentIris) {
      childrenOf.set(parent, [...(childrenOf.get(parent) ?? []), child]);
    }
  }
  const roots = [...classes].filter((c) => !parents.has(c));
  const byLabel = (a: string, b: string) => labelOf(a).localeCompare(labelOf(b));

  const build = (iri: string, trail: Set<string>): ClassNode => ({
    iri,
    label: labelOf(iri),
    children: trail.has(iri)
      ? []
      : (childrenOf.get(iri) ?? [])
          .sort(byLabel)
          .map((c) => build(c, new Set([...trail, iri]))),
  });

  return roots.sort(byLabel).map((r) => build(r, new Set()));
}
